#include "cpnc/clustering.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "cpnc/errors.hpp"
#include "cpnc/parallel.hpp"
#include "cpnc/rng.hpp"
#include "cpnc/text_encoder.hpp"

namespace cpnc {

namespace {

double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

std::vector<int64_t> ClusterAssignment::size_histogram() const {
  std::vector<int64_t> h(static_cast<size_t>(k), 0);
  for (int32_t c : assignment) ++h[static_cast<size_t>(c)];
  return h;
}

ClusterAssignment kmeans(const Matrix& points, int32_t k, uint64_t seed,
                         int max_iter, double tol) {
  int64_t n = points.rows(), d = points.cols();
  if (k < 1 || k > n) throw ArgumentError("kmeans: K must be in [1, |N|]");
  if (!points.all_finite()) throw ArgumentError("kmeans: non-finite input");

  Rng rng(derive_seed(seed, kStreamKmeans));
  Matrix centroids(k, d);

  // k-means++ seeding
  {
    auto first = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n)));
    std::copy(points.row(first).begin(), points.row(first).end(),
              centroids.row(0).begin());
    std::vector<double> d2(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
      d2[static_cast<size_t>(i)] = sqdist(points.row(i), centroids.row(0));
    }
    for (int32_t c = 1; c < k; ++c) {
      double total = 0.0;
      for (double v : d2) total += v;
      int64_t pick = -1;
      if (total > 0.0) {
        double r = rng.uniform() * total;
        double cum = 0.0;
        for (int64_t i = 0; i < n; ++i) {
          double w = d2[static_cast<size_t>(i)];
          if (w <= 0.0) continue;
          cum += w;
          if (cum >= r) {
            pick = i;
            break;
          }
        }
        if (pick < 0) {  // numerical tail: take the last positive-mass point
          for (int64_t i = n - 1; i >= 0; --i) {
            if (d2[static_cast<size_t>(i)] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      }
      if (pick < 0) pick = static_cast<int64_t>(rng.bounded(static_cast<uint64_t>(n)));
      std::copy(points.row(pick).begin(), points.row(pick).end(),
                centroids.row(c).begin());
      for (int64_t i = 0; i < n; ++i) {
        d2[static_cast<size_t>(i)] =
            std::min(d2[static_cast<size_t>(i)], sqdist(points.row(i), centroids.row(c)));
      }
    }
  }

  ClusterAssignment out;
  out.k = k;
  out.assignment.assign(static_cast<size_t>(n), 0);
  std::vector<int32_t> prev_assign;
  double prev_inertia = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment step; ties go to the lowest cluster id
    parallel_for(n, [&](int64_t lo, int64_t hi) {
      for (int64_t i = lo; i < hi; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int32_t best_c = 0;
        for (int32_t c = 0; c < k; ++c) {
          double dist = sqdist(points.row(i), centroids.row(c));
          if (dist < best) {
            best = dist;
            best_c = c;
          }
        }
        out.assignment[static_cast<size_t>(i)] = best_c;
      }
    });

    // update step: centroids become exact member means
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    centroids.fill(0.0);
    for (int64_t i = 0; i < n; ++i) {
      int32_t c = out.assignment[static_cast<size_t>(i)];
      ++counts[static_cast<size_t>(c)];
      auto row = centroids.row(c);
      auto p = points.row(i);
      for (int64_t j = 0; j < d; ++j) row[static_cast<size_t>(j)] += p[static_cast<size_t>(j)];
    }
    for (int32_t c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] == 0) continue;
      double inv = 1.0 / static_cast<double>(counts[static_cast<size_t>(c)]);
      for (double& v : centroids.row(c)) v *= inv;
    }

    // reseed empty clusters to the point farthest from its assigned centroid
    for (int32_t c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) continue;
      int64_t far = -1;
      double far_d = -1.0;
      for (int64_t i = 0; i < n; ++i) {
        int32_t ci = out.assignment[static_cast<size_t>(i)];
        if (counts[static_cast<size_t>(ci)] < 2) continue;  // do not empty a singleton
        double dist = sqdist(points.row(i), centroids.row(ci));
        if (dist > far_d) {
          far_d = dist;
          far = i;
        }
      }
      if (far < 0) continue;
      int32_t old_c = out.assignment[static_cast<size_t>(far)];
      // remove from the old mean, then make the stolen point a singleton
      auto old_row = centroids.row(old_c);
      auto p = points.row(far);
      auto cnt = static_cast<double>(counts[static_cast<size_t>(old_c)]);
      for (int64_t j = 0; j < d; ++j) {
        old_row[static_cast<size_t>(j)] =
            (old_row[static_cast<size_t>(j)] * cnt - p[static_cast<size_t>(j)]) / (cnt - 1.0);
      }
      --counts[static_cast<size_t>(old_c)];
      counts[static_cast<size_t>(c)] = 1;
      std::copy(p.begin(), p.end(), centroids.row(c).begin());
      out.assignment[static_cast<size_t>(far)] = c;
    }

    double inertia = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      inertia += sqdist(points.row(i), centroids.row(out.assignment[static_cast<size_t>(i)]));
    }
    out.inertia_trace.push_back(inertia);
    out.inertia = inertia;
    out.iterations = iter + 1;

    bool stable = (out.assignment == prev_assign);
    bool converged = std::isfinite(prev_inertia) &&
                     (prev_inertia - inertia) < tol * std::max(prev_inertia, 1e-300);
    prev_assign = out.assignment;
    prev_inertia = inertia;
    if (stable || converged) break;
  }
  out.centroids = std::move(centroids);
  return out;
}

std::span<const double> latent_concept(const ClusterAssignment& assign, int32_t node) {
  if (node < 0 || node >= static_cast<int32_t>(assign.assignment.size())) {
    throw ArgumentError("latent_concept: node has no cluster assignment");
  }
  return assign.centroids.row(assign.assignment[static_cast<size_t>(node)]);
}

void save_clusters(const std::filesystem::path& assignments_tsv,
                   const std::filesystem::path& centroids_tsv, const Graph& g,
                   const ClusterAssignment& assign) {
  if (static_cast<int32_t>(assign.assignment.size()) != g.num_nodes()) {
    throw ArgumentError("save_clusters: assignment size != |N|");
  }
  std::ofstream out(assignments_tsv);
  if (!out) throw ConfigError("cannot write " + assignments_tsv.string());
  for (int32_t i = 0; i < g.num_nodes(); ++i) {
    out << g.node_text(i) << '\t' << assign.assignment[static_cast<size_t>(i)] << '\n';
  }
  std::vector<std::string> names;
  names.reserve(static_cast<size_t>(assign.k));
  for (int32_t c = 0; c < assign.k; ++c) names.push_back("cluster_" + std::to_string(c));
  save_embedding_text(centroids_tsv, assign.centroids, names);
}

ClusterAssignment load_clusters(const std::filesystem::path& assignments_tsv,
                                const std::filesystem::path& centroids_tsv,
                                const Graph& g) {
  std::ifstream in(assignments_tsv);
  if (!in) throw ConfigError("cannot open " + assignments_tsv.string());
  ClusterAssignment out;
  out.assignment.assign(static_cast<size_t>(g.num_nodes()), -1);
  std::string line;
  int64_t lineno = 0;
  int32_t max_c = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError("cluster line missing tab", lineno);
    std::string text = line.substr(0, tab);
    int32_t c = -1;
    auto sv = std::string_view(line).substr(tab + 1);
    auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), c);
    if (ec != std::errc() || c < 0) throw ParseError("bad cluster id", lineno);
    auto id = g.node_vocab().find(text);
    if (!id) throw ParseError("unknown node text in cluster file: " + text, lineno);
    out.assignment[static_cast<size_t>(*id)] = c;
    max_c = std::max(max_c, c);
  }
  for (size_t i = 0; i < out.assignment.size(); ++i) {
    if (out.assignment[i] < 0) {
      throw CoverageError("cluster file misses node: " + g.node_text(static_cast<int32_t>(i)));
    }
  }

  std::ifstream cin_s(centroids_tsv);
  if (!cin_s) throw ConfigError("cannot open " + centroids_tsv.string());
  std::getline(cin_s, line);
  int64_t k = 0, dim = 0;
  {
    size_t sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError("bad centroid header", 1);
    k = std::strtoll(line.c_str(), nullptr, 10);
    dim = std::strtoll(line.c_str() + sp + 1, nullptr, 10);
  }
  if (k <= max_c) throw ParseError("centroid count below max cluster id", 1);
  out.k = static_cast<int32_t>(k);
  out.centroids = Matrix(k, dim);
  int64_t lineno2 = 1;
  while (std::getline(cin_s, line)) {
    ++lineno2;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.compare(0, 8, "cluster_") != 0) {
      throw ParseError("bad centroid line", lineno2);
    }
    int64_t c = std::strtoll(line.c_str() + 8, nullptr, 10);
    if (c < 0 || c >= k) throw ParseError("centroid id out of range", lineno2);
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    for (int64_t j = 0; j < dim; ++j) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ParseError("bad centroid value", lineno2);
      out.centroids(c, j) = v;
      p = next;
    }
  }
  // inertia is not persisted; recompute on demand against the loaded rows
  return out;
}

}  // namespace cpnc
