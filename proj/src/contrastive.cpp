#include "cpnc/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpnc/errors.hpp"
#include "cpnc/optim.hpp"
#include "cpnc/rng.hpp"

namespace cpnc {

namespace {

// Draws a node with no link to the anchor; -1 when the pool looks exhausted.
int32_t draw_negative(const Graph& g, Rng& rng, int32_t anchor, int max_attempts) {
  auto n = static_cast<uint64_t>(g.num_nodes());
  for (int a = 0; a < max_attempts; ++a) {
    auto u = static_cast<int32_t>(rng.bounded(n));
    if (u == anchor || g.linked(anchor, u)) continue;
    return u;
  }
  return -1;
}

}  // namespace

std::vector<ContrastiveSample> build_samples(const Graph& g, uint64_t seed,
                                             int max_rejection_attempts,
                                             SampleStats* stats) {
  if (g.num_nodes() < 2) throw ArgumentError("build_samples: need at least 2 nodes");
  Rng rng(derive_seed(seed, kStreamSamples));
  std::vector<ContrastiveSample> out;
  SampleStats st;
  for (int64_t i = 0; i < g.num_forward_edges(); ++i) {
    const Edge& e = g.edges()[static_cast<size_t>(i)];
    if (e.synthetic) continue;
    int32_t h = e.t.head, t = e.t.tail;
    if (int32_t neg = draw_negative(g, rng, h, max_rejection_attempts); neg >= 0) {
      out.push_back(ContrastiveSample{h, t, neg, false});
      ++st.emitted;
    } else {
      ++st.skipped;
    }
    if (int32_t neg = draw_negative(g, rng, t, max_rejection_attempts); neg >= 0) {
      out.push_back(ContrastiveSample{t, h, neg, true});
      ++st.emitted;
    } else {
      ++st.skipped;
    }
  }
  if (stats) *stats = st;
  return out;
}

double cosine_sim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw ArgumentError("cosine_sim: length mismatch");
  double nu = norm2(u), nv = norm2(v);
  if (nu <= 0.0 || nv <= 0.0) throw NumericError("cosine_sim: zero-norm input");
  return dot(u, v) / (nu * nv);
}

double mnr_loss(const Matrix& anchors, const Matrix& positives,
                const Matrix& negatives, double temperature, Matrix* d_anchors,
                Matrix* d_positives, Matrix* d_negatives) {
  int64_t m = anchors.rows(), d = anchors.cols();
  if (m < 1) throw ArgumentError("mnr_loss: empty batch");
  if (positives.rows() != m || negatives.rows() != m || positives.cols() != d ||
      negatives.cols() != d) {
    throw ArgumentError("mnr_loss: shape mismatch");
  }
  if (temperature <= 0.0) throw ArgumentError("mnr_loss: temperature must be positive");

  auto norms_of = [&](const Matrix& x) {
    std::vector<double> n(static_cast<size_t>(m));
    for (int64_t i = 0; i < m; ++i) {
      n[static_cast<size_t>(i)] = norm2(x.row(i));
      if (n[static_cast<size_t>(i)] <= 0.0) {
        throw NumericError("mnr_loss: zero-norm embedding");
      }
    }
    return n;
  };
  auto na = norms_of(anchors);
  auto np = norms_of(positives);
  auto nn = norms_of(negatives);

  // column j < m: positive j; column m + j: hard negative j
  auto cand_row = [&](int64_t j) {
    return j < m ? positives.row(j) : negatives.row(j - m);
  };
  auto cand_norm = [&](int64_t j) {
    return j < m ? np[static_cast<size_t>(j)] : nn[static_cast<size_t>(j - m)];
  };

  Matrix cosines(m, 2 * m);
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < 2 * m; ++j) {
      cosines(i, j) =
          dot(anchors.row(i), cand_row(j)) / (na[static_cast<size_t>(i)] * cand_norm(j));
    }
  }

  double loss = 0.0;
  Matrix softmax(m, 2 * m);
  for (int64_t i = 0; i < m; ++i) {
    double mx = cosines(i, 0) / temperature;
    for (int64_t j = 1; j < 2 * m; ++j) mx = std::max(mx, cosines(i, j) / temperature);
    double sum = 0.0;
    for (int64_t j = 0; j < 2 * m; ++j) {
      double e = std::exp(cosines(i, j) / temperature - mx);
      softmax(i, j) = e;
      sum += e;
    }
    for (int64_t j = 0; j < 2 * m; ++j) softmax(i, j) /= sum;
    loss += std::log(sum) + mx - cosines(i, i) / temperature;
  }

  if (d_anchors || d_positives || d_negatives) {
    Matrix da(m, d), dp(m, d), dn(m, d);
    for (int64_t i = 0; i < m; ++i) {
      auto u = anchors.row(i);
      double nu = na[static_cast<size_t>(i)];
      for (int64_t j = 0; j < 2 * m; ++j) {
        double g = (softmax(i, j) - (j == i ? 1.0 : 0.0)) / temperature;
        if (g == 0.0) continue;
        auto v = cand_row(j);
        double nv = cand_norm(j);
        double c = cosines(i, j);
        Matrix& dv_t = j < m ? dp : dn;
        int64_t jj = j < m ? j : j - m;
        for (int64_t k = 0; k < d; ++k) {
          da(i, k) += g * (v[static_cast<size_t>(k)] / (nu * nv) -
                           c * u[static_cast<size_t>(k)] / (nu * nu));
          dv_t(jj, k) += g * (u[static_cast<size_t>(k)] / (nu * nv) -
                              c * v[static_cast<size_t>(k)] / (nv * nv));
        }
      }
    }
    if (d_anchors) *d_anchors = std::move(da);
    if (d_positives) *d_positives = std::move(dp);
    if (d_negatives) *d_negatives = std::move(dn);
  }
  return loss;
}

PretrainResult pretrain(TextEncoder& encoder, std::vector<ContrastiveSample> samples,
                        const Graph& graph, const PretrainConfig& cfg) {
  if (samples.empty()) throw ArgumentError("pretrain: no contrastive samples");
  if (cfg.batch_size < 2) throw ArgumentError("pretrain: batch_size must be >= 2");
  if (cfg.lr_encoder <= 0.0 || cfg.lr_head <= 0.0) {
    throw ArgumentError("pretrain: learning rates must be positive");
  }
  if (cfg.epochs < 0) throw ArgumentError("pretrain: negative epoch count");

  int64_t d = encoder.dim();
  // token lists per node, computed once
  std::vector<std::vector<int32_t>> node_tokens(static_cast<size_t>(graph.num_nodes()));
  for (int32_t i = 0; i < graph.num_nodes(); ++i) {
    node_tokens[static_cast<size_t>(i)] = tokenize(encoder.vocab(), graph.node_text(i));
  }

  Matrix head;
  if (cfg.use_projection_head) {
    head = Matrix(d, d);
    Rng hr(derive_seed(cfg.seed, kStreamHeadInit));
    double scale = std::sqrt(6.0 / static_cast<double>(2 * d));
    for (int64_t i = 0; i < head.size(); ++i) head.data()[i] = hr.uniform(-scale, scale);
  }

  Adam opt;
  opt.add_param(&encoder.table(), cfg.lr_encoder);
  if (cfg.use_projection_head) opt.add_param(&head, cfg.lr_head);

  auto pooled = [&](int32_t node) {
    const auto& toks = node_tokens[static_cast<size_t>(node)];
    std::vector<double> v(static_cast<size_t>(d), 0.0);
    for (int32_t id : toks) {
      auto row = encoder.table().row(id);
      for (int64_t k = 0; k < d; ++k) v[static_cast<size_t>(k)] += row[static_cast<size_t>(k)];
    }
    double inv = 1.0 / static_cast<double>(toks.size());
    for (double& x : v) x *= inv;
    return v;
  };

  Rng shuffle_rng(derive_seed(cfg.seed, kStreamPretrainShuffle));
  PretrainResult result;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.resample_negatives_each_epoch && epoch > 0) {
      Rng rr(derive_seed(cfg.seed, kStreamResample) + static_cast<uint64_t>(epoch));
      SampleStats st;
      for (ContrastiveSample& s : samples) {
        int32_t neg = draw_negative(graph, rr, s.anchor, cfg.max_rejection_attempts);
        if (neg >= 0) {
          s.hard_negative = neg;
          ++st.emitted;
        } else {
          ++st.skipped;
        }
      }
      result.resample_stats = st;
    }

    std::vector<int64_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    int64_t used = 0;
    for (size_t b0 = 0; b0 < order.size(); b0 += static_cast<size_t>(cfg.batch_size)) {
      size_t b1 = std::min(order.size(), b0 + static_cast<size_t>(cfg.batch_size));
      auto m = static_cast<int64_t>(b1 - b0);
      if (m < 2) break;  // drop a short tail that cannot form in-batch negatives

      Matrix A(m, d), P(m, d), N(m, d);
      std::vector<std::vector<double>> ax(static_cast<size_t>(m)), px(static_cast<size_t>(m)),
          nx(static_cast<size_t>(m));
      for (int64_t i = 0; i < m; ++i) {
        const auto& s = samples[static_cast<size_t>(order[b0 + static_cast<size_t>(i)])];
        ax[static_cast<size_t>(i)] = pooled(s.anchor);
        px[static_cast<size_t>(i)] = pooled(s.positive);
        nx[static_cast<size_t>(i)] = pooled(s.hard_negative);
      }
      auto project = [&](const std::vector<double>& x, std::span<double> out_row) {
        if (!cfg.use_projection_head) {
          std::copy(x.begin(), x.end(), out_row.begin());
          return;
        }
        for (int64_t r = 0; r < d; ++r) {
          out_row[static_cast<size_t>(r)] = dot(head.row(r), std::span<const double>(x));
        }
      };
      for (int64_t i = 0; i < m; ++i) {
        project(ax[static_cast<size_t>(i)], A.row(i));
        project(px[static_cast<size_t>(i)], P.row(i));
        project(nx[static_cast<size_t>(i)], N.row(i));
      }

      Matrix dA, dP, dN;
      epoch_loss += mnr_loss(A, P, N, cfg.temperature, &dA, &dP, &dN);
      used += m;

      Matrix g_table(encoder.table().rows(), d);
      Matrix g_head = cfg.use_projection_head ? Matrix(d, d) : Matrix();
      auto backprop = [&](const std::vector<double>& x, std::span<const double> dz,
                          int32_t node) {
        if (!cfg.use_projection_head) {
          encoder_grad_scatter(node_tokens[static_cast<size_t>(node)], dz, g_table);
          return;
        }
        std::vector<double> dx(static_cast<size_t>(d), 0.0);
        for (int64_t r = 0; r < d; ++r) {
          double grow = dz[static_cast<size_t>(r)];
          if (grow == 0.0) continue;
          auto hrow = head.row(r);
          auto gh = g_head.row(r);
          for (int64_t k = 0; k < d; ++k) {
            gh[static_cast<size_t>(k)] += grow * x[static_cast<size_t>(k)];
            dx[static_cast<size_t>(k)] += grow * hrow[static_cast<size_t>(k)];
          }
        }
        encoder_grad_scatter(node_tokens[static_cast<size_t>(node)], dx, g_table);
      };
      for (int64_t i = 0; i < m; ++i) {
        const auto& s = samples[static_cast<size_t>(order[b0 + static_cast<size_t>(i)])];
        backprop(ax[static_cast<size_t>(i)], dA.row(i), s.anchor);
        backprop(px[static_cast<size_t>(i)], dP.row(i), s.positive);
        backprop(nx[static_cast<size_t>(i)], dN.row(i), s.hard_negative);
      }

      if (cfg.use_projection_head) {
        opt.step({&g_table, &g_head});
      } else {
        opt.step({&g_table});
      }
    }
    result.epoch_loss.push_back(used > 0 ? epoch_loss / static_cast<double>(used) : 0.0);
  }
  return result;
}

}  // namespace cpnc
