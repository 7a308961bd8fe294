#include "cpnc/kg.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "cpnc/errors.hpp"
#include "cpnc/parallel.hpp"
#include "cpnc/rng.hpp"

namespace cpnc {

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

int32_t Vocab::get_or_add(const std::string& text) {
  auto it = index_.find(text);
  if (it != index_.end()) return it->second;
  int32_t id = static_cast<int32_t>(items_.size());
  items_.push_back(text);
  index_.emplace(text, id);
  return id;
}

std::optional<int32_t> Vocab::find(const std::string& text) const {
  auto it = index_.find(text);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string normalize_text(std::string_view raw, bool case_fold) {
  size_t b = 0, e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out(raw.substr(b, e - b));
  if (case_fold) {
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

struct TupleHash {
  size_t operator()(const std::array<int32_t, 3>& t) const {
    uint64_t h = 1469598103934665603ull;
    for (int32_t v : t) {
      h ^= static_cast<uint64_t>(static_cast<uint32_t>(v));
      h *= 1099511628211ull;
    }
    return static_cast<size_t>(h);
  }
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  size_t start = 0;
  for (size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      cols.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return cols;
}

}  // namespace

std::vector<Tuple> parse_tuples(std::istream& in, Vocab& nodes, Vocab& relations,
                                const ParseOptions& opt) {
  std::vector<Tuple> out;
  std::unordered_set<std::array<int32_t, 3>, TupleHash> seen;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto cols = split_tabs(line);
    if (cols.size() != 3 && cols.size() != 4) {
      throw ParseError("expected 3 or 4 tab-separated columns, got " +
                           std::to_string(cols.size()),
                       lineno);
    }
    std::string rel = normalize_text(cols[0], false);
    std::string head = normalize_text(cols[1], opt.case_fold);
    std::string tail = normalize_text(cols[2], opt.case_fold);
    if (rel.empty()) throw ParseError("empty relation name", lineno);
    if (head.empty() || tail.empty()) throw ParseError("empty node text", lineno);
    Tuple t;
    t.rel = relations.get_or_add(rel);
    t.head = nodes.get_or_add(head);
    t.tail = nodes.get_or_add(tail);
    if (seen.insert({t.head, t.rel, t.tail}).second) out.push_back(t);
  }
  return out;
}

void serialize_tuples(std::ostream& out, const Graph& g, Split split) {
  for (int64_t i = 0; i < g.num_forward_edges(); ++i) {
    const Edge& e = g.edges()[static_cast<size_t>(i)];
    if (e.split != split || e.synthetic) continue;
    out << g.relation(e.t.rel).name << '\t' << g.node_text(e.t.head) << '\t'
        << g.node_text(e.t.tail) << '\n';
  }
}

int32_t Graph::inverse_rel(int32_t id) const {
  const Relation& r = rels_[static_cast<size_t>(id)];
  int32_t partner = r.is_inverse ? r.base_id : r.inverse_id;
  if (partner < 0) throw ArgumentError("relation has no inverse partner (graph not augmented)");
  return partner;
}

int64_t Graph::count_edges(Split split, bool include_synthetic) const {
  int64_t n = 0;
  for (const Edge& e : edges_) {
    if (e.split == split && (include_synthetic || !e.synthetic)) ++n;
  }
  return n;
}

void Graph::rebuild_index() {
  linked_.assign(static_cast<size_t>(num_nodes()), {});
  nbrs_.assign(static_cast<size_t>(num_nodes()), {});
  for (const Edge& e : edges_) {
    linked_[static_cast<size_t>(e.t.head)].insert(e.t.tail);
    linked_[static_cast<size_t>(e.t.tail)].insert(e.t.head);
  }
  for (size_t i = 0; i < linked_.size(); ++i) {
    nbrs_[i].assign(linked_[i].begin(), linked_[i].end());
    std::sort(nbrs_[i].begin(), nbrs_[i].end());
  }
}

Graph Graph::augment_inverse() const {
  if (augmented_) return *this;
  Graph g = *this;
  int32_t base = g.n_base_rels_;
  std::unordered_set<std::string> names;
  for (const Relation& r : g.rels_) names.insert(r.name);
  for (int32_t i = 0; i < base; ++i) {
    std::string inv_name = g.rels_[static_cast<size_t>(i)].name + "__inv";
    if (names.count(inv_name)) {
      throw ArgumentError("inverse relation name collides with existing relation: " + inv_name);
    }
    Relation inv;
    inv.id = base + i;
    inv.name = inv_name;
    inv.is_inverse = true;
    inv.base_id = i;
    inv.inverse_id = i;
    g.rels_[static_cast<size_t>(i)].inverse_id = inv.id;
    g.rels_.push_back(std::move(inv));
  }
  std::vector<Edge> mirrored;
  mirrored.reserve(g.edges_.size());
  for (const Edge& e : g.edges_) {
    Edge m = e;
    m.t = Tuple{e.t.tail, e.t.rel + base, e.t.head};
    mirrored.push_back(m);
  }
  g.edges_.insert(g.edges_.end(), mirrored.begin(), mirrored.end());
  g.augmented_ = true;
  g.rebuild_index();
  return g;
}

Graph build_graph(Vocab nodes, Vocab relation_names, std::vector<Edge> edges,
                  bool add_inverse) {
  Graph g;
  g.nodes_ = std::move(nodes);
  g.n_base_rels_ = relation_names.size();
  for (int32_t i = 0; i < g.n_base_rels_; ++i) {
    g.rels_.push_back(Relation{i, relation_names.text(i), false, i, -1});
  }
  for (const Edge& e : edges) {
    if (e.t.head < 0 || e.t.head >= g.num_nodes() || e.t.tail < 0 ||
        e.t.tail >= g.num_nodes() || e.t.rel < 0 || e.t.rel >= g.n_base_rels_) {
      throw ArgumentError("edge references unknown node or relation id");
    }
  }
  g.edges_ = std::move(edges);
  g.n_forward_ = static_cast<int64_t>(g.edges_.size());
  g.rebuild_index();
  return add_inverse ? g.augment_inverse() : g;
}

Graph build_graph(Vocab nodes, Vocab relation_names,
                  const std::vector<Tuple>& tuples, bool add_inverse, Split split) {
  std::vector<Edge> edges;
  edges.reserve(tuples.size());
  for (const Tuple& t : tuples) edges.push_back(Edge{t, split, false});
  return build_graph(std::move(nodes), std::move(relation_names), std::move(edges),
                     add_inverse);
}

Graph Graph::with_forward_edges(std::vector<Edge> forward) const {
  Graph g;
  g.nodes_ = nodes_;
  g.rels_ = rels_;
  g.n_base_rels_ = n_base_rels_;
  g.augmented_ = augmented_;
  g.n_forward_ = static_cast<int64_t>(forward.size());
  g.edges_ = std::move(forward);
  if (augmented_) {
    std::vector<Edge> mirrored;
    mirrored.reserve(g.edges_.size());
    for (const Edge& e : g.edges_) {
      Edge m = e;
      m.t = Tuple{e.t.tail, inverse_rel(e.t.rel), e.t.head};
      mirrored.push_back(m);
    }
    g.edges_.insert(g.edges_.end(), mirrored.begin(), mirrored.end());
  }
  g.rebuild_index();
  return g;
}

Graph Graph::train_subgraph() const {
  std::vector<Edge> fwd;
  for (int64_t i = 0; i < n_forward_; ++i) {
    const Edge& e = edges_[static_cast<size_t>(i)];
    if (e.split == Split::train) fwd.push_back(e);
  }
  return with_forward_edges(std::move(fwd));
}

Graph sparsify(const Graph& g, double fraction, uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ArgumentError("sparsify: fraction must be in [0, 1]");
  }
  std::vector<int64_t> train_idx;
  for (int64_t i = 0; i < g.n_forward_; ++i) {
    const Edge& e = g.edges_[static_cast<size_t>(i)];
    if (e.split == Split::train && !e.synthetic) train_idx.push_back(i);
  }
  auto m = static_cast<int64_t>(fraction * static_cast<double>(train_idx.size()));
  Rng rng(derive_seed(seed, kStreamSparsify));
  rng.shuffle(train_idx);
  std::unordered_set<int64_t> removed(train_idx.begin(), train_idx.begin() + m);

  std::vector<Edge> kept;
  kept.reserve(static_cast<size_t>(g.n_forward_ - m));
  for (int64_t i = 0; i < g.n_forward_; ++i) {
    if (!removed.count(i)) kept.push_back(g.edges_[static_cast<size_t>(i)]);
  }
  return g.with_forward_edges(std::move(kept));
}

Graph densify_by_similarity(const Graph& g, const Matrix& e_sem, int32_t top_k,
                            double min_sim) {
  int32_t n = g.num_nodes();
  if (e_sem.rows() != n) throw ArgumentError("densify: embedding row count != |N|");
  if (top_k >= n) throw ArgumentError("densify: top_k must be < |N|");
  if (top_k < 0) throw ArgumentError("densify: top_k must be >= 0");
  if (top_k == 0) return g;

  std::vector<double> norms(static_cast<size_t>(n));
  for (int32_t i = 0; i < n; ++i) norms[static_cast<size_t>(i)] = norm2(e_sem.row(i));

  std::vector<std::vector<int32_t>> picks(static_cast<size_t>(n));
  parallel_for(n, [&](int64_t lo, int64_t hi) {
    std::vector<std::pair<double, int32_t>> sims;
    for (int64_t i = lo; i < hi; ++i) {
      sims.clear();
      if (norms[static_cast<size_t>(i)] <= 0.0) continue;
      for (int32_t j = 0; j < n; ++j) {
        if (j == i || norms[static_cast<size_t>(j)] <= 0.0) continue;
        double s = dot(e_sem.row(i), e_sem.row(j)) /
                   (norms[static_cast<size_t>(i)] * norms[static_cast<size_t>(j)]);
        if (s >= min_sim) sims.emplace_back(s, j);
      }
      // highest similarity first, ties to the lower id
      std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      if (static_cast<int32_t>(sims.size()) > top_k) sims.resize(static_cast<size_t>(top_k));
      for (const auto& [s, j] : sims) picks[static_cast<size_t>(i)].push_back(j);
    }
  });

  std::set<std::pair<int32_t, int32_t>> pairs;
  for (int32_t i = 0; i < n; ++i) {
    for (int32_t j : picks[static_cast<size_t>(i)]) {
      pairs.emplace(std::min(i, j), std::max(i, j));
    }
  }
  if (pairs.empty()) return g;

  Graph out = g;
  for (const Relation& r : out.rels_) {
    if (r.name == "SIM" || r.name == "SIM__inv") {
      throw ArgumentError("densify: relation name SIM already in use");
    }
  }
  // Insert the SIM relation (and its inverse when augmented) at the end;
  // partner links are explicit, so id layout stays valid.
  int32_t sim_id = out.num_relations();
  out.rels_.push_back(Relation{sim_id, "SIM", false, sim_id, -1});
  if (out.augmented_) {
    int32_t inv_id = sim_id + 1;
    out.rels_.push_back(Relation{inv_id, "SIM__inv", true, sim_id, sim_id});
    out.rels_[static_cast<size_t>(sim_id)].inverse_id = inv_id;
  }

  std::vector<Edge> fwd(out.edges_.begin(), out.edges_.begin() + out.n_forward_);
  for (const auto& [a, b] : pairs) {
    fwd.push_back(Edge{Tuple{a, sim_id, b}, Split::train, true});
  }
  return out.with_forward_edges(std::move(fwd));
}

void Graph::save_snapshot(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (Split s : {Split::train, Split::valid, Split::test}) {
    std::ofstream out(dir / (std::string(split_name(s)) + ".tsv"));
    if (!out) throw ConfigError("cannot write snapshot in " + dir.string());
    serialize_tuples(out, *this, s);
  }
  nlohmann::json side;
  side["nodes"] = num_nodes();
  side["base_relations"] = n_base_rels_;
  side["relations_total"] = num_relations();
  side["augmented"] = augmented_;
  nlohmann::json counts;
  for (Split s : {Split::train, Split::valid, Split::test}) {
    counts[split_name(s)] = count_edges(s, /*include_synthetic=*/false) / (augmented_ ? 2 : 1);
  }
  side["forward_edges"] = counts;
  side["synthetic_edges"] = [&] {
    int64_t c = 0;
    for (const Edge& e : edges_) c += e.synthetic ? 1 : 0;
    return c;
  }();
  std::ofstream js(dir / "graph.json");
  js << side.dump(2) << '\n';
}

Graph Graph::load_snapshot(const std::filesystem::path& dir) {
  std::ifstream js(dir / "graph.json");
  if (!js) throw ConfigError("missing graph.json in " + dir.string());
  nlohmann::json side = nlohmann::json::parse(js);
  bool augmented = side.value("augmented", true);

  Vocab nodes, rels;
  std::vector<Edge> edges;
  // Snapshot texts are already normalized; re-folding is a no-op.
  ParseOptions opt;
  for (Split s : {Split::train, Split::valid, Split::test}) {
    auto path = dir / (std::string(split_name(s)) + ".tsv");
    std::ifstream in(path);
    if (!in) throw ConfigError("missing snapshot file: " + path.string());
    for (const Tuple& t : parse_tuples(in, nodes, rels, opt)) {
      edges.push_back(Edge{t, s, false});
    }
  }
  return build_graph(std::move(nodes), std::move(rels), std::move(edges), augmented);
}

}  // namespace cpnc
