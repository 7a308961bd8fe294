#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cpnc/matrix.hpp"

namespace cpnc {

enum class Split { train, valid, test };
const char* split_name(Split s);

struct Relation {
  int32_t id = -1;
  std::string name;
  bool is_inverse = false;
  int32_t base_id = -1;     // non-inverse partner; self when not inverse
  int32_t inverse_id = -1;  // partner in the other direction; -1 before augmentation
};

struct Tuple {
  int32_t head = -1;
  int32_t rel = -1;
  int32_t tail = -1;
  bool operator==(const Tuple&) const = default;
};

struct Edge {
  Tuple t;
  Split split = Split::train;
  bool synthetic = false;  // SIM edges from densify; never part of gold sets
};

// Interned string table with dense 0-based ids.
class Vocab {
 public:
  int32_t get_or_add(const std::string& text);
  std::optional<int32_t> find(const std::string& text) const;
  const std::string& text(int32_t id) const { return items_[static_cast<size_t>(id)]; }
  int32_t size() const { return static_cast<int32_t>(items_.size()); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int32_t> index_;
};

struct ParseOptions {
  bool case_fold = true;
};

std::string normalize_text(std::string_view raw, bool case_fold);

// Lines are `relation<TAB>head<TAB>tail[<TAB>weight]`; the weight column is
// ignored. Exact duplicate tuples collapse to their first occurrence.
std::vector<Tuple> parse_tuples(std::istream& in, Vocab& nodes, Vocab& relations,
                                const ParseOptions& opt = {});

class Graph;
void serialize_tuples(std::ostream& out, const Graph& g, Split split);

// Immutable after construction; all mutating ops return new graphs.
class Graph {
 public:
  Graph() = default;

  int32_t num_nodes() const { return nodes_.size(); }
  int32_t num_relations() const { return static_cast<int32_t>(rels_.size()); }
  int32_t num_base_relations() const { return n_base_rels_; }
  bool augmented() const { return augmented_; }

  const Vocab& node_vocab() const { return nodes_; }
  const std::string& node_text(int32_t id) const { return nodes_.text(id); }
  const Relation& relation(int32_t id) const { return rels_[static_cast<size_t>(id)]; }
  const std::vector<Relation>& relations() const { return rels_; }
  int32_t inverse_rel(int32_t id) const;

  const std::vector<Edge>& edges() const { return edges_; }
  int64_t num_forward_edges() const { return n_forward_; }

  // Any relation, either direction.
  bool linked(int32_t a, int32_t b) const {
    return linked_[static_cast<size_t>(a)].count(b) > 0;
  }
  // Sorted unique undirected neighbor list.
  const std::vector<int32_t>& neighbors(int32_t n) const {
    return nbrs_[static_cast<size_t>(n)];
  }

  int64_t count_edges(Split split, bool include_synthetic = true) const;

  Graph train_subgraph() const;
  Graph augment_inverse() const;  // no-op when already augmented

  void save_snapshot(const std::filesystem::path& dir) const;
  static Graph load_snapshot(const std::filesystem::path& dir);

  friend Graph build_graph(Vocab nodes, Vocab relation_names,
                           std::vector<Edge> edges, bool add_inverse);
  friend Graph sparsify(const Graph& g, double fraction, uint64_t seed);
  friend Graph densify_by_similarity(const Graph& g, const Matrix& e_sem,
                                     int32_t top_k, double min_sim);

 private:
  Graph with_forward_edges(std::vector<Edge> forward) const;
  void rebuild_index();

  Vocab nodes_;
  std::vector<Relation> rels_;
  int32_t n_base_rels_ = 0;
  std::vector<Edge> edges_;  // forward block, then the mirrored inverse block
  int64_t n_forward_ = 0;
  bool augmented_ = false;
  std::vector<std::unordered_set<int32_t>> linked_;
  std::vector<std::vector<int32_t>> nbrs_;
};

Graph build_graph(Vocab nodes, Vocab relation_names, std::vector<Edge> edges,
                  bool add_inverse);

// Convenience for single-split construction.
Graph build_graph(Vocab nodes, Vocab relation_names,
                  const std::vector<Tuple>& tuples, bool add_inverse,
                  Split split = Split::train);

// Removes floor(fraction * |train forward edges|) train edges uniformly
// without replacement; mirrored inverse edges go with them.
Graph sparsify(const Graph& g, double fraction, uint64_t seed);

// Adds synthetic SIM edges between each node and its top_k most cosine-similar
// peers (similarity >= min_sim, self excluded). Pairs are deduplicated.
Graph densify_by_similarity(const Graph& g, const Matrix& e_sem, int32_t top_k,
                            double min_sim);

}  // namespace cpnc
