#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpnc/kg.hpp"
#include "cpnc/matrix.hpp"

namespace cpnc {

// Token table with fixed special ids.
class TokenVocab {
 public:
  static constexpr int32_t kPad = 0;
  static constexpr int32_t kUnk = 1;

  TokenVocab();

  // Tokens come from the texts of nodes touched by a train edge; phrases seen
  // only in valid/test fall back to UNK.
  static TokenVocab build(const Graph& g);
  static TokenVocab build(const std::vector<std::string>& texts);

  int32_t id(std::string_view token) const;
  int32_t add(const std::string& token);
  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }
  const std::string& token(int32_t id) const { return tokens_[static_cast<size_t>(id)]; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t, std::hash<std::string>, std::equal_to<>> index_;
};

// Lowercased alphanumeric runs; punctuation and whitespace are boundaries.
std::vector<std::string> split_tokens(std::string_view text);

// Never returns an empty list: unmatched text maps to a single UNK.
std::vector<int32_t> tokenize(const TokenVocab& vocab, std::string_view text);

// Trainable embedding-bag encoder: one embedding row per token, mean pooling
// over a node's tokens. The PAD row is zero and never updated.
class TextEncoder {
 public:
  TextEncoder(TokenVocab vocab, int64_t d_sem, uint64_t seed);

  const TokenVocab& vocab() const { return vocab_; }
  int64_t dim() const { return table_.cols(); }
  Matrix& table() { return table_; }
  const Matrix& table() const { return table_; }

  std::vector<double> encode(std::string_view text) const;
  Matrix encode_all(const Vocab& nodes) const;

  void save(const std::filesystem::path& path) const;
  static TextEncoder load(const std::filesystem::path& path);

 private:
  explicit TextEncoder(TokenVocab vocab) : vocab_(std::move(vocab)) {}
  TokenVocab vocab_;
  Matrix table_;
};

// Accumulates d(loss)/d(mean-pooled output) into the token rows of grad_table.
void encoder_grad_scatter(const std::vector<int32_t>& token_ids,
                          std::span<const double> d_output, Matrix& grad_table);

// Embedding text format: `<count> <dim>` header, then
// `<node_text><TAB><v1> <v2> ...` lines. Rows come back aligned to node ids.
Matrix load_precomputed(const std::filesystem::path& path, const Vocab& nodes);

void save_embedding_text(const std::filesystem::path& path, const Matrix& rows,
                         const std::vector<std::string>& texts);

}  // namespace cpnc
