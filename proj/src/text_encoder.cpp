#include "cpnc/text_encoder.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>

#include "cpnc/checkpoint.hpp"
#include "cpnc/errors.hpp"
#include "cpnc/parallel.hpp"
#include "cpnc/rng.hpp"

namespace cpnc {

TokenVocab::TokenVocab() {
  add("<pad>");
  add("<unk>");
}

int32_t TokenVocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  int32_t id = static_cast<int32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int32_t TokenVocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

TokenVocab TokenVocab::build(const Graph& g) {
  // Nodes incident to at least one train edge, in node-id order.
  std::vector<bool> in_train(static_cast<size_t>(g.num_nodes()), false);
  for (const Edge& e : g.edges()) {
    if (e.split == Split::train) {
      in_train[static_cast<size_t>(e.t.head)] = true;
      in_train[static_cast<size_t>(e.t.tail)] = true;
    }
  }
  std::vector<std::string> texts;
  for (int32_t i = 0; i < g.num_nodes(); ++i) {
    if (in_train[static_cast<size_t>(i)]) texts.push_back(g.node_text(i));
  }
  return build(texts);
}

TokenVocab TokenVocab::build(const std::vector<std::string>& texts) {
  TokenVocab v;
  for (const std::string& t : texts) {
    for (const std::string& tok : split_tokens(t)) v.add(tok);
  }
  return v;
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto uc = static_cast<unsigned char>(ch);
    // bytes >= 0x80 stay inside tokens so UTF-8 words survive
    if (std::isalnum(uc) || uc >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<int32_t> tokenize(const TokenVocab& vocab, std::string_view text) {
  std::vector<int32_t> ids;
  for (const std::string& tok : split_tokens(text)) ids.push_back(vocab.id(tok));
  if (ids.empty()) ids.push_back(TokenVocab::kUnk);
  return ids;
}

TextEncoder::TextEncoder(TokenVocab vocab, int64_t d_sem, uint64_t seed)
    : vocab_(std::move(vocab)) {
  table_ = Matrix(vocab_.size(), d_sem);
  Rng rng(derive_seed(seed, kStreamEncoderInit));
  double scale = 0.5 / static_cast<double>(d_sem);
  for (int64_t i = 0; i < table_.rows(); ++i) {
    for (int64_t j = 0; j < d_sem; ++j) {
      table_(i, j) = rng.uniform(-scale, scale);
    }
  }
  for (int64_t j = 0; j < d_sem; ++j) table_(TokenVocab::kPad, j) = 0.0;
}

std::vector<double> TextEncoder::encode(std::string_view text) const {
  auto ids = tokenize(vocab_, text);
  std::vector<double> out(static_cast<size_t>(dim()), 0.0);
  for (int32_t id : ids) {
    auto row = table_.row(id);
    for (size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
  double inv = 1.0 / static_cast<double>(ids.size());
  for (double& v : out) v *= inv;
  return out;
}

Matrix TextEncoder::encode_all(const Vocab& nodes) const {
  Matrix out(nodes.size(), dim());
  parallel_for(nodes.size(), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      auto v = encode(nodes.text(static_cast<int32_t>(i)));
      std::copy(v.begin(), v.end(), out.row(i).begin());
    }
  });
  return out;
}

void encoder_grad_scatter(const std::vector<int32_t>& token_ids,
                          std::span<const double> d_output, Matrix& grad_table) {
  double inv = 1.0 / static_cast<double>(token_ids.size());
  for (int32_t id : token_ids) {
    auto row = grad_table.row(id);
    for (size_t j = 0; j < d_output.size(); ++j) row[j] += d_output[j] * inv;
  }
}

void TextEncoder::save(const std::filesystem::path& path) const {
  Checkpoint ck;
  ck.meta["kind"] = "text_encoder";
  ck.meta["d_sem"] = dim();
  ck.meta["tokens"] = vocab_.tokens();
  ck.tensors.emplace("table", table_);
  ck.save(path);
}

TextEncoder TextEncoder::load(const std::filesystem::path& path) {
  Checkpoint ck = Checkpoint::load(path);
  if (ck.meta.value("kind", "") != "text_encoder") {
    throw ConfigError("not a text encoder checkpoint: " + path.string());
  }
  TokenVocab v;
  auto toks = ck.meta.at("tokens").get<std::vector<std::string>>();
  for (size_t i = 2; i < toks.size(); ++i) v.add(toks[i]);
  TextEncoder enc(std::move(v));
  enc.table_ = std::move(ck.tensors.at("table"));
  if (enc.table_.rows() != enc.vocab_.size()) {
    throw ConfigError("encoder checkpoint vocab/table mismatch");
  }
  return enc;
}

Matrix load_precomputed(const std::filesystem::path& path, const Vocab& nodes) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing embedding header", 1);

  auto parse_int = [](std::string_view s, int64_t lineno) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
      throw ParseError("bad integer in embedding header", lineno);
    }
    return v;
  };
  size_t sp = line.find(' ');
  if (sp == std::string::npos) throw ParseError("embedding header must be '<count> <dim>'", 1);
  int64_t count = parse_int(std::string_view(line).substr(0, sp), 1);
  int64_t dim = parse_int(std::string_view(line).substr(sp + 1), 1);
  if (count < 0 || dim <= 0) throw ParseError("bad embedding header values", 1);

  Matrix out(nodes.size(), dim);
  std::vector<bool> covered(static_cast<size_t>(nodes.size()), false);
  int64_t lineno = 1, rows_read = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("embedding line missing tab", lineno);
    std::string text = line.substr(0, tab);

    std::vector<double> vals;
    const char* p = line.data() + tab + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p >= end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ParseError("bad float in embedding line", lineno);
      vals.push_back(v);
      p = next;
    }
    if (static_cast<int64_t>(vals.size()) != dim) {
      throw ParseError("embedding dimension mismatch: expected " + std::to_string(dim) +
                           ", got " + std::to_string(vals.size()),
                       lineno);
    }
    ++rows_read;
    auto id = nodes.find(text);
    if (!id) continue;  // extra rows are allowed
    std::copy(vals.begin(), vals.end(), out.row(*id).begin());
    covered[static_cast<size_t>(*id)] = true;
  }
  if (rows_read != count) {
    throw ParseError("embedding header count " + std::to_string(count) +
                         " != " + std::to_string(rows_read) + " data lines",
                     lineno + 1);
  }
  std::vector<std::string> missing;
  int64_t n_missing = 0;
  for (int32_t i = 0; i < nodes.size(); ++i) {
    if (!covered[static_cast<size_t>(i)]) {
      ++n_missing;
      if (missing.size() < 10) missing.push_back(nodes.text(i));
    }
  }
  if (n_missing > 0) {
    std::string msg = "embedding file misses " + std::to_string(n_missing) + " node(s):";
    for (const auto& m : missing) msg += " '" + m + "'";
    if (n_missing > 10) msg += " ...";
    throw CoverageError(msg);
  }
  return out;
}

void save_embedding_text(const std::filesystem::path& path, const Matrix& rows,
                         const std::vector<std::string>& texts) {
  if (rows.rows() != static_cast<int64_t>(texts.size())) {
    throw ArgumentError("save_embedding_text: row/text count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write embedding file: " + path.string());
  out << rows.rows() << ' ' << rows.cols() << '\n';
  char buf[32];
  for (int64_t i = 0; i < rows.rows(); ++i) {
    out << texts[static_cast<size_t>(i)] << '\t';
    auto r = rows.row(i);
    for (int64_t j = 0; j < rows.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", r[static_cast<size_t>(j)]);
      out << (j ? " " : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace cpnc
