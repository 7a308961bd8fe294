#include "cpnc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include "cpnc/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian");

namespace cpnc {

namespace {
constexpr char kMagic[8] = {'C', 'P', 'N', 'C', 'B', 'I', 'N', '1'};
}

void Checkpoint::save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["meta"] = meta;
  auto& list = header["tensors"] = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& [name, m] : tensors) {
    list.push_back({{"name", name},
                    {"rows", m.rows()},
                    {"cols", m.cols()},
                    {"offset", offset}});
    offset += static_cast<uint64_t>(m.size()) * sizeof(float);
  }
  std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  std::vector<float> buf;
  for (const auto& [name, m] : tensors) {
    buf.resize(static_cast<size_t>(m.size()));
    for (int64_t i = 0; i < m.size(); ++i) {
      buf[static_cast<size_t>(i)] = static_cast<float>(m.data()[i]);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw ConfigError("short write: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("bad checkpoint magic: " + path.string());
  }
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw ConfigError("truncated checkpoint header: " + path.string());
  nlohmann::json header = nlohmann::json::parse(hs);

  Checkpoint ck;
  ck.meta = header.value("meta", nlohmann::json::object());
  for (const auto& t : header.at("tensors")) {
    int64_t rows = t.at("rows").get<int64_t>();
    int64_t cols = t.at("cols").get<int64_t>();
    Matrix m(rows, cols);
    std::vector<float> buf(static_cast<size_t>(m.size()));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw ConfigError("truncated checkpoint payload: " + path.string());
    for (int64_t i = 0; i < m.size(); ++i) {
      m.data()[i] = static_cast<double>(buf[static_cast<size_t>(i)]);
    }
    ck.tensors.emplace(t.at("name").get<std::string>(), std::move(m));
  }
  return ck;
}

}  // namespace cpnc
