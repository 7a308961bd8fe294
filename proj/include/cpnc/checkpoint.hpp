#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "cpnc/matrix.hpp"

namespace cpnc {

// Binary container shared by all checkpoints: magic, a JSON header with
// tensor shapes and free-form metadata, then row-major float32 payload,
// little-endian.
struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, Matrix> tensors;  // ordered -> deterministic layout

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace cpnc
