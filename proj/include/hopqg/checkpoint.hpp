#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "hopqg/model.hpp"

namespace hopqg {

struct CheckpointMeta {
  std::size_t epoch = 0;
  std::size_t step = 0;
};

// Layout: the magic line "HOPQG-CKPT 1", one line of JSON header (config,
// vocabulary, tensor table with shapes and offsets), then the raw tensor
// values as little-endian IEEE-754 doubles in table order.
std::string serialize_checkpoint(const Model& model, const CheckpointMeta& meta = {});
void save_checkpoint(const std::string& path, const Model& model, const CheckpointMeta& meta = {});

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};
LoadedCheckpoint parse_checkpoint(std::string_view bytes);  // throws CheckpointError
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace hopqg
