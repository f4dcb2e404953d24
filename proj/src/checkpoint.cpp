#include "hopqg/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"

#include "hopqg/config_file.hpp"
#include "hopqg/error.hpp"
#include "hopqg/text.hpp"

namespace hopqg {

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

namespace {
constexpr std::string_view kMagic = "HOPQG-CKPT 1\n";
}

std::string serialize_checkpoint(const Model& model, const CheckpointMeta& meta) {
  nlohmann::ordered_json header;
  header["format"] = "hopqg-checkpoint";
  header["version"] = 1;
  header["epoch"] = meta.epoch;
  header["step"] = meta.step;
  header["config"] = format_config(model.config());
  header["vocab_hash"] = hex64(model.vocab().hash());
  const auto& tokens = model.vocab().tokens();
  header["vocab"] = std::vector<std::string>(tokens.begin() + Vocabulary::kNumReserved, tokens.end());
  auto table = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : model.params().items()) {
    table.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}, {"offset", offset}});
    offset += t.size();
  }
  header["tensors"] = std::move(table);
  header["values"] = offset;

  std::string out(kMagic);
  out += header.dump();
  out += '\n';
  const std::size_t base = out.size();
  out.resize(base + offset * sizeof(double));
  char* dst = out.data() + base;
  for (const auto& [name, t] : model.params().items()) {
    std::memcpy(dst, t.values().data(), t.size() * sizeof(double));
    dst += t.size() * sizeof(double);
  }
  return out;
}

void save_checkpoint(const std::string& path, const Model& model, const CheckpointMeta& meta) {
  write_file_atomic(path, serialize_checkpoint(model, meta));
}

LoadedCheckpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) throw CheckpointError("not a checkpoint (bad magic line)");
  bytes.remove_prefix(kMagic.size());
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw CheckpointError("checkpoint header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  }
  bytes.remove_prefix(nl + 1);
  try {
    if (header.at("version").get<int>() != 1) throw CheckpointError("unsupported checkpoint version");
    ModelConfig config = parse_config(header.at("config").get<std::string>());
    Vocabulary vocab = Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>());
    if (hex64(vocab.hash()) != header.at("vocab_hash").get<std::string>()) {
      throw CheckpointError("vocabulary hash mismatch");
    }
    const std::size_t total = header.at("values").get<std::size_t>();
    if (bytes.size() != total * sizeof(double)) throw CheckpointError("checkpoint payload size mismatch");
    LoadedCheckpoint out{Model(config, std::move(vocab)), {}};
    out.meta.epoch = header.at("epoch").get<std::size_t>();
    out.meta.step = header.at("step").get<std::size_t>();
    const auto& table = header.at("tensors");
    const auto& items = out.model.params().items();
    if (table.size() != items.size()) throw CheckpointError("tensor table does not match the model layout");
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& entry = table[i];
      nn::Tensor t = items[i].second;
      if (entry.at("name").get<std::string>() != items[i].first || entry.at("rows").get<std::size_t>() != t.rows() ||
          entry.at("cols").get<std::size_t>() != t.cols()) {
        throw CheckpointError("tensor " + items[i].first + " does not match the model layout");
      }
      const std::size_t offset = entry.at("offset").get<std::size_t>();
      if (offset + t.size() > total) throw CheckpointError("tensor " + items[i].first + " exceeds the payload");
      std::memcpy(t.mutable_values().data(), bytes.data() + offset * sizeof(double), t.size() * sizeof(double));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw CheckpointError(std::string("checkpoint config: ") + e.what());
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

}  // namespace hopqg
