#include "hopqg/config_file.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "hopqg/corpus.hpp"
#include "hopqg/error.hpp"

namespace hopqg {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw InvalidArgument("config: bad value '" + std::string(value) + "' for " + std::string(key));
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v);
}

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void apply_config_value(ModelConfig& c, std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  if (key == "d_model") c.d_model = to_size(key, v);
  else if (key == "heads") c.heads = to_size(key, v);
  else if (key == "ffn_dim") c.ffn_dim = to_size(key, v);
  else if (key == "encoder_layers") c.encoder_layers = to_size(key, v);
  else if (key == "decoder_layers") c.decoder_layers = to_size(key, v);
  else if (key == "reasoning_steps") c.reasoning_steps = to_size(key, v);
  else if (key == "lambda1") c.lambdas[0] = to_double(key, v);
  else if (key == "lambda2") c.lambdas[1] = to_double(key, v);
  else if (key == "lambda3") c.lambdas[2] = to_double(key, v);
  else if (key == "lambda4") c.lambdas[3] = to_double(key, v);
  else if (key == "learning_rate") c.learning_rate = to_double(key, v);
  else if (key == "warmup_ratio") c.warmup_ratio = to_double(key, v);
  else if (key == "clip_norm") c.clip_norm = to_double(key, v);
  else if (key == "epochs") c.epochs = to_size(key, v);
  else if (key == "batch_size") c.batch_size = to_size(key, v);
  else if (key == "max_seq_len") c.max_seq_len = to_size(key, v);
  else if (key == "max_decode_len") c.max_decode_len = to_size(key, v);
  else if (key == "max_answer_len") c.max_answer_len = to_size(key, v);
  else if (key == "gat_slope") c.gat_slope = to_double(key, v);
  else if (key == "qg_enabled") c.qg_enabled = to_bool(key, v);
  else if (key == "vocab_min_count") c.vocab_min_count = to_int(key, v);
  else if (key == "seed") c.seed = to_u64(key, v);
  else throw InvalidArgument("config: unknown key '" + std::string(key) + "'");
}

ModelConfig parse_config(std::string_view text, ModelConfig base) {
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) throw InvalidArgument("config: duplicate key '" + std::string(key) + "'");
    apply_config_value(base, key, line.substr(eq + 1));
  }
  base.validate();
  return base;
}

ModelConfig load_config(const std::string& path, ModelConfig base) { return parse_config(read_file(path), base); }

std::string format_config(const ModelConfig& c) {
  std::ostringstream out;
  out << "d_model = " << c.d_model << '\n'
      << "heads = " << c.heads << '\n'
      << "ffn_dim = " << c.ffn_dim << '\n'
      << "encoder_layers = " << c.encoder_layers << '\n'
      << "decoder_layers = " << c.decoder_layers << '\n'
      << "reasoning_steps = " << c.reasoning_steps << '\n';
  for (int i = 0; i < 4; ++i) out << "lambda" << i + 1 << " = " << shortest(c.lambdas[static_cast<std::size_t>(i)]) << '\n';
  out << "learning_rate = " << shortest(c.learning_rate) << '\n'
      << "warmup_ratio = " << shortest(c.warmup_ratio) << '\n'
      << "clip_norm = " << shortest(c.clip_norm) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "max_seq_len = " << c.max_seq_len << '\n'
      << "max_decode_len = " << c.max_decode_len << '\n'
      << "max_answer_len = " << c.max_answer_len << '\n'
      << "gat_slope = " << shortest(c.gat_slope) << '\n'
      << "qg_enabled = " << (c.qg_enabled ? "true" : "false") << '\n'
      << "vocab_min_count = " << c.vocab_min_count << '\n'
      << "seed = " << c.seed << '\n';
  return out.str();
}

}  // namespace hopqg
