#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "hopqg/checkpoint.hpp"
#include "hopqg/config_file.hpp"
#include "hopqg/decomposer.hpp"
#include "hopqg/error.hpp"
#include "hopqg/trainer.hpp"

using namespace hopqg;
namespace fs = std::filesystem;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.d_model = 16;
  cfg.heads = 2;
  cfg.ffn_dim = 32;
  cfg.encoder_layers = 1;
  cfg.decoder_layers = 1;
  cfg.learning_rate = 3e-3;
  cfg.warmup_ratio = 0.0;
  cfg.epochs = 1;
  return cfg;
}

struct Setup {
  std::vector<HotpotExample> examples = hopqg::testing::worked_examples();
  std::vector<QgRecord> qg = build_qg_dataset(examples, [](std::string_view) {}).records;
  Vocabulary vocab = corpus_vocabulary(examples, qg, 1);
  PreparedData data = prepare_data(examples, qg, vocab, 512);
};

std::vector<double> flat_params(const Model& m) {
  std::vector<double> out;
  for (const auto& [name, t] : m.params().items()) out.insert(out.end(), t.values().begin(), t.values().end());
  return out;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("hopqg-unit-" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config files") {
  SUBCASE("parse and canonical format round-trip") {
    const ModelConfig cfg = load_config(hopqg::testing::data_path("toy.cfg"));
    CHECK(cfg.d_model == 64);
    CHECK(cfg.reasoning_steps == 2);
    CHECK(cfg.lambdas[3] == 5.0);
    CHECK(cfg.learning_rate == 0.002);
    CHECK(parse_config(format_config(cfg)) == cfg);
    CHECK(format_config(parse_config(format_config(cfg))) == format_config(cfg));
  }
  SUBCASE("defaults carry the loss weights and optimiser settings") {
    const ModelConfig d;
    CHECK(d.lambdas == std::array<double, 4>{1, 1, 1, 5});
    CHECK(d.learning_rate == 5e-5);
    CHECK(d.warmup_ratio == 0.1);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_config("unknown_key = 1\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("d_model = 8\nd_model = 16\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("d_model = eight\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("d_model\n"), InvalidArgument);
    CHECK_THROWS_AS(parse_config("qg_enabled = maybe\n"), InvalidArgument);
  }
  SUBCASE("comments and blank lines") {
    const ModelConfig cfg = parse_config("# comment\n\n  heads = 8   # trailing\nqg_enabled = false\n");
    CHECK(cfg.heads == 8);
    CHECK_FALSE(cfg.qg_enabled);
  }
}

TEST_CASE("prepared data") {
  Setup s;
  REQUIRE(s.data.training.size() == s.examples.size());
  std::size_t with_target = 0;
  for (const auto& t : s.data.training) with_target += t.target ? 1 : 0;
  CHECK(with_target == s.qg.size());
  // Every sub-question token made it into the vocabulary.
  for (const auto& r : s.qg) {
    for (int id : qg_target(s.vocab, r.pair)) CHECK(id != Vocabulary::kUnk);
  }
}

TEST_CASE("training steps obey the loss identities") {
  Setup s;
  ModelConfig cfg = small_config();
  cfg.epochs = 2;
  Model model(cfg, s.vocab);
  const TrainResult r = train(model, s.data.training);
  REQUIRE(r.log.size() == 2 * s.examples.size());
  for (const auto& step : r.log) {
    const LossBreakdown& v = step.loss;
    CHECK(std::abs(v.l_qa - (v.l_start + v.l_end + v.l_type + 5 * v.l_para)) < 1e-9);
    CHECK(std::abs(v.l_total - (v.l_qa + v.l_qg)) < 1e-9);
    CHECK(std::isfinite(step.grad_norm));
  }
  CHECK(r.log.back().step == r.log.size());
  CHECK(r.log.back().epoch == 2);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  Setup s;
  ModelConfig cfg = small_config();
  cfg.learning_rate = 0.0;
  Model model(cfg, s.vocab);
  const auto before = flat_params(model);
  train(model, s.data.training);
  CHECK(flat_params(model) == before);
}

TEST_CASE("warmup ramps the rate linearly") {
  Setup s;
  ModelConfig cfg = small_config();
  cfg.epochs = 2;
  cfg.warmup_ratio = 0.5;
  Model model(cfg, s.vocab);
  const TrainResult r = train(model, s.data.training);
  // 8 steps, 4 of warmup.
  CHECK(r.log[0].learning_rate == doctest::Approx(cfg.learning_rate / 4));
  CHECK(r.log[3].learning_rate == doctest::Approx(cfg.learning_rate));
  CHECK(r.log[7].learning_rate == doctest::Approx(cfg.learning_rate));
}

TEST_CASE("training is deterministic") {
  Setup s;
  Model a(small_config(), s.vocab), b(small_config(), s.vocab);
  train(a, s.data.training);
  train(b, s.data.training);
  CHECK(serialize_checkpoint(a) == serialize_checkpoint(b));
}

TEST_CASE("non-finite loss raises divergence") {
  Setup s;
  Model model(small_config(), s.vocab);
  nn::Tensor w = model.params().find("head.type.b");
  w.mutable_values()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(model, s.data.training), DivergenceDetected);
}

TEST_CASE("batched training averages the batch") {
  Setup s;
  ModelConfig cfg = small_config();
  cfg.batch_size = 3;
  Model model(cfg, s.vocab);
  const TrainResult r = train(model, s.data.training);
  CHECK(r.log.size() == 2);
}

TEST_CASE("checkpoints") {
  Setup s;
  Model model(small_config(), s.vocab);
  train(model, s.data.training);
  const std::string bytes = serialize_checkpoint(model, {1, 4});
  SUBCASE("round-trip is byte-stable and preserves behaviour") {
    const LoadedCheckpoint back = parse_checkpoint(bytes);
    CHECK(back.meta.epoch == 1);
    CHECK(back.meta.step == 4);
    CHECK(back.model.config() == model.config());
    CHECK(back.model.vocab() == model.vocab());
    CHECK(serialize_checkpoint(back.model, back.meta) == bytes);
    const auto& ex = s.examples[0];
    const TokenizedExample& tok = s.data.tokenized[0];
    const Prediction p1 = model.predict(ex, tok, s.data.graphs[0]);
    const Prediction p2 = back.model.predict(ex, tok, s.data.graphs[0]);
    CHECK(p1.answer == p2.answer);
    CHECK(p1.subquestions.tokens == p2.subquestions.tokens);
  }
  SUBCASE("corruption is detected") {
    CHECK_THROWS_AS(parse_checkpoint("garbage"), CheckpointError);
    CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 8)), CheckpointError);
    std::string bad = bytes;
    bad.replace(bad.find("\"vocab_hash\":\"") + 14, 4, "0000");
    CHECK_THROWS_AS(parse_checkpoint(bad), CheckpointError);
  }
}

TEST_CASE("train_to_directory writes one checkpoint per epoch and the step log") {
  Setup s;
  ModelConfig cfg = small_config();
  cfg.epochs = 2;
  Model model(cfg, s.vocab);
  const fs::path dir = scratch("train");
  const TrainResult r = train_to_directory(model, s.data.training, dir.string());
  CHECK(fs::exists(dir / "epoch-001.ckpt"));
  CHECK(fs::exists(dir / "epoch-002.ckpt"));
  const std::string log = read_file((dir / "train_log.jsonl").string());
  CHECK(static_cast<std::size_t>(std::count(log.begin(), log.end(), '\n')) == r.log.size());
  CHECK(serialize_checkpoint(load_checkpoint((dir / "epoch-002.ckpt").string()).model) == serialize_checkpoint(model));
  fs::remove_all(dir);
}

TEST_CASE("an overfit single-example model regenerates its sub-questions") {
  Setup s;
  ModelConfig cfg = small_config();
  cfg.d_model = 32;
  cfg.heads = 4;
  cfg.ffn_dim = 64;
  cfg.epochs = 60;
  cfg.learning_rate = 5e-3;
  const std::vector<TrainingExample> one = {s.data.training[1]};  // professor question
  Model model(cfg, s.vocab);
  train(model, one);
  const Prediction p = model.predict(s.examples[1], s.data.tokenized[1], s.data.graphs[1]);
  CHECK(p.subquestions.pair.s_a == "Kristin Moore Gebbie be a professor at which university");
  CHECK(p.subquestions.pair.s_b == "Flinders University founded in what year?");
  CHECK(p.answer == "1966");
}
