#include "hopqg/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>

#include "json.hpp"

#include "hopqg/checkpoint.hpp"
#include "hopqg/error.hpp"
#include "hopqg/nn/optim.hpp"
#include "hopqg/rng.hpp"

namespace hopqg {

Vocabulary corpus_vocabulary(std::span<const HotpotExample> examples, std::span<const QgRecord> qg, int min_count) {
  std::vector<std::string> extra;
  for (const auto& r : qg) {
    extra.push_back(r.pair.s_a);
    extra.push_back(r.pair.s_b);
  }
  return build_vocabulary(examples, min_count, extra);
}

PreparedData prepare_data(std::span<const HotpotExample> examples, std::span<const QgRecord> qg,
                          const Vocabulary& vocab, std::size_t max_seq_len) {
  std::map<std::string, const SubQuestionPair*> pairs;
  for (const auto& r : qg) pairs.emplace(r.question_id, &r.pair);
  PreparedData out;
  for (const auto& ex : examples) {
    TokenizedExample tok = locate_answer(ex, vocab, max_seq_len);
    std::optional<EntityGraph> graph = example_graph(ex, tok);
    TrainingExample t;
    t.id = ex.id;
    t.input = make_input(tok, graph);
    t.labels = make_labels(tok);
    if (auto it = pairs.find(ex.id); it != pairs.end()) t.target = qg_target(vocab, *it->second);
    out.tokenized.push_back(std::move(tok));
    out.graphs.push_back(std::move(graph));
    out.training.push_back(std::move(t));
  }
  return out;
}

std::string step_log_json(const StepLog& log) {
  nlohmann::ordered_json j;
  j["step"] = log.step;
  j["epoch"] = log.epoch;
  j["l_start"] = log.loss.l_start;
  j["l_end"] = log.loss.l_end;
  j["l_type"] = log.loss.l_type;
  j["l_para"] = log.loss.l_para;
  j["l_qg"] = log.loss.l_qg;
  j["l_qa"] = log.loss.l_qa;
  j["l_total"] = log.loss.l_total;
  j["lr"] = log.learning_rate;
  j["grad_norm"] = log.grad_norm;
  return j.dump();
}

TrainResult train(Model& model, std::span<const TrainingExample> data, const TrainOptions& options) {
  const ModelConfig& cfg = model.config();
  TrainResult result;
  if (data.empty() || cfg.epochs == 0) return result;
  const std::size_t batches = (data.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches * cfg.epochs;
  const auto warmup = static_cast<std::size_t>(std::llround(cfg.warmup_ratio * static_cast<double>(total_steps)));
  nn::Adam adam(model.params(), {.clip_norm = cfg.clip_norm});
  const auto& lam = cfg.lambdas;

  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
    rng.shuffle(order);
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t first = b * cfg.batch_size, last = std::min(order.size(), first + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(last - first);
      model.params().zero_grad();
      LossBreakdown mean;
      for (std::size_t i = first; i < last; ++i) {
        const TrainingExample& ex = data[order[i]];
        LossTerms terms = model.forward_loss(ex.input, ex.labels, ex.target ? &*ex.target : nullptr);
        if (!std::isfinite(terms.values.l_total)) {
          throw DivergenceDetected("non-finite loss at step " + std::to_string(step + 1) + " on example " + ex.id);
        }
        terms.total.backward();
        mean.l_start += terms.values.l_start * inv;
        mean.l_end += terms.values.l_end * inv;
        mean.l_type += terms.values.l_type * inv;
        mean.l_para += terms.values.l_para * inv;
        mean.l_qg += terms.values.l_qg * inv;
      }
      mean.l_qa = lam[0] * mean.l_start + lam[1] * mean.l_end + lam[2] * mean.l_type + lam[3] * mean.l_para;
      mean.l_total = mean.l_qa + mean.l_qg;
      const double lr = nn::warmup_rate(cfg.learning_rate, step, warmup);
      StepLog entry;
      entry.grad_norm = adam.step(lr, inv);
      ++step;
      entry.step = step;
      entry.epoch = epoch;
      entry.loss = mean;
      entry.learning_rate = lr;
      if (!std::isfinite(entry.grad_norm)) {
        throw DivergenceDetected("non-finite gradient at step " + std::to_string(step));
      }
      if (options.on_step) options.on_step(entry);
      result.log.push_back(entry);
    }
    if (options.on_epoch) options.on_epoch(epoch, step);
  }
  return result;
}

TrainResult train_to_directory(Model& model, std::span<const TrainingExample> data, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::string log;
  TrainOptions options;
  options.on_step = [&](const StepLog& s) {
    log += step_log_json(s);
    log += '\n';
  };
  options.on_epoch = [&](std::size_t epoch, std::size_t step) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch-%03zu.ckpt", epoch);
    save_checkpoint((fs::path(dir) / name).string(), model, {epoch, step});
    write_file_atomic((fs::path(dir) / "train_log.jsonl").string(), log);
  };
  TrainResult result = train(model, data, options);
  write_file_atomic((fs::path(dir) / "train_log.jsonl").string(), log);
  return result;
}

}  // namespace hopqg
