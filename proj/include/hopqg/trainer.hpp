#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopqg/corpus.hpp"
#include "hopqg/decomposer.hpp"
#include "hopqg/model.hpp"

namespace hopqg {

struct TrainingExample {
  std::string id;
  ModelInput input;
  QaLabels labels;
  std::optional<std::vector<int>> target;  // QG supervision when a pair exists
};

// Tokenized, graph-annotated view of a dataset that model code consumes.
struct PreparedData {
  std::vector<TokenizedExample> tokenized;
  std::vector<std::optional<EntityGraph>> graphs;
  std::vector<TrainingExample> training;
};

// Corpus vocabulary extended with the sub-question texts.
Vocabulary corpus_vocabulary(std::span<const HotpotExample> examples, std::span<const QgRecord> qg, int min_count);

// QG pairs are matched to examples by id; examples lacking a pair train on
// the QA loss alone.
PreparedData prepare_data(std::span<const HotpotExample> examples, std::span<const QgRecord> qg,
                          const Vocabulary& vocab, std::size_t max_seq_len);

struct StepLog {
  std::size_t step = 0;  // 1-based optimizer step
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;    // batch means
  double learning_rate = 0.0;
  double grad_norm = 0.0;
};

// One JSON object per line with every LossBreakdown field.
std::string step_log_json(const StepLog& log);

struct TrainOptions {
  std::function<void(const StepLog&)> on_step;
  // Called after each epoch with the 1-based epoch number and global step.
  std::function<void(std::size_t epoch, std::size_t step)> on_epoch;
};

struct TrainResult {
  std::vector<StepLog> log;
};

// Adam with linear warmup then a constant rate. Deterministic given the
// model seed. Throws DivergenceDetected on a non-finite loss.
TrainResult train(Model& model, std::span<const TrainingExample> data, const TrainOptions& options = {});

// Training run that writes <dir>/epoch-NNN.ckpt after every epoch and
// <dir>/train_log.jsonl with one line per step.
TrainResult train_to_directory(Model& model, std::span<const TrainingExample> data, const std::string& dir);

}  // namespace hopqg
