#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hopqg/corpus.hpp"

namespace hopqg {

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
// whitespace.
std::string normalize_answer(std::string_view text);

struct Score {
  double em = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Token-multiset F1 over normalized answers. A yes/no/noanswer answer only
// scores against the identical label. Two empty answers score (1, 1).
Score answer_metrics(std::string_view pred, std::string_view gold);
// Set precision/recall over (title, sentence) pairs; two empty sets score (1, 1).
Score supporting_fact_metrics(const std::set<SupportingFactRef>& pred, const std::set<SupportingFactRef>& gold);
// Joint precision/recall are products of the component ones.
Score joint_metrics(const Score& answer, const Score& supporting);

struct MetricsReport {
  double answer_em = 0.0;
  double answer_f1 = 0.0;
  double sp_em = 0.0;
  double sp_f1 = 0.0;
  double joint_em = 0.0;
  double joint_f1 = 0.0;
  std::size_t count = 0;
};

// Official-style prediction file: {"answer": {id: text}, "sp": {id: [[title, idx], ...]}}.
struct PredictionSet {
  std::map<std::string, std::string> answers;
  std::map<std::string, std::set<SupportingFactRef>> supporting;
};
std::string serialize_predictions(const PredictionSet& preds);
PredictionSet parse_predictions(std::string_view text);

// Averages over the gold examples; a missing prediction scores zero.
MetricsReport evaluate(const PredictionSet& preds, const std::vector<HotpotExample>& gold);

// Relative change (noisy - clean) / clean * 100 per metric; nullopt where the
// clean value is 0.
struct RobustnessDelta {
  std::optional<double> answer_em, answer_f1, sp_em, sp_f1, joint_em, joint_f1;
};
std::optional<double> relative_change(double clean, double noisy);
RobustnessDelta robustness_delta(const MetricsReport& clean, const MetricsReport& noisy);

}  // namespace hopqg
