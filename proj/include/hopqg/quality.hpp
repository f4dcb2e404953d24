#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "hopqg/decomposer.hpp"
#include "hopqg/model.hpp"
#include "hopqg/trainer.hpp"

namespace hopqg {

struct DiversityScore {
  double ratio = 0.0;
  std::size_t novel = 0;     // distinct sub-question tokens absent from the question
  std::size_t distinct = 0;  // distinct sub-question tokens
};

// Tokens are the words of normalize_answer over s_a and s_b together.
DiversityScore diversity_score(const SubQuestionPair& pair, std::string_view original_question);

struct ComparisonOutcome {
  double win = 0.0;
  double tie = 0.0;
  double loss = 0.0;
  std::size_t wins = 0, ties = 0, losses = 0;
  std::size_t count = 0;
};

// win when a > b + eps, loss when a < b - eps, otherwise tie. Throws
// LengthMismatch. An empty comparison has all ratios 0.
ComparisonOutcome compare_pairwise(const std::vector<double>& a, const std::vector<double>& b, double tie_eps = 1e-9);

// Fluency scorers: higher is more fluent.
class FluencyScorer {
 public:
  virtual ~FluencyScorer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> score(const std::vector<std::string>& texts) const = 0;
};

// Mean per-token log-likelihood (eos included) under the QG decoder with an
// empty encoder memory.
class DecoderFluencyScorer final : public FluencyScorer {
 public:
  explicit DecoderFluencyScorer(const Model& model) : model_(model) {}
  std::string name() const override { return "decoder-fallback"; }
  std::vector<double> score(const std::vector<std::string>& texts) const override;

 private:
  const Model& model_;
};

// Runs a shell command that reads newline-delimited texts on stdin and
// prints one score per line. Throws ScorerUnavailable on any failure.
class ExternalProcessScorer final : public FluencyScorer {
 public:
  explicit ExternalProcessScorer(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "external:" + command_; }
  std::vector<double> score(const std::vector<std::string>& texts) const override;

 private:
  std::string command_;
};

// Score assigned to empty (or whitespace-only) text without consulting the scorer.
constexpr double kFluencyFloor = -100.0;

struct FluencyResult {
  double score = 0.0;
  bool floor = false;  // text was empty
  std::string scorer;
};

// Throws ScorerUnavailable when scorer is null.
FluencyResult fluency_score(const std::string& text, const FluencyScorer* scorer);
std::vector<FluencyResult> fluency_scores(const std::vector<std::string>& texts, const FluencyScorer* scorer);

// Attention received by each context sentence in the final encoder layer:
// per token, the column sum of the attention matrix averaged over heads; per
// sentence, the mean over its tokens. Sentence ranges are context-relative.
std::vector<double> sentence_attention(const nn::AttentionMaps& maps, std::size_t question_length,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& sentences);

struct AttentionDelta {
  double ratio = 0.0;
  std::size_t increased = 0;
  std::size_t total = 0;  // supporting-fact sentences compared
};

// Per example: sentence weights with / without QG and supporting flags.
AttentionDelta attention_delta(const std::vector<std::vector<double>>& with_qg,
                               const std::vector<std::vector<double>>& without_qg,
                               const std::vector<std::vector<bool>>& supporting);
// Throws IncomparableModels when the configurations differ beyond qg_enabled
// or the vocabularies differ.
AttentionDelta attention_delta(const Model& with_qg, const Model& without_qg, const PreparedData& data);

}  // namespace hopqg
