#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hopqg/corpus.hpp"
#include "hopqg/decomposer.hpp"
#include "hopqg/entity_graph.hpp"
#include "hopqg/nn/layers.hpp"

namespace hopqg {

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t reasoning_steps = 2;
  std::array<double, 4> lambdas = {1.0, 1.0, 1.0, 5.0};
  double learning_rate = 5e-5;
  double warmup_ratio = 0.1;
  double clip_norm = 1.0;
  std::size_t epochs = 1;
  std::size_t batch_size = 1;
  std::size_t max_seq_len = kDefaultMaxSeqLen;
  std::size_t max_decode_len = 48;
  std::size_t max_answer_len = 30;
  double gat_slope = 0.2;
  bool qg_enabled = true;
  int vocab_min_count = 1;
  std::uint64_t seed = 13;

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct EncoderOutput {
  nn::Tensor h;  // (question + context) x d
  std::size_t question_length = 0;
  nn::AttentionMaps final_attention;  // filled when requested
};

struct ReasoningState {
  std::size_t step = 0;
  nn::Tensor entities;  // n x d, E^t
  nn::Tensor context;   // L x d, C^t
  nn::Tensor query;     // k x d, question-token representation
  nn::Tensor mask;      // n x 1, m^t; undefined when n = 0
};

struct QaPrediction {
  nn::Tensor start;       // L x 1
  nn::Tensor end;         // L x 1
  nn::Tensor type;        // 1 x 3, ordered span/yes/no
  nn::Tensor supporting;  // S x 1
};

struct QaLabels {
  AnswerType type = AnswerType::Span;
  std::optional<std::pair<std::size_t, std::size_t>> span;  // inclusive
  bool span_unlocatable = false;                            // span loss masked
  std::vector<double> supporting;                           // 0/1 per sentence
};

struct LossBreakdown {
  double l_start = 0.0;
  double l_end = 0.0;
  double l_type = 0.0;
  double l_para = 0.0;
  double l_qg = 0.0;
  double l_qa = 0.0;
  double l_total = 0.0;
};

// Differentiable loss terms of one example; composed with the lambdas.
struct LossTerms {
  nn::Tensor start, end, type, para, qg;
  nn::Tensor total;
  LossBreakdown values;
};

struct GeneratedPair {
  SubQuestionPair pair;
  std::vector<int> tokens;  // as emitted, without bos
  bool missing_separator = false;
  bool empty = false;
};

// Everything the network reads from one example.
struct ModelInput {
  std::vector<int> question_ids;
  std::vector<int> context_ids;
  std::vector<std::pair<std::size_t, std::size_t>> sentences;  // half-open context ranges
  std::optional<EntityGraph> graph;                             // nullopt: no mentions
};

ModelInput make_input(const TokenizedExample& example, std::optional<EntityGraph> graph);
// Gazetteer extraction + graph construction, nullopt when nothing matched.
std::optional<EntityGraph> example_graph(const HotpotExample& source, const TokenizedExample& example);
QaLabels make_labels(const TokenizedExample& example);
// Decoder target ids [A..., sep, B..., eos] (bos is the implicit first input).
std::vector<int> qg_target(const Vocabulary& vocab, const SubQuestionPair& pair);

struct Prediction {
  AnswerType type = AnswerType::Span;
  std::string answer;
  std::optional<std::pair<std::size_t, std::size_t>> span;
  std::vector<SupportingFactRef> supporting_facts;
  GeneratedPair subquestions;
};

// Best (start, end) with start <= end < start + max_len by start+end score.
std::pair<std::size_t, std::size_t> best_span(std::span<const double> start, std::span<const double> end,
                                              std::size_t max_len);

class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }

  EncoderOutput encode(std::span<const int> question_ids, std::span<const int> context_ids,
                       bool record_attention = false) const;
  nn::Tensor init_entity_embeddings(const nn::Tensor& context, const EntityGraph& graph) const;
  // m = sigmoid(q W e_i / sqrt(d)) with q the mean of the query rows.
  nn::Tensor relevance_mask(const nn::Tensor& query, const nn::Tensor& entities) const;
  ReasoningState fusion_step(const ReasoningState& state, const EntityGraph& graph) const;
  nn::Tensor fuse_context(const nn::Tensor& context, const EntityGraph* graph, const nn::Tensor& entities) const;
  // Initial state plus T rounds of fusion_step and fuse_context.
  ReasoningState reason(const EncoderOutput& enc, const std::optional<EntityGraph>& graph) const;
  QaPrediction qa_heads(const nn::Tensor& context, const nn::Tensor& query,
                        const std::vector<std::pair<std::size_t, std::size_t>>& sentences) const;
  LossTerms qa_loss(const QaPrediction& pred, const QaLabels& gold) const;
  // Teacher-forced decoder NLL of target (see qg_target) given memory h.
  nn::Tensor qg_loss(const nn::Tensor& memory, std::span<const int> target) const;
  // Next-token logits for each prefix position of inputs (bos first).
  nn::Tensor decode_logits(const nn::Tensor& memory, std::span<const int> inputs) const;
  GeneratedPair generate_subquestions(const nn::Tensor& memory, std::size_t max_len) const;

  // Full forward pass of one example with the joint loss.
  LossTerms forward_loss(const ModelInput& input, const QaLabels& labels,
                         const std::vector<int>* target) const;
  Prediction predict(const HotpotExample& source, const TokenizedExample& example,
                     const std::optional<EntityGraph>& graph) const;

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  nn::ParameterSet params_;

  nn::Tensor token_embedding_;
  nn::Tensor segment_embedding_;
  std::vector<nn::EncoderBlock> encoder_;
  nn::LayerNorm encoder_norm_;
  nn::Dense entity_proj_;
  nn::Tensor mask_weight_;
  nn::GatLayer gat_;
  nn::BiAttention biattention_;
  nn::Lstm lstm_;
  nn::Dense start_head_, end_head_, type_head_, sp_head_;
  std::vector<nn::DecoderBlock> decoder_;
  nn::LayerNorm decoder_norm_;
  nn::Dense output_proj_;
};

}  // namespace hopqg
