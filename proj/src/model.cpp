#include "hopqg/model.hpp"

#include <cmath>
#include <limits>

#include "hopqg/error.hpp"
#include "hopqg/text.hpp"

namespace hopqg {

using nn::Tensor;

void ModelConfig::validate() const {
  if (d_model == 0) throw InvalidArgument("d_model must be positive");
  if (heads == 0 || d_model % heads != 0) throw InvalidArgument("heads must divide d_model");
  if (ffn_dim == 0) throw InvalidArgument("ffn_dim must be positive");
  for (double l : lambdas) {
    if (!(l > 0.0)) throw InvalidArgument("every lambda must be positive");
  }
  if (!(learning_rate >= 0.0)) throw InvalidArgument("learning_rate must be non-negative");
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw InvalidArgument("warmup_ratio must lie in [0, 1)");
  if (!(clip_norm >= 0.0)) throw InvalidArgument("clip_norm must be non-negative");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (max_seq_len == 0) throw InvalidArgument("max_seq_len must be positive");
  if (max_answer_len == 0) throw InvalidArgument("max_answer_len must be positive");
  if (vocab_min_count < 1) throw InvalidArgument("vocab_min_count must be at least 1");
}

ModelInput make_input(const TokenizedExample& example, std::optional<EntityGraph> graph) {
  ModelInput in;
  in.question_ids = example.question_ids;
  in.context_ids = example.context_ids;
  for (const auto& s : example.sentences) in.sentences.emplace_back(s.begin, s.end);
  in.graph = std::move(graph);
  return in;
}

std::optional<EntityGraph> example_graph(const HotpotExample& source, const TokenizedExample& example) {
  auto mentions = extract_entities(example, Gazetteer::from_example(source));
  if (mentions.empty()) return std::nullopt;
  return build_graph(std::move(mentions), example.context_length());
}

QaLabels make_labels(const TokenizedExample& example) {
  QaLabels labels;
  labels.type = example.answer_type;
  labels.span = example.answer_span;
  labels.span_unlocatable = example.answer_unlocatable;
  for (const auto& s : example.sentences) labels.supporting.push_back(s.supporting ? 1.0 : 0.0);
  return labels;
}

std::vector<int> qg_target(const Vocabulary& vocab, const SubQuestionPair& pair) {
  std::vector<int> ids = vocab.encode(tokenize(pair.s_a));
  ids.push_back(Vocabulary::kSep);
  for (int id : vocab.encode(tokenize(pair.s_b))) ids.push_back(id);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

std::pair<std::size_t, std::size_t> best_span(std::span<const double> start, std::span<const double> end,
                                              std::size_t max_len) {
  if (start.size() != end.size() || start.empty()) throw ShapeMismatch("best_span: logits must be non-empty and aligned");
  std::pair<std::size_t, std::size_t> best{0, 0};
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < start.size(); ++s) {
    const std::size_t last = std::min(end.size(), s + max_len);
    for (std::size_t e = s; e < last; ++e) {
      const double score = start[s] + end[e];
      if (score > best_score) {
        best_score = score;
        best = {s, e};
      }
    }
  }
  return best;
}

Model::Model(ModelConfig config, Vocabulary vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)), params_(config_.seed) {
  config_.validate();
  const std::size_t d = config_.d_model, V = vocab_.size();
  token_embedding_ = params_.add("embed.token", V, d, d);
  segment_embedding_ = params_.add("embed.segment", 2, d, d);
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    encoder_.emplace_back(params_, "encoder." + std::to_string(i), d, config_.heads, config_.ffn_dim);
  }
  encoder_norm_ = nn::LayerNorm(params_, "encoder.norm", d);
  entity_proj_ = nn::Dense(params_, "entity.proj", 2 * d, d);
  mask_weight_ = params_.add("mask.w", d, d, d);
  gat_ = nn::GatLayer(params_, "gat", d, d, config_.gat_slope);
  biattention_ = nn::BiAttention(params_, "biattn", d, d);
  lstm_ = nn::Lstm(params_, "fusion.lstm", 2 * d, d);
  start_head_ = nn::Dense(params_, "head.start", d, 1);
  end_head_ = nn::Dense(params_, "head.end", d, 1);
  type_head_ = nn::Dense(params_, "head.type", 3 * d, 3);
  sp_head_ = nn::Dense(params_, "head.sp", d, 1);
  for (std::size_t i = 0; i < config_.decoder_layers; ++i) {
    decoder_.emplace_back(params_, "decoder." + std::to_string(i), d, config_.heads, config_.ffn_dim);
  }
  decoder_norm_ = nn::LayerNorm(params_, "decoder.norm", d);
  output_proj_ = nn::Dense(params_, "decoder.out", d, V);
}

EncoderOutput Model::encode(std::span<const int> question_ids, std::span<const int> context_ids,
                            bool record_attention) const {
  const std::size_t lq = question_ids.size(), L = lq + context_ids.size();
  if (L > config_.max_seq_len) {
    throw SequenceTooLong("sequence of " + std::to_string(L) + " tokens exceeds max_seq_len " +
                          std::to_string(config_.max_seq_len));
  }
  if (L == 0) throw ShapeMismatch("encode: empty input");
  std::vector<int> ids(question_ids.begin(), question_ids.end());
  ids.insert(ids.end(), context_ids.begin(), context_ids.end());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) throw ShapeMismatch("encode: token id out of range");
  }
  std::vector<int> segments(L, 1);
  std::fill(segments.begin(), segments.begin() + static_cast<long>(lq), 0);
  const double emb_scale = std::sqrt(static_cast<double>(config_.d_model));
  Tensor x = nn::scale(nn::gather_rows(token_embedding_, ids), emb_scale);
  x = nn::add(x, nn::sinusoidal_positions(L, config_.d_model));
  x = nn::add(x, nn::gather_rows(segment_embedding_, segments));

  EncoderOutput out;
  out.question_length = lq;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    const bool last = i + 1 == encoder_.size();
    x = encoder_[i](x, record_attention && last ? &out.final_attention : nullptr);
  }
  out.h = encoder_.empty() ? x : encoder_norm_(x);
  return out;
}

Tensor Model::init_entity_embeddings(const Tensor& context, const EntityGraph& graph) const {
  const std::size_t n = graph.size();
  if (n == 0) return Tensor::zeros(0, config_.d_model);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::vector<Tensor> maxima;
  for (const auto& m : graph.nodes) {
    if (m.end <= m.start) throw EmptySpan();
    if (m.end > context.rows()) throw ShapeMismatch("entity span exceeds the context length");
    ranges.emplace_back(m.start, m.end);
    maxima.push_back(nn::max_rows(nn::slice_rows(context, m.start, m.end)));
  }
  Tensor pooled = nn::concat_cols({nn::mean_row_ranges(context, ranges), nn::concat_rows(maxima)});
  return entity_proj_(pooled);
}

Tensor Model::relevance_mask(const Tensor& query, const Tensor& entities) const {
  Tensor q = nn::mean_rows(query);
  Tensor scores = nn::matmul_nt(entities, nn::matmul(q, mask_weight_));
  return nn::sigmoid(nn::scale(scores, 1.0 / std::sqrt(static_cast<double>(config_.d_model))));
}

namespace {

nn::Adjacency adjacency_of(const EntityGraph& graph) {
  nn::Adjacency adj(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (std::size_t j : graph.neighbors[i]) adj.connect(i, j);
  }
  return adj;
}

}  // namespace

ReasoningState Model::fusion_step(const ReasoningState& state, const EntityGraph& graph) const {
  ReasoningState next = state;
  next.step = state.step + 1;
  if (graph.size() == 0 || state.entities.rows() == 0) return next;
  if (state.entities.rows() != graph.size() || state.mask.rows() != graph.size()) {
    throw ShapeMismatch("fusion_step: state does not match the graph");
  }
  Tensor masked = nn::mul_rows(state.entities, state.mask);
  next.entities = gat_(masked, adjacency_of(graph));
  next.query = biattention_(state.query, next.entities).context;
  next.mask = relevance_mask(next.query, next.entities);
  return next;
}

Tensor Model::fuse_context(const Tensor& context, const EntityGraph* graph, const Tensor& entities) const {
  const std::size_t L = context.rows(), d = config_.d_model;
  if (context.cols() != d) throw ShapeMismatch("fuse_context: context width differs from d_model");
  Tensor injected;
  if (graph && graph->size() > 0) {
    const std::size_t n = graph->size();
    if (entities.rows() != n || entities.cols() != d) throw ShapeMismatch("fuse_context: entity matrix shape");
    if (graph->context_length != L) throw ShapeMismatch("fuse_context: location matrix width differs from context");
    std::vector<double> mt(L * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = graph->nodes[i].start; p < graph->nodes[i].end; ++p) mt[p * n + i] = 1.0;
    }
    injected = nn::matmul(Tensor({L, n}, std::move(mt)), entities);
  } else {
    injected = Tensor::zeros(L, d);
  }
  return lstm_.sequence(nn::concat_cols({context, injected}));
}

ReasoningState Model::reason(const EncoderOutput& enc, const std::optional<EntityGraph>& graph) const {
  const std::size_t lq = enc.question_length, L = enc.h.rows();
  if (lq == 0) throw ShapeMismatch("reason: question is empty");
  if (lq == L) throw ShapeMismatch("reason: context is empty");
  ReasoningState state;
  state.query = nn::slice_rows(enc.h, 0, lq);
  state.context = nn::slice_rows(enc.h, lq, L);
  const EntityGraph* g = graph ? &*graph : nullptr;
  if (g && g->size() > 0) {
    state.entities = init_entity_embeddings(state.context, *g);
    state.mask = relevance_mask(state.query, state.entities);
  } else {
    state.entities = Tensor::zeros(0, config_.d_model);
  }
  const EntityGraph empty;
  for (std::size_t t = 0; t < config_.reasoning_steps; ++t) {
    state = fusion_step(state, g ? *g : empty);
    state.context = fuse_context(state.context, g, state.entities);
  }
  return state;
}

QaPrediction Model::qa_heads(const Tensor& context, const Tensor& query,
                             const std::vector<std::pair<std::size_t, std::size_t>>& sentences) const {
  QaPrediction p;
  p.start = start_head_(context);
  p.end = end_head_(context);
  p.type = type_head_(nn::concat_cols({nn::mean_rows(context), nn::max_rows(context), nn::mean_rows(query)}));
  p.supporting = sp_head_(nn::mean_row_ranges(context, sentences));
  return p;
}

LossTerms Model::qa_loss(const QaPrediction& pred, const QaLabels& gold) const {
  const std::size_t L = pred.start.rows();
  if (gold.type == AnswerType::Span && !gold.span && !gold.span_unlocatable) {
    throw LabelMismatch("span answer without a span or an unlocatable flag");
  }
  if (gold.type != AnswerType::Span && gold.span) throw LabelMismatch("yes/no answer carries a span");
  if (gold.supporting.size() != pred.supporting.rows()) throw LabelMismatch("one supporting label per sentence");
  if (gold.span && (gold.span->first > gold.span->second || gold.span->second >= L)) {
    throw LabelMismatch("span outside the context");
  }
  LossTerms terms;
  if (gold.type == AnswerType::Span && gold.span) {
    const int s = static_cast<int>(gold.span->first), e = static_cast<int>(gold.span->second);
    terms.start = nn::cross_entropy_rows(nn::transpose(pred.start), std::span<const int>(&s, 1));
    terms.end = nn::cross_entropy_rows(nn::transpose(pred.end), std::span<const int>(&e, 1));
  } else {
    terms.start = Tensor::scalar(0.0);
    terms.end = Tensor::scalar(0.0);
  }
  const int type = static_cast<int>(gold.type);
  terms.type = nn::cross_entropy_rows(pred.type, std::span<const int>(&type, 1));
  terms.para = nn::bce_with_logits(pred.supporting, gold.supporting);
  terms.qg = Tensor::scalar(0.0);

  const auto& lam = config_.lambdas;
  terms.total = nn::add(nn::add(nn::scale(terms.start, lam[0]), nn::scale(terms.end, lam[1])),
                        nn::add(nn::scale(terms.type, lam[2]), nn::scale(terms.para, lam[3])));
  auto& v = terms.values;
  v.l_start = terms.start.item();
  v.l_end = terms.end.item();
  v.l_type = terms.type.item();
  v.l_para = terms.para.item();
  v.l_qg = 0.0;
  v.l_qa = lam[0] * v.l_start + lam[1] * v.l_end + lam[2] * v.l_type + lam[3] * v.l_para;
  v.l_total = v.l_qa + v.l_qg;
  return terms;
}

Tensor Model::decode_logits(const Tensor& memory, std::span<const int> inputs) const {
  const std::size_t n = inputs.size();
  if (n == 0) throw EmptyTarget();
  for (int id : inputs) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) throw ShapeMismatch("decoder: token id out of range");
  }
  const double emb_scale = std::sqrt(static_cast<double>(config_.d_model));
  Tensor x = nn::scale(nn::gather_rows(token_embedding_, inputs), emb_scale);
  x = nn::add(x, nn::sinusoidal_positions(n, config_.d_model));
  for (const auto& block : decoder_) x = block(x, memory);
  if (!decoder_.empty()) x = decoder_norm_(x);
  return output_proj_(x);
}

Tensor Model::qg_loss(const Tensor& memory, std::span<const int> target) const {
  if (target.empty()) throw EmptyTarget();
  std::vector<int> inputs{Vocabulary::kBos};
  inputs.insert(inputs.end(), target.begin(), target.end() - 1);
  return nn::cross_entropy_rows(decode_logits(memory, inputs), target);
}

GeneratedPair Model::generate_subquestions(const Tensor& memory, std::size_t max_len) const {
  nn::NoGradGuard guard;
  GeneratedPair out;
  std::vector<int> inputs{Vocabulary::kBos};
  while (out.tokens.size() < max_len) {
    Tensor logits = decode_logits(memory, inputs);
    const std::size_t V = logits.cols(), last = logits.rows() - 1;
    int best = 0;
    for (std::size_t j = 1; j < V; ++j) {
      if (logits(last, j) > logits(last, static_cast<std::size_t>(best))) best = static_cast<int>(j);
    }
    out.tokens.push_back(best);
    if (best == Vocabulary::kEos) break;
    inputs.push_back(best);
  }
  std::vector<std::string> a, b;
  bool seen_sep = false;
  for (int id : out.tokens) {
    if (id == Vocabulary::kEos) break;
    if (id == Vocabulary::kSep && !seen_sep) {
      seen_sep = true;
      continue;
    }
    // Later separators are kept as text so nothing is silently dropped.
    (seen_sep ? b : a).push_back(vocab_.token(id));
  }
  out.pair.s_a = detokenize(a);
  out.pair.s_b = seen_sep ? detokenize(b) : std::string();
  out.missing_separator = !seen_sep;
  out.empty = a.empty() && b.empty();
  return out;
}

LossTerms Model::forward_loss(const ModelInput& input, const QaLabels& labels, const std::vector<int>* target) const {
  EncoderOutput enc = encode(input.question_ids, input.context_ids);
  ReasoningState state = reason(enc, input.graph);
  LossTerms terms = qa_loss(qa_heads(state.context, state.query, input.sentences), labels);
  if (target && config_.qg_enabled) {
    terms.qg = qg_loss(enc.h, *target);
    terms.total = nn::add(terms.total, terms.qg);
    terms.values.l_qg = terms.qg.item();
    terms.values.l_total = terms.values.l_qa + terms.values.l_qg;
  }
  return terms;
}

Prediction Model::predict(const HotpotExample& source, const TokenizedExample& example,
                          const std::optional<EntityGraph>& graph) const {
  nn::NoGradGuard guard;
  ModelInput input = make_input(example, graph);
  EncoderOutput enc = encode(input.question_ids, input.context_ids);
  ReasoningState state = reason(enc, input.graph);
  QaPrediction heads = qa_heads(state.context, state.query, input.sentences);

  Prediction p;
  int type = 0;
  for (int k = 1; k < 3; ++k) {
    if (heads.type(0, static_cast<std::size_t>(k)) > heads.type(0, static_cast<std::size_t>(type))) type = k;
  }
  p.type = static_cast<AnswerType>(type);
  if (p.type == AnswerType::Yes) {
    p.answer = "yes";
  } else if (p.type == AnswerType::No) {
    p.answer = "no";
  } else {
    p.span = best_span(heads.start.values(), heads.end.values(), config_.max_answer_len);
    p.answer = example.span_text(source, p.span->first, p.span->second);
  }
  for (std::size_t s = 0; s < example.sentences.size(); ++s) {
    if (heads.supporting(s, 0) > 0.0) {
      const auto& slot = example.sentences[s];
      p.supporting_facts.push_back({source.context[slot.paragraph].title, slot.sentence});
    }
  }
  if (config_.qg_enabled) {
    p.subquestions = generate_subquestions(enc.h, config_.max_decode_len);
    p.subquestions.pair.source_question_id = source.id;
  }
  return p;
}

}  // namespace hopqg
