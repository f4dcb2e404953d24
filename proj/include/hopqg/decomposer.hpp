#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hopqg/corpus.hpp"

namespace hopqg {

enum class SpanRole { Head, Tail, Entity1, Entity2, Property };

// Half-open token range over the question.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const TokenRange&) const = default;
};

// Bridge: {head, tail}. Comparison: {entity1, entity2, property}.
struct SpanSegmentation {
  QuestionType qtype = QuestionType::Bridge;
  std::vector<TokenRange> spans;
  std::vector<SpanRole> roles;

  const TokenRange& span(SpanRole role) const;
};

struct SubQuestionPair {
  std::string s_a;
  std::string s_b;
  std::optional<std::string> hop1_answer;
  std::string source_question_id;
  // Comparison pair whose two entities are textually identical.
  bool degenerate = false;

  bool operator==(const SubQuestionPair&) const = default;
};

// Seam for the span predictor; RuleSegmenter is the built-in cascade.
class QuestionSegmenter {
 public:
  virtual ~QuestionSegmenter() = default;
  virtual SpanSegmentation segment(std::span<const std::string> tokens, QuestionType qtype) const = 0;
};

class RuleSegmenter final : public QuestionSegmenter {
 public:
  SpanSegmentation segment(std::span<const std::string> tokens, QuestionType qtype) const override;
};

SpanSegmentation segment_question(std::span<const std::string> question_tokens, QuestionType qtype);

// Surface text of a span. Bridge heads get copula normalisation (is -> be).
std::string span_text(const SpanSegmentation& seg, std::span<const std::string> tokens, SpanRole role);
// Comparison property with its head noun singularised ("film genres" -> "film genre").
std::string property_name(const SpanSegmentation& seg, std::span<const std::string> tokens);

SubQuestionPair build_subquestions(const SpanSegmentation& seg, std::span<const std::string> question_tokens,
                                   const std::optional<std::string>& hop1_answer);

// Seam for the single-hop reader that answers S^A.
class Hop1Resolver {
 public:
  virtual ~Hop1Resolver() = default;
  virtual std::string resolve(std::string_view s_a, const HotpotExample& example) const = 0;
};

// Picks the gold paragraph title that the question does not mention, spelled
// as it appears in the other gold paragraph's supporting sentences.
class TitleOracleResolver final : public Hop1Resolver {
 public:
  std::string resolve(std::string_view s_a, const HotpotExample& example) const override;
};

std::string resolve_hop1_answer(std::string_view s_a, const HotpotExample& example);

// Lower-cased title with any trailing "(disambiguation)" removed, tokenized,
// punctuation dropped.
std::vector<std::string> title_key(std::string_view title);
// Contiguous case-insensitive occurrence of a title inside tokens.
std::optional<TokenRange> find_title(std::span<const std::string> tokens, std::string_view title);

struct QgRecord {
  std::string question_id;
  SubQuestionPair pair;
};

struct QgFailure {
  std::string question_id;
  std::string reason;
};

struct QgDataset {
  std::vector<QgRecord> records;
  std::vector<QgFailure> failures;
  std::size_t bridge_count = 0;
  std::size_t comparison_count = 0;
  std::optional<std::string> distribution_warning;
};

using LogSink = std::function<void(std::string_view)>;

// One pair per example whose segmentation and hop-1 resolution succeed. Each
// failure is reported through log (stderr when unset). Output order follows
// the input order.
QgDataset build_qg_dataset(std::span<const HotpotExample> examples, const LogSink& log = {},
                           const QuestionSegmenter& segmenter = RuleSegmenter{},
                           const Hop1Resolver& resolver = TitleOracleResolver{});

// Line-delimited records: {"id", "s_a", "s_b", "hop1_answer"?, "degenerate"?}.
std::string serialize_qg_records(std::span<const QgRecord> records);
std::vector<QgRecord> parse_qg_records(std::string_view text);

}  // namespace hopqg
