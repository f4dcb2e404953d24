#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hopqg/text.hpp"

namespace hopqg {

enum class QuestionType { Bridge, Comparison };

std::string_view to_string(QuestionType type);
QuestionType question_type_from_string(std::string_view name);

struct Paragraph {
  std::string title;
  std::vector<std::string> sentences;

  bool operator==(const Paragraph&) const = default;
};

struct SupportingFactRef {
  std::string title;
  std::size_t sentence_index = 0;

  auto operator<=>(const SupportingFactRef&) const = default;
};

struct HotpotExample {
  std::string id;
  std::string question;
  std::string answer;
  QuestionType qtype = QuestionType::Bridge;
  std::string level;
  std::vector<Paragraph> context;
  // Kept in file order; uniqueness is enforced by the parser.
  std::vector<SupportingFactRef> supporting_facts;

  bool operator==(const HotpotExample&) const = default;

  const Paragraph* find_paragraph(std::string_view title) const;
  // Distinct supporting-fact titles in order of first appearance.
  std::vector<std::string> gold_titles() const;
  bool is_supporting(std::string_view title, std::size_t sentence) const;
};

// Parses a JSON array in the public distractor-setting layout. Throws
// MalformedRecord or DanglingSupportingFact.
std::vector<HotpotExample> parse_dataset(std::string_view raw_json);
std::vector<HotpotExample> load_dataset(const std::string& path);

// Inverse of parse_dataset (two-space indented, stable key order).
std::string serialize_dataset(std::span<const HotpotExample> examples);
void save_dataset(const std::string& path, std::span<const HotpotExample> examples);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kSep = 4;
  static constexpr int kNumReserved = 5;

  // Only the reserved tokens.
  Vocabulary();
  // Tokens after the reserved block, in id order.
  static Vocabulary from_tokens(std::span<const std::string> tokens);

  int id(std::string_view token) const;
  const std::string& token(int id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::vector<int> encode(std::span<const std::string> tokens) const;
  std::vector<std::string> decode(std::span<const int> ids) const;
  // Fingerprint of the id->token table.
  std::uint64_t hash() const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void push(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Reserved ids first, then tokens with count >= min_count ordered by
// descending frequency with lexicographic tie-break. Counts cover questions,
// answers, titles and sentences, plus any extra texts (sub-question targets).
Vocabulary build_vocabulary(std::span<const HotpotExample> examples, int min_count,
                            std::span<const std::string> extra_texts = {});

enum class AnswerType { Span = 0, Yes = 1, No = 2 };
std::string_view to_string(AnswerType type);

// Where one context sentence sits in the concatenated token sequence.
struct SentenceSlot {
  std::size_t paragraph = 0;  // index into the original example context
  std::size_t sentence = 0;
  std::size_t begin = 0;      // token offsets [begin, end)
  std::size_t end = 0;
  bool supporting = false;
};

struct ContextToken {
  std::string text;
  std::size_t slot = 0;        // index into TokenizedExample::sentences
  std::size_t char_begin = 0;  // byte offsets inside the sentence text
  std::size_t char_end = 0;
};

struct TokenizedExample {
  std::string id;
  std::vector<std::string> question_tokens;
  std::vector<int> question_ids;
  std::vector<ContextToken> context_tokens;
  std::vector<int> context_ids;
  std::vector<SentenceSlot> sentences;
  // First-sentence slot of each kept paragraph, plus a final sentinel.
  std::vector<std::size_t> paragraph_offsets;
  // Original paragraph indices that survived truncation, in order.
  std::vector<std::size_t> kept_paragraphs;
  AnswerType answer_type = AnswerType::Span;
  // Inclusive token positions in the context sequence.
  std::optional<std::pair<std::size_t, std::size_t>> answer_span;
  bool answer_unlocatable = false;

  std::size_t context_length() const { return context_tokens.size(); }
  std::size_t total_length() const { return question_ids.size() + context_ids.size(); }
  // Source text of context tokens [first, last] using the sentence bytes.
  std::string span_text(const HotpotExample& source, std::size_t first,
                        std::size_t last) const;
};

constexpr std::size_t kDefaultMaxSeqLen = 512;

// Tokenizes an example and finds its answer. Non-gold paragraphs are dropped
// from the end while question + context exceeds max_seq_len; SequenceTooLong
// if the gold paragraphs alone do not fit.
TokenizedExample locate_answer(const HotpotExample& example, const Vocabulary& vocab,
                               std::size_t max_seq_len = kDefaultMaxSeqLen);

// Versioned tokenized-dataset file: header line then one record per line.
std::string serialize_tokenized(const Vocabulary& vocab,
                                std::span<const TokenizedExample> examples,
                                std::size_t max_seq_len);
struct TokenizedDataset {
  Vocabulary vocab;
  std::size_t max_seq_len = kDefaultMaxSeqLen;
  std::vector<TokenizedExample> examples;
};
TokenizedDataset parse_tokenized(std::string_view text);

std::string read_file(const std::string& path);
// Writes through a temporary sibling and renames, so a failed write never
// leaves a partial file behind.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace hopqg
