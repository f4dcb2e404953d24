#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hopqg/corpus.hpp"
#include "hopqg/decomposer.hpp"

namespace hopqg {

struct ReasoningChain {
  std::vector<std::string> entities;  // question entity, bridge entity, answer
  bool operator==(const ReasoningChain&) const = default;
};
std::string to_string(const ReasoningChain& chain);  // "a → b → c"

enum class AidKind { SupportingFacts, SubQuestions };
std::string_view to_string(AidKind aid);

struct QuestionnaireItem {
  std::string id;
  std::string question;
  std::string answer;
  std::vector<ReasoningChain> chains;  // exactly 4, distinct
  std::size_t key = 0;                 // index of the correct chain
  std::vector<std::string> aid;        // supporting sentences or sub-questions
};

struct Questionnaire {
  AidKind aid = AidKind::SupportingFacts;
  std::uint64_t seed = 0;
  std::vector<QuestionnaireItem> items;
};

// The 2-hop chain of a Bridge example: the gold title named in the question,
// the resolved bridge entity, and the answer.
ReasoningChain reasoning_chain(const HotpotExample& example);

// Builds one item per example, in order, for the first count examples. Wrong
// chains swap the bridge and/or answer for other entities of the context.
// For AidKind::SubQuestions every example needs an entry in subquestions.
// Throws InvalidArgument for non-Bridge examples, InsufficientDistractors
// when the context holds too few other entities.
Questionnaire build_questionnaire(const std::vector<HotpotExample>& examples, std::size_t count, AidKind aid,
                                  std::uint64_t seed,
                                  const std::map<std::string, SubQuestionPair>& subquestions = {});

struct ItemRecord {
  std::string id;
  double shown_at = 0.0;  // seconds on the session clock
  double answered_at = 0.0;
  std::size_t choice = 0;
  bool correct = false;
  double elapsed() const { return answered_at - shown_at; }
};

struct QuestionnaireResult {
  std::string group;
  std::vector<ItemRecord> items;
  std::size_t item_count = 0;  // items in the questionnaire
  bool complete = false;
  double accuracy = 0.0;  // correct / answered
  double elapsed = 0.0;   // sum of item timings
};

class QuizIO {
 public:
  virtual ~QuizIO() = default;
  virtual void show(const QuestionnaireItem& item, std::size_t index, std::size_t total, AidKind aid) = 0;
  // Index of the chosen chain, or nullopt when the session is aborted.
  virtual std::optional<std::size_t> choose(const QuestionnaireItem& item) = 0;
};

class QuizClock {
 public:
  virtual ~QuizClock() = default;
  virtual double now() = 0;  // monotonic seconds
};

class SteadyQuizClock final : public QuizClock {
 public:
  double now() override;
};

// Replays fixed answers; runs out (aborts) after the last one.
class ScriptedQuizIO final : public QuizIO {
 public:
  explicit ScriptedQuizIO(std::vector<std::size_t> choices) : choices_(std::move(choices)) {}
  void show(const QuestionnaireItem&, std::size_t, std::size_t, AidKind) override {}
  std::optional<std::size_t> choose(const QuestionnaireItem&) override;

 private:
  std::vector<std::size_t> choices_;
  std::size_t next_ = 0;
};

// Advances by a fixed list of steps, one per call after the first.
class ScriptedQuizClock final : public QuizClock {
 public:
  explicit ScriptedQuizClock(std::vector<double> steps) : steps_(std::move(steps)) {}
  double now() override;

 private:
  std::vector<double> steps_;
  std::size_t next_ = 0;
  double t_ = 0.0;
  bool started_ = false;
};

// Prompts on out, reads "1".."4" (or "q" to abort) from in.
class TerminalQuizIO final : public QuizIO {
 public:
  TerminalQuizIO(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  void show(const QuestionnaireItem& item, std::size_t index, std::size_t total, AidKind aid) override;
  std::optional<std::size_t> choose(const QuestionnaireItem& item) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

// Timing per item runs from display to choice.
QuestionnaireResult run_questionnaire(const Questionnaire& q, QuizIO& io, QuizClock& clock,
                                      const std::string& group = "");

// Session log: one JSON line per item ({"id","shown_at","answered_at",
// "choice","correct"}), preceded by a header line with group and status.
std::string serialize_session(const QuestionnaireResult& result);
QuestionnaireResult parse_session(std::string_view text);
// Several sessions concatenated, each starting with its header line.
std::vector<QuestionnaireResult> parse_sessions(std::string_view text);

struct GroupSummary {
  std::string group;
  double accuracy = 0.0;      // pooled over every answered item
  double mean_elapsed = 0.0;  // mean session time
  std::size_t sessions = 0;
  std::size_t answered = 0;
  std::size_t correct = 0;
};
GroupSummary summarize_group(const std::string& group, const std::vector<QuestionnaireResult>& sessions);

}  // namespace hopqg
