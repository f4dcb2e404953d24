#include "hopqg/questionnaire.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hopqg/error.hpp"
#include "hopqg/rng.hpp"
#include "hopqg/text.hpp"

namespace hopqg {

namespace {

std::string strip_disambiguation(std::string_view title) {
  std::string base(title);
  if (auto open = base.rfind(" ("); open != std::string::npos && base.ends_with(")")) base.resize(open);
  return base;
}

}  // namespace

std::string to_string(const ReasoningChain& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.entities.size(); ++i) {
    if (i) out += " → ";
    out += chain.entities[i];
  }
  return out;
}

std::string_view to_string(AidKind aid) {
  return aid == AidKind::SupportingFacts ? "supporting_facts" : "subquestions";
}

ReasoningChain reasoning_chain(const HotpotExample& example) {
  if (example.qtype != QuestionType::Bridge) throw InvalidArgument("reasoning chains need a Bridge example: " + example.id);
  const auto q = tokenize(example.question);
  std::string anchor;
  for (const auto& t : example.gold_titles()) {
    if (find_title(q, t)) {
      anchor = strip_disambiguation(t);
      break;
    }
  }
  if (anchor.empty()) throw AmbiguousBridge("no gold title of " + example.id + " appears in the question");
  return {{anchor, resolve_hop1_answer(example.question, example), example.answer}};
}

Questionnaire build_questionnaire(const std::vector<HotpotExample>& examples, std::size_t count, AidKind aid,
                                  std::uint64_t seed, const std::map<std::string, SubQuestionPair>& subquestions) {
  Questionnaire q;
  q.aid = aid;
  q.seed = seed;
  for (std::size_t x = 0; x < examples.size() && q.items.size() < count; ++x) {
    const HotpotExample& ex = examples[x];
    const ReasoningChain correct = reasoning_chain(ex);
    std::set<std::string> used;
    for (const auto& e : correct.entities) used.insert(to_lower(e));
    std::vector<std::string> others;
    std::set<std::string> seen;
    for (const auto& p : ex.context) {
      std::string t = strip_disambiguation(p.title);
      if (used.count(to_lower(t)) || !seen.insert(to_lower(t)).second) continue;
      others.push_back(t);
    }
    if (others.size() < 2) {
      throw InsufficientDistractors(ex.id + " has " + std::to_string(others.size()) +
                                    " confusing entities; two are needed");
    }
    Rng rng(derive_seed(seed, ex.id));
    rng.shuffle(others);
    const std::string& head = correct.entities[0];
    const std::string& bridge = correct.entities[1];
    const std::string& answer = correct.entities[2];
    const std::string& x1 = others[0];
    const std::string& y1 = others[1];
    const std::string& x2 = others.size() > 2 ? others[2] : others[1];
    const std::string& y2 = others.size() > 3 ? others[3] : others[0];

    QuestionnaireItem item;
    item.id = ex.id;
    item.question = ex.question;
    item.answer = ex.answer;
    item.chains = {correct, {{head, x1, answer}}, {{head, bridge, y1}}, {{head, x2, y2}}};
    std::vector<std::size_t> order = {0, 1, 2, 3};
    rng.shuffle(order);
    std::vector<ReasoningChain> shuffled;
    for (std::size_t i = 0; i < 4; ++i) {
      shuffled.push_back(item.chains[order[i]]);
      if (order[i] == 0) item.key = i;
    }
    item.chains = std::move(shuffled);
    if (aid == AidKind::SupportingFacts) {
      for (const auto& f : ex.supporting_facts) {
        item.aid.push_back(ex.find_paragraph(f.title)->sentences.at(f.sentence_index));
      }
    } else {
      auto it = subquestions.find(ex.id);
      if (it == subquestions.end()) throw InvalidArgument("no sub-questions for " + ex.id);
      item.aid = {it->second.s_a, it->second.s_b};
    }
    q.items.push_back(std::move(item));
  }
  return q;
}

double SteadyQuizClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::optional<std::size_t> ScriptedQuizIO::choose(const QuestionnaireItem&) {
  if (next_ >= choices_.size()) return std::nullopt;
  return choices_[next_++];
}

double ScriptedQuizClock::now() {
  if (!started_) {
    started_ = true;
    return t_;
  }
  if (next_ < steps_.size()) t_ += steps_[next_++];
  return t_;
}

void TerminalQuizIO::show(const QuestionnaireItem& item, std::size_t index, std::size_t total, AidKind aid) {
  out_ << "\n[" << index + 1 << "/" << total << "] " << item.question << "\n"
       << "Answer: " << item.answer << "\n"
       << (aid == AidKind::SupportingFacts ? "Supporting facts:" : "Sub-questions:") << "\n";
  for (const auto& line : item.aid) out_ << "  - " << line << "\n";
  for (std::size_t i = 0; i < item.chains.size(); ++i) out_ << "  " << i + 1 << ") " << to_string(item.chains[i]) << "\n";
}

std::optional<std::size_t> TerminalQuizIO::choose(const QuestionnaireItem& item) {
  for (;;) {
    out_ << "Choice (1-" << item.chains.size() << ", q to quit): " << std::flush;
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    line = collapse_whitespace(line);
    if (line == "q") return std::nullopt;
    if (line.size() == 1 && line[0] >= '1' && static_cast<std::size_t>(line[0] - '0') <= item.chains.size()) {
      return static_cast<std::size_t>(line[0] - '1');
    }
  }
}

QuestionnaireResult run_questionnaire(const Questionnaire& q, QuizIO& io, QuizClock& clock, const std::string& group) {
  QuestionnaireResult r;
  r.group = group;
  r.item_count = q.items.size();
  r.complete = true;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < q.items.size(); ++i) {
    const auto& item = q.items[i];
    ItemRecord rec;
    rec.id = item.id;
    io.show(item, i, q.items.size(), q.aid);
    rec.shown_at = clock.now();
    const auto choice = io.choose(item);
    if (!choice) {
      r.complete = false;
      break;
    }
    rec.answered_at = clock.now();
    rec.choice = *choice;
    rec.correct = *choice == item.key;
    correct += rec.correct ? 1 : 0;
    r.elapsed += rec.elapsed();
    r.items.push_back(rec);
  }
  r.accuracy = r.items.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(r.items.size());
  return r;
}

std::string serialize_session(const QuestionnaireResult& r) {
  nlohmann::ordered_json head;
  head["format"] = "hopqg-quiz-session";
  head["group"] = r.group;
  head["items"] = r.item_count;
  head["complete"] = r.complete;
  std::string out = head.dump() + "\n";
  for (const auto& rec : r.items) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["shown_at"] = rec.shown_at;
    j["answered_at"] = rec.answered_at;
    j["choice"] = rec.choice;
    j["correct"] = rec.correct;
    out += j.dump() + "\n";
  }
  return out;
}

QuestionnaireResult parse_session(std::string_view text) {
  QuestionnaireResult r;
  std::istringstream in{std::string(text)};
  std::string line;
  try {
    if (!std::getline(in, line)) throw DataError("empty session log");
    const auto head = nlohmann::json::parse(line);
    if (head.at("format").get<std::string>() != "hopqg-quiz-session") throw DataError("not a session log");
    r.group = head.at("group").get<std::string>();
    r.item_count = head.at("items").get<std::size_t>();
    r.complete = head.at("complete").get<bool>();
    std::size_t correct = 0;
    while (std::getline(in, line)) {
      if (collapse_whitespace(line).empty()) continue;
      const auto j = nlohmann::json::parse(line);
      ItemRecord rec;
      rec.id = j.at("id").get<std::string>();
      rec.shown_at = j.at("shown_at").get<double>();
      rec.answered_at = j.at("answered_at").get<double>();
      rec.choice = j.at("choice").get<std::size_t>();
      rec.correct = j.at("correct").get<bool>();
      correct += rec.correct ? 1 : 0;
      r.elapsed += rec.elapsed();
      r.items.push_back(rec);
    }
    r.accuracy = r.items.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(r.items.size());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("session log: ") + e.what());
  }
  return r;
}

std::vector<QuestionnaireResult> parse_sessions(std::string_view text) {
  std::vector<QuestionnaireResult> out;
  std::string current;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.find("\"hopqg-quiz-session\"") != std::string::npos && !current.empty()) {
      out.push_back(parse_session(current));
      current.clear();
    }
    current += line + "\n";
  }
  if (!collapse_whitespace(current).empty()) out.push_back(parse_session(current));
  return out;
}

GroupSummary summarize_group(const std::string& group, const std::vector<QuestionnaireResult>& sessions) {
  GroupSummary s;
  s.group = group;
  s.sessions = sessions.size();
  double total_time = 0.0;
  for (const auto& r : sessions) {
    s.answered += r.items.size();
    for (const auto& rec : r.items) s.correct += rec.correct ? 1 : 0;
    total_time += r.elapsed;
  }
  s.accuracy = s.answered ? static_cast<double>(s.correct) / static_cast<double>(s.answered) : 0.0;
  s.mean_elapsed = s.sessions ? total_time / static_cast<double>(s.sessions) : 0.0;
  return s;
}

}  // namespace hopqg
