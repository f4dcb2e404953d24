#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "hopqg/error.hpp"
#include "hopqg/questionnaire.hpp"
#include "hopqg/report.hpp"
#include "hopqg/text.hpp"

using namespace hopqg;
using hopqg::testing::worked_example;

namespace {

std::vector<HotpotExample> bridge_examples() {
  std::vector<HotpotExample> out;
  for (const auto& ex : hopqg::testing::fixture32()) {
    if (ex.qtype == QuestionType::Bridge) out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST_CASE("reasoning chain of the boy-group example") {
  CHECK(to_string(reasoning_chain(worked_example("winner"))) == "2014 S/S → WINNER → YG Entertainment");
  CHECK_THROWS_AS(reasoning_chain(worked_example("icelandic")), InvalidArgument);
}

TEST_CASE("questionnaire items have four distinct chains, one of them correct") {
  const auto examples = bridge_examples();
  const Questionnaire q = build_questionnaire(examples, 8, AidKind::SupportingFacts, 5);
  REQUIRE(q.items.size() == 8);
  for (std::size_t i = 0; i < q.items.size(); ++i) {
    const auto& item = q.items[i];
    CHECK(item.id == examples[i].id);
    REQUIRE(item.chains.size() == 4);
    std::set<std::string> distinct;
    for (const auto& c : item.chains) distinct.insert(to_string(c));
    CHECK(distinct.size() == 4);
    CHECK(item.chains.at(item.key) == reasoning_chain(examples[i]));
    CHECK(item.aid.size() == examples[i].supporting_facts.size());
  }
  CHECK(build_questionnaire(examples, 0, AidKind::SupportingFacts, 5).items.empty());
  const Questionnaire again = build_questionnaire(examples, 8, AidKind::SupportingFacts, 5);
  for (std::size_t i = 0; i < 8; ++i) CHECK(again.items[i].key == q.items[i].key);
}

TEST_CASE("sub-question aid needs a pair for every item") {
  const auto& ex = worked_example("winner");
  SubQuestionPair p;
  p.s_a = "2014 S/S is the debut album of which group?";
  p.s_b = "WINNER was formed by who?";
  const Questionnaire q = build_questionnaire({ex}, 1, AidKind::SubQuestions, 1, {{ex.id, p}});
  CHECK(q.items[0].aid == std::vector<std::string>{p.s_a, p.s_b});
  CHECK_THROWS_AS(build_questionnaire({ex}, 1, AidKind::SubQuestions, 1), InvalidArgument);
}

TEST_CASE("too few confusing entities is reported") {
  HotpotExample ex = worked_example("winner");
  ex.context.resize(2);
  CHECK_THROWS_AS(build_questionnaire({ex}, 1, AidKind::SupportingFacts, 1), InsufficientDistractors);
}

TEST_CASE("scripted sessions score and time each item") {
  const Questionnaire q = build_questionnaire(bridge_examples(), 4, AidKind::SupportingFacts, 9);
  std::vector<std::size_t> right, wrong;
  for (const auto& item : q.items) {
    right.push_back(item.key);
    wrong.push_back((item.key + 1) % 4);
  }
  ScriptedQuizIO io_right(right);
  // Each item is shown then answered: steps alternate gap, think time.
  ScriptedQuizClock clock({10, 0, 20, 0, 30, 0, 40});
  const auto r = run_questionnaire(q, io_right, clock, "A");
  CHECK(r.complete);
  CHECK(r.accuracy == 1.0);
  REQUIRE(r.items.size() == 4);
  CHECK(r.items[0].elapsed() == 10);
  CHECK(r.items[3].elapsed() == 40);
  CHECK(r.elapsed == 100);

  ScriptedQuizIO io_wrong(wrong);
  ScriptedQuizClock clock2(std::vector<double>(8, 1.0));
  CHECK(run_questionnaire(q, io_wrong, clock2).accuracy == 0.0);

  ScriptedQuizIO io_short({right[0], right[1]});
  ScriptedQuizClock clock3({});
  const auto partial = run_questionnaire(q, io_short, clock3, "B");
  CHECK_FALSE(partial.complete);
  CHECK(partial.items.size() == 2);
  CHECK(partial.item_count == 4);
}

TEST_CASE("session logs round-trip") {
  const Questionnaire q = build_questionnaire(bridge_examples(), 3, AidKind::SupportingFacts, 2);
  ScriptedQuizIO io({0, 1, 2});
  ScriptedQuizClock clock({1.5, 0.25, 2.0, 0.0, 3.0});
  const auto r = run_questionnaire(q, io, clock, "B");
  const auto back = parse_session(serialize_session(r));
  CHECK(back.group == "B");
  CHECK(back.complete);
  CHECK(back.items.size() == 3);
  CHECK(back.elapsed == r.elapsed);
  CHECK(back.accuracy == r.accuracy);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.items[i].id == r.items[i].id);
    CHECK(back.items[i].choice == r.items[i].choice);
    CHECK(back.items[i].correct == r.items[i].correct);
  }
  const auto two = parse_sessions(serialize_session(r) + serialize_session(r));
  CHECK(two.size() == 2);
  CHECK_THROWS_AS(parse_session("{\"format\":\"other\"}\n"), DataError);
  CHECK_THROWS_AS(parse_session(""), DataError);
}

TEST_CASE("stored group logs summarise to the published averages") {
  const auto a = summarize_group("A", parse_sessions(read_file(hopqg::testing::data_path("group_a.jsonl"))));
  const auto b = summarize_group("B", parse_sessions(read_file(hopqg::testing::data_path("group_b.jsonl"))));
  CHECK(a.sessions == 8);
  CHECK(a.correct == 42);
  CHECK(a.answered == 64);
  CHECK(a.mean_elapsed == doctest::Approx(981.0));
  CHECK(b.correct == 55);
  CHECK(b.mean_elapsed == doctest::Approx(543.0));
  CHECK(render_table3({a, b}, {"A (Support Facts)", "B (Sub-questions)"}) ==
        "Group              Accuracy  Time(s)\n"
        "------------------------------------\n"
        "A (Support Facts)    65.63%      981\n"
        "B (Sub-questions)    85.94%      543\n");
}
