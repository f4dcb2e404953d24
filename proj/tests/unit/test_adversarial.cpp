#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "perturb_check.hpp"
#include "hopqg/adversarial.hpp"
#include "hopqg/error.hpp"
#include "hopqg/model.hpp"

using namespace hopqg;
using hopqg::testing::worked_example;
using hopqg::testing::structure_preserved;

namespace {

PerturbationPlan plan_for(const HotpotExample& ex, std::size_t k, std::uint64_t seed = 7) {
  const TokenizedExample tok = locate_answer(ex, Vocabulary{});
  const auto graph = example_graph(ex, tok);
  return plan_perturbation(ex, tok, graph ? &*graph : nullptr, build_entity_pool(hopqg::testing::worked_examples()), k,
                           seed);
}

}  // namespace

TEST_CASE("plan for the boy-group example targets the bridge and the answer") {
  const PerturbationPlan plan = plan_for(worked_example("winner"), 4);
  CHECK(plan.template_fact.title == "Winner");
  CHECK(plan.template_fact.sentence_index == 0);
  std::vector<std::string> originals;
  for (const auto& s : plan.slots) originals.push_back(s.original);
  CHECK(originals == std::vector<std::string>{"Winner", "WINNER", "YG Entertainment"});
  CHECK(plan.group_count == 2);
  CHECK(plan.slots[0].group == plan.slots[1].group);
  CHECK(plan.slots[2].group != plan.slots[0].group);
  REQUIRE(plan.substitutions.size() == 4);
  for (const auto& row : plan.substitutions) {
    CHECK(row[0] != "Winner");
    CHECK(row[1].find("YG Entertainment") == std::string::npos);
  }
}

TEST_CASE("noisy fact with fixed picks reproduces the published rewrite") {
  PerturbationPlan plan = plan_for(worked_example("winner"), 1);
  const std::size_t bridge = plan.slots[0].group, answer = plan.slots[2].group;
  plan.substitutions[0][bridge] = "Juarez";
  plan.substitutions[0][answer] = "YG Arthur";
  CHECK(noisy_fact(plan, 0) ==
        "Juarez, often stylized as Juarez, is a South Korean boy group formed in 2013 by YG Arthur and debuted in 2014.");
  plan.substitutions[0][bridge] = "Epic";
  plan.substitutions[0][answer] = "YG Republic";
  CHECK(noisy_fact(plan, 0) ==
        "Epic, often stylized as Epic, is a South Korean boy group formed in 2013 by YG Republic and debuted in 2014.");
}

TEST_CASE("multi-word answers keep their leading words") {
  const PerturbationPlan plan = plan_for(worked_example("winner"), 4);
  const std::size_t answer = plan.slots[2].group;
  for (const auto& row : plan.substitutions) {
    CHECK(row[answer].rfind("YG ", 0) == 0);
    CHECK(row[answer] != "YG Entertainment");
  }
}

TEST_CASE("apply_perturbation keeps gold data and adds k facts") {
  const HotpotExample& ex = worked_example("winner");
  const PerturbationPlan plan = plan_for(ex, 4);
  const HotpotExample noisy = apply_perturbation(ex, plan);
  CHECK(noisy.answer == ex.answer);
  CHECK(noisy.question == ex.question);
  CHECK(noisy.supporting_facts == ex.supporting_facts);
  for (const auto& title : ex.gold_titles()) {
    REQUIRE(noisy.find_paragraph(title));
    CHECK(*noisy.find_paragraph(title) == *ex.find_paragraph(title));
  }
  CHECK(noisy.context.size() == 10);
  const Paragraph& added = noisy.context.back();
  CHECK(added.title == plan.substitutions[0][plan.slots[0].group]);
  REQUIRE(added.sentences.size() == 4);
  for (std::size_t f = 0; f < 4; ++f) {
    CHECK(added.sentences[f] == noisy_fact(plan, f));
    CHECK(structure_preserved(plan, f, added.sentences[f]));
    CHECK(added.sentences[f].find("YG Entertainment") == std::string::npos);
  }
  // Without dropping, the extra paragraph is simply appended.
  CHECK(apply_perturbation(ex, plan, {10, false}).context.size() == 11);
}

TEST_CASE("k = 0 leaves the example as is") {
  const HotpotExample& ex = worked_example("winner");
  const PerturbationPlan plan = plan_for(ex, 0);
  CHECK(plan.substitutions.empty());
  CHECK(apply_perturbation(ex, plan) == ex);
}

TEST_CASE("plans are seeded") {
  const HotpotExample& ex = worked_example("gebbie");
  CHECK(plan_for(ex, 3, 1).substitutions == plan_for(ex, 3, 1).substitutions);
}

TEST_CASE("comparison questions have no two-entity chain") {
  CHECK_THROWS_AS(plan_for(worked_example("icelandic"), 2), NoChainEntities);
}

TEST_CASE("pool must cover k distinct picks") {
  const HotpotExample& ex = worked_example("winner");
  const TokenizedExample tok = locate_answer(ex, Vocabulary{});
  const auto graph = example_graph(ex, tok);
  CHECK_THROWS_AS(plan_perturbation(ex, tok, &*graph, {"Juarez"}, 3, 1), NoChainEntities);
}

TEST_CASE("perturbed fixture preserves every answer, fact and gold paragraph") {
  const auto& fixture = hopqg::testing::fixture32();
  const PerturbedDataset noisy = perturb_dataset(fixture, 4, 5);
  REQUIRE(noisy.examples.size() == fixture.size());
  CHECK(noisy.plans.size() + noisy.skipped.size() == fixture.size());
  CHECK(noisy.plans.size() >= 20);
  std::size_t p = 0;
  for (std::size_t i = 0; i < fixture.size(); ++i) {
    const HotpotExample &a = fixture[i], &b = noisy.examples[i];
    CHECK(a.id == b.id);
    CHECK(a.answer == b.answer);
    CHECK(a.supporting_facts == b.supporting_facts);
    for (const auto& t : a.gold_titles()) CHECK(*a.find_paragraph(t) == *b.find_paragraph(t));
    CHECK_NOTHROW(parse_dataset(serialize_dataset(std::vector<HotpotExample>{b})));
    if (p < noisy.plans.size() && noisy.plans[p].source_id == a.id) {
      const auto& plan = noisy.plans[p++];
      for (std::size_t f = 0; f < plan.k; ++f) {
        CHECK(structure_preserved(plan, f, noisy_fact(plan, f)));
        CHECK(noisy_fact(plan, f).find(a.answer) == std::string::npos);
      }
      for (const auto& pick : plan.pool) {
        for (const auto& slot : plan.slots) CHECK(pick != slot.original);
      }
    } else {
      CHECK(a == b);
    }
  }
}
