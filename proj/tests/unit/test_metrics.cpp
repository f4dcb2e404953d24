#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "hopqg/metrics.hpp"
#include "hopqg/rng.hpp"
#include "json.hpp"
#include "metric_oracle.hpp"

using namespace hopqg;
using namespace hopqg::testing;

namespace {

std::set<SupportingFactRef> to_set(const std::vector<OracleFact>& v) {
  std::set<SupportingFactRef> s;
  for (const auto& [t, i] : v) s.insert({t, i});
  return s;
}

std::vector<OracleFact> facts_of(const nlohmann::json& j) {
  std::vector<OracleFact> out;
  for (const auto& f : j) out.emplace_back(f[0].get<std::string>(), f[1].get<std::size_t>());
  return out;
}

}  // namespace

TEST_CASE("normalize_answer") {
  CHECK(normalize_answer("The Five Obstructions") == "five obstructions");
  CHECK(normalize_answer("") == "");
  CHECK(normalize_answer("YG Entertainment.") == "yg entertainment");
  CHECK(normalize_answer("  a  Tale   of an Apple ") == "tale of apple");
}

TEST_CASE("answer metrics hand cases") {
  Score s = answer_metrics("YG Entertainment", "YG Entertainment");
  CHECK(s.em == 1.0);
  CHECK(s.f1 == 1.0);
  s = answer_metrics("Entertainment", "YG Entertainment");
  CHECK(s.em == 0.0);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 0.5);
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  s = answer_metrics("Mumbai", "Chennai");
  CHECK(s.em == 0.0);
  CHECK(s.f1 == 0.0);
  CHECK(answer_metrics("yes", "yes it is").f1 == 0.0);
  CHECK(answer_metrics("no", "No.").em == 1.0);
}

TEST_CASE("supporting fact and joint hand cases") {
  const std::set<SupportingFactRef> gold = {{"Winner", 0}, {"2014 S/S", 0}};
  Score s = supporting_fact_metrics(gold, gold);
  CHECK(s.em == 1.0);
  CHECK(s.f1 == 1.0);
  auto extra = gold;
  extra.insert({"Winner", 1});
  s = supporting_fact_metrics(extra, gold);
  CHECK(s.em == 0.0);
  CHECK(s.precision == doctest::Approx(2.0 / 3.0));
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(supporting_fact_metrics({{"X", 0}}, gold).f1 == 0.0);
  const Score joint = joint_metrics(answer_metrics("YG Entertainment", "YG Entertainment"), s);
  CHECK(joint.f1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(joint.em == 0.0);
  CHECK(joint_metrics(answer_metrics("a b", "a b"), supporting_fact_metrics(gold, gold)).em == 1.0);
}

TEST_CASE("the 50-pair fixture agrees with the brute-force oracle") {
  const auto doc = nlohmann::json::parse(read_file(data_path("metric_pairs.json")));
  REQUIRE(doc.size() == 50);
  for (const auto& rec : doc) {
    const std::string pred = rec["pred"], gold = rec["gold"];
    CAPTURE(pred);
    CAPTURE(gold);
    const auto ps = facts_of(rec["pred_sp"]), gs = facts_of(rec["gold_sp"]);
    const Score a = answer_metrics(pred, gold);
    const Score sp = supporting_fact_metrics(to_set(ps), to_set(gs));
    const Score j = joint_metrics(a, sp);
    const OracleScore oa = oracle_answer(pred, gold), os = oracle_support(ps, gs), oj = oracle_joint(oa, os);
    CHECK(a.em == oa.em);
    CHECK(std::abs(a.f1 - oa.f1) < 1e-12);
    CHECK(sp.em == os.em);
    CHECK(std::abs(sp.f1 - os.f1) < 1e-12);
    CHECK(j.em == oj.em);
    CHECK(std::abs(j.f1 - oj.f1) < 1e-12);
    if (rec.contains("expect")) {
      const auto& e = rec["expect"];
      CHECK(a.em == e["answer"][0].get<double>());
      CHECK(std::abs(a.f1 - e["answer"][1].get<double>()) < 1e-12);
      CHECK(sp.em == e["sp"][0].get<double>());
      CHECK(std::abs(sp.f1 - e["sp"][1].get<double>()) < 1e-12);
      CHECK(j.em == e["joint"][0].get<double>());
      CHECK(std::abs(j.f1 - e["joint"][1].get<double>()) < 1e-12);
    }
  }
}

TEST_CASE("metric properties on random short answers") {
  const std::vector<std::string> words = {"yg", "Entertainment", "the", "Mumbai", "a", "city", "city.", "boy", "Group"};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    auto draw = [&] {
      std::string s;
      const std::size_t n = rng.below(6);
      for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words[rng.below(words.size())];
      return s;
    };
    const std::string p = draw(), g = draw();
    const Score s = answer_metrics(p, g), t = answer_metrics(g, p);
    CHECK(s.f1 >= 0.0);
    CHECK(s.f1 <= 1.0);
    CHECK(std::abs(s.f1 - oracle_answer(p, g).f1) < 1e-12);
    // swapping swaps precision and recall
    CHECK(s.precision == doctest::Approx(t.recall));
    CHECK(s.f1 == doctest::Approx(t.f1));
    if (normalize_answer(p) == normalize_answer(g)) CHECK(s.f1 == 1.0);
  }
}

TEST_CASE("joint F1 is monotone in each component") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    Score a{0, 0, rng.uniform(), rng.uniform()}, b{0, 0, rng.uniform(), rng.uniform()};
    const double base = joint_metrics(a, b).f1;
    Score worse = a;
    worse.precision *= rng.uniform();
    CHECK(joint_metrics(worse, b).f1 <= base + 1e-15);
    worse = b;
    worse.recall *= rng.uniform();
    CHECK(joint_metrics(a, worse).f1 <= base + 1e-15);
  }
}

TEST_CASE("relative change") {
  CHECK(std::abs(*relative_change(55.66, 48.08) - (-13.6184)) < 0.001);
  CHECK(std::abs(*relative_change(69.34, 61.28) - (-11.6239)) < 0.001);
  CHECK(std::abs(*relative_change(57.79, 52.34) - (-9.4307)) < 0.001);
  CHECK(std::abs(*relative_change(71.36, 65.12) - (-8.7444)) < 0.001);
  CHECK(*relative_change(40.0, 40.0) == 0.0);
  CHECK_FALSE(relative_change(0.0, 5.0));
  MetricsReport r{0.5, 0.6, 0.2, 0.3, 0.1, 0.15, 10};
  const RobustnessDelta d = robustness_delta(r, r);
  for (auto v : {d.answer_em, d.answer_f1, d.sp_em, d.sp_f1, d.joint_em, d.joint_f1}) CHECK(*v == 0.0);
}

TEST_CASE("evaluate over a dataset and the prediction file format") {
  const auto& gold = worked_examples();
  PredictionSet perfect;
  for (const auto& ex : gold) {
    perfect.answers[ex.id] = ex.answer;
    perfect.supporting[ex.id] = {ex.supporting_facts.begin(), ex.supporting_facts.end()};
  }
  const MetricsReport r = evaluate(perfect, gold);
  CHECK(r.count == gold.size());
  for (double v : {r.answer_em, r.answer_f1, r.sp_em, r.sp_f1, r.joint_em, r.joint_f1}) CHECK(v == 1.0);
  PredictionSet partial = perfect;
  partial.answers.erase(gold[0].id);
  partial.supporting.erase(gold[0].id);
  CHECK(evaluate(partial, gold).answer_em == doctest::Approx(1.0 - 1.0 / gold.size()));
  const std::string text = serialize_predictions(perfect);
  const PredictionSet back = parse_predictions(text);
  CHECK(back.answers == perfect.answers);
  CHECK(back.supporting == perfect.supporting);
  CHECK(serialize_predictions(back) == text);
}
