#include <cmath>

#include "doctest.h"
#include "hopqg/error.hpp"
#include "hopqg/quality.hpp"

using namespace hopqg;

namespace {

SubQuestionPair pair_of(std::string a, std::string b) {
  SubQuestionPair p;
  p.s_a = std::move(a);
  p.s_b = std::move(b);
  return p;
}

class ConstantScorer final : public FluencyScorer {
 public:
  std::string name() const override { return "constant"; }
  std::vector<double> score(const std::vector<std::string>& texts) const override {
    calls += texts.size();
    return std::vector<double>(texts.size(), -2.5);
  }
  mutable std::size_t calls = 0;
};

}  // namespace

TEST_CASE("diversity of the Euromarche pair counts four novel words out of seventeen") {
  const std::string q =
      "In 1991 Euromarche was bought by a chain that operated how any hypermarkets at the end of 2016?";
  const auto d = diversity_score(pair_of("In 1991 Euromarche was bought by which chain?",
                                         "Carrefour's oprated how many hypermarkets at the end of 2016?"),
                                 q);
  CHECK(d.novel == 4);
  CHECK(d.distinct == 17);
  CHECK(d.ratio == doctest::Approx(4.0 / 17.0));
}

TEST_CASE("diversity bounds") {
  CHECK(diversity_score(pair_of("who is he", "he is who"), "Who is he?").ratio == 0.0);
  CHECK(diversity_score(pair_of("red blue", "green"), "Who is he?").ratio == 1.0);
  CHECK(diversity_score(pair_of("", ""), "Who is he?").ratio == 0.0);
  // 8 distinct words, 2 new ones.
  const auto d = diversity_score(pair_of("alpha beta gamma delta", "epsilon zeta eta theta"),
                                 "alpha beta gamma delta epsilon zeta omega");
  CHECK(d.distinct == 8);
  CHECK(d.novel == 2);
  CHECK(d.ratio == doctest::Approx(0.25));
}

TEST_CASE("pairwise comparison matches a hand tally") {
  const std::vector<double> a = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<double> b = {0, 2, 4, 3, 5, 7, 6, 8.5, 1, 10};
  // win: 0,3,6,8  tie: 1,4,9  loss: 2,5,7
  const auto c = compare_pairwise(a, b);
  CHECK(c.wins == 4);
  CHECK(c.ties == 3);
  CHECK(c.losses == 3);
  CHECK(c.count == 10);
  CHECK(c.win + c.tie + c.loss == doctest::Approx(1.0));

  const auto same = compare_pairwise(a, a);
  CHECK(same.tie == 1.0);
  const auto all = compare_pairwise(a, std::vector<double>(10, -1));
  CHECK(all.win == 1.0);
  CHECK(compare_pairwise({1.0}, {1.5}, 1.0).ties == 1);
  CHECK(compare_pairwise({}, {}).win == 0.0);
  CHECK_THROWS_AS(compare_pairwise({1, 2}, {1}), LengthMismatch);
}

TEST_CASE("fluency floors empty text and needs a scorer") {
  ConstantScorer s;
  const auto r = fluency_scores({"a question ?", "   ", ""}, &s);
  REQUIRE(r.size() == 3);
  CHECK(r[0].score == -2.5);
  CHECK_FALSE(r[0].floor);
  CHECK(r[1].score == kFluencyFloor);
  CHECK(r[2].floor);
  CHECK(s.calls == 1);
  CHECK(r[0].scorer == "constant");
  CHECK_THROWS_AS(fluency_score("text", nullptr), ScorerUnavailable);
}

TEST_CASE("external scorer reads one score per line") {
  ExternalProcessScorer ok("awk '{print NF}'");
  const auto scores = ok.score({"one two", "three"});
  CHECK(scores == std::vector<double>{2, 1});
  CHECK_THROWS_AS(ExternalProcessScorer("exit 3").score({"x"}), ScorerUnavailable);
  CHECK_THROWS_AS(ExternalProcessScorer("echo nope").score({"x"}), ScorerUnavailable);
  CHECK_THROWS_AS(ExternalProcessScorer("echo 1; echo 2").score({"x"}), ScorerUnavailable);
}

TEST_CASE("attention delta counts supporting sentences whose weight rose") {
  const auto d = attention_delta({{0.5, 0.2, 0.3}, {0.4, 0.6}}, {{0.4, 0.9, 0.3}, {0.1, 0.5}},
                                 {{true, false, true}, {true, true}});
  CHECK(d.total == 4);
  CHECK(d.increased == 3);  // the 0.3 tie does not count
  CHECK(d.ratio == doctest::Approx(0.75));
  const std::vector<std::vector<double>> w = {{0.1, 0.2}};
  CHECK(attention_delta(w, w, {{true, true}}).ratio == 0.0);
  CHECK_THROWS_AS(attention_delta(w, {{0.1}}, {{true, true}}), LengthMismatch);
}

TEST_CASE("sentence attention averages received weight over tokens") {
  nn::AttentionMaps maps;
  maps.rows = maps.cols = 4;
  // Head 0 sends everything to column 2, head 1 to column 3.
  std::vector<double> h0(16, 0.0), h1(16, 0.0);
  for (int i = 0; i < 4; ++i) {
    h0[i * 4 + 2] = 1.0;
    h1[i * 4 + 3] = 1.0;
  }
  maps.heads = {h0, h1};
  const auto s = sentence_attention(maps, 1, {{0, 1}, {1, 3}});
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(sentence_attention(maps, 1, {{2, 4}}), ShapeMismatch);
}
