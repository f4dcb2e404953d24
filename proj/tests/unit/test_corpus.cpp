#include <set>

#include "doctest.h"
#include "json.hpp"
#include "helpers.hpp"
#include "hopqg/error.hpp"
#include "hopqg/text.hpp"

using namespace hopqg;
using hopqg::testing::worked_example;

namespace {

const char* kOneExample = R"([{
  "_id": "x1",
  "question": "2014 S/S is the debut album of a South Korean boy group that was formed by who?",
  "answer": "YG Entertainment", "type": "bridge", "level": "hard",
  "supporting_facts": [["2014 S/S", 0], ["Winner", 0]],
  "context": [
    ["2014 S/S", ["2014 S/S is the debut album of South Korean group WINNER."]],
    ["Winner", ["Winner, often stylized as WINNER, is a South Korean boy group formed in 2013 by YG Entertainment and debuted in 2014."]],
    ["P3", ["Three."]], ["P4", ["Four."]], ["P5", ["Five."]], ["P6", ["Six."]],
    ["P7", ["Seven."]], ["P8", ["Eight."]], ["P9", ["Nine."]], ["P10", ["Ten."]]
  ]}])";

}  // namespace

TEST_CASE("tokenize splits punctuation and keeps case") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("Flinders University founded in what year?") ==
        std::vector<std::string>{"Flinders", "University", "founded", "in", "what", "year", "?"});
  CHECK(tokenize("Carrefour's oprated") == std::vector<std::string>{"Carrefour", "'", "s", "oprated"});
  CHECK(tokenize("2014 S/S") == std::vector<std::string>{"2014", "S", "/", "S"});
  CHECK(tokenize("Jørgen Leth") == std::vector<std::string>{"Jørgen", "Leth"});
}

TEST_CASE("tokenize_with_offsets points back into the text") {
  const std::string text = "Winner, often stylized as WINNER, is";
  for (const auto& t : tokenize_with_offsets(text)) CHECK(text.substr(t.begin, t.end - t.begin) == t.text);
}

TEST_CASE("detokenize inverts tokenize on tokenizer output") {
  for (const char* s : {"Carrefour's oprated how many hypermarkets at the end of 2016?", "2014 S/S is the debut album.",
                        "Winner, often stylized as WINNER, is a group (formed in 2013).", "a - b", "\"quoted\" text"}) {
    const auto tokens = tokenize(s);
    CHECK(tokenize(detokenize(tokens)) == tokens);
  }
  CHECK(detokenize(tokenize("Flinders University founded in what year?")) == "Flinders University founded in what year?");
  CHECK(detokenize(tokenize("2014 S/S")) == "2014 S/S");
}

TEST_CASE("format_fixed rounds halves away from zero") {
  CHECK(format_fixed(65.625, 2) == "65.63");
  CHECK(format_fixed(-13.6185, 2) == "-13.62");
  CHECK(format_fixed(981.0, 0) == "981");
  CHECK(format_fixed(0.0, 2) == "0.00");
}

TEST_CASE("parse_dataset reads the distractor layout") {
  const auto examples = parse_dataset(kOneExample);
  REQUIRE(examples.size() == 1);
  CHECK(examples[0].qtype == QuestionType::Bridge);
  CHECK(examples[0].answer == "YG Entertainment");
  CHECK(examples[0].context.size() == 10);
  CHECK(examples[0].gold_titles() == std::vector<std::string>{"2014 S/S", "Winner"});
  CHECK(parse_dataset("[]").empty());
}

TEST_CASE("parse_dataset rejects dangling supporting facts and malformed records") {
  auto doc = nlohmann::json::parse(kOneExample);
  doc[0]["context"].erase(1);
  const std::string broken = doc.dump();
  CHECK_THROWS_AS(parse_dataset(broken), DanglingSupportingFact);
  CHECK_THROWS_AS(parse_dataset("{}"), MalformedRecord);
  CHECK_THROWS_AS(parse_dataset("[{\"_id\": \"a\"}]"), MalformedRecord);
  CHECK_THROWS_AS(parse_dataset("not json"), MalformedRecord);
}

TEST_CASE("serialize_dataset round-trips") {
  const auto& examples = hopqg::testing::worked_examples();
  CHECK(parse_dataset(serialize_dataset(examples)) == examples);
  CHECK(serialize_dataset(parse_dataset(serialize_dataset(examples))) == serialize_dataset(examples));
}

TEST_CASE("build_vocabulary") {
  SUBCASE("empty corpus holds only reserved tokens") {
    const Vocabulary v = build_vocabulary({}, 1);
    CHECK(v.size() == Vocabulary::kNumReserved);
  }
  SUBCASE("min_count 1 covers every distinct token exactly once") {
    const auto& ex = hopqg::testing::worked_examples();
    const std::vector<HotpotExample> two(ex.begin(), ex.begin() + 2);
    const Vocabulary v = build_vocabulary(two, 1);
    std::set<std::string> distinct;
    for (const auto& e : two) {
      for (const auto& t : tokenize(e.question)) distinct.insert(t);
      for (const auto& t : tokenize(e.answer)) distinct.insert(t);
      for (const auto& p : e.context) {
        for (const auto& t : tokenize(p.title)) distinct.insert(t);
        for (const auto& s : p.sentences)
          for (const auto& t : tokenize(s)) distinct.insert(t);
      }
    }
    CHECK(v.size() == Vocabulary::kNumReserved + distinct.size());
    for (const auto& t : distinct) CHECK(v.contains(t));
  }
  SUBCASE("rare tokens map to unk under min_count 2") {
    const std::vector<HotpotExample> one = {worked_example("tata")};
    const Vocabulary v = build_vocabulary(one, 2);
    // "Mumbai" is both the answer and a context word.
    CHECK(v.contains("Mumbai"));
    CHECK(v.id("Kazan") == Vocabulary::kUnk);
    CHECK_THROWS_AS(build_vocabulary(one, 0), InvalidArgument);
  }
  SUBCASE("ordering is frequency then lexicographic") {
    const std::vector<HotpotExample> one = {worked_example("gebbie")};
    const Vocabulary v = build_vocabulary(one, 1);
    CHECK(Vocabulary::from_tokens(std::vector<std::string>(v.tokens().begin() + Vocabulary::kNumReserved,
                                                           v.tokens().end())) == v);
    CHECK(v.hash() == build_vocabulary(one, 1).hash());
  }
}

TEST_CASE("locate_answer") {
  const HotpotExample& tata = worked_example("tata");
  const Vocabulary vocab = build_vocabulary(hopqg::testing::worked_examples(), 1);

  SUBCASE("span over the second-hop answer token") {
    const TokenizedExample tok = locate_answer(tata, vocab);
    REQUIRE(tok.answer_span);
    CHECK(tok.answer_type == AnswerType::Span);
    CHECK(tok.answer_span->first == tok.answer_span->second);
    CHECK(tok.context_tokens[tok.answer_span->first].text == "Mumbai");
    const SentenceSlot& slot = tok.sentences[tok.context_tokens[tok.answer_span->first].slot];
    CHECK(slot.supporting);
    CHECK(slot.sentence == 1);
    CHECK(tok.span_text(tata, tok.answer_span->first, tok.answer_span->second) == "Mumbai");
  }
  SUBCASE("multi-token span text uses the source bytes") {
    const HotpotExample& w = worked_example("winner");
    const TokenizedExample tok = locate_answer(w, vocab);
    REQUIRE(tok.answer_span);
    CHECK(tok.span_text(w, tok.answer_span->first, tok.answer_span->second) == "YG Entertainment");
  }
  SUBCASE("yes/no answers carry no span") {
    HotpotExample yes = worked_example("icelandic");
    yes.answer = "yes";
    const TokenizedExample tok = locate_answer(yes, vocab);
    CHECK(tok.answer_type == AnswerType::Yes);
    CHECK_FALSE(tok.answer_span);
    CHECK(locate_answer(worked_example("icelandic"), vocab).answer_type == AnswerType::No);
  }
  SUBCASE("an answer outside the supporting sentences is flagged") {
    HotpotExample bad = tata;
    bad.answer = "Chennai";
    const TokenizedExample tok = locate_answer(bad, vocab);
    CHECK(tok.answer_unlocatable);
    CHECK_FALSE(tok.answer_span);
  }
  SUBCASE("truncation drops distractors, never gold paragraphs") {
    const TokenizedExample full = locate_answer(tata, vocab);
    const TokenizedExample cut = locate_answer(tata, vocab, full.question_ids.size() + 40);
    CHECK(cut.total_length() <= full.question_ids.size() + 40);
    CHECK(cut.kept_paragraphs.size() < full.kept_paragraphs.size());
    CHECK(cut.kept_paragraphs[0] == 0);
    CHECK(cut.kept_paragraphs[1] == 1);
    CHECK_THROWS_AS(locate_answer(tata, vocab, 20), SequenceTooLong);
  }
  SUBCASE("tokenized file round-trips") {
    std::vector<TokenizedExample> toks;
    for (const auto& ex : hopqg::testing::worked_examples()) toks.push_back(locate_answer(ex, vocab));
    const std::string text = serialize_tokenized(vocab, toks, kDefaultMaxSeqLen);
    const TokenizedDataset back = parse_tokenized(text);
    CHECK(back.vocab == vocab);
    REQUIRE(back.examples.size() == toks.size());
    CHECK(serialize_tokenized(back.vocab, back.examples, back.max_seq_len) == text);
    CHECK_THROWS_AS(parse_tokenized(""), DataError);
  }
}
