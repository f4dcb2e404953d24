#include "hopqg/decomposer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iostream>
#include <set>

#include "hopqg/error.hpp"
#include "json.hpp"

namespace hopqg {

namespace {

const std::set<std::string> kInterrogatives = {"what", "which", "who", "whom", "whose",
                                               "when", "where", "how", "why"};
const std::set<std::string> kDeterminers = {"a", "an", "the"};
const std::set<std::string> kRelativizers = {"that", "which", "who", "whom", "whose"};
const std::set<std::string> kPrepositions = {"in", "on", "at", "by", "for", "from", "of", "with",
                                             "to", "into", "near", "during", "since", "as"};
const std::set<std::string> kParticiples = {"born", "founded", "known", "made", "written",
                                            "built", "located", "based", "held", "run",
                                            "led", "sung", "shot", "set", "owned", "given"};
const std::set<std::string> kCopulas = {"is", "are", "was", "were", "am"};
const std::set<std::string> kAuxiliaries = {"do", "does", "did", "are", "is", "were",
                                            "was", "have", "has", "had"};
const std::set<std::string> kNameFunctionWords = {"of", "the", "a", "an", "and", "in", "on", "for",
                                                  "de", "to", "at", "with", "&", "'", "-", "s"};

bool in(const std::set<std::string>& s, std::string_view token) { return s.count(to_lower(token)) > 0; }

bool looks_verbal(std::string_view token) {
  std::string t = to_lower(token);
  if (kParticiples.count(t) > 0) return true;
  if (starts_upper(token)) return false;
  return t.size() > 3 && (t.ends_with("ed") || t.ends_with("en"));
}

std::vector<std::string> slice(std::span<const std::string> tokens, TokenRange r) {
  return {tokens.begin() + static_cast<long>(r.begin), tokens.begin() + static_cast<long>(r.end)};
}

std::string join(std::span<const std::string> tokens, TokenRange r) { return detokenize(slice(tokens, r)); }

SpanSegmentation segment_bridge(std::span<const std::string> t) {
  const std::size_t n = t.size();
  std::optional<std::size_t> cue;
  for (std::size_t i = 0; i < n; ++i) {
    if (in(kInterrogatives, t[i])) cue = i;
  }
  if (!cue) throw SegmentationFailed("no interrogative cue");
  if (*cue == 0) throw SegmentationFailed("interrogative cue opens the question; no head clause");

  std::optional<std::size_t> det;
  for (std::size_t i = 1; i < *cue; ++i) {
    if (in(kDeterminers, t[i])) det = i;
  }
  if (!det) throw SegmentationFailed("no determiner-introduced noun phrase before the cue");

  std::size_t np_end = *det + 1;
  while (np_end < *cue && !in(kRelativizers, t[np_end]) && !in(kPrepositions, t[np_end]) &&
         !in(kCopulas, t[np_end]) && !looks_verbal(t[np_end]) && !is_punct_token(t[np_end])) {
    ++np_end;
  }
  if (np_end == *det + 1) throw SegmentationFailed("empty head noun phrase");
  if (np_end >= *cue) throw SegmentationFailed("no clause between the noun phrase and the cue");

  std::size_t tail_begin = np_end;
  if (in(kRelativizers, t[tail_begin])) ++tail_begin;
  if (tail_begin >= n) throw SegmentationFailed("empty tail clause");

  SpanSegmentation seg;
  seg.qtype = QuestionType::Bridge;
  seg.spans = {{0, np_end}, {tail_begin, n}};
  seg.roles = {SpanRole::Head, SpanRole::Tail};
  return seg;
}

SpanSegmentation segment_comparison(std::span<const std::string> t) {
  const std::size_t n = t.size();
  if (n < 5 || !in(kAuxiliaries, t[0])) throw SegmentationFailed("comparison must open with an auxiliary");
  std::size_t conj = 0;
  for (std::size_t i = 2; i < n; ++i) {
    if (to_lower(t[i]) == "and") {
      conj = i;
      break;
    }
  }
  if (conj == 0) throw SegmentationFailed("no conjunction between entities");

  std::size_t e2_end = conj + 1;
  while (e2_end < n) {
    const auto& tok = t[e2_end];
    bool name_part = starts_upper(tok) || std::isdigit(static_cast<unsigned char>(tok[0])) != 0 ||
                     in(kNameFunctionWords, tok);
    if (!name_part) break;
    ++e2_end;
  }
  if (e2_end == conj + 1) throw SegmentationFailed("empty second entity");
  while (e2_end > conj + 1 && in(kNameFunctionWords, t[e2_end - 1])) --e2_end;

  std::size_t end = n;
  if (end > 0 && t[end - 1] == "?") --end;
  std::optional<std::size_t> keyword;
  for (std::size_t i = e2_end; i < end; ++i) {
    std::string w = to_lower(t[i]);
    if (w == "different" || w == "same") {
      keyword = i;
      break;
    }
  }
  if (!keyword) throw SegmentationFailed("no comparison keyword (different/same)");
  if (*keyword + 1 >= end) throw SegmentationFailed("empty target property");

  SpanSegmentation seg;
  seg.qtype = QuestionType::Comparison;
  seg.spans = {{1, conj}, {conj + 1, e2_end}, {*keyword + 1, end}};
  seg.roles = {SpanRole::Entity1, SpanRole::Entity2, SpanRole::Property};
  return seg;
}

}  // namespace

const TokenRange& SpanSegmentation::span(SpanRole role) const {
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == role) return spans[i];
  }
  throw InvalidArgument("segmentation has no span with the requested role");
}

SpanSegmentation RuleSegmenter::segment(std::span<const std::string> tokens, QuestionType qtype) const {
  return qtype == QuestionType::Bridge ? segment_bridge(tokens) : segment_comparison(tokens);
}

SpanSegmentation segment_question(std::span<const std::string> question_tokens, QuestionType qtype) {
  return RuleSegmenter{}.segment(question_tokens, qtype);
}

std::string span_text(const SpanSegmentation& seg, std::span<const std::string> tokens, SpanRole role) {
  auto words = slice(tokens, seg.span(role));
  if (role == SpanRole::Head) {
    for (auto& w : words) {
      if (in(kCopulas, w)) w = "be";
    }
  }
  return detokenize(words);
}

std::string property_name(const SpanSegmentation& seg, std::span<const std::string> tokens) {
  auto words = slice(tokens, seg.span(SpanRole::Property));
  auto& last = words.back();
  if (last.size() > 3 && last.ends_with("s") && !last.ends_with("ss")) last.pop_back();
  return detokenize(words);
}

SubQuestionPair build_subquestions(const SpanSegmentation& seg, std::span<const std::string> t,
                                   const std::optional<std::string>& hop1_answer) {
  SubQuestionPair pair;
  if (seg.qtype == QuestionType::Bridge) {
    if (!hop1_answer || hop1_answer->empty()) throw MissingHopAnswer();
    const TokenRange head = seg.span(SpanRole::Head);
    std::size_t det = head.begin;
    for (std::size_t i = head.begin; i < head.end; ++i) {
      if (in(kDeterminers, t[i])) det = i;
    }
    std::vector<std::string> a;
    for (std::size_t i = head.begin; i < head.end; ++i) {
      if (i == det) {
        a.emplace_back("which");
      } else {
        a.push_back(in(kCopulas, t[i]) ? std::string("be") : t[i]);
      }
    }
    pair.s_a = detokenize(a);
    pair.s_b = *hop1_answer + " " + join(t, seg.span(SpanRole::Tail));
    pair.hop1_answer = hop1_answer;
    return pair;
  }

  const TokenRange e1 = seg.span(SpanRole::Entity1);
  const TokenRange e2 = seg.span(SpanRole::Entity2);
  const TokenRange prop = seg.span(SpanRole::Property);
  std::size_t keyword = prop.begin - 1;
  std::size_t predicate_end = keyword;
  if (to_lower(t[keyword]) == "same" && predicate_end > e2.end && to_lower(t[predicate_end - 1]) == "the") {
    --predicate_end;
  }
  auto ask = [&](TokenRange entity) {
    std::vector<std::string> q = slice(t, {0, e1.begin});
    auto ent = slice(t, entity);
    q.insert(q.end(), ent.begin(), ent.end());
    auto pred = slice(t, {e2.end, predicate_end});
    q.insert(q.end(), pred.begin(), pred.end());
    q.emplace_back("which");
    auto p = slice(t, prop);
    q.insert(q.end(), p.begin(), p.end());
    q.emplace_back("?");
    return detokenize(q);
  };
  pair.s_a = ask(e1);
  pair.s_b = ask(e2);
  pair.degenerate = to_lower(join(t, e1)) == to_lower(join(t, e2));
  return pair;
}

// ------------------------------------------------------------ hop-1 oracle

std::vector<std::string> title_key(std::string_view title) {
  std::string_view base = title;
  if (auto open = base.rfind(" ("); open != std::string_view::npos && base.ends_with(")")) {
    base = base.substr(0, open);
  }
  std::vector<std::string> out;
  for (auto& tok : tokenize(base)) {
    if (!is_punct_token(tok)) out.push_back(to_lower(tok));
  }
  return out;
}

std::optional<TokenRange> find_title(std::span<const std::string> tokens, std::string_view title) {
  const auto key = title_key(title);
  if (key.empty()) return std::nullopt;
  std::vector<std::size_t> pos;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_punct_token(tokens[i])) {
      pos.push_back(i);
      words.push_back(to_lower(tokens[i]));
    }
  }
  for (std::size_t i = 0; i + key.size() <= words.size(); ++i) {
    if (std::equal(key.begin(), key.end(), words.begin() + static_cast<long>(i))) {
      return TokenRange{pos[i], pos[i + key.size() - 1] + 1};
    }
  }
  return std::nullopt;
}

namespace {

// Surface spelling of title inside the supporting sentences of other gold paragraphs.
std::optional<std::string> surface_in_other_gold(const HotpotExample& ex, const std::string& title) {
  for (const auto& sf : ex.supporting_facts) {
    if (sf.title == title) continue;
    const Paragraph* p = ex.find_paragraph(sf.title);
    const std::string& sentence = p->sentences[sf.sentence_index];
    auto spans = tokenize_with_offsets(sentence);
    std::vector<std::string> words;
    for (auto& s : spans) words.push_back(s.text);
    if (auto r = find_title(words, title)) {
      return sentence.substr(spans[r->begin].begin, spans[r->end - 1].end - spans[r->begin].begin);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string TitleOracleResolver::resolve(std::string_view, const HotpotExample& ex) const {
  const auto gold = ex.gold_titles();
  if (gold.size() < 2) throw AmbiguousBridge("example " + ex.id + " has fewer than two gold paragraphs");
  const auto question = tokenize(ex.question);
  std::vector<std::string> unanchored;
  for (const auto& title : gold) {
    if (!find_title(question, title)) unanchored.push_back(title);
  }
  if (unanchored.empty()) throw AmbiguousBridge("example " + ex.id + ": every gold title appears in the question");
  if (unanchored.size() > 1) {
    std::vector<std::string> linked;
    for (const auto& title : unanchored) {
      if (surface_in_other_gold(ex, title)) linked.push_back(title);
    }
    if (linked.size() != 1) {
      throw AmbiguousBridge("example " + ex.id + ": cannot tell which gold title is the bridge entity");
    }
    unanchored = linked;
  }
  const std::string& bridge = unanchored.front();
  if (auto surface = surface_in_other_gold(ex, bridge)) return *surface;
  std::string base(bridge);
  if (auto open = base.rfind(" ("); open != std::string::npos && base.ends_with(")")) base.resize(open);
  return base;
}

std::string resolve_hop1_answer(std::string_view s_a, const HotpotExample& example) {
  return TitleOracleResolver{}.resolve(s_a, example);
}

// ------------------------------------------------------------ dataset build

QgDataset build_qg_dataset(std::span<const HotpotExample> examples, const LogSink& log,
                           const QuestionSegmenter& segmenter, const Hop1Resolver& resolver) {
  auto emit = [&](std::string_view line) {
    if (log) {
      log(line);
    } else {
      std::clog << line << '\n';
    }
  };
  QgDataset out;
  for (const auto& ex : examples) {
    (ex.qtype == QuestionType::Bridge ? out.bridge_count : out.comparison_count)++;
    try {
      const auto tokens = tokenize(ex.question);
      const auto seg = segmenter.segment(tokens, ex.qtype);
      SubQuestionPair pair;
      if (ex.qtype == QuestionType::Bridge) {
        // S^A does not depend on the hop-1 answer; build it first for the resolver.
        const auto draft = build_subquestions(seg, tokens, std::string("?"));
        pair = build_subquestions(seg, tokens, resolver.resolve(draft.s_a, ex));
      } else {
        pair = build_subquestions(seg, tokens, std::nullopt);
      }
      pair.source_question_id = ex.id;
      out.records.push_back({ex.id, std::move(pair)});
    } catch (const Error& e) {
      out.failures.push_back({ex.id, e.what()});
      emit("decompose: skipped " + ex.id + ": " + e.what());
    }
  }
  const std::size_t total = out.bridge_count + out.comparison_count;
  if (total > 0) {
    const double bridge_ratio = static_cast<double>(out.bridge_count) / static_cast<double>(total);
    if (std::abs(bridge_ratio - 0.7) > 0.2) {
      out.distribution_warning = "bridge share " + format_fixed(100.0 * bridge_ratio, 1) +
                                 "% is far from the expected 70% bridge / 30% comparison split";
      emit("decompose: warning: " + *out.distribution_warning);
    }
  }
  return out;
}

std::string serialize_qg_records(std::span<const QgRecord> records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json rec = nlohmann::json::object();
    rec["id"] = r.question_id;
    rec["s_a"] = r.pair.s_a;
    rec["s_b"] = r.pair.s_b;
    if (r.pair.hop1_answer) rec["hop1_answer"] = *r.pair.hop1_answer;
    if (r.pair.degenerate) rec["degenerate"] = true;
    out += rec.dump() + "\n";
  }
  return out;
}

std::vector<QgRecord> parse_qg_records(std::string_view text) {
  std::vector<QgRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      QgRecord r;
      r.question_id = rec.at("id").get<std::string>();
      r.pair.s_a = rec.at("s_a").get<std::string>();
      r.pair.s_b = rec.at("s_b").get<std::string>();
      r.pair.source_question_id = r.question_id;
      if (rec.contains("hop1_answer")) r.pair.hop1_answer = rec["hop1_answer"].get<std::string>();
      r.pair.degenerate = rec.value("degenerate", false);
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    }
    ++line_no;
  }
  return out;
}

}  // namespace hopqg
