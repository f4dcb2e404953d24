#include "hopqg/adversarial.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <optional>
#include <set>

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

std::vector<std::string> lowered_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) {
    if (!is_punct_token(t)) out.push_back(to_lower(t));
  }
  return out;
}

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Slot candidates inside one sentence, before grouping.
struct Candidate {
  std::size_t begin = 0;  // sentence token indices, half-open
  std::size_t end = 0;
  std::string key;        // group key
};

}  // namespace

std::vector<std::string> build_entity_pool(const std::vector<HotpotExample>& examples) {
  std::set<std::string> pool;
  for (const auto& ex : examples) {
    for (const auto& p : ex.context) {
      std::string t = strip_disambiguation(p.title);
      if (!t.empty()) pool.insert(t);
    }
  }
  return {pool.begin(), pool.end()};
}

PerturbationPlan plan_perturbation(const HotpotExample& example, const TokenizedExample& tok, const EntityGraph* graph,
                                   const std::vector<std::string>& pool, std::size_t k, std::uint64_t seed) {
  const std::string lowered_answer = to_lower(example.answer);
  const bool extractive = lowered_answer != "yes" && lowered_answer != "no";
  const std::vector<std::string> answer_key = lowered_words(example.answer);

  struct Choice {
    std::size_t slot_index;
    std::vector<Candidate> candidates;
    bool has_answer;
  };
  std::optional<Choice> best;
  for (std::size_t si = 0; si < tok.sentences.size(); ++si) {
    const SentenceSlot& slot = tok.sentences[si];
    if (!slot.supporting) continue;
    const std::string& title = example.context[slot.paragraph].title;
    const std::vector<std::string> title_words = lowered_words(strip_disambiguation(title));
    std::vector<std::string> words;
    for (std::size_t p = slot.begin; p < slot.end; ++p) words.push_back(to_lower(tok.context_tokens[p].text));

    std::vector<Candidate> answer_slots, title_slots, other_slots;
    if (extractive && !answer_key.empty()) {
      for (std::size_t i = 0; i + answer_key.size() <= words.size(); ++i) {
        if (std::equal(answer_key.begin(), answer_key.end(), words.begin() + static_cast<long>(i))) {
          answer_slots.push_back({i, i + answer_key.size(), "\x01answer"});
          i += answer_key.size() - 1;
        }
      }
    }
    auto overlaps_answer = [&](std::size_t b, std::size_t e) {
      return std::any_of(answer_slots.begin(), answer_slots.end(),
                         [&](const Candidate& c) { return b < c.end && c.begin < e; });
    };
    if (graph) {
      for (const auto& m : graph->nodes) {
        if (m.start < slot.begin || m.end > slot.end) continue;
        const std::size_t b = m.start - slot.begin, e = m.end - slot.begin;
        if (overlaps_answer(b, e)) continue;
        std::vector<std::string> mw(words.begin() + static_cast<long>(b), words.begin() + static_cast<long>(e));
        std::string key;
        for (const auto& w : mw) key += w + " ";
        (mw == title_words ? title_slots : other_slots).push_back({b, e, key});
      }
    }
    std::vector<Candidate> chosen = answer_slots;
    chosen.insert(chosen.end(), title_slots.begin(), title_slots.end());
    std::set<std::string> keys;
    for (const auto& c : chosen) keys.insert(c.key);
    if (keys.size() < 2) {
      for (const auto& c : other_slots) {
        chosen.push_back(c);
        keys.insert(c.key);
        if (keys.size() >= 2) break;
      }
    }
    if (keys.size() < 2) continue;
    const bool has_answer = !answer_slots.empty();
    if (!best || (has_answer && !best->has_answer)) best = Choice{si, std::move(chosen), has_answer};
    if (best->has_answer || !extractive) break;
  }
  if (!best) throw NoChainEntities("no supporting fact of " + example.id + " holds two chain entities");

  const SentenceSlot& slot = tok.sentences[best->slot_index];
  PerturbationPlan plan;
  plan.source_id = example.id;
  plan.template_fact = {example.context[slot.paragraph].title, slot.sentence};
  plan.template_text = example.context[slot.paragraph].sentences[slot.sentence];
  plan.k = k;
  plan.seed = seed;

  std::sort(best->candidates.begin(), best->candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.begin < b.begin; });
  std::map<std::string, std::size_t> group_of;
  for (const auto& c : best->candidates) {
    auto [it, fresh] = group_of.emplace(c.key, group_of.size());
    PerturbationSlot s;
    s.tokens = {c.begin, c.end};
    s.char_begin = tok.context_tokens[slot.begin + c.begin].char_begin;
    s.char_end = tok.context_tokens[slot.begin + c.end - 1].char_end;
    s.group = it->second;
    s.original = plan.template_text.substr(s.char_begin, s.char_end - s.char_begin);
    plan.slots.push_back(std::move(s));
  }
  plan.group_count = group_of.size();

  // Substitutes must differ from every filler, from the answer, and from the
  // example's own titles.
  std::set<std::string> banned;
  for (const auto& s : plan.slots) banned.insert(to_lower(s.original));
  for (const auto& p : example.context) banned.insert(to_lower(strip_disambiguation(p.title)));
  auto admissible = [&](const std::string& c) {
    if (c.empty() || banned.count(to_lower(c))) return false;
    return !contains_run(lowered_words(c), answer_key) || !extractive;
  };
  std::vector<std::string> base_pool;
  for (const auto& e : pool) {
    if (admissible(e)) base_pool.push_back(e);
  }
  plan.pool = base_pool;

  Rng rng(derive_seed(seed, example.id));
  std::vector<std::vector<std::string>> per_group(plan.group_count);
  for (std::size_t g = 0; g < plan.group_count; ++g) {
    const auto first = std::find_if(plan.slots.begin(), plan.slots.end(),
                                    [g](const PerturbationSlot& s) { return s.group == g; });
    const std::string& original = first->original;
    const auto words = tokenize(original);
    std::set<std::string> cands;
    if (all_digits(original)) {
      // Numbers are replaced by nearby numbers of the same width.
      const long value = std::stol(original);
      for (long delta = 1; delta <= 40; ++delta) {
        for (long v : {value - delta, value + delta}) {
          std::string s = std::to_string(v);
          if (v >= 0 && s.size() == original.size() && admissible(s)) cands.insert(s);
        }
      }
    } else if (words.size() > 1) {
      // Name variants: keep the leading words, swap in another surname.
      const std::string prefix = original.substr(0, original.size() - words.back().size());
      for (const auto& e : base_pool) {
        const auto ew = tokenize(e);
        if (ew.empty() || !starts_upper(ew.back())) continue;
        std::string v = prefix + ew.back();
        if (admissible(v)) cands.insert(v);
      }
    } else {
      cands.insert(base_pool.begin(), base_pool.end());
    }
    per_group[g].assign(cands.begin(), cands.end());
    if (per_group[g].size() < k) {
      throw NoChainEntities("substitute pool for '" + original + "' in " + example.id + " is too small");
    }
    rng.shuffle(per_group[g]);
  }
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::string> picks;
    for (std::size_t g = 0; g < plan.group_count; ++g) picks.push_back(per_group[g][f]);
    plan.substitutions.push_back(std::move(picks));
  }
  return plan;
}

std::string noisy_fact(const PerturbationPlan& plan, std::size_t fact) {
  const auto& picks = plan.substitutions.at(fact);
  std::string out;
  std::size_t pos = 0;
  for (const auto& s : plan.slots) {
    out.append(plan.template_text, pos, s.char_begin - pos);
    out += picks.at(s.group);
    pos = s.char_end;
  }
  out.append(plan.template_text, pos, std::string::npos);
  return out;
}

HotpotExample apply_perturbation(const HotpotExample& example, const PerturbationPlan& plan,
                                 const PerturbOptions& options) {
  HotpotExample out = example;
  if (plan.k == 0) return out;
  Paragraph noise;
  noise.title = plan.substitutions.at(0).at(0);
  for (std::size_t f = 0; f < plan.k; ++f) noise.sentences.push_back(noisy_fact(plan, f));

  if (options.drop_to_fit && out.context.size() + 1 > options.max_paragraphs) {
    const auto gold = example.gold_titles();
    std::set<std::string> question;
    for (auto& w : lowered_words(example.question)) question.insert(w);
    std::size_t victim = out.context.size();
    std::size_t lowest = std::numeric_limits<std::size_t>::max();
    for (std::size_t p = 0; p < out.context.size(); ++p) {
      if (std::find(gold.begin(), gold.end(), out.context[p].title) != gold.end()) continue;
      std::set<std::string> words;
      for (const auto& s : out.context[p].sentences)
        for (auto& w : lowered_words(s)) words.insert(w);
      std::size_t overlap = 0;
      for (const auto& w : words) overlap += question.count(w);
      if (overlap <= lowest) {
        lowest = overlap;
        victim = p;
      }
    }
    if (victim < out.context.size()) out.context.erase(out.context.begin() + static_cast<long>(victim));
  }
  out.context.push_back(std::move(noise));
  return out;
}

PerturbedDataset perturb_dataset(const std::vector<HotpotExample>& examples, std::size_t k, std::uint64_t seed,
                                 const PerturbOptions& options) {
  PerturbedDataset out;
  const auto pool = build_entity_pool(examples);
  const Vocabulary vocab;
  for (const auto& ex : examples) {
    try {
      TokenizedExample tok = locate_answer(ex, vocab, std::numeric_limits<std::size_t>::max());
      auto mentions = extract_entities(tok, Gazetteer::from_example(ex));
      std::optional<EntityGraph> graph;
      if (!mentions.empty()) graph = build_graph(std::move(mentions), tok.context_length());
      PerturbationPlan plan = plan_perturbation(ex, tok, graph ? &*graph : nullptr, pool, k, seed);
      out.examples.push_back(apply_perturbation(ex, plan, options));
      out.plans.push_back(std::move(plan));
    } catch (const DataError& e) {
      out.skipped.push_back({ex.id, e.what()});
      out.examples.push_back(ex);
    }
  }
  return out;
}

}  // namespace hopqg
