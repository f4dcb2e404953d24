#include "hopqg/entity_graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "hopqg/decomposer.hpp"
#include "hopqg/error.hpp"
#include "json.hpp"

namespace hopqg {

namespace {

std::vector<std::string> phrase_key(std::string_view phrase) {
  std::vector<std::string> key;
  for (auto& t : tokenize(phrase)) key.push_back(to_lower(t));
  return key;
}

std::string strip_disambiguation(std::string_view title) {
  std::string base(title);
  if (auto open = base.rfind(" ("); open != std::string::npos && base.ends_with(")")) base.resize(open);
  return base;
}

bool opens_question(std::string_view token) {
  static const std::set<std::string> words = {"what", "which", "who", "whom", "whose", "when", "where",
                                              "how", "why", "do", "does", "did", "is", "are", "was",
                                              "were", "in", "the", "a", "an"};
  return words.count(to_lower(token)) > 0;
}

}  // namespace

Gazetteer::Gazetteer(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) add(p);
}

void Gazetteer::add(std::string_view phrase) {
  auto key = phrase_key(phrase);
  if (key.empty()) return;
  max_tokens_ = std::max(max_tokens_, key.size());
  phrases_.insert(std::move(key));
}

bool Gazetteer::contains_key(const std::vector<std::string>& lowered_tokens) const {
  return phrases_.count(lowered_tokens) > 0;
}

Gazetteer Gazetteer::from_example(const HotpotExample& example) {
  Gazetteer g;
  for (const auto& p : example.context) g.add(strip_disambiguation(p.title));
  const auto q = tokenize(example.question);
  std::size_t i = 0;
  while (i < q.size()) {
    if (!starts_upper(q[i]) || (i == 0 && opens_question(q[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < q.size() && starts_upper(q[j])) ++j;
    std::string phrase;
    for (std::size_t k = i; k < j; ++k) phrase += (k > i ? " " : "") + q[k];
    g.add(phrase);
    i = j;
  }
  return g;
}

std::vector<EntityMention> extract_entities(const TokenizedExample& ex, const Gazetteer& gazetteer) {
  std::vector<EntityMention> out;
  if (gazetteer.empty()) return out;
  for (const auto& slot : ex.sentences) {
    std::size_t i = slot.begin;
    while (i < slot.end) {
      std::size_t matched = 0;
      const std::size_t longest = std::min(gazetteer.max_tokens(), slot.end - i);
      std::vector<std::string> window;
      for (std::size_t k = 0; k < longest; ++k) window.push_back(to_lower(ex.context_tokens[i + k].text));
      for (std::size_t len = longest; len >= 1; --len) {
        window.resize(len);
        if (gazetteer.contains_key(window)) {
          matched = len;
          break;
        }
      }
      if (matched == 0) {
        ++i;
        continue;
      }
      EntityMention m;
      std::vector<std::string> words;
      for (std::size_t k = i; k < i + matched; ++k) words.push_back(ex.context_tokens[k].text);
      m.surface = detokenize(words);
      m.paragraph_index = slot.paragraph;
      m.sentence_index = slot.sentence;
      m.start = i;
      m.end = i + matched;
      out.push_back(std::move(m));
      i += matched;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::pair(a.start, a.end) < std::pair(b.start, b.end);
  });
  return out;
}

bool EntityGraph::adjacent(std::size_t i, std::size_t j) const {
  const auto& n = neighbors[i];
  return std::binary_search(n.begin(), n.end(), j);
}

std::vector<std::pair<std::size_t, std::size_t>> EntityGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    for (std::size_t j : neighbors[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<std::uint8_t> EntityGraph::location_matrix() const {
  std::vector<std::uint8_t> m(nodes.size() * context_length, 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t p = nodes[i].start; p < nodes[i].end && p < context_length; ++p) {
      m[i * context_length + p] = 1;
    }
  }
  return m;
}

EntityGraph build_graph(std::vector<EntityMention> mentions, std::size_t context_length) {
  if (mentions.empty()) throw EmptyGraph();
  EntityGraph g;
  g.context_length = context_length;
  for (const auto& m : mentions) {
    if (m.end <= m.start || m.end > context_length) throw ShapeMismatch("mention span outside the context");
  }
  g.nodes = std::move(mentions);
  g.neighbors.resize(g.nodes.size());
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> by_sentence;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    by_sentence[{g.nodes[i].paragraph_index, g.nodes[i].sentence_index}].push_back(i);
  }
  for (const auto& [where, members] : by_sentence) {
    for (std::size_t i : members) {
      for (std::size_t j : members) {
        if (i != j) g.neighbors[i].push_back(j);
      }
    }
  }
  for (auto& n : g.neighbors) std::sort(n.begin(), n.end());
  return g;
}

std::string graph_to_json(std::string_view id, const EntityGraph& graph) {
  nlohmann::json rec = nlohmann::json::object();
  rec["id"] = std::string(id);
  rec["context_length"] = graph.context_length;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes) {
    nodes.push_back({{"surface", n.surface},
                     {"paragraph", n.paragraph_index},
                     {"sentence", n.sentence_index},
                     {"start", n.start},
                     {"end", n.end}});
  }
  rec["nodes"] = std::move(nodes);
  nlohmann::json edges = nlohmann::json::array();
  for (auto [i, j] : graph.edges()) edges.push_back(nlohmann::json::array({i, j}));
  rec["edges"] = std::move(edges);
  return rec.dump();
}

}  // namespace hopqg
