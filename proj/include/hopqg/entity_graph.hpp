#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hopqg/corpus.hpp"

namespace hopqg {

struct EntityMention {
  std::string surface;
  std::size_t paragraph_index = 0;  // index into the original example context
  std::size_t sentence_index = 0;
  // Half-open token range over the concatenated context sequence.
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const EntityMention&) const = default;
};

// Case-insensitive phrase set matched on token sequences.
class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(const std::vector<std::string>& phrases);

  void add(std::string_view phrase);
  bool empty() const { return phrases_.empty(); }
  std::size_t size() const { return phrases_.size(); }
  std::size_t max_tokens() const { return max_tokens_; }
  bool contains_key(const std::vector<std::string>& lowered_tokens) const;

  // Paragraph titles (disambiguation suffix removed) plus maximal runs of
  // capitalised question tokens.
  static Gazetteer from_example(const HotpotExample& example);

 private:
  std::set<std::vector<std::string>> phrases_;
  std::size_t max_tokens_ = 0;
};

// Greedy longest match, left to right, inside each sentence. Sorted by span.
std::vector<EntityMention> extract_entities(const TokenizedExample& example, const Gazetteer& gazetteer);

class EntityGraph {
 public:
  std::vector<EntityMention> nodes;
  // Sorted neighbour lists; symmetric, no self loops.
  std::vector<std::vector<std::size_t>> neighbors;
  std::size_t context_length = 0;

  std::size_t size() const { return nodes.size(); }
  bool adjacent(std::size_t i, std::size_t j) const;
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  // Entry (i, position) of the binary location matrix M.
  std::uint8_t location(std::size_t node, std::size_t position) const {
    return position >= nodes[node].start && position < nodes[node].end ? 1 : 0;
  }
  // Dense row-major copy of M, shape size() x context_length.
  std::vector<std::uint8_t> location_matrix() const;
};

// Connects mentions that share a sentence. Throws EmptyGraph for no mentions.
EntityGraph build_graph(std::vector<EntityMention> mentions, std::size_t context_length);

// Graph dump record: {"id", "context_length", "nodes": [...], "edges": [[i, j], ...]}.
std::string graph_to_json(std::string_view id, const EntityGraph& graph);

}  // namespace hopqg
