#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hopqg/corpus.hpp"
#include "hopqg/decomposer.hpp"
#include "hopqg/entity_graph.hpp"

namespace hopqg {

struct PerturbationSlot {
  TokenRange tokens;  // over the template sentence tokens
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
  std::size_t group = 0;  // slots of one group always receive the same substitute
  std::string original;
};

struct PerturbationPlan {
  std::string source_id;
  SupportingFactRef template_fact;
  std::string template_text;
  std::vector<PerturbationSlot> slots;
  std::size_t group_count = 0;
  std::size_t k = 0;
  // substitutions[f][g]: substitute for group g in noisy fact f.
  std::vector<std::vector<std::string>> substitutions;
  // Candidates the picks were drawn from (excludes every original filler).
  std::vector<std::string> pool;
  std::uint64_t seed = 0;
};

// Paragraph titles of every example, without disambiguation suffixes.
std::vector<std::string> build_entity_pool(const std::vector<HotpotExample>& examples);

// Picks the supporting sentence that holds the answer and the bridge entity
// (the mentions of its paragraph's title) and draws k substitute sets.
// Throws NoChainEntities when no supporting sentence has two chain entities.
PerturbationPlan plan_perturbation(const HotpotExample& example, const TokenizedExample& tokenized,
                                   const EntityGraph* graph, const std::vector<std::string>& pool, std::size_t k,
                                   std::uint64_t seed);

// Template sentence with every slot replaced by the fact's substitutes.
std::string noisy_fact(const PerturbationPlan& plan, std::size_t fact);

struct PerturbOptions {
  std::size_t max_paragraphs = 10;
  bool drop_to_fit = true;  // drop the distractor least similar to the question
};

// Appends the k noisy facts as one paragraph titled with the first
// substitute. Gold paragraphs, answer and supporting facts are untouched.
HotpotExample apply_perturbation(const HotpotExample& example, const PerturbationPlan& plan,
                                 const PerturbOptions& options = {});

struct PerturbFailure {
  std::string id;
  std::string reason;
};

struct PerturbedDataset {
  std::vector<HotpotExample> examples;  // same order; unplannable ones copied as-is
  std::vector<PerturbationPlan> plans;
  std::vector<PerturbFailure> skipped;
};

PerturbedDataset perturb_dataset(const std::vector<HotpotExample>& examples, std::size_t k, std::uint64_t seed,
                                 const PerturbOptions& options = {});

}  // namespace hopqg
