#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hopqg/corpus.hpp"

namespace hopqg::testing {

inline std::string data_path(const std::string& name) { return std::string(HOPQG_TEST_DATA) + "/" + name; }

inline const std::vector<HotpotExample>& worked_examples() {
  static const std::vector<HotpotExample> examples = load_dataset(data_path("worked_examples.json"));
  return examples;
}

inline const std::vector<HotpotExample>& fixture32() {
  static const std::vector<HotpotExample> examples = load_dataset(data_path("fixture32.json"));
  return examples;
}

inline const HotpotExample& worked_example(const std::string& id) {
  for (const auto& ex : worked_examples()) {
    if (ex.id == id) return ex;
  }
  throw std::out_of_range("no worked example " + id);
}

}  // namespace hopqg::testing
