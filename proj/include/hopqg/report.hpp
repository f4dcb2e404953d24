#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hopqg/metrics.hpp"
#include "hopqg/questionnaire.hpp"

namespace hopqg {

// The first left_columns columns are left-aligned, the rest right-aligned;
// columns are separated by two spaces, with a rule under the header rows.
std::string render_text_table(const std::vector<std::vector<std::string>>& header,
                              const std::vector<std::vector<std::string>>& rows, std::size_t left_columns = 1);

// Values are fractions in [0, 1]; tables print them as percentages.
struct Table1Row {
  std::string model;
  MetricsReport report;
};
std::string render_table1(const std::vector<Table1Row>& rows);

// One system on the clean and the noisy set. Values on the 0-100 scale.
struct Table2Entry {
  std::string model;
  double clean_em = 0.0, clean_f1 = 0.0;
  std::string noisy_model;
  double noisy_em = 0.0, noisy_f1 = 0.0;
};
std::string format_delta(std::optional<double> percent);  // "(-13.62%)" or "(n/a)"
std::string render_table2(const std::vector<Table2Entry>& entries);

std::string render_table3(const std::vector<GroupSummary>& groups, const std::vector<std::string>& labels);

// Ratios on the 0-100 scale; a missing tie prints "-".
struct Table4Row {
  std::string indicator;
  std::string methods;
  double win = 0.0;
  std::optional<double> tie;
  double loss = 0.0;
};
std::string render_table4(const std::vector<Table4Row>& rows);

// Structured evaluation record with every MetricsReport field.
std::string metrics_report_json(const MetricsReport& report, const std::string& dataset_hash,
                                const std::string& config_echo = "");

// Fingerprint of a dataset file's bytes.
std::string dataset_hash(std::string_view bytes);

}  // namespace hopqg
