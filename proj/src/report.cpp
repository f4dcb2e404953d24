#include "hopqg/report.hpp"

#include <algorithm>

#include "json.hpp"

#include "hopqg/rng.hpp"
#include "hopqg/text.hpp"

namespace hopqg {

namespace {

// Display width in code points, so "→" and similar count once.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

std::string pct(double fraction) { return format_fixed(fraction * 100.0, 2); }

}  // namespace

std::string render_text_table(const std::vector<std::vector<std::string>>& header,
                              const std::vector<std::vector<std::string>>& rows, std::size_t left_columns) {
  std::size_t cols = 0;
  for (const auto& r : header) cols = std::max(cols, r.size());
  for (const auto& r : rows) cols = std::max(cols, r.size());
  std::vector<std::size_t> w(cols, 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) w[c] = std::max(w[c], width(r[c]));
  };
  for (const auto& r : header) measure(r);
  for (const auto& r : rows) measure(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string cell = c < r.size() ? r[c] : "";
      const std::string pad(w[c] - width(cell), ' ');
      if (c) out += "  ";
      out += c < left_columns ? cell + pad : pad + cell;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::size_t total = 0;
  for (std::size_t c = 0; c < cols; ++c) total += w[c] + (c ? 2 : 0);
  std::string out;
  for (const auto& r : header) out += line(r);
  out += std::string(total, '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string render_table1(const std::vector<Table1Row>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    const auto& m = r.report;
    body.push_back({r.model, pct(m.answer_em), pct(m.answer_f1), pct(m.sp_em), pct(m.sp_f1), pct(m.joint_em),
                    pct(m.joint_f1)});
  }
  return render_text_table({{"Model", "Answer", "", "Sup Fact", "", "Joint", ""},
                            {"", "EM", "F1", "EM", "F1", "EM", "F1"}},
                           body);
}

std::string format_delta(std::optional<double> percent) {
  if (!percent) return "(n/a)";
  return "(" + format_fixed(*percent, 2) + "%)";
}

std::string render_table2(const std::vector<Table2Entry>& entries) {
  std::vector<std::vector<std::string>> body;
  for (const auto& e : entries) {
    body.push_back({e.model, format_fixed(e.clean_em, 2), format_fixed(e.clean_f1, 2)});
    body.push_back({e.noisy_model, format_fixed(e.noisy_em, 2) + format_delta(relative_change(e.clean_em, e.noisy_em)),
                    format_fixed(e.noisy_f1, 2) + format_delta(relative_change(e.clean_f1, e.noisy_f1))});
  }
  return render_text_table({{"Model", "Answer", ""}, {"", "EM", "F1"}}, body);
}

std::string render_table3(const std::vector<GroupSummary>& groups, const std::vector<std::string>& labels) {
  std::vector<std::vector<std::string>> body;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    body.push_back({i < labels.size() ? labels[i] : groups[i].group, pct(groups[i].accuracy) + "%",
                    format_fixed(groups[i].mean_elapsed, 0)});
  }
  return render_text_table({{"Group", "Accuracy", "Time(s)"}}, body);
}

std::string render_table4(const std::vector<Table4Row>& rows) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    body.push_back({r.indicator, r.methods, format_fixed(r.win, 2) + "%", r.tie ? format_fixed(*r.tie, 2) + "%" : "-",
                    format_fixed(r.loss, 2) + "%"});
  }
  return render_text_table({{"Indicators", "Methods", "Win", "Tie", "Loss"}}, body, 2);
}

std::string metrics_report_json(const MetricsReport& m, const std::string& hash, const std::string& config_echo) {
  nlohmann::ordered_json j;
  j["format"] = "hopqg-metrics";
  j["version"] = 1;
  j["dataset_hash"] = hash;
  j["count"] = m.count;
  j["answer_em"] = m.answer_em;
  j["answer_f1"] = m.answer_f1;
  j["sp_em"] = m.sp_em;
  j["sp_f1"] = m.sp_f1;
  j["joint_em"] = m.joint_em;
  j["joint_f1"] = m.joint_f1;
  if (!config_echo.empty()) j["config"] = config_echo;
  return j.dump(2) + "\n";
}

std::string dataset_hash(std::string_view bytes) { return hex64(fnv1a(bytes)); }

}  // namespace hopqg
