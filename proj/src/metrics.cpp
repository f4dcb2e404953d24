#include "hopqg/metrics.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "json.hpp"

#include "hopqg/error.hpp"
#include "hopqg/text.hpp"

namespace hopqg {

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  for (unsigned char c : text) {
    if (c < 128 && std::ispunct(c)) continue;
    lowered += static_cast<char>(c < 128 ? std::tolower(c) : c);
  }
  std::string out;
  for (const auto& w : split_words(lowered)) {
    if (w == "a" || w == "an" || w == "the") continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

Score answer_metrics(std::string_view pred, std::string_view gold) {
  const std::string p = normalize_answer(pred), g = normalize_answer(gold);
  Score s;
  s.em = p == g ? 1.0 : 0.0;
  auto special = [](const std::string& x) { return x == "yes" || x == "no" || x == "noanswer"; };
  if ((special(p) || special(g)) && p != g) return s;
  const auto pt = split_words(p), gt = split_words(g);
  if (pt.empty() && gt.empty()) return {1.0, 1.0, 1.0, 1.0};
  std::map<std::string, int> counts;
  for (const auto& t : gt) ++counts[t];
  int same = 0;
  for (const auto& t : pt) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return s;
  s.precision = static_cast<double>(same) / static_cast<double>(pt.size());
  s.recall = static_cast<double>(same) / static_cast<double>(gt.size());
  s.f1 = f1_of(s.precision, s.recall);
  return s;
}

Score supporting_fact_metrics(const std::set<SupportingFactRef>& pred, const std::set<SupportingFactRef>& gold) {
  if (pred.empty() && gold.empty()) return {1.0, 1.0, 1.0, 1.0};
  std::size_t tp = 0;
  for (const auto& f : pred) tp += gold.count(f);
  const std::size_t fp = pred.size() - tp, fn = gold.size() - tp;
  Score s;
  s.precision = pred.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred.size());
  s.recall = gold.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold.size());
  s.f1 = f1_of(s.precision, s.recall);
  s.em = fp + fn == 0 ? 1.0 : 0.0;
  return s;
}

Score joint_metrics(const Score& a, const Score& sp) {
  Score j;
  j.precision = a.precision * sp.precision;
  j.recall = a.recall * sp.recall;
  j.f1 = f1_of(j.precision, j.recall);
  j.em = a.em * sp.em;
  return j;
}

std::string serialize_predictions(const PredictionSet& preds) {
  nlohmann::ordered_json j;
  j["answer"] = nlohmann::ordered_json::object();
  for (const auto& [id, a] : preds.answers) j["answer"][id] = a;
  j["sp"] = nlohmann::ordered_json::object();
  for (const auto& [id, facts] : preds.supporting) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : facts) arr.push_back({f.title, f.sentence_index});
    j["sp"][id] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

PredictionSet parse_predictions(std::string_view text) {
  PredictionSet out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("answer")) {
      for (const auto& [id, a] : j.at("answer").items()) out.answers[id] = a.get<std::string>();
    }
    if (j.contains("sp")) {
      for (const auto& [id, facts] : j.at("sp").items()) {
        auto& set = out.supporting[id];
        for (const auto& f : facts) set.insert({f.at(0).get<std::string>(), f.at(1).get<std::size_t>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("prediction file: ") + e.what());
  }
  return out;
}

MetricsReport evaluate(const PredictionSet& preds, const std::vector<HotpotExample>& gold) {
  MetricsReport r;
  r.count = gold.size();
  if (gold.empty()) return r;
  for (const auto& ex : gold) {
    Score a, sp;
    if (auto it = preds.answers.find(ex.id); it != preds.answers.end()) a = answer_metrics(it->second, ex.answer);
    const std::set<SupportingFactRef> g(ex.supporting_facts.begin(), ex.supporting_facts.end());
    if (auto it = preds.supporting.find(ex.id); it != preds.supporting.end()) sp = supporting_fact_metrics(it->second, g);
    const Score j = joint_metrics(a, sp);
    r.answer_em += a.em;
    r.answer_f1 += a.f1;
    r.sp_em += sp.em;
    r.sp_f1 += sp.f1;
    r.joint_em += j.em;
    r.joint_f1 += j.f1;
  }
  const double n = static_cast<double>(gold.size());
  r.answer_em /= n;
  r.answer_f1 /= n;
  r.sp_em /= n;
  r.sp_f1 /= n;
  r.joint_em /= n;
  r.joint_f1 /= n;
  return r;
}

std::optional<double> relative_change(double clean, double noisy) {
  if (clean == 0.0) return std::nullopt;
  return (noisy - clean) / clean * 100.0;
}

RobustnessDelta robustness_delta(const MetricsReport& c, const MetricsReport& n) {
  return {relative_change(c.answer_em, n.answer_em), relative_change(c.answer_f1, n.answer_f1),
          relative_change(c.sp_em, n.sp_em),         relative_change(c.sp_f1, n.sp_f1),
          relative_change(c.joint_em, n.joint_em),   relative_change(c.joint_f1, n.joint_f1)};
}

}  // namespace hopqg
