#include "hopqg/quality.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include "hopqg/error.hpp"
#include "hopqg/metrics.hpp"
#include "hopqg/rng.hpp"
#include "hopqg/text.hpp"

namespace hopqg {

namespace {

std::set<std::string> word_set(std::string_view text) {
  std::set<std::string> out;
  std::istringstream in(normalize_answer(text));
  for (std::string w; in >> w;) out.insert(w);
  return out;
}

}  // namespace

DiversityScore diversity_score(const SubQuestionPair& pair, std::string_view original_question) {
  const auto sub = word_set(pair.s_a + " " + pair.s_b);
  const auto orig = word_set(original_question);
  DiversityScore d;
  d.distinct = sub.size();
  for (const auto& w : sub) d.novel += orig.count(w) ? 0 : 1;
  d.ratio = d.distinct ? static_cast<double>(d.novel) / static_cast<double>(d.distinct) : 0.0;
  return d;
}

ComparisonOutcome compare_pairwise(const std::vector<double>& a, const std::vector<double>& b, double tie_eps) {
  if (a.size() != b.size()) {
    throw LengthMismatch("compare_pairwise: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                         " scores");
  }
  ComparisonOutcome out;
  out.count = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i] + tie_eps) ++out.wins;
    else if (a[i] < b[i] - tie_eps) ++out.losses;
    else ++out.ties;
  }
  if (out.count) {
    const double n = static_cast<double>(out.count);
    out.win = static_cast<double>(out.wins) / n;
    out.tie = static_cast<double>(out.ties) / n;
    out.loss = static_cast<double>(out.losses) / n;
  }
  return out;
}

std::vector<double> DecoderFluencyScorer::score(const std::vector<std::string>& texts) const {
  nn::NoGradGuard guard;
  const nn::Tensor empty = nn::Tensor::zeros(0, model_.config().d_model);
  std::vector<double> out;
  for (const auto& t : texts) {
    std::vector<int> target = model_.vocab().encode(tokenize(t));
    target.push_back(Vocabulary::kEos);
    out.push_back(-model_.qg_loss(empty, target).item());
  }
  return out;
}

std::vector<double> ExternalProcessScorer::score(const std::vector<std::string>& texts) const {
  namespace fs = std::filesystem;
  std::string joined;
  for (const auto& t : texts) joined += collapse_whitespace(t) + "\n";
  const fs::path base = fs::temp_directory_path() / ("hopqg-lms-" + hex64(fnv1a(joined + command_)));
  const std::string in = base.string() + ".in", out = base.string() + ".out";
  write_file_atomic(in, joined);
  const std::string cmd = "( " + command_ + " ) < '" + in + "' > '" + out + "'";
  const int status = std::system(cmd.c_str());
  std::error_code ec;
  fs::remove(in, ec);
  if (status != 0) {
    fs::remove(out, ec);
    throw ScorerUnavailable("external scorer exited with status " + std::to_string(status));
  }
  std::string text;
  try {
    text = read_file(out);
  } catch (const Error&) {
    throw ScorerUnavailable("external scorer produced no output");
  }
  fs::remove(out, ec);
  std::vector<double> scores;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const std::string v = collapse_whitespace(line);
    if (v.empty()) continue;
    double x = 0;
    auto [p, e] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (e != std::errc() || p != v.data() + v.size()) throw ScorerUnavailable("external scorer printed '" + v + "'");
    scores.push_back(x);
  }
  if (scores.size() != texts.size()) throw ScorerUnavailable("external scorer returned the wrong number of scores");
  return scores;
}

std::vector<FluencyResult> fluency_scores(const std::vector<std::string>& texts, const FluencyScorer* scorer) {
  if (!scorer) throw ScorerUnavailable("no fluency scorer registered");
  std::vector<std::string> real;
  for (const auto& t : texts) {
    if (!collapse_whitespace(t).empty()) real.push_back(t);
  }
  const std::vector<double> scores = real.empty() ? std::vector<double>{} : scorer->score(real);
  std::vector<FluencyResult> out;
  std::size_t next = 0;
  for (const auto& t : texts) {
    FluencyResult r;
    r.scorer = scorer->name();
    if (collapse_whitespace(t).empty()) {
      r.score = kFluencyFloor;
      r.floor = true;
    } else {
      r.score = scores[next++];
    }
    out.push_back(r);
  }
  return out;
}

FluencyResult fluency_score(const std::string& text, const FluencyScorer* scorer) {
  return fluency_scores({text}, scorer).front();
}

std::vector<double> sentence_attention(const nn::AttentionMaps& maps, std::size_t question_length,
                                       const std::vector<std::pair<std::size_t, std::size_t>>& sentences) {
  if (maps.heads.empty()) throw InvalidArgument("sentence_attention: no attention maps recorded");
  std::vector<double> received(maps.cols, 0.0);
  const double inv_heads = 1.0 / static_cast<double>(maps.heads.size());
  for (const auto& head : maps.heads) {
    for (std::size_t i = 0; i < maps.rows; ++i)
      for (std::size_t j = 0; j < maps.cols; ++j) received[j] += head[i * maps.cols + j] * inv_heads;
  }
  std::vector<double> out;
  for (auto [b, e] : sentences) {
    if (b >= e || question_length + e > maps.cols) throw ShapeMismatch("sentence_attention: sentence out of range");
    double s = 0.0;
    for (std::size_t p = b; p < e; ++p) s += received[question_length + p];
    out.push_back(s / static_cast<double>(e - b));
  }
  return out;
}

AttentionDelta attention_delta(const std::vector<std::vector<double>>& with_qg,
                               const std::vector<std::vector<double>>& without_qg,
                               const std::vector<std::vector<bool>>& supporting) {
  if (with_qg.size() != without_qg.size() || with_qg.size() != supporting.size()) {
    throw LengthMismatch("attention_delta: example counts differ");
  }
  AttentionDelta d;
  for (std::size_t x = 0; x < with_qg.size(); ++x) {
    if (with_qg[x].size() != without_qg[x].size() || with_qg[x].size() != supporting[x].size()) {
      throw LengthMismatch("attention_delta: sentence counts differ");
    }
    for (std::size_t s = 0; s < with_qg[x].size(); ++s) {
      if (!supporting[x][s]) continue;
      ++d.total;
      if (with_qg[x][s] > without_qg[x][s]) ++d.increased;
    }
  }
  d.ratio = d.total ? static_cast<double>(d.increased) / static_cast<double>(d.total) : 0.0;
  return d;
}

AttentionDelta attention_delta(const Model& with_qg, const Model& without_qg, const PreparedData& data) {
  ModelConfig a = with_qg.config(), b = without_qg.config();
  a.qg_enabled = b.qg_enabled = true;
  if (!(a == b)) throw IncomparableModels("configurations differ beyond the QG flag");
  if (!(with_qg.vocab() == without_qg.vocab())) throw IncomparableModels("vocabularies differ");
  nn::NoGradGuard guard;
  std::vector<std::vector<double>> w, wo;
  std::vector<std::vector<bool>> sup;
  for (const auto& ex : data.training) {
    const auto ew = with_qg.encode(ex.input.question_ids, ex.input.context_ids, true);
    const auto ewo = without_qg.encode(ex.input.question_ids, ex.input.context_ids, true);
    w.push_back(sentence_attention(ew.final_attention, ew.question_length, ex.input.sentences));
    wo.push_back(sentence_attention(ewo.final_attention, ewo.question_length, ex.input.sentences));
    std::vector<bool> flags;
    for (double v : ex.labels.supporting) flags.push_back(v > 0.5);
    sup.push_back(std::move(flags));
  }
  return attention_delta(w, wo, sup);
}

}  // namespace hopqg
