#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hopqg/cli.hpp"
#include "hopqg/corpus.hpp"
#include "hopqg/decomposer.hpp"
#include "hopqg/error.hpp"
#include "hopqg/metrics.hpp"
#include "hopqg/quality.hpp"
#include "hopqg/text.hpp"

namespace py = pybind11;
using namespace hopqg;

namespace {

py::dict score_dict(const Score& s) {
  py::dict d;
  d["em"] = s.em;
  d["f1"] = s.f1;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  return d;
}

std::set<SupportingFactRef> facts(const std::vector<std::pair<std::string, std::size_t>>& items) {
  std::set<SupportingFactRef> out;
  for (const auto& [title, idx] : items) out.insert({title, idx});
  return out;
}

}  // namespace

PYBIND11_MODULE(_hopqg, m) {
  m.doc() = "Multi-hop QA with question generation";

  py::register_exception<Error>(m, "Error");

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("detokenize", &detokenize, py::arg("tokens"));
  m.def("normalize_answer", &normalize_answer, py::arg("text"));

  m.def(
      "answer_metrics",
      [](const std::string& pred, const std::string& gold) { return score_dict(answer_metrics(pred, gold)); },
      py::arg("pred"), py::arg("gold"));
  m.def(
      "supporting_fact_metrics",
      [](const std::vector<std::pair<std::string, std::size_t>>& pred,
         const std::vector<std::pair<std::string, std::size_t>>& gold) {
        return score_dict(supporting_fact_metrics(facts(pred), facts(gold)));
      },
      py::arg("pred"), py::arg("gold"));
  m.def("relative_change", &relative_change, py::arg("clean"), py::arg("noisy"));

  m.def(
      "decompose",
      [](const std::string& question, const std::string& qtype, std::optional<std::string> hop1_answer) {
        const auto tokens = tokenize(question);
        const auto seg = segment_question(tokens, question_type_from_string(qtype));
        const SubQuestionPair pair = build_subquestions(seg, tokens, hop1_answer);
        return py::make_tuple(pair.s_a, pair.s_b);
      },
      py::arg("question"), py::arg("qtype"), py::arg("hop1_answer") = std::nullopt);
  m.def(
      "decompose_dataset",
      [](const std::string& dataset_json) {
        const auto examples = parse_dataset(dataset_json);
        std::vector<std::string> failures;
        const QgDataset qg = build_qg_dataset(examples, [&](std::string_view line) { failures.emplace_back(line); });
        py::list records;
        for (const auto& r : qg.records) records.append(py::make_tuple(r.question_id, r.pair.s_a, r.pair.s_b));
        return py::make_tuple(records, failures);
      },
      py::arg("dataset_json"));

  m.def(
      "diversity",
      [](const std::string& s_a, const std::string& s_b, const std::string& question) {
        const DiversityScore d = diversity_score({s_a, s_b, std::nullopt, "", false}, question);
        return py::make_tuple(d.ratio, d.novel, d.distinct);
      },
      py::arg("s_a"), py::arg("s_b"), py::arg("question"));
  m.def(
      "compare_pairwise",
      [](const std::vector<double>& a, const std::vector<double>& b, double eps) {
        const ComparisonOutcome c = compare_pairwise(a, b, eps);
        return py::make_tuple(c.wins, c.ties, c.losses);
      },
      py::arg("a"), py::arg("b"), py::arg("tie_eps") = 1e-9);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args, const std::string& stdin_text) {
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = dispatch(args, in, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "");
}
