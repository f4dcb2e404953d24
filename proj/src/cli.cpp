#include "hopqg/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hopqg/adversarial.hpp"
#include "hopqg/checkpoint.hpp"
#include "hopqg/config_file.hpp"
#include "hopqg/corpus.hpp"
#include "hopqg/decomposer.hpp"
#include "hopqg/entity_graph.hpp"
#include "hopqg/error.hpp"
#include "hopqg/metrics.hpp"
#include "hopqg/quality.hpp"
#include "hopqg/questionnaire.hpp"
#include "hopqg/report.hpp"
#include "hopqg/text.hpp"
#include "hopqg/trainer.hpp"

namespace hopqg {

namespace fs = std::filesystem;

namespace {

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  bool quiet = false;

  void info(const std::string& line) const {
    if (!quiet) err << line << "\n";
  }
};

std::vector<QgRecord> load_qg(const std::string& path) { return parse_qg_records(read_file(path)); }

nlohmann::ordered_json metrics_json(const MetricsReport& m, const std::string& hash) {
  nlohmann::ordered_json j;
  j["dataset_hash"] = hash;
  j["count"] = m.count;
  j["answer_em"] = m.answer_em;
  j["answer_f1"] = m.answer_f1;
  j["sp_em"] = m.sp_em;
  j["sp_f1"] = m.sp_f1;
  j["joint_em"] = m.joint_em;
  j["joint_f1"] = m.joint_f1;
  return j;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

// --- subcommands -----------------------------------------------------------

struct IngestArgs {
  std::string input, output, subq;
  int min_count = 1;
  std::size_t max_seq_len = kDefaultMaxSeqLen;
};

void run_ingest(const IngestArgs& a, const Context& ctx) {
  const auto examples = load_dataset(a.input);
  std::vector<QgRecord> qg;
  if (!a.subq.empty()) qg = load_qg(a.subq);
  const Vocabulary vocab = corpus_vocabulary(examples, qg, a.min_count);
  std::vector<TokenizedExample> tokenized;
  std::size_t unlocatable = 0;
  for (const auto& ex : examples) {
    tokenized.push_back(locate_answer(ex, vocab, a.max_seq_len));
    unlocatable += tokenized.back().answer_unlocatable ? 1 : 0;
  }
  write_file_atomic(a.output, serialize_tokenized(vocab, tokenized, a.max_seq_len));
  ctx.out << "ingest: " << examples.size() << " examples, vocabulary " << vocab.size() << ", unlocatable answers "
          << unlocatable << "\n";
}

struct DecomposeArgs {
  std::string input, output;
};

void run_decompose(const DecomposeArgs& a, const Context& ctx) {
  const auto examples = load_dataset(a.input);
  const QgDataset qg = build_qg_dataset(examples, [&](std::string_view line) { ctx.err << line << "\n"; });
  write_file_atomic(a.output, serialize_qg_records(qg.records));
  ctx.out << "decompose: " << qg.records.size() << " pairs, " << qg.failures.size() << " failures (bridge "
          << qg.bridge_count << ", comparison " << qg.comparison_count << ")\n";
  if (qg.distribution_warning) ctx.err << "decompose: warning: " << *qg.distribution_warning << "\n";
}

struct GraphArgs {
  std::string input, output;
};

void run_graph(const GraphArgs& a, const Context& ctx) {
  const auto examples = load_dataset(a.input);
  const Vocabulary vocab;
  std::string out;
  std::size_t edges = 0;
  for (const auto& ex : examples) {
    const TokenizedExample tok = locate_answer(ex, vocab, std::numeric_limits<std::size_t>::max());
    auto graph = example_graph(ex, tok);
    EntityGraph g = graph ? *graph : EntityGraph{};
    g.context_length = tok.context_length();
    edges += g.edges().size();
    out += graph_to_json(ex.id, g) + "\n";
  }
  write_file_atomic(a.output, out);
  ctx.out << "graph: " << examples.size() << " graphs, " << edges << " edges\n";
}

struct TrainArgs {
  std::string config, data, output, subq;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

ModelConfig resolve_config(const TrainArgs& a) {
  ModelConfig cfg = a.config.empty() ? ModelConfig{} : load_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    apply_config_value(cfg, collapse_whitespace(kv.substr(0, eq)), kv.substr(eq + 1));
  }
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

void run_train(const TrainArgs& a, const Context& ctx) {
  const ModelConfig cfg = resolve_config(a);
  const fs::path dir(a.data);
  const auto examples = load_dataset((dir / "dataset.json").string());
  std::vector<QgRecord> qg;
  const fs::path subq = a.subq.empty() ? dir / "subquestions.jsonl" : fs::path(a.subq);
  if (fs::exists(subq)) qg = load_qg(subq.string());
  const Vocabulary vocab = corpus_vocabulary(examples, qg, cfg.vocab_min_count);
  const PreparedData data = prepare_data(examples, qg, vocab, cfg.max_seq_len);
  Model model(cfg, vocab);
  const bool existed = fs::exists(a.output);
  try {
    const TrainResult result = train_to_directory(model, data.training, a.output);
    ctx.out << "train: " << result.log.size() << " steps over " << cfg.epochs << " epochs";
    if (!result.log.empty()) ctx.out << ", final l_total " << format_fixed(result.log.back().loss.l_total, 6);
    ctx.out << "\n";
  } catch (...) {
    if (!existed) {
      std::error_code ec;
      fs::remove_all(a.output, ec);
    }
    throw;
  }
}

struct PredictArgs {
  std::string checkpoint, input, output, subq_out;
};

void run_predict(const PredictArgs& a, const Context& ctx) {
  const LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const Model& model = ck.model;
  const auto examples = load_dataset(a.input);
  PredictionSet preds;
  std::vector<QgRecord> generated;
  for (const auto& ex : examples) {
    const TokenizedExample tok = locate_answer(ex, model.vocab(), model.config().max_seq_len);
    const Prediction p = model.predict(ex, tok, example_graph(ex, tok));
    preds.answers[ex.id] = p.answer;
    preds.supporting[ex.id] = {p.supporting_facts.begin(), p.supporting_facts.end()};
    if (model.config().qg_enabled) generated.push_back({ex.id, p.subquestions.pair});
  }
  write_file_atomic(a.output, serialize_predictions(preds));
  if (!a.subq_out.empty()) write_file_atomic(a.subq_out, serialize_qg_records(generated));
  ctx.out << "predict: " << examples.size() << " predictions\n";
}

struct EvalArgs {
  std::string pred, gold, noisy_pred, noisy_gold, output;
  std::string label = "Ours";
};

void run_eval(const EvalArgs& a, const Context& ctx) {
  if (a.noisy_pred.empty() != a.noisy_gold.empty()) {
    throw InvalidArgument("--noisy-pred and --noisy-gold go together");
  }
  const std::string gold_bytes = read_file(a.gold);
  const MetricsReport clean = evaluate(parse_predictions(read_file(a.pred)), parse_dataset(gold_bytes));
  nlohmann::ordered_json report;
  report["format"] = "hopqg-eval";
  report["version"] = 1;
  report["clean"] = metrics_json(clean, dataset_hash(gold_bytes));
  std::string table;
  if (!a.noisy_pred.empty()) {
    const std::string noisy_bytes = read_file(a.noisy_gold);
    const MetricsReport noisy = evaluate(parse_predictions(read_file(a.noisy_pred)), parse_dataset(noisy_bytes));
    report["noisy"] = metrics_json(noisy, dataset_hash(noisy_bytes));
    const RobustnessDelta d = robustness_delta(clean, noisy);
    report["delta_percent"] = {{"answer_em", optional_json(d.answer_em)}, {"answer_f1", optional_json(d.answer_f1)},
                               {"sp_em", optional_json(d.sp_em)},         {"sp_f1", optional_json(d.sp_f1)},
                               {"joint_em", optional_json(d.joint_em)},   {"joint_f1", optional_json(d.joint_f1)}};
    table = render_table2({{a.label, clean.answer_em * 100, clean.answer_f1 * 100, a.label + "*", noisy.answer_em * 100,
                            noisy.answer_f1 * 100}});
  } else {
    table = render_table1({{a.label, clean}});
  }
  report["table"] = table;
  const std::string text = report.dump(2) + "\n";
  if (!a.output.empty()) write_file_atomic(a.output, text);
  ctx.out << table;
}

struct PerturbArgs {
  std::string input, output;
  std::size_t k = 4;
  std::uint64_t seed = 13;
  std::size_t max_paragraphs = 10;
  bool no_drop = false;
};

void run_perturb(const PerturbArgs& a, const Context& ctx) {
  const auto examples = load_dataset(a.input);
  const PerturbedDataset noisy = perturb_dataset(examples, a.k, a.seed, {a.max_paragraphs, !a.no_drop});
  for (const auto& s : noisy.skipped) ctx.err << "perturb: skipped " << s.id << ": " << s.reason << "\n";
  write_file_atomic(a.output, serialize_dataset(noisy.examples));
  ctx.out << "perturb: " << noisy.plans.size() << " perturbed, " << noisy.skipped.size() << " unchanged\n";
}

struct CompareArgs {
  std::string checkpoint, without_qg, input, output, scorer;
};

void run_compare(const CompareArgs& a, const Context& ctx) {
  const LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const Model& model = ck.model;
  if (!model.config().qg_enabled) throw InvalidArgument("compare needs a checkpoint trained with QG");
  const auto examples = load_dataset(a.input);
  const QgDataset qd = build_qg_dataset(examples, [&](std::string_view line) { ctx.info(std::string(line)); });
  std::map<std::string, SubQuestionPair> template_pairs;
  for (const auto& r : qd.records) template_pairs[r.question_id] = r.pair;

  std::vector<double> div_qg, div_qd;
  std::vector<std::string> texts_qg, texts_qd;
  for (const auto& ex : examples) {
    auto it = template_pairs.find(ex.id);
    if (it == template_pairs.end()) continue;
    const TokenizedExample tok = locate_answer(ex, model.vocab(), model.config().max_seq_len);
    const Prediction p = model.predict(ex, tok, example_graph(ex, tok));
    div_qg.push_back(static_cast<double>(diversity_score(p.subquestions.pair, ex.question).novel));
    div_qd.push_back(static_cast<double>(diversity_score(it->second, ex.question).novel));
    texts_qg.push_back(p.subquestions.pair.s_a + " " + p.subquestions.pair.s_b);
    texts_qd.push_back(it->second.s_a + " " + it->second.s_b);
  }
  std::unique_ptr<FluencyScorer> scorer;
  if (a.scorer.empty()) scorer = std::make_unique<DecoderFluencyScorer>(model);
  else scorer = std::make_unique<ExternalProcessScorer>(a.scorer);
  auto scores = [&](const std::vector<std::string>& texts) {
    std::vector<double> v;
    for (const auto& r : fluency_scores(texts, scorer.get())) v.push_back(r.score);
    return v;
  };
  const ComparisonOutcome diversity = compare_pairwise(div_qg, div_qd, 0.0);
  const ComparisonOutcome fluency = compare_pairwise(scores(texts_qg), scores(texts_qd), 1e-9);
  std::vector<Table4Row> rows = {
      {"Diversity", "QG vs. QD", diversity.win * 100, diversity.tie * 100, diversity.loss * 100},
      {"LM Score", "QG vs. QD", fluency.win * 100,
       fluency.ties ? std::optional<double>(fluency.tie * 100) : std::nullopt, fluency.loss * 100}};
  nlohmann::ordered_json report;
  report["format"] = "hopqg-compare";
  report["version"] = 1;
  report["examples"] = div_qg.size();
  report["scorer"] = scorer->name();
  report["diversity"] = {{"win", diversity.win}, {"tie", diversity.tie}, {"loss", diversity.loss}};
  report["lm_score"] = {{"win", fluency.win}, {"tie", fluency.tie}, {"loss", fluency.loss}};
  if (!a.without_qg.empty()) {
    const LoadedCheckpoint base = load_checkpoint(a.without_qg);
    const PreparedData data = prepare_data(examples, {}, model.vocab(), model.config().max_seq_len);
    const AttentionDelta d = attention_delta(model, base.model, data);
    rows.push_back({"Attention weight", "QG vs. w/o QG", d.ratio * 100, std::nullopt, (1.0 - d.ratio) * 100});
    report["attention"] = {{"increased", d.increased}, {"total", d.total}, {"ratio", d.ratio}};
  }
  const std::string table = render_table4(rows);
  report["table"] = table;
  if (!a.output.empty()) write_file_atomic(a.output, report.dump(2) + "\n");
  ctx.out << table;
}

struct QuizArgs {
  std::string input, subq, log, group, aid = "supporting_facts", script;
  std::size_t count = 8;
  std::uint64_t seed = 13;
  std::vector<std::string> summarize;
  std::vector<std::string> labels;
};

void run_quiz(const QuizArgs& a, const Context& ctx) {
  if (!a.summarize.empty()) {
    std::vector<GroupSummary> groups;
    for (const auto& path : a.summarize) {
      const auto sessions = parse_sessions(read_file(path));
      groups.push_back(summarize_group(sessions.empty() ? path : sessions.front().group, sessions));
    }
    ctx.out << render_table3(groups, a.labels);
    return;
  }
  if (a.input.empty()) throw InvalidArgument("quiz needs --input or --summarize");
  AidKind aid;
  if (a.aid == "supporting_facts") aid = AidKind::SupportingFacts;
  else if (a.aid == "subquestions") aid = AidKind::SubQuestions;
  else throw InvalidArgument("--aid must be supporting_facts or subquestions");
  std::vector<HotpotExample> bridge;
  for (auto& ex : load_dataset(a.input)) {
    if (ex.qtype == QuestionType::Bridge) bridge.push_back(std::move(ex));
  }
  std::map<std::string, SubQuestionPair> pairs;
  if (!a.subq.empty()) {
    for (auto& r : load_qg(a.subq)) pairs[r.question_id] = r.pair;
  }
  const Questionnaire q = build_questionnaire(bridge, a.count, aid, a.seed, pairs);
  SteadyQuizClock clock;
  QuestionnaireResult result;
  if (!a.script.empty()) {
    std::vector<std::size_t> choices;
    std::stringstream ss(a.script);
    for (std::string tok; std::getline(ss, tok, ',');) choices.push_back(std::stoul(tok) - 1);
    ScriptedQuizIO io(choices);
    result = run_questionnaire(q, io, clock, a.group);
  } else {
    TerminalQuizIO io(ctx.in, ctx.out);
    result = run_questionnaire(q, io, clock, a.group);
  }
  if (!a.log.empty()) write_file_atomic(a.log, serialize_session(result));
  ctx.out << "quiz: " << result.items.size() << "/" << result.item_count << " answered, accuracy "
          << format_fixed(result.accuracy * 100, 2) << "%, time " << format_fixed(result.elapsed, 0) << "s"
          << (result.complete ? "" : " (incomplete)") << "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-hop QA with question generation: data preparation, training, evaluation."};
  app.name("hopqg");
  app.require_subcommand(1, 1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress informational log lines");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Tokenize a dataset into the versioned tokenized format");
  c_ingest->add_option("--input", ingest.input, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--out", ingest.output, "Tokenized output file")->required();
  c_ingest->add_option("--subq", ingest.subq, "Sub-question records to include in the vocabulary")
      ->check(CLI::ExistingFile);
  c_ingest->add_option("--min-count", ingest.min_count, "Vocabulary frequency cut-off")->check(CLI::PositiveNumber);
  c_ingest->add_option("--max-seq-len", ingest.max_seq_len, "Question + context token budget")
      ->check(CLI::PositiveNumber);

  DecomposeArgs decompose;
  auto* c_decompose = app.add_subcommand("decompose", "Build the sub-question dataset");
  c_decompose->add_option("--input", decompose.input, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_decompose->add_option("--out", decompose.output, "Sub-question records (JSONL)")->required();

  GraphArgs graph;
  auto* c_graph = app.add_subcommand("graph", "Dump entity graphs");
  c_graph->add_option("--input", graph.input, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_graph->add_option("--out", graph.output, "Graph records (JSONL)")->required();

  TrainArgs train_args;
  auto* c_train = app.add_subcommand("train", "Train the joint QA + QG model");
  c_train->add_option("--config", train_args.config, "Config file (key = value)")->check(CLI::ExistingFile);
  c_train->add_option("--data", train_args.data, "Directory with dataset.json and subquestions.jsonl")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_train->add_option("--subq", train_args.subq, "Sub-question records overriding <data>/subquestions.jsonl")
      ->check(CLI::ExistingFile);
  c_train->add_option("--out", train_args.output, "Checkpoint directory")->required();
  c_train->add_option("--set", train_args.overrides, "Config override key=value (repeatable)");
  c_train->add_option("--seed", train_args.seed, "Seed override");

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Predict answers, supporting facts and sub-questions");
  c_predict->add_option("--checkpoint", predict.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  c_predict->add_option("--input", predict.input, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_predict->add_option("--out", predict.output, "Prediction JSON")->required();
  c_predict->add_option("--subq-out", predict.subq_out, "Generated sub-questions (JSONL)");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score predictions against gold answers and supporting facts");
  c_eval->add_option("--pred", eval.pred, "Prediction JSON")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--gold", eval.gold, "Gold dataset JSON")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--noisy-pred", eval.noisy_pred, "Predictions on the perturbed set")->check(CLI::ExistingFile);
  c_eval->add_option("--noisy-gold", eval.noisy_gold, "Perturbed gold dataset")->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval.output, "Report JSON");
  c_eval->add_option("--label", eval.label, "System name in the table");

  PerturbArgs perturb;
  auto* c_perturb = app.add_subcommand("perturb", "Inject noisy facts that break the reasoning chain");
  c_perturb->add_option("--input", perturb.input, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_perturb->add_option("--out", perturb.output, "Perturbed dataset JSON")->required();
  c_perturb->add_option("--k", perturb.k, "Noisy facts per example");
  c_perturb->add_option("--seed", perturb.seed, "Seed");
  c_perturb->add_option("--max-paragraphs", perturb.max_paragraphs, "Paragraph budget per example");
  c_perturb->add_flag("--no-drop", perturb.no_drop, "Never drop distractor paragraphs");

  CompareArgs compare;
  auto* c_compare = app.add_subcommand("compare", "Compare generated and template sub-questions");
  c_compare->add_option("--checkpoint", compare.checkpoint, "Checkpoint trained with QG")
      ->required()
      ->check(CLI::ExistingFile);
  c_compare->add_option("--without-qg", compare.without_qg, "Checkpoint trained without QG (attention row)")
      ->check(CLI::ExistingFile);
  c_compare->add_option("--input", compare.input, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_compare->add_option("--scorer", compare.scorer, "External fluency scorer command");
  c_compare->add_option("--out", compare.output, "Report JSON");

  QuizArgs quiz;
  auto* c_quiz = app.add_subcommand("quiz", "Run or summarize the reasoning-chain questionnaire");
  c_quiz->add_option("--input", quiz.input, "Dataset JSON")->check(CLI::ExistingFile);
  c_quiz->add_option("--count", quiz.count, "Items");
  c_quiz->add_option("--aid", quiz.aid, "supporting_facts or subquestions");
  c_quiz->add_option("--subq", quiz.subq, "Sub-question records for --aid subquestions")->check(CLI::ExistingFile);
  c_quiz->add_option("--seed", quiz.seed, "Seed");
  c_quiz->add_option("--group", quiz.group, "Group label stored in the log");
  c_quiz->add_option("--log", quiz.log, "Session log output (JSONL)");
  c_quiz->add_option("--script", quiz.script, "Comma-separated 1-based choices instead of the terminal");
  c_quiz->add_option("--summarize", quiz.summarize, "Session log files, one per group")->check(CLI::ExistingFile);
  c_quiz->add_option("--labels", quiz.labels, "Row labels for the summary table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "hopqg: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (const char* v = std::getenv("HOPQG_LOG"); v && std::string(v) == "quiet") quiet = true;
  Context ctx{in, out, err, quiet};
  try {
    if (*c_ingest) run_ingest(ingest, ctx);
    else if (*c_decompose) run_decompose(decompose, ctx);
    else if (*c_graph) run_graph(graph, ctx);
    else if (*c_train) run_train(train_args, ctx);
    else if (*c_predict) run_predict(predict, ctx);
    else if (*c_eval) run_eval(eval, ctx);
    else if (*c_perturb) run_perturb(perturb, ctx);
    else if (*c_compare) run_compare(compare, ctx);
    else if (*c_quiz) run_quiz(quiz, ctx);
  } catch (const DivergenceDetected& e) {
    err << "hopqg: training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const InvalidArgument& e) {
    err << "hopqg: invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "hopqg: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "hopqg: filesystem error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args) { return dispatch(args, std::cin, std::cout, std::cerr); }

}  // namespace hopqg
