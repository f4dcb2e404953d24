#include "hopqg/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hopqg/error.hpp"
#include "hopqg/rng.hpp"
#include "json.hpp"

namespace hopqg {

using nlohmann::json;

std::string_view to_string(QuestionType type) {
  return type == QuestionType::Bridge ? "bridge" : "comparison";
}

QuestionType question_type_from_string(std::string_view name) {
  std::string lower = to_lower(name);
  if (lower == "bridge") return QuestionType::Bridge;
  if (lower == "comparison") return QuestionType::Comparison;
  throw InvalidArgument("unknown question type '" + std::string(name) + "'");
}

std::string_view to_string(AnswerType type) {
  switch (type) {
    case AnswerType::Span: return "span";
    case AnswerType::Yes: return "yes";
    case AnswerType::No: return "no";
  }
  return "span";
}

const Paragraph* HotpotExample::find_paragraph(std::string_view title) const {
  for (const auto& p : context) {
    if (p.title == title) return &p;
  }
  return nullptr;
}

std::vector<std::string> HotpotExample::gold_titles() const {
  std::vector<std::string> out;
  for (const auto& sf : supporting_facts) {
    if (std::find(out.begin(), out.end(), sf.title) == out.end()) out.push_back(sf.title);
  }
  return out;
}

bool HotpotExample::is_supporting(std::string_view title, std::size_t sentence) const {
  return std::any_of(supporting_facts.begin(), supporting_facts.end(), [&](const auto& sf) {
    return sf.title == title && sf.sentence_index == sentence;
  });
}

namespace {

const json& require(const json& obj, const char* key, std::size_t index) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MalformedRecord(index, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t index) {
  const json& v = require(obj, key, index);
  if (!v.is_string()) throw MalformedRecord(index, std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

HotpotExample parse_record(const json& rec, std::size_t index) {
  if (!rec.is_object()) throw MalformedRecord(index, "record is not an object");
  HotpotExample ex;
  ex.id = require_string(rec, "_id", index);
  ex.question = require_string(rec, "question", index);
  ex.answer = require_string(rec, "answer", index);
  ex.level = require_string(rec, "level", index);
  try {
    ex.qtype = question_type_from_string(require_string(rec, "type", index));
  } catch (const InvalidArgument& e) {
    throw MalformedRecord(index, e.what());
  }

  const json& ctx = require(rec, "context", index);
  if (!ctx.is_array() || ctx.empty()) throw MalformedRecord(index, "context must be a non-empty array");
  for (const auto& entry : ctx) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_array()) {
      throw MalformedRecord(index, "context entries must be [title, [sentence, ...]]");
    }
    Paragraph p;
    p.title = entry[0].get<std::string>();
    for (const auto& s : entry[1]) {
      if (!s.is_string()) throw MalformedRecord(index, "sentence is not a string");
      p.sentences.push_back(s.get<std::string>());
    }
    if (p.sentences.empty()) throw MalformedRecord(index, "paragraph '" + p.title + "' has no sentences");
    ex.context.push_back(std::move(p));
  }

  const json& sfs = require(rec, "supporting_facts", index);
  if (!sfs.is_array()) throw MalformedRecord(index, "supporting_facts must be an array");
  std::set<SupportingFactRef> seen;
  for (const auto& entry : sfs) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
        !entry[1].is_number_integer() || entry[1].get<long long>() < 0) {
      throw MalformedRecord(index, "supporting facts must be [title, non-negative index]");
    }
    SupportingFactRef ref{entry[0].get<std::string>(), entry[1].get<std::size_t>()};
    const Paragraph* p = ex.find_paragraph(ref.title);
    if (p == nullptr || ref.sentence_index >= p->sentences.size()) {
      throw DanglingSupportingFact(ref.title, ref.sentence_index);
    }
    if (!seen.insert(ref).second) throw MalformedRecord(index, "duplicate supporting fact");
    ex.supporting_facts.push_back(std::move(ref));
  }
  return ex;
}

}  // namespace

std::vector<HotpotExample> parse_dataset(std::string_view raw_json) {
  json doc;
  try {
    doc = json::parse(raw_json);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw MalformedRecord(0, "top level must be an array");
  std::vector<HotpotExample> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(parse_record(doc[i], i));
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw DataError("write failed for '" + path + "'");
    }
  }
  std::filesystem::rename(tmp, target);
}

std::vector<HotpotExample> load_dataset(const std::string& path) {
  return parse_dataset(read_file(path));
}

std::string serialize_dataset(std::span<const HotpotExample> examples) {
  json doc = json::array();
  for (const auto& ex : examples) {
    json ctx = json::array();
    for (const auto& p : ex.context) ctx.push_back(json::array({p.title, p.sentences}));
    json sfs = json::array();
    for (const auto& sf : ex.supporting_facts) sfs.push_back(json::array({sf.title, sf.sentence_index}));
    json rec = json::object();
    rec["_id"] = ex.id;
    rec["answer"] = ex.answer;
    rec["context"] = std::move(ctx);
    rec["level"] = ex.level;
    rec["question"] = ex.question;
    rec["supporting_facts"] = std::move(sfs);
    rec["type"] = std::string(to_string(ex.qtype));
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

void save_dataset(const std::string& path, std::span<const HotpotExample> examples) {
  write_file_atomic(path, serialize_dataset(examples));
}

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary() {
  for (const char* t : {"[PAD]", "[UNK]", "[BOS]", "[EOS]", "[SEP]"}) push(t);
}

Vocabulary Vocabulary::from_tokens(std::span<const std::string> tokens) {
  Vocabulary v;
  for (const auto& t : tokens) {
    if (v.contains(t)) throw DataError("duplicate vocabulary token '" + t + "'");
    v.push(t);
  }
  return v;
}

void Vocabulary::push(std::string token) {
  index_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) return tokens_[kUnk];
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a(std::string_view("\0", 1), h);
  }
  return h;
}

Vocabulary build_vocabulary(std::span<const HotpotExample> examples, int min_count,
                            std::span<const std::string> extra_texts) {
  if (min_count < 1) throw InvalidArgument("min_count must be >= 1");
  std::map<std::string, long> counts;
  auto count = [&](std::string_view text) {
    for (auto& t : tokenize(text)) ++counts[t];
  };
  for (const auto& ex : examples) {
    count(ex.question);
    count(ex.answer);
    for (const auto& p : ex.context) {
      count(p.title);
      for (const auto& s : p.sentences) count(s);
    }
  }
  for (const auto& text : extra_texts) count(text);

  Vocabulary reserved;
  std::vector<std::pair<std::string, long>> ranked;
  for (auto& [tok, n] : counts) {
    if (n >= min_count && !reserved.contains(tok)) ranked.emplace_back(tok, n);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, n] : ranked) tokens.push_back(tok);
  return Vocabulary::from_tokens(tokens);
}

// --------------------------------------------------------- TokenizedExample

std::string TokenizedExample::span_text(const HotpotExample& source, std::size_t first,
                                        std::size_t last) const {
  if (first > last || last >= context_tokens.size()) return {};
  std::string out;
  std::size_t i = first;
  while (i <= last) {
    const std::size_t slot = context_tokens[i].slot;
    std::size_t j = i;
    while (j + 1 <= last && context_tokens[j + 1].slot == slot) ++j;
    const SentenceSlot& s = sentences[slot];
    const std::string& text = source.context[s.paragraph].sentences[s.sentence];
    if (!out.empty()) out += ' ';
    out += text.substr(context_tokens[i].char_begin,
                       context_tokens[j].char_end - context_tokens[i].char_begin);
    i = j + 1;
  }
  return out;
}

namespace {

// Finds needle as a contiguous run in hay (both already lowercased).
std::optional<std::size_t> find_run(const std::vector<std::string>& hay,
                                    const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<long>(i))) return i;
  }
  return std::nullopt;
}

std::optional<std::pair<std::size_t, std::size_t>> match_in_sentence(
    const std::vector<ContextToken>& tokens, std::size_t begin, std::size_t end,
    const std::vector<std::string>& answer) {
  std::vector<std::string> hay;
  for (std::size_t i = begin; i < end; ++i) hay.push_back(to_lower(tokens[i].text));
  std::vector<std::string> needle;
  for (const auto& a : answer) needle.push_back(to_lower(a));
  if (auto at = find_run(hay, needle)) {
    return std::pair{begin + *at, begin + *at + needle.size() - 1};
  }
  // Second pass ignoring punctuation tokens on both sides.
  std::vector<std::size_t> keep;
  std::vector<std::string> hay_words;
  for (std::size_t i = 0; i < hay.size(); ++i) {
    if (!is_punct_token(hay[i])) {
      keep.push_back(i);
      hay_words.push_back(hay[i]);
    }
  }
  std::vector<std::string> needle_words;
  for (auto& n : needle) {
    if (!is_punct_token(n)) needle_words.push_back(n);
  }
  if (auto at = find_run(hay_words, needle_words)) {
    return std::pair{begin + keep[*at], begin + keep[*at + needle_words.size() - 1]};
  }
  return std::nullopt;
}

}  // namespace

TokenizedExample locate_answer(const HotpotExample& example, const Vocabulary& vocab,
                               std::size_t max_seq_len) {
  TokenizedExample out;
  out.id = example.id;
  out.question_tokens = tokenize(example.question);
  out.question_ids = vocab.encode(out.question_tokens);

  std::vector<std::vector<std::vector<TokenSpan>>> para_tokens;
  std::vector<std::size_t> para_len;
  for (const auto& p : example.context) {
    std::vector<std::vector<TokenSpan>> sents;
    std::size_t n = 0;
    for (const auto& s : p.sentences) {
      sents.push_back(tokenize_with_offsets(s));
      n += sents.back().size();
    }
    para_len.push_back(n);
    para_tokens.push_back(std::move(sents));
  }

  const auto gold = example.gold_titles();
  auto is_gold = [&](std::size_t p) {
    return std::find(gold.begin(), gold.end(), example.context[p].title) != gold.end();
  };
  std::vector<std::size_t> kept(example.context.size());
  for (std::size_t p = 0; p < kept.size(); ++p) kept[p] = p;
  auto total = [&] {
    std::size_t n = out.question_tokens.size();
    for (auto p : kept) n += para_len[p];
    return n;
  };
  while (total() > max_seq_len) {
    auto it = std::find_if(kept.rbegin(), kept.rend(), [&](std::size_t p) { return !is_gold(p); });
    if (it == kept.rend()) {
      throw SequenceTooLong("example " + example.id + ": " + std::to_string(total()) +
                            " tokens exceed the limit of " + std::to_string(max_seq_len));
    }
    kept.erase(std::next(it).base());
  }
  out.kept_paragraphs = kept;

  for (std::size_t p : kept) {
    out.paragraph_offsets.push_back(out.sentences.size());
    for (std::size_t s = 0; s < para_tokens[p].size(); ++s) {
      SentenceSlot slot;
      slot.paragraph = p;
      slot.sentence = s;
      slot.begin = out.context_tokens.size();
      slot.supporting = example.is_supporting(example.context[p].title, s);
      const std::size_t slot_index = out.sentences.size();
      for (const auto& t : para_tokens[p][s]) {
        out.context_tokens.push_back({t.text, slot_index, t.begin, t.end});
        out.context_ids.push_back(vocab.id(t.text));
      }
      slot.end = out.context_tokens.size();
      out.sentences.push_back(slot);
    }
  }
  out.paragraph_offsets.push_back(out.sentences.size());

  const std::string lowered = to_lower(collapse_whitespace(example.answer));
  if (lowered == "yes") {
    out.answer_type = AnswerType::Yes;
    return out;
  }
  if (lowered == "no") {
    out.answer_type = AnswerType::No;
    return out;
  }
  out.answer_type = AnswerType::Span;
  const auto answer_tokens = tokenize(example.answer);
  for (const auto& slot : out.sentences) {
    if (!slot.supporting) continue;
    if (auto span = match_in_sentence(out.context_tokens, slot.begin, slot.end, answer_tokens)) {
      out.answer_span = span;
      return out;
    }
  }
  out.answer_unlocatable = true;
  return out;
}

// ------------------------------------------------------ tokenized file I/O

namespace {
constexpr const char* kTokenizedFormat = "hopqg-tokenized";
constexpr int kTokenizedVersion = 1;
}  // namespace

std::string serialize_tokenized(const Vocabulary& vocab, std::span<const TokenizedExample> examples,
                                std::size_t max_seq_len) {
  std::string out;
  json header = json::object();
  header["format"] = kTokenizedFormat;
  header["version"] = kTokenizedVersion;
  header["vocab_hash"] = hex64(vocab.hash());
  header["vocab_size"] = vocab.size();
  header["max_seq_len"] = max_seq_len;
  header["count"] = examples.size();
  std::vector<std::string> tail(vocab.tokens().begin() + Vocabulary::kNumReserved, vocab.tokens().end());
  header["vocab"] = tail;
  out += header.dump() + "\n";
  for (const auto& ex : examples) {
    json rec = json::object();
    rec["id"] = ex.id;
    rec["question_tokens"] = ex.question_tokens;
    rec["question_ids"] = ex.question_ids;
    json toks = json::array();
    for (const auto& t : ex.context_tokens) toks.push_back(json::array({t.text, t.slot, t.char_begin, t.char_end}));
    rec["context_tokens"] = std::move(toks);
    rec["context_ids"] = ex.context_ids;
    json sents = json::array();
    for (const auto& s : ex.sentences) {
      sents.push_back(json::array({s.paragraph, s.sentence, s.begin, s.end, s.supporting}));
    }
    rec["sentences"] = std::move(sents);
    rec["paragraph_offsets"] = ex.paragraph_offsets;
    rec["kept_paragraphs"] = ex.kept_paragraphs;
    rec["answer_type"] = std::string(to_string(ex.answer_type));
    rec["answer_span"] = ex.answer_span ? json::array({ex.answer_span->first, ex.answer_span->second})
                                        : json(nullptr);
    rec["unlocatable"] = ex.answer_unlocatable;
    out += rec.dump() + "\n";
  }
  return out;
}

TokenizedDataset parse_tokenized(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("tokenized dataset is empty");
  TokenizedDataset ds;
  try {
    json header = json::parse(line);
    if (header.value("format", "") != kTokenizedFormat) throw DataError("not a tokenized dataset file");
    if (header.value("version", 0) != kTokenizedVersion) throw DataError("unsupported tokenized dataset version");
    ds.vocab = Vocabulary::from_tokens(header.at("vocab").get<std::vector<std::string>>());
    if (hex64(ds.vocab.hash()) != header.at("vocab_hash").get<std::string>()) {
      throw DataError("vocabulary hash mismatch");
    }
    ds.max_seq_len = header.at("max_seq_len").get<std::size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      TokenizedExample ex;
      ex.id = rec.at("id").get<std::string>();
      ex.question_tokens = rec.at("question_tokens").get<std::vector<std::string>>();
      ex.question_ids = rec.at("question_ids").get<std::vector<int>>();
      for (const auto& t : rec.at("context_tokens")) {
        ex.context_tokens.push_back({t.at(0).get<std::string>(), t.at(1).get<std::size_t>(),
                                     t.at(2).get<std::size_t>(), t.at(3).get<std::size_t>()});
      }
      ex.context_ids = rec.at("context_ids").get<std::vector<int>>();
      for (const auto& s : rec.at("sentences")) {
        ex.sentences.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                                s.at(2).get<std::size_t>(), s.at(3).get<std::size_t>(), s.at(4).get<bool>()});
      }
      ex.paragraph_offsets = rec.at("paragraph_offsets").get<std::vector<std::size_t>>();
      ex.kept_paragraphs = rec.at("kept_paragraphs").get<std::vector<std::size_t>>();
      const std::string type = rec.at("answer_type").get<std::string>();
      ex.answer_type = type == "yes" ? AnswerType::Yes : type == "no" ? AnswerType::No : AnswerType::Span;
      if (!rec.at("answer_span").is_null()) {
        ex.answer_span = std::pair{rec["answer_span"].at(0).get<std::size_t>(),
                                   rec["answer_span"].at(1).get<std::size_t>()};
      }
      ex.answer_unlocatable = rec.at("unlocatable").get<bool>();
      ds.examples.push_back(std::move(ex));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt tokenized dataset: ") + e.what());
  }
  return ds;
}

}  // namespace hopqg
