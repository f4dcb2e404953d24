#include "hopqg/text.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace hopqg {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 0x80 && std::ispunct(c) != 0; }

}  // namespace

std::vector<TokenSpan> tokenize_with_offsets(std::string_view text) {
  std::vector<TokenSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_punct(c)) {
      out.push_back({std::string(1, text[i]), i, i + 1});
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size()) {
      unsigned char d = static_cast<unsigned char>(text[j]);
      if (is_space(d) || is_punct(d)) break;
      ++j;
    }
    out.push_back({std::string(text.substr(i, j - i)), i, j});
    i = j;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

bool is_punct_token(std::string_view token) {
  return token.size() == 1 && is_punct(static_cast<unsigned char>(token[0]));
}

std::string detokenize(const std::vector<std::string>& tokens) {
  // Characters that attach to the previous token, and characters that the
  // next token attaches to.
  auto glue_left = [](std::string_view t) {
    return t == "?" || t == "," || t == "." || t == "!" || t == ";" ||
           t == ":" || t == ")" || t == "]" || t == "'" || t == "/" ||
           t == "-" || t == "%";
  };
  auto glue_right = [](std::string_view t) {
    return t == "(" || t == "[" || t == "'" || t == "/" || t == "-" ||
           t == "$";
  };
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !glue_left(tokens[i]) && !glue_right(tokens[i - 1])) {
      out += ' ';
    }
    out += tokens[i];
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (is_space(static_cast<unsigned char>(c))) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

bool starts_upper(std::string_view token) {
  return !token.empty() &&
         std::isupper(static_cast<unsigned char>(token[0])) != 0;
}

std::string format_fixed(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  double rounded = std::round(value * scale) / scale;
  if (rounded == 0.0) rounded = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded);
  return buf;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace hopqg
