#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hopqg {

// A token with its byte range [begin, end) in the source text.
struct TokenSpan {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Word tokenizer: runs of whitespace separate tokens, and every ASCII
// punctuation character is a token of its own. Case is preserved. Bytes
// outside ASCII are treated as word characters so UTF-8 survives intact.
std::vector<std::string> tokenize(std::string_view text);
std::vector<TokenSpan> tokenize_with_offsets(std::string_view text);

// Joins tokens with the spacing conventions of English prose ("S/S",
// "Carrefour's", "year?"). tokenize(detokenize(t)) == t for tokenizer output.
std::string detokenize(const std::vector<std::string>& tokens);

bool is_punct_token(std::string_view token);
std::string to_lower(std::string_view text);
std::string collapse_whitespace(std::string_view text);
bool starts_upper(std::string_view token);

// Fixed-point formatting that rounds halves away from zero (printf rounds an
// exactly representable 65.625 down to 65.62).
std::string format_fixed(double value, int decimals);

std::string hex64(std::uint64_t value);

}  // namespace hopqg
