// Copyright 2026 The SynthAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace synthaudit {

// Tokens of a string with their byte offsets into the source.
struct TokenSeq {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSeq&) const = default;
};

namespace text_internal {

inline bool IsSpace(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// ASCII punctuation only; bytes of multi-byte UTF-8 sequences count as word
// characters so non-ASCII words are never split mid-codepoint.
inline bool IsPunct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) ||
         (c >= 0x5b && c <= 0x60) || (c >= 0x7b && c <= 0x7e);
}

inline char Lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

}  // namespace text_internal

// Lowercases ASCII letters, splits on whitespace and emits every maximal run
// of punctuation as its own token.
inline TokenSeq Tokenize(std::string_view text) {
  using text_internal::IsPunct;
  using text_internal::IsSpace;
  TokenSeq out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (IsSpace(c)) {
      ++i;
      continue;
    }
    const bool punct = IsPunct(c);
    const std::size_t start = i;
    while (i < n) {
      const auto d = static_cast<unsigned char>(text[i]);
      if (IsSpace(d) || IsPunct(d) != punct) break;
      ++i;
    }
    std::string token;
    token.reserve(i - start);
    for (std::size_t j = start; j < i; ++j) {
      token.push_back(text_internal::Lower(static_cast<unsigned char>(text[j])));
    }
    out.tokens.push_back(std::move(token));
    out.offsets.emplace_back(start, i);
  }
  return out;
}

inline std::string JoinTokens(const std::vector<std::string>& tokens,
                              std::string_view separator = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += separator;
    out += tokens[i];
  }
  return out;
}

// Index range [first, last) of the tokens overlapping the byte range
// [start, end). A token only partially covered by the range is included.
inline std::pair<std::size_t, std::size_t> TokenRangeForSpan(
    const TokenSeq& seq, std::size_t start, std::size_t end) {
  std::size_t first = seq.size();
  std::size_t last = 0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto [ts, te] = seq.offsets[t];
    if (ts < end && te > start) {
      if (first == seq.size()) first = t;
      last = t + 1;
    }
  }
  if (first == seq.size()) return {0, 0};
  return {first, last};
}

}  // namespace synthaudit
