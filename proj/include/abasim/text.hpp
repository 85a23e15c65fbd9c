/*
 * Copyright 2026 The Abasim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace abasim {

// Code-point count of a UTF-8 string. Length statistics are defined over
// characters, not bytes, so multibyte scripts are measured correctly.
inline std::size_t utf8_length(std::string_view text) {
  std::size_t count = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++count;  // skip continuation bytes
  }
  return count;
}

inline std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

enum class Tokenization {
  Characters,  // one token per non-space code point; suits unsegmented scripts
  Words,       // whitespace split with ASCII punctuation stripped
};

inline std::vector<std::string> tokenize(std::string_view text, Tokenization mode) {
  std::vector<std::string> tokens;
  if (mode == Tokenization::Characters) {
    std::size_t i = 0;
    while (i < text.size()) {
      unsigned char lead = static_cast<unsigned char>(text[i]);
      std::size_t width = 1;
      if ((lead & 0x80) == 0x00) width = 1;
      else if ((lead & 0xE0) == 0xC0) width = 2;
      else if ((lead & 0xF0) == 0xE0) width = 3;
      else if ((lead & 0xF8) == 0xF0) width = 4;
      if (i + width > text.size()) width = 1;
      if (!(width == 1 && std::isspace(lead))) {
        tokens.emplace_back(text.substr(i, width));
      }
      i += width;
    }
    return tokens;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      std::string_view word = text.substr(start, i - start);
      while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front()))) {
        word.remove_prefix(1);
      }
      while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) {
        word.remove_suffix(1);
      }
      if (!word.empty()) tokens.emplace_back(word);
    }
  }
  return tokens;
}

// Replaces every occurrence of `needle` in `text`.
inline std::string replace_all(std::string text, std::string_view needle,
                               std::string_view replacement) {
  if (needle.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), replacement);
    pos += replacement.size();
  }
  return text;
}

}  // namespace abasim
