// Copyright 2026 The weaklabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weaklabel/detail/unicode_tables.hpp"

namespace weaklabel::unicode {

inline constexpr char32_t kReplacement = U'�';

/// Decodes UTF-8. Ill-formed sequences decode to U+FFFD, one per offending byte.
inline std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  const auto* end = p + text.size();
  while (p < end) {
    unsigned char b = *p;
    if (b < 0x80) {
      out.push_back(b);
      ++p;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b & 0xE0) == 0xC0) {
      len = 2, cp = b & 0x1F, min = 0x80;
    } else if ((b & 0xF0) == 0xE0) {
      len = 3, cp = b & 0x0F, min = 0x800;
    } else if ((b & 0xF8) == 0xF0) {
      len = 4, cp = b & 0x07, min = 0x10000;
    }
    bool ok = len > 0 && end - p >= len;
    for (int i = 1; ok && i < len; ++i) {
      if ((p[i] & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (p[i] & 0x3F);
    }
    if (ok && (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
    if (!ok) {
      out.push_back(kReplacement);
      ++p;
      continue;
    }
    out.push_back(cp);
    p += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

namespace detail {

inline bool in_table(std::span<const weaklabel::detail::CodepointRange> table, char32_t cp) {
  auto it = std::upper_bound(table.begin(), table.end(), cp,
                             [](char32_t c, const auto& r) { return c < r.lo; });
  if (it == table.begin()) return false;
  return cp <= std::prev(it)->hi;
}

}  // namespace detail

inline bool is_combining_mark(char32_t cp) {
  return detail::in_table(weaklabel::detail::kCombiningMarks, cp);
}

inline bool is_punctuation(char32_t cp) {
  return detail::in_table(weaklabel::detail::kPunctuation, cp);
}

/// The Unicode White_Space property.
inline bool is_whitespace(char32_t cp) {
  switch (cp) {
    case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
    case 0x0020: case 0x0085: case 0x00A0: case 0x1680: case 0x2028:
    case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

/// Letter-variant folding: hamza-carrying alefs to bare alef, alef maqsura and
/// hamza-on-ya to ya, ta marbuta to ha, hamza-on-waw to waw, ASCII upper to lower.
/// Every target is a fixed point, so folding is idempotent.
inline char32_t fold_letter(char32_t cp) {
  switch (cp) {
    case U'آ': case U'أ': case U'إ': case U'ٱ': case U'ٲ':
    case U'ٳ':
      return U'ا';
    case U'ى': case U'ئ': case U'ی':
      return U'ي';
    case U'ة':
      return U'ه';
    case U'ؤ':
      return U'و';
    case U'ک':
      return U'ك';
    default:
      if (cp >= U'A' && cp <= U'Z') return cp - U'A' + U'a';
      return cp;
  }
}

/// Tatweel carries no letter identity and is dropped by folding.
inline bool is_tatweel(char32_t cp) { return cp == U'ـ'; }

}  // namespace weaklabel::unicode
