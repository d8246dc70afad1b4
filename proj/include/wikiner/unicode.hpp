// Copyright 2026 The Wikiner Authors.
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

#ifndef WIKINER_UNICODE_HPP
#define WIKINER_UNICODE_HPP

#include <algorithm>
#include <array>
#include <locale.h>
#include <string>
#include <string_view>
#include <wctype.h>

namespace wikiner::unicode
{

namespace detail
{

// Character classes come from the C library's UTF-8 locale. When that locale
// is missing, classification degrades to ASCII.
inline locale_t utf8_locale()
{
    static const locale_t loc = [] {
        locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
        if (l == static_cast<locale_t>(nullptr)) {
            l = newlocale(LC_CTYPE_MASK, "en_US.UTF-8", static_cast<locale_t>(nullptr));
        }
        return l;
    }();
    return loc;
}

// First code point of each Unicode decimal-digit (Nd) run of ten.
inline constexpr std::array<char32_t, 37> kDigitZeros = {
    0x0030,  0x0660,  0x06F0,  0x07C0,  0x0966,  0x09E6,  0x0A66,  0x0AE6,  0x0B66,  0x0BE6,
    0x0C66,  0x0CE6,  0x0D66,  0x0DE6,  0x0E50,  0x0ED0,  0x0F20,  0x1040,  0x1090,  0x17E0,
    0x1810,  0x1946,  0x19D0,  0x1A80,  0x1A90,  0x1B50,  0x1BB0,  0x1C40,  0x1C50,  0xA620,
    0xA8D0,  0xA900,  0xA9D0,  0xAA50,  0xABF0,  0xFF10,  0x1D7CE};

} // namespace detail

inline std::u32string decode(std::string_view s)
{
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6) {
            len = 2;
        } else if ((c >> 4) == 0xE) {
            len = 3;
        } else if ((c >> 3) == 0x1E) {
            len = 4;
        }
        if (len > 1) {
            if (i + len > s.size()) {
                len = 1;
            } else {
                char32_t v = c & (0x7F >> len);
                bool ok = true;
                for (std::size_t k = 1; k < len; ++k) {
                    auto cc = static_cast<unsigned char>(s[i + k]);
                    if ((cc >> 6) != 0x2) {
                        ok = false;
                        break;
                    }
                    v = (v << 6) | (cc & 0x3F);
                }
                if (ok) {
                    cp = v;
                } else {
                    len = 1;
                }
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append(std::string &out, char32_t cp)
{
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

inline std::string encode(std::u32string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        append(out, cp);
    }
    return out;
}

inline bool is_digit(char32_t cp)
{
    // Runs are sorted, so the candidate is the last zero not above cp.
    auto it = std::upper_bound(detail::kDigitZeros.begin(), detail::kDigitZeros.end(), cp);
    if (it == detail::kDigitZeros.begin()) {
        return false;
    }
    --it;
    return cp - *it < 10;
}

inline bool is_upper(char32_t cp)
{
    auto loc = detail::utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return cp >= 'A' && cp <= 'Z';
    }
    return iswupper_l(static_cast<wint_t>(cp), loc) != 0;
}

inline bool is_lower(char32_t cp)
{
    auto loc = detail::utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return cp >= 'a' && cp <= 'z';
    }
    return iswlower_l(static_cast<wint_t>(cp), loc) != 0;
}

inline bool is_alpha(char32_t cp)
{
    auto loc = detail::utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    }
    return !is_digit(cp) && iswalpha_l(static_cast<wint_t>(cp), loc) != 0;
}

inline bool is_space(char32_t cp)
{
    auto loc = detail::utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v';
    }
    return iswspace_l(static_cast<wint_t>(cp), loc) != 0 || cp == 0x00A0;
}

// Word characters are letters, digits and combining marks; everything else
// that is not whitespace is treated as punctuation by the tokenizer.
inline bool is_word_char(char32_t cp)
{
    if (is_alpha(cp) || is_digit(cp)) {
        return true;
    }
    return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF);
}

inline char32_t to_lower(char32_t cp)
{
    auto loc = detail::utf8_locale();
    if (loc == static_cast<locale_t>(nullptr)) {
        return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    }
    return static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

inline std::string to_lower(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : decode(s)) {
        append(out, to_lower(cp));
    }
    return out;
}

inline std::size_t length(std::string_view s) { return decode(s).size(); }

} // namespace wikiner::unicode

#endif
