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

#ifndef WIKINER_TOKENIZER_HPP
#define WIKINER_TOKENIZER_HPP

#include <string>
#include <string_view>
#include <vector>

#include <wikiner/corpus.hpp>
#include <wikiner/unicode.hpp>

namespace wikiner
{

// Runs of word characters form tokens; every other non-space code point is a
// token of its own.
inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string current;
    for (char32_t cp : unicode::decode(text)) {
        if (unicode::is_space(cp)) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        } else if (unicode::is_word_char(cp)) {
            unicode::append(current, cp);
        } else {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
            std::string p;
            unicode::append(p, cp);
            out.push_back(std::move(p));
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

// Canonical key for a multi-token label: tokens joined by single spaces.
inline std::string normalize_label(std::string_view text) { return join(tokenize(text), " "); }

inline bool is_sentence_end(std::string_view tok) { return tok == "." || tok == "!" || tok == "?"; }

// Tokenizes raw text and splits sentences after terminal punctuation and at
// blank lines. Lemmas are left empty.
inline std::vector<Sentence> split_sentences(std::string_view text)
{
    std::vector<Sentence> out;
    std::vector<std::string> current;
    auto flush = [&] {
        if (!current.empty()) {
            out.push_back(make_sentence(current));
            current.clear();
        }
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto next = text.find("\n\n", pos);
        auto block = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        for (auto &tok : tokenize(block)) {
            bool end = is_sentence_end(tok);
            current.push_back(std::move(tok));
            if (end) {
                flush();
            }
        }
        flush();
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 2;
    }
    return out;
}

} // namespace wikiner

#endif
