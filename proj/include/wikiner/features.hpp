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

#ifndef WIKINER_FEATURES_HPP
#define WIKINER_FEATURES_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <spdlog/spdlog.h>

#include <wikiner/common.hpp>
#include <wikiner/corpus.hpp>
#include <wikiner/unicode.hpp>

namespace wikiner
{

enum class CapitalizationClass : std::uint8_t {
    numeric,
    mostly_numeric,
    upper,
    lower,
    title,
    contains_digit,
    mixed,
    other
};

inline constexpr std::string_view to_string(CapitalizationClass c)
{
    constexpr std::array<std::string_view, 8> names = {"numeric", "mostly_numeric", "upper", "lower",
                                                       "title", "contains_digit", "mixed", "other"};
    return names[static_cast<std::size_t>(c)];
}

inline std::vector<std::string> capitalization_vocabulary()
{
    std::vector<std::string> out;
    for (std::uint8_t i = 0; i < 8; ++i) {
        out.emplace_back(to_string(static_cast<CapitalizationClass>(i)));
    }
    return out;
}

// Rules are tried in a fixed order and the first match wins. Upper/lower/
// title need at least one cased letter; caseless letters count as neither.
inline CapitalizationClass capitalization_class(std::string_view surface)
{
    auto cps = unicode::decode(surface);
    std::size_t digits = 0, upper = 0, lower = 0;
    for (char32_t c : cps) {
        if (unicode::is_digit(c)) {
            ++digits;
        } else if (unicode::is_upper(c)) {
            ++upper;
        } else if (unicode::is_lower(c)) {
            ++lower;
        }
    }
    const std::size_t n = cps.size();
    if (n > 0 && digits == n) {
        return CapitalizationClass::numeric;
    }
    if (2 * digits > n) {
        return CapitalizationClass::mostly_numeric;
    }
    if (upper > 0 && lower == 0) {
        return CapitalizationClass::upper;
    }
    if (lower > 0 && upper == 0) {
        return CapitalizationClass::lower;
    }
    if (upper == 1 && unicode::is_upper(cps.front())) {
        return CapitalizationClass::title;
    }
    if (digits > 0) {
        return CapitalizationClass::contains_digit;
    }
    if (upper > 0 && lower > 0) {
        return CapitalizationClass::mixed;
    }
    return CapitalizationClass::other;
}

enum class MatchMode : std::uint8_t { lemma, surface };

// Multiword dictionary stored as a token trie. In lemma mode keys and lookups
// are lowercased base forms; in surface mode they are compared verbatim.
class Gazetteer
{
public:
    struct Entry {
        std::vector<std::string> key;
        std::string label;
    };

    explicit Gazetteer(std::string name = {}, MatchMode mode = MatchMode::lemma) : name_(std::move(name)), mode_(mode)
    {
        nodes_.emplace_back();
    }

    static Gazetteer build(std::string name, const std::vector<Entry> &entries, MatchMode mode)
    {
        Gazetteer g(std::move(name), mode);
        for (const auto &e : entries) {
            g.insert(e.key, e.label);
        }
        return g;
    }

    // File format: `key tokens (space separated) TAB label`.
    static Gazetteer load(std::string name, std::istream &in, MatchMode mode)
    {
        Gazetteer g(std::move(name), mode);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto t = trim(line);
            if (t.empty() || t[0] == '#') {
                continue;
            }
            auto cols = split(t, '\t');
            if (cols.size() != 2) {
                throw FormatError("gazetteer line needs `key TAB label`", line_no);
            }
            auto key = split_whitespace(cols[0]);
            if (key.empty()) {
                throw FormatError("empty gazetteer key", line_no);
            }
            g.insert(key, std::string(trim(cols[1])));
        }
        return g;
    }

    // First label for a key wins; later conflicting labels are counted and logged.
    void insert(const std::vector<std::string> &key, const std::string &label)
    {
        check(!key.empty(), "gazetteer keys must be non-empty");
        std::uint32_t node = 0;
        for (const auto &tok : key) {
            auto norm = normalize(tok);
            auto it = nodes_[node].children.find(norm);
            if (it == nodes_[node].children.end()) {
                auto next = static_cast<std::uint32_t>(nodes_.size());
                nodes_[node].children.emplace(norm, next);
                nodes_.emplace_back();
                node = next;
            } else {
                node = it->second;
            }
        }
        auto &slot = nodes_[node].label;
        if (slot) {
            if (*slot != label) {
                ++conflicts_;
                spdlog::debug("gazetteer {}: key '{}' keeps label '{}', ignoring '{}'", name_, join(key, " "), *slot,
                              label);
            }
            return;
        }
        slot = label;
        ++size_;
        if (std::find(labels_.begin(), labels_.end(), label) == labels_.end()) {
            labels_.push_back(label);
        }
        max_key_length_ = std::max(max_key_length_, key.size());
    }

    // Greedy left-to-right longest match; tokens outside matches get nullopt.
    [[nodiscard]] std::vector<std::optional<std::string>> match(const std::vector<Token> &sentence) const
    {
        std::vector<std::optional<std::string>> out(sentence.size());
        std::size_t i = 0;
        while (i < sentence.size()) {
            auto [len, label] = longest_at(sentence, i);
            if (len == 0) {
                ++i;
                continue;
            }
            for (std::size_t k = i; k < i + len; ++k) {
                out[k] = *label;
            }
            i += len;
        }
        return out;
    }

    // Exact key lookup.
    [[nodiscard]] const std::string *find(const std::vector<std::string> &key) const
    {
        std::uint32_t node = 0;
        for (const auto &tok : key) {
            auto it = nodes_[node].children.find(normalize(tok));
            if (it == nodes_[node].children.end()) {
                return nullptr;
            }
            node = it->second;
        }
        return nodes_[node].label ? &*nodes_[node].label : nullptr;
    }

    [[nodiscard]] bool contains(std::string_view word) const { return find({std::string(word)}) != nullptr; }

    [[nodiscard]] const std::string &name() const { return name_; }
    [[nodiscard]] MatchMode mode() const { return mode_; }
    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] std::size_t conflicts() const { return conflicts_; }
    // Distinct labels in insertion order.
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }

private:
    struct Node {
        std::unordered_map<std::string, std::uint32_t> children;
        std::optional<std::string> label;
    };

    [[nodiscard]] std::string normalize(std::string_view tok) const
    {
        return mode_ == MatchMode::lemma ? unicode::to_lower(tok) : std::string(tok);
    }

    [[nodiscard]] std::string token_key(const Token &t) const
    {
        return mode_ == MatchMode::lemma ? t.key() : t.surface;
    }

    [[nodiscard]] std::pair<std::size_t, const std::string *> longest_at(const std::vector<Token> &sentence,
                                                                         std::size_t start) const
    {
        std::uint32_t node = 0;
        std::size_t best_len = 0;
        const std::string *best = nullptr;
        for (std::size_t k = start; k < sentence.size(); ++k) {
            auto it = nodes_[node].children.find(token_key(sentence[k]));
            if (it == nodes_[node].children.end()) {
                break;
            }
            node = it->second;
            if (nodes_[node].label) {
                best_len = k - start + 1;
                best = &*nodes_[node].label;
            }
        }
        return {best_len, best};
    }

    std::string name_;
    MatchMode mode_;
    std::vector<Node> nodes_;
    std::vector<std::string> labels_;
    std::size_t size_ = 0;
    std::size_t conflicts_ = 0;
    std::size_t max_key_length_ = 0;
};

// Ordered label list of one feature source. Index size() is the reserved
// slot for "no label" and for labels unseen when the vocabulary was fixed.
class Vocabulary
{
public:
    Vocabulary() = default;

    Vocabulary(std::string source, std::vector<std::string> labels) : source_(std::move(source)), labels_(std::move(labels))
    {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            index_.emplace(labels_[i], i);
        }
    }

    [[nodiscard]] std::size_t dimension() const { return labels_.size() + 1; }
    [[nodiscard]] std::size_t reserved() const { return labels_.size(); }
    [[nodiscard]] const std::string &source() const { return source_; }
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }

    [[nodiscard]] std::size_t index_of(const std::optional<std::string> &label) const
    {
        if (!label) {
            return reserved();
        }
        auto it = index_.find(*label);
        return it == index_.end() ? reserved() : it->second;
    }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(source_, labels_);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(source_, labels_);
        *this = Vocabulary(source_, labels_);
    }

    friend bool operator==(const Vocabulary &a, const Vocabulary &b)
    {
        return a.source_ == b.source_ && a.labels_ == b.labels_;
    }

private:
    std::string source_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct OneHotVector {
    std::string source;
    std::size_t dimension = 0;
    std::size_t active = 0;

    [[nodiscard]] std::vector<double> dense() const
    {
        std::vector<double> out(dimension, 0.0);
        out[active] = 1.0;
        return out;
    }
};

inline OneHotVector encode_onehot(const std::optional<std::string> &label, const Vocabulary &vocab)
{
    return OneHotVector{vocab.source(), vocab.dimension(), vocab.index_of(label)};
}

// Per-token label stream produced by one extractor.
using LabelStream = std::vector<std::optional<std::string>>;

inline LabelStream capitalization_stream(const std::vector<Token> &sentence)
{
    LabelStream out;
    out.reserve(sentence.size());
    for (const auto &t : sentence) {
        out.emplace_back(std::string(to_string(capitalization_class(t.surface))));
    }
    return out;
}

} // namespace wikiner

#endif
