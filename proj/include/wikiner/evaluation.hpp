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

#ifndef WIKINER_EVALUATION_HPP
#define WIKINER_EVALUATION_HPP

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <wikiner/common.hpp>
#include <wikiner/corpus.hpp>

namespace wikiner
{

// Weighted combination used for the final score.
inline constexpr double kOverlapWeight = 0.8;
inline constexpr double kExactWeight = 0.2;

inline double final_score(double exact, double overlap) { return kOverlapWeight * overlap + kExactWeight * exact; }

struct PrfCounts {
    std::size_t true_positives = 0;
    std::size_t predicted = 0;
    std::size_t gold = 0;

    // Percentages. Nothing predicted and nothing expected counts as perfect.
    [[nodiscard]] double precision() const
    {
        if (predicted == 0) {
            return gold == 0 ? 100.0 : 0.0;
        }
        return 100.0 * static_cast<double>(true_positives) / static_cast<double>(predicted);
    }

    [[nodiscard]] double recall() const
    {
        if (gold == 0) {
            return predicted == 0 ? 100.0 : 0.0;
        }
        return 100.0 * static_cast<double>(true_positives) / static_cast<double>(gold);
    }

    [[nodiscard]] double f1() const
    {
        if (predicted == 0 && gold == 0) {
            return 100.0;
        }
        const double denom = static_cast<double>(predicted + gold);
        return denom == 0.0 ? 0.0 : 100.0 * 2.0 * static_cast<double>(true_positives) / denom;
    }

    PrfCounts &operator+=(const PrfCounts &o)
    {
        true_positives += o.true_positives;
        predicted += o.predicted;
        gold += o.gold;
        return *this;
    }
};

struct CategoryRow {
    std::string category;
    PrfCounts exact;
    PrfCounts overlap;
};

struct EvalReport {
    std::vector<CategoryRow> categories; // sorted by name
    PrfCounts exact_counts;
    PrfCounts overlap_counts;

    [[nodiscard]] double exact() const { return exact_counts.f1(); }
    [[nodiscard]] double overlap() const { return overlap_counts.f1(); }
    [[nodiscard]] double final() const { return final_score(exact(), overlap()); }
};

namespace detail
{

struct TypedSpan {
    std::size_t start;
    std::size_t end;
    std::string type;
};

inline std::vector<TypedSpan> typed_spans(const Sentence &s)
{
    std::vector<TypedSpan> out;
    for (const auto &sp : s.spans) {
        out.push_back({sp.start, sp.end, to_string(sp.category)});
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        return std::tie(a.start, a.end, a.type) < std::tie(b.start, b.end, b.type);
    });
    return out;
}

// Exact pairs first; leftover predictions then claim, in position order, the
// first unclaimed same-type gold span they share a token with.
inline void match_sentence(const std::vector<TypedSpan> &pred, const std::vector<TypedSpan> &gold,
                           std::map<std::string, CategoryRow> &rows)
{
    std::vector<bool> pred_used(pred.size(), false), gold_used(gold.size(), false);
    for (const auto &p : pred) {
        ++rows[p.type].exact.predicted;
        ++rows[p.type].overlap.predicted;
    }
    for (const auto &g : gold) {
        ++rows[g.type].exact.gold;
        ++rows[g.type].overlap.gold;
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < gold.size(); ++j) {
            if (!gold_used[j] && pred[i].start == gold[j].start && pred[i].end == gold[j].end
                && pred[i].type == gold[j].type) {
                pred_used[i] = gold_used[j] = true;
                ++rows[pred[i].type].exact.true_positives;
                ++rows[pred[i].type].overlap.true_positives;
                break;
            }
        }
    }
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred_used[i]) {
            continue;
        }
        for (std::size_t j = 0; j < gold.size(); ++j) {
            if (!gold_used[j] && pred[i].type == gold[j].type && pred[i].start < gold[j].end
                && gold[j].start < pred[i].end) {
                pred_used[i] = gold_used[j] = true;
                ++rows[pred[i].type].overlap.true_positives;
                break;
            }
        }
    }
}

} // namespace detail

// Span F1 over both annotation layers. Types are full category names.
inline EvalReport evaluate(const std::vector<Document> &pred, const std::vector<Document> &gold)
{
    if (pred.size() != gold.size()) {
        throw Error("document count mismatch: " + std::to_string(pred.size()) + " predicted vs "
                    + std::to_string(gold.size()) + " gold");
    }
    std::map<std::string, CategoryRow> rows;
    for (std::size_t d = 0; d < pred.size(); ++d) {
        const auto &pd = pred[d];
        const auto &gd = gold[d];
        if (pd.sentences.size() != gd.sentences.size()) {
            throw Error("document '" + gd.id + "': sentence count mismatch");
        }
        for (std::size_t s = 0; s < pd.sentences.size(); ++s) {
            if (pd.sentences[s].tokens.size() != gd.sentences[s].tokens.size()) {
                throw Error("document '" + gd.id + "' sentence " + std::to_string(s) + ": token count mismatch");
            }
            detail::match_sentence(detail::typed_spans(pd.sentences[s]), detail::typed_spans(gd.sentences[s]), rows);
        }
    }
    EvalReport rep;
    for (auto &[name, row] : rows) {
        row.category = name;
        rep.exact_counts += row.exact;
        rep.overlap_counts += row.overlap;
        rep.categories.push_back(row);
    }
    return rep;
}

} // namespace wikiner

#endif
