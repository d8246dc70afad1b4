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

#ifndef WIKINER_ENTITYLINKER_HPP
#define WIKINER_ENTITYLINKER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <wikiner/common.hpp>
#include <wikiner/corpus.hpp>
#include <wikiner/features.hpp>
#include <wikiner/tokenizer.hpp>
#include <wikiner/wikigraph.hpp>

namespace wikiner
{

// ---------------------------------------------------------------------------
// Link statistics

// Fraction of a label's occurrences that are links; 0 for unseen labels.
inline double link_probability(const AnchorStatistics &stats, const std::string &label)
{
    const auto *s = stats.find(label);
    if (s == nullptr || s->occurrences == 0) {
        return 0.0;
    }
    return static_cast<double>(s->links) / static_cast<double>(s->occurrences);
}

// Share of the label's links that point at `concept_id`.
inline double prior_sense_probability(const AnchorStatistics &stats, const std::string &label, NodeId concept_id)
{
    const auto *s = stats.find(label);
    if (s == nullptr || s->links == 0) {
        throw Error("label '" + label + "' has no senses");
    }
    auto it = s->senses.find(concept_id);
    if (it == s->senses.end()) {
        return 0.0;
    }
    return static_cast<double>(it->second) / static_cast<double>(s->links);
}

// Inlink-overlap relatedness derived from Normalized Google Distance:
//   1 - (log max(|A|,|B|) - log |A∩B|) / (log |W| - log min(|A|,|B|))
// Empty inlink sets and empty intersections give 0; the result is clamped
// to [0, 1].
inline double relatedness(std::size_t a_count, std::size_t b_count, std::size_t common, std::uint64_t total)
{
    if (a_count == 0 || b_count == 0 || common == 0) {
        return 0.0;
    }
    const double hi = std::log(static_cast<double>(std::max(a_count, b_count)));
    const double lo = std::log(static_cast<double>(std::min(a_count, b_count)));
    const double num = hi - std::log(static_cast<double>(common));
    if (num <= 0.0) {
        return 1.0;
    }
    const double den = std::log(static_cast<double>(total)) - lo;
    if (den <= 0.0) {
        return 0.0;
    }
    return std::clamp(1.0 - num / den, 0.0, 1.0);
}

inline double relatedness(const InlinkIndex &index, NodeId a, NodeId b)
{
    return relatedness(index.count(a), index.count(b), a == b ? index.count(a) : index.intersection(a, b),
                       index.total_articles());
}

// ---------------------------------------------------------------------------
// Candidates and document context

struct Sense {
    NodeId concept_id = 0;
    double prior = 0.0;
};

struct LabelCandidate {
    std::string label;
    std::size_t start = 0;
    std::size_t end = 0;
    std::vector<Token> tokens;
    std::vector<Sense> senses; // concept id order
    double link_probability = 0.0;
};

inline LabelCandidate make_candidate(const AnchorStatistics &stats, const std::string &label, std::size_t start,
                                     std::vector<Token> tokens)
{
    LabelCandidate c;
    c.label = label;
    c.start = start;
    c.end = start + tokens.size();
    c.tokens = std::move(tokens);
    c.link_probability = link_probability(stats, label);
    if (const auto *s = stats.find(label); s != nullptr && s->links > 0) {
        for (const auto &[concept_id, n] : s->senses) {
            c.senses.push_back(Sense{concept_id, static_cast<double>(n) / static_cast<double>(s->links)});
        }
    }
    return c;
}

struct DocumentContext {
    struct Member {
        NodeId concept_id = 0;
        double quality = 0.0;
    };
    std::vector<Member> members;
    double total_quality = 0.0;
};

// Context from the unambiguous candidates, i.e. those with exactly one
// sense whose prior exceeds `min_sense_probability`. Each concept's quality
// is the mean prior of the labels referring to it times its mean
// relatedness to all context concepts, itself included.
inline DocumentContext build_context(const std::vector<LabelCandidate> &candidates, const InlinkIndex &index,
                                     double min_sense_probability = 0.01)
{
    std::map<NodeId, std::map<std::string, double>> referring;
    for (const auto &c : candidates) {
        std::optional<Sense> only;
        std::size_t above = 0;
        for (const auto &s : c.senses) {
            if (s.prior > min_sense_probability) {
                ++above;
                only = s;
            }
        }
        if (above == 1) {
            referring[only->concept_id].emplace(c.label, only->prior);
        }
    }
    DocumentContext ctx;
    if (referring.empty()) {
        return ctx;
    }
    std::vector<NodeId> concepts;
    for (const auto &[id, labels] : referring) {
        concepts.push_back(id);
    }
    for (const auto &[id, labels] : referring) {
        double prior_sum = 0.0;
        for (const auto &[label, ps] : labels) {
            prior_sum += ps;
        }
        double rel_sum = 0.0;
        for (NodeId other : concepts) {
            rel_sum += relatedness(index, id, other);
        }
        double q = (prior_sum / static_cast<double>(labels.size())) * (rel_sum / static_cast<double>(concepts.size()));
        ctx.members.push_back({id, q});
        ctx.total_quality += q;
    }
    return ctx;
}

// Quality-weighted relatedness of `concept_id` to the context; 0 when the
// context carries no weight.
inline double context_relatedness(const DocumentContext &ctx, const std::function<double(NodeId)> &rel_to)
{
    if (ctx.total_quality <= 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto &m : ctx.members) {
        sum += m.quality * rel_to(m.concept_id);
    }
    return sum / ctx.total_quality;
}

inline double context_relatedness(const DocumentContext &ctx, const InlinkIndex &index, NodeId concept_id)
{
    return context_relatedness(ctx, [&](NodeId other) { return relatedness(index, concept_id, other); });
}

// ---------------------------------------------------------------------------
// Heuristic pre-filters

enum class FilterRule : std::uint8_t { single_character, numeric, person_name, lowercase_common };

inline std::string_view to_string(FilterRule r)
{
    constexpr std::array<std::string_view, 4> names = {"single_character", "numeric", "person_name",
                                                       "lowercase_common"};
    return names[static_cast<std::size_t>(r)];
}

inline bool is_roman_numeral(std::string_view s)
{
    static const std::regex roman("^M{0,4}(CM|CD|D?C{0,3})(XC|XL|L?X{0,3})(IX|IV|V?I{0,3})$");
    return !s.empty() && std::regex_match(s.begin(), s.end(), roman);
}

// Arabic numerals may carry digit-group separators and signs.
inline bool is_arabic_numeral(std::string_view s)
{
    bool digit = false;
    for (char32_t c : unicode::decode(s)) {
        if (unicode::is_digit(c)) {
            digit = true;
        } else if (!(c == '.' || c == ',' || c == '-' || c == '+' || c == ' ' || c == 0xA0)) {
            return false;
        }
    }
    return digit;
}

inline bool is_numeric_label(std::string_view label)
{
    return is_arabic_numeral(label) || is_roman_numeral(label);
}

struct FilterConfig {
    std::array<bool, 4> enabled{true, true, true, true};

    [[nodiscard]] bool on(FilterRule r) const { return enabled[static_cast<std::size_t>(r)]; }
};

struct FilterResources {
    const Gazetteer *person_names = nullptr;
    const Gazetteer *common_words = nullptr;
    // Resolved label of a concept; nullopt for unlabeled or "none".
    std::function<std::optional<MainCategory>(NodeId)> concept_label;
};

struct FilterOutcome {
    std::vector<LabelCandidate> kept;
    // Removed labels, and individual senses dropped by the person-name rule.
    std::vector<std::pair<LabelCandidate, FilterRule>> removed;
};

// Label-level rules. Returns the first rule that fires.
inline std::optional<FilterRule> label_rule(const LabelCandidate &c, const FilterResources &res,
                                            const FilterConfig &cfg = {})
{
    std::string compact;
    for (const auto &t : c.tokens) {
        compact += t.surface;
    }
    if (compact.empty()) {
        compact = c.label;
    }
    if (cfg.on(FilterRule::single_character) && unicode::length(compact) == 1) {
        return FilterRule::single_character;
    }
    if (cfg.on(FilterRule::numeric) && is_numeric_label(c.label)) {
        return FilterRule::numeric;
    }
    if (cfg.on(FilterRule::lowercase_common) && !c.tokens.empty()) {
        bool all = std::all_of(c.tokens.begin(), c.tokens.end(), [&](const Token &t) {
            auto cls = capitalization_class(t.surface);
            if (cls == CapitalizationClass::numeric) {
                return true;
            }
            return cls == CapitalizationClass::lower && res.common_words != nullptr
                   && res.common_words->contains(t.key());
        });
        if (all) {
            return FilterRule::lowercase_common;
        }
    }
    return std::nullopt;
}

// A label is a person name when every one of its tokens is in the name
// lexicon (the whole label is covered, never a partial match).
inline bool is_person_name(const LabelCandidate &c, const Gazetteer *names)
{
    if (names == nullptr || c.tokens.empty()) {
        return false;
    }
    if (names->find(split(c.label, ' ')) != nullptr) {
        return true;
    }
    return std::all_of(c.tokens.begin(), c.tokens.end(),
                       [&](const Token &t) { return names->contains(t.surface); });
}

inline FilterOutcome candidate_filter(const std::vector<LabelCandidate> &candidates, const FilterResources &res,
                                      const FilterConfig &cfg = {})
{
    FilterOutcome out;
    for (const auto &c : candidates) {
        if (auto rule = label_rule(c, res, cfg)) {
            out.removed.emplace_back(c, *rule);
            continue;
        }
        if (cfg.on(FilterRule::person_name) && is_person_name(c, res.person_names)) {
            LabelCandidate kept = c;
            kept.senses.clear();
            LabelCandidate dropped = c;
            dropped.senses.clear();
            for (const auto &s : c.senses) {
                auto label = res.concept_label ? res.concept_label(s.concept_id) : std::nullopt;
                (label == MainCategory::persName ? kept : dropped).senses.push_back(s);
            }
            if (!dropped.senses.empty()) {
                out.removed.emplace_back(std::move(dropped), FilterRule::person_name);
            }
            if (kept.senses.empty()) {
                continue;
            }
            out.kept.push_back(std::move(kept));
            continue;
        }
        out.kept.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Disambiguator

using DisambiguationFeatures = std::array<double, 3>; // ps(l,c), relC(c,C), Q(C)

struct DisambiguationSample {
    DisambiguationFeatures x{};
    bool positive = false;
};

// Binary CART tree with Gini splits; leaves hold the positive fraction of
// the training samples that reached them.
class Disambiguator
{
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double probability = 0.0;

        template <class Archive>
        void serialize(Archive &ar)
        {
            ar(feature, threshold, left, right, probability);
        }
    };

    Disambiguator() = default;

    static Disambiguator constant(double p)
    {
        Disambiguator d;
        d.nodes_.push_back(Node{-1, 0.0, -1, -1, p});
        return d;
    }

    static Disambiguator from_nodes(std::vector<Node> nodes)
    {
        Disambiguator d;
        d.nodes_ = std::move(nodes);
        return d;
    }

    static Disambiguator train(const std::vector<DisambiguationSample> &samples, std::size_t max_depth,
                               std::size_t min_leaf = 1)
    {
        if (samples.empty()) {
            throw Error("cannot train a disambiguator without samples");
        }
        Disambiguator d;
        std::vector<std::size_t> idx(samples.size());
        std::iota(idx.begin(), idx.end(), 0);
        d.grow(samples, idx, 0, max_depth, std::max<std::size_t>(min_leaf, 1));
        return d;
    }

    [[nodiscard]] double predict(const DisambiguationFeatures &x) const
    {
        if (nodes_.empty()) {
            return 0.0;
        }
        std::size_t n = 0;
        while (nodes_[n].feature >= 0) {
            n = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes_[n].feature)] <= nodes_[n].threshold
                                             ? nodes_[n].left
                                             : nodes_[n].right);
        }
        return nodes_[n].probability;
    }

    [[nodiscard]] std::size_t depth() const { return nodes_.empty() ? 0 : depth_of(0); }
    [[nodiscard]] const std::vector<Node> &nodes() const { return nodes_; }
    [[nodiscard]] bool empty() const { return nodes_.empty(); }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(nodes_);
    }

private:
    static double gini(double pos, double total)
    {
        if (total <= 0.0) {
            return 0.0;
        }
        double p = pos / total;
        return 2.0 * p * (1.0 - p);
    }

    std::int32_t grow(const std::vector<DisambiguationSample> &samples, std::vector<std::size_t> idx,
                      std::size_t depth, std::size_t max_depth, std::size_t min_leaf)
    {
        const auto me = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        double pos = 0.0;
        for (auto i : idx) {
            pos += samples[i].positive ? 1.0 : 0.0;
        }
        const double total = static_cast<double>(idx.size());
        nodes_[static_cast<std::size_t>(me)].probability = pos / total;
        const double parent_impurity = gini(pos, total);
        if (depth >= max_depth || parent_impurity == 0.0) {
            return me;
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_impurity = parent_impurity;
        for (int f = 0; f < 3; ++f) {
            auto fu = static_cast<std::size_t>(f);
            std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return samples[a].x[fu] < samples[b].x[fu]; });
            double left_pos = 0.0;
            for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
                left_pos += samples[idx[k]].positive ? 1.0 : 0.0;
                double v = samples[idx[k]].x[fu];
                double next = samples[idx[k + 1]].x[fu];
                if (v == next) {
                    continue;
                }
                double nl = static_cast<double>(k + 1);
                double nr = total - nl;
                if (nl < static_cast<double>(min_leaf) || nr < static_cast<double>(min_leaf)) {
                    continue;
                }
                double impurity = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / total;
                if (impurity < best_impurity - 1e-12) {
                    best_impurity = impurity;
                    best_feature = f;
                    best_threshold = v + (next - v) / 2.0;
                }
            }
        }
        if (best_feature < 0) {
            return me;
        }
        std::vector<std::size_t> left, right;
        for (auto i : idx) {
            (samples[i].x[static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
        }
        auto l = grow(samples, std::move(left), depth + 1, max_depth, min_leaf);
        auto r = grow(samples, std::move(right), depth + 1, max_depth, min_leaf);
        auto &node = nodes_[static_cast<std::size_t>(me)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return me;
    }

    [[nodiscard]] std::size_t depth_of(std::size_t n) const
    {
        const auto &node = nodes_[n];
        if (node.feature < 0) {
            return 0;
        }
        return 1 + std::max(depth_of(static_cast<std::size_t>(node.left)), depth_of(static_cast<std::size_t>(node.right)));
    }

    std::vector<Node> nodes_;
};

inline Disambiguator train_disambiguator(const std::vector<DisambiguationSample> &samples, std::size_t max_depth)
{
    return Disambiguator::train(samples, max_depth);
}

inline double score_candidate(const Disambiguator &d, const DocumentContext &ctx, const InlinkIndex &index,
                              const Sense &sense)
{
    DisambiguationFeatures x{sense.prior, context_relatedness(ctx, index, sense.concept_id), ctx.total_quality};
    return std::clamp(d.predict(x), 0.0, 1.0);
}

// Training pairs from the dump's own links: for every link whose label has
// several senses, the linked concept is a positive sample and each other
// sense a negative one. The context is built from the page's unambiguous
// links.
inline std::vector<DisambiguationSample> harvest_samples(const std::vector<PageRecord> &pages,
                                                         const KnowledgeBase &kb,
                                                         double min_sense_probability = 0.01)
{
    std::vector<DisambiguationSample> out;
    for (const auto &p : pages) {
        if (p.ns != kArticleNamespace || p.redirect) {
            continue;
        }
        std::vector<std::pair<LabelCandidate, NodeId>> links;
        for (const auto &l : p.links) {
            auto target = kb.resolve_target(l.target);
            auto label = normalize_label(l.anchor);
            if (!target || label.empty() || !kb.anchors.contains(label)) {
                continue;
            }
            links.emplace_back(make_candidate(kb.anchors, label, 0, {}), *target);
        }
        std::vector<LabelCandidate> cands;
        for (const auto &[c, t] : links) {
            cands.push_back(c);
        }
        auto ctx = build_context(cands, kb.inlinks, min_sense_probability);
        for (const auto &[c, target] : links) {
            if (c.senses.size() < 2) {
                continue;
            }
            for (const auto &s : c.senses) {
                DisambiguationSample sample;
                sample.x = {s.prior, context_relatedness(ctx, kb.inlinks, s.concept_id), ctx.total_quality};
                sample.positive = s.concept_id == target;
                out.push_back(sample);
            }
        }
    }
    return out;
}

struct DisambiguatorTraining {
    Disambiguator model;
    std::size_t fit_samples = 0;
    std::size_t validation_samples = 0;
    double validation_accuracy = 0.0;
};

// Shuffles with `seed`, fits on 80% and reports accuracy on the rest.
inline DisambiguatorTraining fit_disambiguator(std::vector<DisambiguationSample> samples, std::size_t max_depth,
                                               std::uint64_t seed)
{
    if (samples.empty()) {
        throw Error("no disambiguation samples: the dump has no ambiguous links");
    }
    Rng rng(seed);
    rng.shuffle(samples);
    auto fit_n = std::max<std::size_t>(1, samples.size() * 4 / 5);
    std::vector<DisambiguationSample> fit(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(fit_n));
    std::vector<DisambiguationSample> val(samples.begin() + static_cast<std::ptrdiff_t>(fit_n), samples.end());
    DisambiguatorTraining out;
    out.model = Disambiguator::train(fit, max_depth);
    out.fit_samples = fit.size();
    out.validation_samples = val.size();
    std::size_t correct = 0;
    for (const auto &s : val) {
        correct += (out.model.predict(s.x) >= 0.5) == s.positive ? 1 : 0;
    }
    out.validation_accuracy = val.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(val.size());
    return out;
}

// ---------------------------------------------------------------------------
// Document linking

struct LinkerConfig {
    double link_probability_threshold = 0.01;
    double min_sense_probability = 0.01;
    FilterConfig filters;
};

struct LinkedMention {
    std::size_t start = 0;
    std::size_t end = 0;
    std::string label;
    NodeId concept_id = 0;
    MainCategory category = MainCategory::persName;
    double score = 0.0;
};

class EntityLinker
{
public:
    EntityLinker(const KnowledgeBase &kb, const Labeling &labeling, const Disambiguator *disambiguator,
                 LinkerConfig cfg = {}, const Gazetteer *person_names = nullptr, const Gazetteer *common_words = nullptr)
        : kb_(kb), labeling_(labeling), disambiguator_(disambiguator), cfg_(cfg)
    {
        resources_.person_names = person_names;
        resources_.common_words = common_words;
        resources_.concept_label = [this](NodeId id) { return concept_label(id); };
    }

    EntityLinker(const EntityLinker &) = delete;
    EntityLinker &operator=(const EntityLinker &) = delete;

    [[nodiscard]] std::optional<MainCategory> concept_label(NodeId id) const
    {
        const auto *r = labeling_.resolution(kb_.graph, id);
        if (r == nullptr || !r->labeled()) {
            return std::nullopt;
        }
        return r->label;
    }

    // Greedy left-to-right: at each position the longest label whose link
    // probability passes the threshold.
    [[nodiscard]] std::vector<LabelCandidate> detect(const std::vector<Token> &tokens) const
    {
        std::vector<LabelCandidate> out;
        const std::size_t max_n = kb_.anchors.max_label_tokens();
        std::size_t i = 0;
        while (i < tokens.size()) {
            std::size_t best = 0;
            std::string key, best_key;
            for (std::size_t n = 1; n <= max_n && i + n <= tokens.size(); ++n) {
                if (n > 1) {
                    key += ' ';
                }
                key += tokens[i + n - 1].surface;
                const auto *s = kb_.anchors.find(key);
                if (s != nullptr && s->links > 0 && link_probability(kb_.anchors, key) >= cfg_.link_probability_threshold) {
                    best = n;
                    best_key = key;
                }
            }
            if (best == 0) {
                ++i;
                continue;
            }
            std::vector<Token> toks(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i + best));
            out.push_back(make_candidate(kb_.anchors, best_key, i, std::move(toks)));
            i += best;
        }
        return out;
    }

    [[nodiscard]] FilterOutcome filter(const std::vector<LabelCandidate> &cands) const
    {
        return candidate_filter(cands, resources_, cfg_.filters);
    }

    // Selection averages the disambiguator output with the context
    // relatedness; without a disambiguator the prior stands in for it.
    [[nodiscard]] std::vector<LinkedMention> link(const std::vector<Token> &tokens) const
    {
        auto kept = filter(detect(tokens)).kept;
        auto ctx = build_context(kept, kb_.inlinks, cfg_.min_sense_probability);
        std::vector<LinkedMention> out;
        for (const auto &c : kept) {
            std::optional<Sense> best;
            double best_score = -1.0;
            for (const auto &s : c.senses) {
                double rel_c = context_relatedness(ctx, kb_.inlinks, s.concept_id);
                double d = disambiguator_ != nullptr && !disambiguator_->empty()
                               ? std::clamp(disambiguator_->predict({s.prior, rel_c, ctx.total_quality}), 0.0, 1.0)
                               : s.prior;
                double score = (d + rel_c) / 2.0;
                if (score > best_score) {
                    best_score = score;
                    best = s;
                }
            }
            if (!best) {
                continue;
            }
            if (auto label = concept_label(best->concept_id)) {
                out.push_back(LinkedMention{c.start, c.end, c.label, best->concept_id, *label, best_score});
            }
        }
        return out;
    }

    [[nodiscard]] const LinkerConfig &config() const { return cfg_; }

private:
    const KnowledgeBase &kb_;
    const Labeling &labeling_;
    const Disambiguator *disambiguator_;
    LinkerConfig cfg_;
    FilterResources resources_;
};

inline std::vector<LinkedMention> link_document(const std::vector<Token> &tokens, const KnowledgeBase &kb,
                                                const Labeling &labeling, const Disambiguator *disambiguator,
                                                const LinkerConfig &cfg = {}, const Gazetteer *person_names = nullptr,
                                                const Gazetteer *common_words = nullptr)
{
    EntityLinker linker(kb, labeling, disambiguator, cfg, person_names, common_words);
    return linker.link(tokens);
}

inline std::vector<std::string> linker_vocabulary()
{
    std::vector<std::string> out;
    for (auto c : kMainCategories) {
        out.emplace_back(to_string(c));
    }
    return out;
}

inline LabelStream linker_stream(const std::vector<LinkedMention> &mentions, std::size_t n)
{
    LabelStream out(n);
    for (const auto &m : mentions) {
        for (auto i = m.start; i < m.end && i < n; ++i) {
            out[i] = std::string(to_string(m.category));
        }
    }
    return out;
}

} // namespace wikiner

#endif
