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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include <cereal/archives/binary.hpp>
#include <cereal/types/vector.hpp>

#include <wikiner/entitylinker.hpp>

namespace
{

using namespace wikiner;

LabelStats stats(std::uint64_t occurrences, std::map<NodeId, std::uint64_t> senses)
{
    LabelStats s;
    s.occurrences = occurrences;
    s.senses = std::move(senses);
    for (const auto &[c, n] : s.senses) {
        s.links += n;
    }
    return s;
}

std::vector<Token> tokens(const std::vector<std::string> &words) { return make_sentence(words).tokens; }

LabelCandidate candidate(const AnchorStatistics &a, const std::string &label, std::size_t start = 0)
{
    return make_candidate(a, label, start, tokens(split(label, ' ')));
}

// Independent evaluation of the inlink relatedness formula.
double expected_relatedness(double a, double b, double common, double total)
{
    return 1.0 - (std::log(std::max(a, b)) - std::log(common)) / (std::log(total) - std::log(std::min(a, b)));
}

TEST(LinkStatistics, LinkProbability)
{
    AnchorStatistics a;
    a.set("five", stats(20, {{1, 5}}));
    a.set("never", stats(4, {}));
    a.set("always", stats(3, {{2, 3}}));
    EXPECT_DOUBLE_EQ(link_probability(a, "five"), 0.25);
    EXPECT_DOUBLE_EQ(link_probability(a, "never"), 0.0);
    EXPECT_DOUBLE_EQ(link_probability(a, "always"), 1.0);
    EXPECT_DOUBLE_EQ(link_probability(a, "unseen"), 0.0);
}

TEST(LinkStatistics, PriorSenseProbability)
{
    AnchorStatistics a;
    a.set("single", stats(1, {{7, 1}}));
    a.set("two", stats(4, {{1, 3}, {2, 1}}));
    a.set("none", stats(2, {}));
    EXPECT_DOUBLE_EQ(prior_sense_probability(a, "single", 7), 1.0);
    EXPECT_DOUBLE_EQ(prior_sense_probability(a, "two", 1), 0.75);
    EXPECT_DOUBLE_EQ(prior_sense_probability(a, "two", 9), 0.0);
    EXPECT_THROW(prior_sense_probability(a, "none", 1), Error);
    EXPECT_THROW(prior_sense_probability(a, "missing", 1), Error);
}

TEST(LinkStatistics, SenseProbabilitiesSumToOne)
{
    Rng rng(11);
    AnchorStatistics a;
    for (int i = 0; i < 200; ++i) {
        a.add_link("l" + std::to_string(rng.index(20)), static_cast<NodeId>(rng.index(15)));
    }
    for (const auto &[label, s] : a.labels()) {
        double sum = 0.0;
        for (const auto &[c, n] : s.senses) {
            double p = prior_sense_probability(a, label, c);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            sum += p;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12) << label;
        double lp = link_probability(a, label);
        EXPECT_GE(lp, 0.0);
        EXPECT_LE(lp, 1.0);
    }
}

TEST(Relatedness, FixtureIdentityAndDisjoint)
{
    EXPECT_NEAR(relatedness(100, 50, 10, 1000000), 0.7674975526773505, 1e-12);
    EXPECT_NEAR(relatedness(100, 50, 10, 1000000), expected_relatedness(100, 50, 10, 1e6), 1e-12);
    EXPECT_DOUBLE_EQ(relatedness(30, 30, 30, 1000), 1.0);
    EXPECT_DOUBLE_EQ(relatedness(30, 20, 0, 1000), 0.0);
    EXPECT_DOUBLE_EQ(relatedness(0, 20, 0, 1000), 0.0);
    // Raw formula goes negative for tiny overlaps of large sets.
    EXPECT_DOUBLE_EQ(relatedness(900, 800, 1, 1000), 0.0);
}

TEST(Relatedness, IndexSymmetryAndRange)
{
    Rng rng(2);
    InlinkIndex index;
    for (NodeId c = 1; c <= 12; ++c) {
        std::vector<NodeId> sources;
        for (std::size_t k = rng.index(30); k > 0; --k) {
            sources.push_back(static_cast<NodeId>(100 + rng.index(60)));
        }
        index.set(c, sources);
    }
    index.set_total_articles(500);
    for (NodeId a = 1; a <= 12; ++a) {
        if (index.count(a) > 0) {
            EXPECT_DOUBLE_EQ(relatedness(index, a, a), 1.0);
        }
        for (NodeId b = 1; b <= 12; ++b) {
            double r = relatedness(index, a, b);
            EXPECT_DOUBLE_EQ(r, relatedness(index, b, a));
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0);
        }
    }
}

TEST(Context, SingleConcept)
{
    AnchorStatistics a;
    a.set("Kraków", stats(1, {{1, 1}}));
    InlinkIndex index;
    index.set(1, {10, 11});
    index.set_total_articles(100);
    auto ctx = build_context({candidate(a, "Kraków")}, index);
    ASSERT_EQ(ctx.members.size(), 1u);
    EXPECT_DOUBLE_EQ(ctx.members[0].quality, 1.0);
    EXPECT_DOUBLE_EQ(ctx.total_quality, 1.0);
    EXPECT_DOUBLE_EQ(build_context({}, index).total_quality, 0.0);
}

TEST(Context, TwoConceptsHandComputed)
{
    AnchorStatistics a;
    a.set("a", stats(1, {{1, 1}}));
    a.set("b", stats(200, {{1, 199}, {3, 1}}));   // unambiguous: 0.005 is below the sense threshold
    a.set("c", stats(100, {{2, 99}, {5, 1}}));
    a.set("d", stats(10, {{1, 5}, {2, 5}}));      // ambiguous, ignored
    InlinkIndex index;
    std::vector<NodeId> s1(10), s2(10);
    std::iota(s1.begin(), s1.end(), 10);
    std::iota(s2.begin(), s2.end(), 15);
    index.set(1, s1);
    index.set(2, s2);
    index.set_total_articles(1000);
    auto ctx = build_context({candidate(a, "a"), candidate(a, "b"), candidate(a, "c"), candidate(a, "d")}, index);
    ASSERT_EQ(ctx.members.size(), 2u);
    EXPECT_EQ(ctx.members[0].concept_id, 1);
    EXPECT_NEAR(relatedness(index, 1, 2), 0.8494850021680094, 1e-12);
    EXPECT_NEAR(ctx.members[0].quality, 0.9224306448312948, 1e-9);
    EXPECT_NEAR(ctx.members[1].quality, 0.9154950760731646, 1e-9);
    EXPECT_NEAR(ctx.total_quality, 1.8379257209044595, 1e-9);
}

TEST(Context, WeightedRelatedness)
{
    DocumentContext ctx;
    ctx.members = {{1, 0.2}, {2, 0.8}};
    ctx.total_quality = 1.0;
    std::map<NodeId, double> rel{{1, 1.0}, {2, 0.5}};
    EXPECT_NEAR(context_relatedness(ctx, [&](NodeId c) { return rel.at(c); }), 0.6, 1e-9);

    DocumentContext one;
    one.members = {{1, 0.37}};
    one.total_quality = 0.37;
    EXPECT_NEAR(context_relatedness(one, [](NodeId) { return 0.42; }), 0.42, 1e-12);

    DocumentContext equal;
    equal.members = {{1, 0.5}, {2, 0.5}, {3, 0.5}};
    equal.total_quality = 1.5;
    std::map<NodeId, double> r3{{1, 0.1}, {2, 0.2}, {3, 0.6}};
    EXPECT_NEAR(context_relatedness(equal, [&](NodeId c) { return r3.at(c); }), 0.3, 1e-12);

    EXPECT_DOUBLE_EQ(context_relatedness(DocumentContext{}, [](NodeId) { return 1.0; }), 0.0);
}

// ---------------------------------------------------------------------------
// Filters

struct FilterCase {
    std::string label;
    std::optional<MainCategory> concept_label;
    std::optional<FilterRule> removed_by;
};

TEST(Filters, TableOfRules)
{
    auto names = Gazetteer::build("names", {{{"Jan"}, "first"}, {{"Kowalski"}, "last"}, {{"Maria"}, "first"}},
                                  MatchMode::surface);
    auto common = Gazetteer::build("common", {{{"dobry"}, "adj"}, {{"dzień"}, "subst"}, {{"rzeka"}, "subst"}},
                                   MatchMode::lemma);
    const std::vector<FilterCase> table = {
        {"A", MainCategory::placeName, FilterRule::single_character},
        {"Ż", MainCategory::placeName, FilterRule::single_character},
        {"7", MainCategory::date, FilterRule::single_character},
        {"III", MainCategory::orgName, FilterRule::numeric},
        {"XIV", MainCategory::orgName, FilterRule::numeric},
        {"MCMXC", MainCategory::date, FilterRule::numeric},
        {"1984", MainCategory::date, FilterRule::numeric},
        {"1 000", MainCategory::date, FilterRule::numeric},
        {"Jan", MainCategory::placeName, FilterRule::person_name},
        {"Jan Kowalski", MainCategory::orgName, FilterRule::person_name},
        {"Maria", std::nullopt, FilterRule::person_name},
        {"dobry dzień", MainCategory::orgName, FilterRule::lowercase_common},
        {"rzeka 3", MainCategory::geogName, FilterRule::lowercase_common},
        // Kept.
        {"Jan", MainCategory::persName, std::nullopt},
        {"Jan Kowalski", MainCategory::persName, std::nullopt},
        {"Jan Matejko", MainCategory::placeName, std::nullopt},
        {"IIII", MainCategory::orgName, std::nullopt},
        {"Dobry dzień", MainCategory::orgName, std::nullopt},
        {"dobry Kraków", MainCategory::orgName, std::nullopt},
        {"zły dzień", MainCategory::orgName, std::nullopt},
        {"Kraków", MainCategory::placeName, std::nullopt},
    };
    for (const auto &row : table) {
        AnchorStatistics a;
        a.set(row.label, stats(1, {{1, 1}}));
        FilterResources res;
        res.person_names = &names;
        res.common_words = &common;
        res.concept_label = [&](NodeId) { return row.concept_label; };
        auto out = candidate_filter({candidate(a, row.label)}, res);
        if (row.removed_by) {
            ASSERT_EQ(out.removed.size(), 1u) << row.label;
            EXPECT_EQ(out.removed[0].second, *row.removed_by) << row.label;
            EXPECT_TRUE(out.kept.empty()) << row.label;
        } else {
            EXPECT_TRUE(out.removed.empty()) << row.label;
            EXPECT_EQ(out.kept.size(), 1u) << row.label;
        }
    }
}

TEST(Filters, PersonNameDropsOnlyNonPersonSenses)
{
    auto names = Gazetteer::build("names", {{{"Jan"}, "first"}}, MatchMode::surface);
    AnchorStatistics a;
    a.set("Jan", stats(4, {{1, 3}, {2, 1}}));
    FilterResources res;
    res.person_names = &names;
    res.concept_label = [](NodeId id) {
        return id == 2 ? std::optional(MainCategory::persName) : std::optional(MainCategory::placeName);
    };
    auto out = candidate_filter({candidate(a, "Jan")}, res);
    ASSERT_EQ(out.kept.size(), 1u);
    ASSERT_EQ(out.kept[0].senses.size(), 1u);
    EXPECT_EQ(out.kept[0].senses[0].concept_id, 2);
    ASSERT_EQ(out.removed.size(), 1u);
    EXPECT_EQ(out.removed[0].first.senses[0].concept_id, 1);
}

TEST(Filters, RulesCanBeDisabled)
{
    AnchorStatistics a;
    a.set("A", stats(1, {{1, 1}}));
    a.set("III", stats(1, {{1, 1}}));
    FilterConfig cfg;
    cfg.enabled[static_cast<std::size_t>(FilterRule::single_character)] = false;
    cfg.enabled[static_cast<std::size_t>(FilterRule::numeric)] = false;
    auto out = candidate_filter({candidate(a, "A"), candidate(a, "III")}, FilterResources{}, cfg);
    EXPECT_EQ(out.kept.size(), 2u);
    EXPECT_EQ(to_string(FilterRule::lowercase_common), "lowercase_common");
}

// ---------------------------------------------------------------------------
// Disambiguator

DisambiguationSample sample(double a, double b, double c, bool positive) { return {{a, b, c}, positive}; }

double accuracy(const Disambiguator &d, const std::vector<DisambiguationSample> &s)
{
    std::size_t ok = 0;
    for (const auto &x : s) {
        ok += (d.predict(x.x) >= 0.5) == x.positive ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(s.size());
}

// Exhaustive search for a single-feature threshold that separates the set.
bool separable_by_threshold(const std::vector<DisambiguationSample> &s)
{
    for (std::size_t f = 0; f < 3; ++f) {
        for (const auto &t : s) {
            bool ok = std::all_of(s.begin(), s.end(), [&](const auto &x) { return (x.x[f] > t.x[f]) == x.positive; });
            if (ok) {
                return true;
            }
        }
    }
    return false;
}

TEST(Disambiguator, SeparableSetIsLearnedExactly)
{
    std::vector<DisambiguationSample> s;
    Rng rng(4);
    for (int i = 0; i < 40; ++i) {
        double relc = rng.uniform();
        s.push_back(sample(rng.uniform(), relc, rng.uniform(), relc > 0.55));
    }
    ASSERT_TRUE(separable_by_threshold(s));
    auto d = Disambiguator::train(s, 3);
    EXPECT_DOUBLE_EQ(accuracy(d, s), 1.0);
    EXPECT_EQ(d.depth(), 1u);
}

TEST(Disambiguator, DepthZeroAndAllPositive)
{
    std::vector<DisambiguationSample> s = {sample(0.1, 0, 0, true), sample(0.2, 0, 0, false),
                                           sample(0.3, 0, 0, true), sample(0.4, 0, 0, true)};
    auto d0 = Disambiguator::train(s, 0);
    EXPECT_EQ(d0.nodes().size(), 1u);
    EXPECT_DOUBLE_EQ(d0.predict({0.9, 0.9, 0.9}), 0.75);
    for (auto &x : s) {
        x.positive = true;
    }
    auto all = Disambiguator::train(s, 5);
    for (const auto &x : s) {
        EXPECT_DOUBLE_EQ(all.predict(x.x), 1.0);
    }
    EXPECT_THROW(Disambiguator::train({}, 3), Error);
    EXPECT_THROW(fit_disambiguator({}, 3, 1), Error);
}

TEST(Disambiguator, ManualTreeWalk)
{
    using N = Disambiguator::Node;
    // relC <= 0.5 ? (ps <= 0.3 ? 0.1 : 0.6) : 0.95
    auto d = Disambiguator::from_nodes({N{1, 0.5, 1, 4, 0}, N{0, 0.3, 2, 3, 0}, N{-1, 0, -1, -1, 0.1},
                                        N{-1, 0, -1, -1, 0.6}, N{-1, 0, -1, -1, 0.95}});
    EXPECT_DOUBLE_EQ(d.predict({0.2, 0.4, 0.0}), 0.1);
    EXPECT_DOUBLE_EQ(d.predict({0.8, 0.5, 0.0}), 0.6);
    EXPECT_DOUBLE_EQ(d.predict({0.0, 0.7, 0.0}), 0.95);
    EXPECT_EQ(d.depth(), 2u);
    EXPECT_DOUBLE_EQ(Disambiguator::constant(0.7).predict({0.1, 0.2, 0.3}), 0.7);
}

TEST(Disambiguator, UnlimitedDepthFitsTrainingSetAndRespectsLimit)
{
    Rng rng(9);
    std::vector<DisambiguationSample> s;
    for (int i = 0; i < 150; ++i) {
        s.push_back(sample(rng.uniform(), rng.uniform(), rng.uniform(), rng.bernoulli(0.4)));
    }
    auto full = Disambiguator::train(s, 1000);
    EXPECT_DOUBLE_EQ(accuracy(full, s), 1.0);
    for (std::size_t depth : {1u, 2u, 4u}) {
        auto d = Disambiguator::train(s, depth);
        EXPECT_LE(d.depth(), depth);
        for (const auto &x : s) {
            double p = d.predict(x.x);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
}

TEST(Disambiguator, SerializesAndFitsDeterministically)
{
    Rng rng(21);
    std::vector<DisambiguationSample> s;
    for (int i = 0; i < 60; ++i) {
        double ps = rng.uniform();
        s.push_back(sample(ps, rng.uniform(), rng.uniform(), ps + 0.2 * rng.uniform() > 0.6));
    }
    auto a = fit_disambiguator(s, 4, 3);
    auto b = fit_disambiguator(s, 4, 3);
    EXPECT_EQ(a.fit_samples, 48u);
    EXPECT_EQ(a.validation_samples, 12u);
    EXPECT_DOUBLE_EQ(a.validation_accuracy, b.validation_accuracy);
    std::stringstream ss;
    {
        cereal::BinaryOutputArchive out(ss);
        out(a.model);
    }
    Disambiguator back;
    {
        cereal::BinaryInputArchive in(ss);
        in(back);
    }
    for (const auto &x : s) {
        EXPECT_EQ(back.predict(x.x), a.model.predict(x.x));
    }
}

// ---------------------------------------------------------------------------
// Linking a document

PageRecord page(NodeId id, std::string title, std::vector<std::string> cats = {}, int ns = kArticleNamespace)
{
    PageRecord r;
    r.id = id;
    r.title = std::move(title);
    r.ns = ns;
    r.categories = std::move(cats);
    return r;
}

struct World {
    KnowledgeBase kb;
    Labeling labeling;
    Gazetteer names = Gazetteer::build("names", {{{"Maria"}, "first"}, {{"Jan"}, "first"}}, MatchMode::surface);
};

// Wisła: 3 links to the river (geogName), 1 to the town (placeName).
// "Kraków Główny" is a station in an unlabeled category; "Kraków" also
// appears unlinked three times.
World world()
{
    std::vector<PageRecord> pages = {
        page(1, "Kraków", {"Miasta"}),        page(2, "Kraków Główny", {"Stacje"}),
        page(3, "Wisła (rzeka)", {"Rzeki"}),  page(4, "Wisła (miasto)", {"Miasta"}),
        page(5, "Jan Kowalski", {"Ludzie"}),  page(6, "Maria (wieś)", {"Miasta"}),
        page(7, "Polska"),
        page(100, "Miasta", {}, kCategoryNamespace), page(101, "Stacje", {}, kCategoryNamespace),
        page(102, "Rzeki", {}, kCategoryNamespace),  page(103, "Ludzie", {}, kCategoryNamespace),
    };
    auto d1 = page(20, "Doc");
    d1.links = {{"Wisła (rzeka)", "Wisła"}, {"Wisła (rzeka)", "Wisła"}, {"Wisła (rzeka)", "Wisła"},
                {"Wisła (miasto)", "Wisła"}, {"Kraków", "Kraków"},        {"Kraków Główny", "Kraków Główny"},
                {"Jan Kowalski", "Jan"},     {"Maria (wieś)", "Maria"},   {"Polska", "A"}};
    auto d2 = page(21, "Notes");
    d2.text = "Kraków Kraków Kraków";
    pages.push_back(d1);
    pages.push_back(d2);
    World w;
    w.kb = import_dump(pages);
    w.labeling = propagate_labels(w.kb.graph, {{100, MainCategory::placeName},
                                               {101, NodeLabel{}},
                                               {102, MainCategory::geogName},
                                               {103, MainCategory::persName}});
    return w;
}

TEST(Linker, SelectsSensesAndEmitsLabeledMentions)
{
    auto w = world();
    EXPECT_DOUBLE_EQ(link_probability(w.kb.anchors, "Kraków"), 0.25);
    auto toks = tokens({"Z", "Kraków", "Główny", "nad", "Wisła", ",", "Jan", "i", "Maria", "A", "Kraków", "."});
    auto mentions = link_document(toks, w.kb, w.labeling, nullptr, {}, &w.names);
    // Kraków Główny resolves to none; Maria's only sense is not a person; A is a single character.
    ASSERT_EQ(mentions.size(), 3u);
    EXPECT_EQ(mentions[0].label, "Wisła");
    EXPECT_EQ(mentions[0].concept_id, 3);
    EXPECT_EQ(mentions[0].category, MainCategory::geogName);
    EXPECT_EQ(mentions[1].concept_id, 5);
    EXPECT_EQ(mentions[1].category, MainCategory::persName);
    EXPECT_EQ(mentions[2].start, 10u);
    EXPECT_EQ(mentions[2].category, MainCategory::placeName);

    LinkerConfig strict;
    strict.link_probability_threshold = 0.3;
    auto fewer = link_document(toks, w.kb, w.labeling, nullptr, strict, &w.names);
    ASSERT_EQ(fewer.size(), 2u);
    EXPECT_EQ(fewer[1].concept_id, 5);
}

TEST(Linker, DisambiguatorScoresDecideBetweenSenses)
{
    auto w = world();
    using N = Disambiguator::Node;
    // Low-prior senses score 0.9, others 0.4.
    auto d = Disambiguator::from_nodes({N{0, 0.5, 1, 2, 0}, N{-1, 0, -1, -1, 0.9}, N{-1, 0, -1, -1, 0.4}});
    auto toks = tokens({"Wisła", "Kraków", "Główny"});
    auto mentions = link_document(toks, w.kb, w.labeling, &d);
    ASSERT_EQ(mentions.size(), 1u);
    EXPECT_EQ(mentions[0].concept_id, 4);
    EXPECT_EQ(mentions[0].category, MainCategory::placeName);
    // The station is the only context concept and shares its single inlink
    // with both senses, so relC is 1 for each.
    EXPECT_NEAR(mentions[0].score, (0.9 + 1.0) / 2.0, 1e-12);
}

TEST(Linker, MentionsNeverOverlapAndSkipFiltered)
{
    auto w = world();
    Rng rng(8);
    const std::vector<std::string> vocab = {"Kraków", "Główny", "Wisła", "Jan", "Maria", "A", "i", "nad", "."};
    EntityLinker linker(w.kb, w.labeling, nullptr, {}, &w.names);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> words;
        for (std::size_t k = 1 + rng.index(12); k > 0; --k) {
            words.push_back(vocab[rng.index(vocab.size())]);
        }
        auto toks = tokens(words);
        auto mentions = linker.link(toks);
        for (std::size_t i = 0; i < mentions.size(); ++i) {
            EXPECT_LT(mentions[i].start, mentions[i].end);
            EXPECT_NE(mentions[i].label, "A");
            EXPECT_NE(mentions[i].label, "Maria");
            if (i > 0) {
                EXPECT_LE(mentions[i - 1].end, mentions[i].start);
            }
        }
        auto stream = linker_stream(mentions, toks.size());
        EXPECT_EQ(stream.size(), toks.size());
    }
}

TEST(Linker, HarvestedSamplesMarkTheLinkedSense)
{
    auto w = world();
    auto d1 = page(20, "Doc");
    d1.links = {{"Wisła (rzeka)", "Wisła"}, {"Wisła (miasto)", "Wisła"}, {"Kraków", "Kraków"}};
    auto samples = harvest_samples({d1}, w.kb);
    // Two ambiguous links, two senses each.
    ASSERT_EQ(samples.size(), 4u);
    EXPECT_EQ(std::count_if(samples.begin(), samples.end(), [](const auto &s) { return s.positive; }), 2);
    EXPECT_DOUBLE_EQ(samples[0].x[0], 0.75);
    EXPECT_TRUE(samples[0].positive);
    EXPECT_FALSE(samples[1].positive);
}

TEST(Linker, StreamMarksMentionTokens)
{
    std::vector<LinkedMention> m = {{1, 3, "x", 1, MainCategory::orgName, 1.0}};
    auto s = linker_stream(m, 4);
    EXPECT_FALSE(s[0]);
    EXPECT_EQ(s[1], std::optional<std::string>("orgName"));
    EXPECT_EQ(s[2], std::optional<std::string>("orgName"));
    EXPECT_FALSE(s[3]);
    EXPECT_EQ(linker_vocabulary().size(), 6u);
}

} // namespace
