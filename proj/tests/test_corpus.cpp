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

#include <sstream>

#include <wikiner/corpus.hpp>

namespace
{

using namespace wikiner;

EntitySpan span(std::size_t s, std::size_t e, const std::string &cat, Layer layer = Layer::main)
{
    return EntitySpan{s, e, parse_category(cat), layer, std::nullopt};
}

Sentence sentence_of(std::size_t n, std::vector<EntitySpan> spans)
{
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) {
        words.push_back("w" + std::to_string(i));
    }
    auto s = make_sentence(words);
    s.spans = std::move(spans);
    s.sort_spans();
    return s;
}

TEST(Category, TextFormRoundTrips)
{
    for (const char *text : {"persName", "persName_forename", "placeName_settlement@derived", "date", "orgName"}) {
        EXPECT_EQ(to_string(parse_category(text)), text);
    }
}

TEST(Category, RejectsInvalidCombinations)
{
    EXPECT_THROW(parse_category("orgName_forename"), Error);
    EXPECT_THROW(parse_category("persName_settlement"), Error);
    EXPECT_THROW(parse_category("persName@derived"), Error);
    EXPECT_THROW(parse_category("animal"), Error);
}

TEST(ParseCorpus, DecodesMainSpans)
{
    auto docs = parse_corpus("Bob\t_\tB-persName\tO\n"
                             "likes\t_\tO\tO\n"
                             "New\t_\tB-placeName\tO\n"
                             "York\t_\tI-placeName\tO\n");
    ASSERT_EQ(docs.size(), 1u);
    ASSERT_EQ(docs[0].sentences.size(), 1u);
    const auto &s = docs[0].sentences[0];
    ASSERT_EQ(s.tokens.size(), 4u);
    auto main = s.layer(Layer::main);
    ASSERT_EQ(main.size(), 2u);
    EXPECT_EQ(main[0], span(0, 1, "persName"));
    EXPECT_EQ(main[1], span(2, 4, "placeName"));
}

TEST(ParseCorpus, SkipsCommentsButKeepsHashTokens)
{
    auto docs = parse_corpus("# header line\n"
                             "#\t_\tO\tO\n"
                             "Bob\t_\tB-persName\tO\n");
    ASSERT_EQ(docs.size(), 1u);
    const auto &s = docs[0].sentences.at(0);
    ASSERT_EQ(s.tokens.size(), 2u);
    EXPECT_EQ(s.tokens[0].surface, "#");
    EXPECT_EQ(s.layer(Layer::main).at(0), span(1, 2, "persName"));
}

TEST(ParseCorpus, EmptyStreamGivesNoDocuments) { EXPECT_TRUE(parse_corpus(std::string()).empty()); }

TEST(ParseCorpus, ReportsLineOfBioViolation)
{
    try {
        parse_corpus("a\t_\tO\tO\nb\t_\tI-orgName\tO\n");
        FAIL() << "expected a format error";
    } catch (const FormatError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(ParseCorpus, ReportsMissingColumns)
{
    try {
        parse_corpus("#doc d\na\t_\tO\tO\n\nb\t_\tO\n");
        FAIL() << "expected a format error";
    } catch (const FormatError &e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(ParseCorpus, ReportsUnknownCategory)
{
    EXPECT_THROW(parse_corpus("a\t_\tB-animal\tO\n"), FormatError);
}

TEST(ParseCorpus, DocumentsAndSentences)
{
    auto docs = parse_corpus("#doc one\na\tA\tO\tO\n\nb\t_\tB-date\tO\n\n#doc two\nc\t_\tO\tO\n");
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].id, "one");
    EXPECT_EQ(docs[0].sentences.size(), 2u);
    EXPECT_EQ(docs[0].sentences[0].tokens[0].lemma, std::optional<std::string>("A"));
    EXPECT_EQ(docs[0].sentences[0].tokens[0].key(), "a");
    EXPECT_EQ(docs[1].sentences.size(), 1u);
}

TEST(BioEncode, Examples)
{
    EXPECT_EQ(bio_encode({span(2, 4, "placeName")}, 4), (TagSequence{"O", "O", "B-placeName", "I-placeName"}));
    EXPECT_EQ(bio_encode({}, 3), (TagSequence{"O", "O", "O"}));
    EXPECT_EQ(bio_encode({span(0, 1, "date")}, 1, TagScheme::BIOES), (TagSequence{"S-date"}));
    EXPECT_EQ(bio_encode({span(0, 3, "date")}, 3, TagScheme::BIOES), (TagSequence{"B-date", "I-date", "E-date"}));
}

TEST(BioEncode, RejectsOverlap)
{
    EXPECT_THROW(bio_encode({span(0, 2, "date"), span(1, 3, "time")}, 3), Error);
    EXPECT_THROW(bio_encode({span(0, 4, "date")}, 3), Error);
}

TEST(BioDecode, Examples)
{
    EXPECT_EQ(bio_decode({"B-date", "I-date", "O"}), (std::vector<EntitySpan>{span(0, 2, "date")}));
    EXPECT_TRUE(bio_decode({"O", "O"}).empty());
    EXPECT_EQ(bio_decode({"O", "I-date"}, TagScheme::BIO, false), (std::vector<EntitySpan>{span(1, 2, "date")}));
    EXPECT_THROW(bio_decode({"O", "I-date"}), Error);
    EXPECT_THROW(bio_decode({"B-date", "I-time"}), Error);
}

TEST(BioDecode, RepairSplitsOnLabelChange)
{
    auto got = bio_decode({"B-date", "I-time"}, TagScheme::BIO, false);
    EXPECT_EQ(got, (std::vector<EntitySpan>{span(0, 1, "date"), span(1, 2, "time")}));
}

TEST(BioRoundTrip, RandomSpansBothSchemes)
{
    Rng rng(7);
    const std::vector<std::string> cats{"persName", "orgName", "date", "placeName_country"};
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 1 + rng.index(12);
        std::vector<EntitySpan> spans;
        std::size_t i = 0;
        while (i < n) {
            if (rng.bernoulli(0.4)) {
                std::size_t len = 1 + rng.index(std::min<std::size_t>(3, n - i));
                spans.push_back(span(i, i + len, cats[rng.index(cats.size())]));
                i += len;
            } else {
                ++i;
            }
        }
        for (auto scheme : {TagScheme::BIO, TagScheme::BIOES}) {
            auto tags = bio_encode(spans, n, scheme);
            EXPECT_EQ(bio_decode(tags, scheme), spans);
            EXPECT_EQ(bio_encode(bio_decode(tags, scheme), n, scheme), tags);
        }
    }
}

TEST(TagVocabulary, Layout)
{
    EXPECT_EQ(tag_vocabulary({"date"}, TagScheme::BIO), (std::vector<std::string>{"O", "B-date", "I-date"}));
    EXPECT_EQ(tag_vocabulary({"date"}, TagScheme::BIOES).size(), 5u);
}

TEST(Fragments, SingleGapMerges)
{
    auto s = sentence_of(5, {});
    s.spans = {EntitySpan{0, 2, parse_category("orgName"), Layer::main, "e1"},
               EntitySpan{3, 4, parse_category("orgName"), Layer::main, "e1"}};
    auto out = normalize_fragmented(s);
    EXPECT_EQ(out.spans, (std::vector<EntitySpan>{span(0, 4, "orgName")}));
}

TEST(Fragments, WideGapSplits)
{
    auto s = sentence_of(5, {});
    s.spans = {EntitySpan{0, 1, parse_category("orgName"), Layer::main, "e1"},
               EntitySpan{4, 5, parse_category("orgName"), Layer::main, "e1"}};
    auto out = normalize_fragmented(s);
    EXPECT_EQ(out.spans, (std::vector<EntitySpan>{span(0, 1, "orgName"), span(4, 5, "orgName")}));
}

TEST(Fragments, MixedCategoriesStaySeparate)
{
    auto s = sentence_of(4, {});
    s.spans = {EntitySpan{0, 1, parse_category("orgName"), Layer::main, "e1"},
               EntitySpan{2, 3, parse_category("persName"), Layer::main, "e1"}};
    auto out = normalize_fragmented(s);
    EXPECT_EQ(out.spans.size(), 2u);
}

TEST(Fragments, IdentityWithoutFragmentsAndIdempotent)
{
    auto s = sentence_of(4, {span(0, 2, "date")});
    EXPECT_EQ(normalize_fragmented(s).spans, s.spans);
    auto f = sentence_of(6, {});
    f.spans = {EntitySpan{0, 2, parse_category("orgName"), Layer::main, "x"},
               EntitySpan{3, 4, parse_category("orgName"), Layer::main, "x"},
               EntitySpan{5, 6, parse_category("date"), Layer::main, "y"}};
    auto once = normalize_fragmented(f);
    EXPECT_EQ(normalize_fragmented(once).spans, once.spans);
}

TEST(Fragments, ParsedFromIdColumnAndWrittenBack)
{
    const std::string text = "#doc d\n"
                             "Uniwersytet\t_\tB-orgName\tO\te1\n"
                             "Jagiellonski\t_\tI-orgName\tO\te1\n"
                             "w\t_\tO\tO\t_\n"
                             "Krakowie\t_\tB-orgName\tO\te1\n\n";
    auto docs = parse_corpus(text);
    auto main = docs[0].sentences[0].layer(Layer::main);
    ASSERT_EQ(main.size(), 2u);
    EXPECT_EQ(main[0].fragment, std::optional<std::string>("e1"));
    EXPECT_EQ(write_corpus(docs), text);
    auto merged = normalize_fragmented(docs[0]);
    EXPECT_EQ(merged.sentences[0].spans, (std::vector<EntitySpan>{span(0, 4, "orgName")}));
}

TEST(Relocate, NestedEntitiesMoveToSubLayer)
{
    auto s = sentence_of(5, {span(0, 5, "orgName"), span(0, 2, "persName"), span(4, 5, "placeName")});
    auto out = relocate_overlaps(s);
    EXPECT_EQ(out.layer(Layer::main), (std::vector<EntitySpan>{span(0, 5, "orgName")}));
    EXPECT_EQ(out.layer(Layer::sub),
              (std::vector<EntitySpan>{span(0, 2, "persName", Layer::sub), span(4, 5, "placeName", Layer::sub)}));
}

TEST(Relocate, DisjointUnchanged)
{
    auto s = sentence_of(5, {span(0, 2, "persName"), span(3, 5, "date")});
    EXPECT_EQ(relocate_overlaps(s).spans, s.spans);
}

TEST(Relocate, IdenticalSpansFollowCategoryOrder)
{
    auto s = sentence_of(3, {span(0, 2, "placeName"), span(0, 2, "persName")});
    auto out = relocate_overlaps(s);
    EXPECT_EQ(out.layer(Layer::main), (std::vector<EntitySpan>{span(0, 2, "persName")}));
    EXPECT_EQ(out.layer(Layer::sub), (std::vector<EntitySpan>{span(0, 2, "placeName", Layer::sub)}));
}

TEST(Relocate, PartialOverlapKeepsLeftmost)
{
    auto s = sentence_of(4, {span(1, 3, "date"), span(0, 2, "time")});
    auto out = relocate_overlaps(s);
    EXPECT_EQ(out.layer(Layer::main), (std::vector<EntitySpan>{span(0, 2, "time")}));
}

TEST(Relocate, MainLayerNeverOverlapsOnRandomInput)
{
    Rng rng(11);
    const std::vector<std::string> cats{"persName", "orgName", "geogName", "placeName", "date", "time"};
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng.index(10);
        std::vector<EntitySpan> spans;
        for (std::size_t k = rng.index(6); k > 0; --k) {
            std::size_t a = rng.index(n);
            std::size_t b = a + 1 + rng.index(n - a);
            spans.push_back(span(a, b, cats[rng.index(cats.size())]));
        }
        std::size_t dropped = 0;
        auto out = relocate_overlaps(sentence_of(n, spans), &dropped);
        for (auto layer : {Layer::main, Layer::sub}) {
            auto l = out.layer(layer);
            for (std::size_t i = 0; i < l.size(); ++i) {
                for (std::size_t j = i + 1; j < l.size(); ++j) {
                    EXPECT_FALSE(l[i].overlaps(l[j]));
                }
            }
        }
        EXPECT_EQ(out.spans.size() + dropped, spans.size());
    }
}

TEST(Derived, FlagsAndAddsSpans)
{
    DerivedLexicon lex;
    lex.add("warszawianin", "Warszawa", DerivedKind::inhabitant);
    lex.add("krakowski", "Kraków", DerivedKind::adjective);
    auto s = make_sentence({"Warszawianin", "lubi", "krakowski", "rynek"});
    s.spans = {span(0, 1, "placeName")};
    auto out = mark_derived(s, lex);
    ASSERT_EQ(out.spans.size(), 2u);
    EXPECT_TRUE(out.spans[0].category.derived);
    EXPECT_EQ(out.spans[1], (EntitySpan{2, 3, parse_category("placeName@derived"), Layer::main, std::nullopt}));

    auto plain = make_sentence({"lubi", "rynek"});
    EXPECT_TRUE(mark_derived(plain, lex).spans.empty());
}

TEST(Derived, LoadsLexicon)
{
    std::istringstream in("warszawianin\tWarszawa\tinhabitant\nkrakowski\tKraków\tadjective\n");
    auto lex = DerivedLexicon::load(in);
    EXPECT_EQ(lex.size(), 2u);
    EXPECT_EQ(lex.find("Krakowski")->kind, DerivedKind::adjective);
    std::istringstream bad("x\ty\tcity\n");
    EXPECT_THROW(DerivedLexicon::load(bad), FormatError);
}

TEST(WriteCorpus, RoundTripsParsedDocuments)
{
    Document d{"d1", {}};
    auto s = sentence_of(5, {span(0, 5, "orgName"), span(0, 2, "persName_forename", Layer::sub),
                             span(3, 4, "placeName_settlement@derived", Layer::sub)});
    s.tokens[1].lemma = "base";
    d.sentences.push_back(s);
    d.sentences.push_back(sentence_of(2, {}));
    auto again = parse_corpus(write_corpus({d}));
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(again[0].id, "d1");
    ASSERT_EQ(again[0].sentences.size(), 2u);
    EXPECT_EQ(again[0].sentences[0].tokens, s.tokens);
    EXPECT_EQ(again[0].sentences[0].spans, s.spans);
}

} // namespace
