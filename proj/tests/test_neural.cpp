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
#include <filesystem>
#include <set>
#include <sstream>

#include <wikiner/neural.hpp>

#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace
{

using namespace wikiner;
using gradcheck::full_gradient_error;
using gradcheck::random_table;
using gradcheck::toy_model;

std::vector<Token> tokens(const std::vector<std::string> &words) { return make_sentence(words).tokens; }

std::string temp_path(const std::string &name) { return (std::filesystem::temp_directory_path() / name).string(); }

// ---------------------------------------------------------------------------
// Character encoders

CharEncoder char_encoder(CharEncoderKind kind, std::size_t vocab, std::uint64_t seed)
{
    CharEncoderConfig cfg;
    cfg.kind = kind;
    cfg.embedding_dim = 4;
    cfg.filters = 5;
    cfg.hidden = 3;
    Rng rng(seed);
    CharEncoder enc;
    enc.init(cfg, vocab, rng);
    if (kind == CharEncoderKind::conv) {
        enc.bias.init_uniform(rng, 0.1);
    }
    return enc;
}

TEST(CharEncoder, OutputDimensions)
{
    CharEncoderConfig cfg;
    EXPECT_EQ(cfg.output_dim(), 30u);
    cfg.kind = CharEncoderKind::birecurrent;
    EXPECT_EQ(cfg.output_dim(), 200u);
    cfg.kind = CharEncoderKind::none;
    EXPECT_EQ(cfg.output_dim(), 0u);
    CharEncoder none;
    Rng rng(1);
    none.init(cfg, 10, rng);
    EXPECT_EQ(none.encode({1, 2}, nullptr).size(), 0);
    EXPECT_EQ(parse_char_encoder_kind("birecurrent"), CharEncoderKind::birecurrent);
    EXPECT_THROW(parse_char_encoder_kind("cnn"), Error);
}

TEST(CharEncoder, ZeroParametersGiveZeroConvOutput)
{
    CharEncoderConfig cfg;
    CharEncoder enc;
    Rng rng(1);
    enc.init(cfg, 20, rng);
    enc.embedding.value.setZero();
    enc.kernel.value.setZero();
    auto out = enc.encode({3, 4, 5, 6}, nullptr);
    ASSERT_EQ(out.size(), 30);
    EXPECT_EQ(out.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CharEncoder, VocabularyMapsUnseenToZero)
{
    auto v = CharVocabulary::build({tokens({"ab", "ć"})});
    EXPECT_EQ(v.size(), 4u);
    auto ids = v.encode("aćx");
    EXPECT_EQ(ids.size(), 3u);
    EXPECT_NE(ids[0], 0u);
    EXPECT_NE(ids[1], 0u);
    EXPECT_EQ(ids[2], 0u);
}

void check_char_gradient(CharEncoderKind kind)
{
    auto enc = char_encoder(kind, 6, 3);
    Rng rng(4);
    const std::vector<std::size_t> chars = {1, 4, 2, 5, 1};
    Vector w(static_cast<Eigen::Index>(enc.output_dim()));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w(i) = rng.uniform(-1, 1);
    }
    auto loss = [&] { return w.dot(enc.encode(chars, nullptr)); };
    CharEncoder::Cache cache;
    (void)enc.encode(chars, &cache);
    std::vector<ParamView> views;
    enc.collect(views);
    for (auto &v : views) {
        std::fill(v.grad.begin(), v.grad.end(), 0.0);
    }
    enc.backward(cache, w);
    double worst = 0.0;
    for (auto &v : views) {
        for (std::size_t i = 0; i < v.value.size(); ++i) {
            double num = oracle::central_difference(v.value[i], loss, 1e-5);
            worst = std::max(worst, oracle::relative_error(v.grad[i], num));
        }
    }
    EXPECT_LT(worst, 1e-4) << to_string(kind);
}

TEST(CharEncoder, ConvGradientMatchesFiniteDifferences) { check_char_gradient(CharEncoderKind::conv); }

TEST(CharEncoder, RecurrentGradientMatchesFiniteDifferences) { check_char_gradient(CharEncoderKind::birecurrent); }

// ---------------------------------------------------------------------------
// Word vectors

TEST(WordVector, ConcatenatesBlocksInOrder)
{
    WordVectorLayout lay{100, 0, 30, {9, 8}, 0};
    EXPECT_EQ(lay.total(), 147u);
    Vector st = Vector::Constant(100, 0.5);
    Vector ch = Vector::Constant(30, -1.0);
    std::vector<OneHotVector> oh = {{"cap", 9, 2}, {"linker", 8, 7}};
    auto v = build_word_vector(lay, st, Vector(0), ch, oh, std::nullopt);
    ASSERT_EQ(v.size(), 147);
    EXPECT_EQ(v(0), 0.5);
    EXPECT_EQ(v(100), -1.0);
    EXPECT_EQ(v.segment(130, 9).sum(), 1.0);
    EXPECT_EQ(v(132), 1.0);
    EXPECT_EQ(v(146), 1.0);

    EXPECT_THROW(build_word_vector(lay, Vector::Zero(99), Vector(0), ch, oh, std::nullopt), Error);
    EXPECT_THROW(build_word_vector(lay, st, Vector(0), Vector::Zero(29), oh, std::nullopt), Error);
    EXPECT_THROW(build_word_vector(lay, st, Vector(0), ch, {{"cap", 9, 2}}, std::nullopt), Error);
    EXPECT_THROW(build_word_vector(lay, st, Vector(0), ch, {{"cap", 9, 2}, {"linker", 7, 1}}, std::nullopt), Error);
    EXPECT_THROW(build_word_vector(lay, st, Vector(0), ch, oh, OneHotVector{"parent", 3, 0}), Error);
}

TaggerConfig toy_config()
{
    TaggerConfig cfg;
    cfg.layers = 1;
    cfg.hidden = 3;
    cfg.chars.kind = CharEncoderKind::none;
    return cfg;
}

TEST(WordVector, LayoutAcrossRepresentationGrid)
{
    const std::vector<Vocabulary> feats = {Vocabulary("capitalization", capitalization_vocabulary()),
                                           Vocabulary("linker", {"persName", "orgName", "geogName", "placeName", "date", "time"})};
    auto table = random_table({"a", "b"}, 100, 1);
    for (int word = 0; word < 3; ++word) {
        for (auto kind : {CharEncoderKind::conv, CharEncoderKind::birecurrent, CharEncoderKind::none}) {
            TaggerSetup setup;
            setup.tags = {"O", "B-persName", "I-persName"};
            setup.embeddings = word != 1 ? table : nullptr;
            setup.contextual_dim = word != 0 ? 1024 : 0;
            setup.features = feats;
            auto cfg = toy_config();
            cfg.hidden = 1;
            cfg.chars.kind = kind;
            TaggerModel m(setup, cfg, 1);
            std::size_t expected = (word != 1 ? 100 : 0) + (word != 0 ? 1024 : 0) + cfg.chars.output_dim() + 9 + 7;
            EXPECT_EQ(m.layout().total(), expected);
            EXPECT_EQ(m.stack().layers[0].fwd.input_dim(), static_cast<Eigen::Index>(expected));
        }
    }
}

TEST(WordVector, UnknownLemmaUsesUnkRowAndSubModelAddsParent)
{
    auto table = random_table({"kot", "pies"}, 4, 2);
    TaggerSetup setup;
    setup.tags = {"O", "B-persName_forename"};
    setup.embeddings = table;
    setup.role = TaggerRole::sub;
    setup.parent_tags = {"O", "B-persName", "I-persName"};
    TaggerModel m(setup, toy_config(), 3);
    EXPECT_EQ(m.layout().total(), 4u + 3u);

    TaggedSentence s;
    s.tokens = tokens({"Kot", "słoń", "żyrafa"});
    s.parent = {"O", "B-persName", "I-persName"};
    auto X = m.word_vectors(s);
    EXPECT_EQ(X.row(0).head(4), table->row(0));
    EXPECT_EQ(X.row(1).head(4), X.row(2).head(4));
    EXPECT_NE(X.row(1).head(4), table->row(0));
    EXPECT_EQ(X(0, 4), 1.0);
    EXPECT_EQ(X(1, 5), 1.0);
    EXPECT_EQ(X(2, 6), 1.0);

    s.parent = {"O", "B-orgName", "O"};
    EXPECT_THROW(m.word_vectors(s), Error);
    s.parent = {"O"};
    EXPECT_THROW(m.word_vectors(s), Error);
    setup.parent_tags.clear();
    EXPECT_THROW(TaggerModel(setup, toy_config(), 3), Error);
}

// ---------------------------------------------------------------------------
// Recurrent layers

TEST(Lstm, HandComputedStatesWithBiasOnly)
{
    LstmCell cell;
    Rng rng(1);
    cell.init(2, 1, rng);
    cell.W.value.setZero();
    cell.U.value.setZero();
    cell.b.value << 0.0, 1.0, 0.5, -0.3;
    Matrix x(2, 2);
    x << 0.7, -2.0, 3.0, 0.1;
    auto h = cell.forward(x, nullptr);
    EXPECT_NEAR(h(0, 0), 0.09661542556748326, 1e-15);
    EXPECT_NEAR(h(1, 0), 0.16168136129753377, 1e-15);
}

TEST(Lstm, StackAtZeroWeightsIsConstant)
{
    RecurrentStack stack;
    Rng rng(2);
    stack.init(3, 2, 1, 0.0, rng);
    for (auto &l : stack.layers) {
        for (auto *c : {&l.fwd, &l.bwd}) {
            c->W.value.setZero();
            c->U.value.setZero();
            c->b.value << 0.0, 1.0, 0.5, -0.3;
        }
    }
    Matrix x = Matrix::Random(1, 3);
    auto h = stack.forward(x, nullptr, nullptr);
    ASSERT_EQ(h.cols(), 2);
    EXPECT_NEAR(h(0, 0), 0.09661542556748326, 1e-15);
    EXPECT_NEAR(h(0, 1), 0.09661542556748326, 1e-15);
    EXPECT_THROW(stack.forward(Matrix(0, 3), nullptr, nullptr), Error);
}

TEST(Lstm, EvalIsDeterministicAndDropoutFree)
{
    RecurrentStack stack;
    Rng rng(3);
    stack.init(4, 3, 5, 0.25, rng);
    Matrix x = Matrix::Random(6, 4);
    EXPECT_EQ(stack.forward(x, nullptr, nullptr), stack.forward(x, nullptr, nullptr));

    RecurrentStack plain = stack;
    plain.dropout = 0.0;
    Rng train(9);
    EXPECT_EQ(plain.forward(x, &train, nullptr), stack.forward(x, nullptr, nullptr));
}

TEST(Lstm, VariationalMaskIsSharedAcrossPositions)
{
    RecurrentStack stack;
    Rng rng(4);
    stack.init(8, 3, 6, 0.4, rng);
    Matrix x = Matrix::Random(7, 8).array() + 2.0; // no exact zeros
    Rng train(5);
    RecurrentStack::Cache cache;
    (void)stack.forward(x, &train, &cache);
    ASSERT_EQ(cache.masks.size(), 3u);
    std::size_t dropped = 0;
    for (std::size_t l = 0; l < 3; ++l) {
        const Matrix &input = cache.layers[l].f.x;
        const RowVector &mask = cache.masks[l];
        for (Eigen::Index j = 0; j < input.cols(); ++j) {
            bool zero_col = (input.col(j).array() == 0.0).all();
            bool any_zero = (input.col(j).array() == 0.0).any();
            EXPECT_EQ(zero_col, any_zero) << "layer " << l << " column " << j;
            EXPECT_EQ(zero_col, mask(j) == 0.0);
            dropped += zero_col ? 1 : 0;
            if (mask(j) != 0.0) {
                EXPECT_DOUBLE_EQ(mask(j), 1.0 / 0.6);
            }
        }
    }
    EXPECT_GT(dropped, 0u);
}

// ---------------------------------------------------------------------------
// Full model gradient

TEST(TaggerGradient, ConvCharsMatchFiniteDifferences)
{
    auto t = toy_model(TaggerRole::main, CharEncoderKind::conv, 1);
    EXPECT_LT(full_gradient_error(t), 1e-3);
}

TEST(TaggerGradient, RecurrentCharsMatchFiniteDifferences)
{
    auto t = toy_model(TaggerRole::main, CharEncoderKind::birecurrent, 2);
    EXPECT_LT(full_gradient_error(t), 1e-3);
}

TEST(TaggerGradient, SubModelMatchesFiniteDifferences)
{
    auto t = toy_model(TaggerRole::sub, CharEncoderKind::conv, 3);
    EXPECT_LT(full_gradient_error(t), 1e-3);
}

TEST(TaggerGradient, StaticTableIsFrozen)
{
    auto table = random_table({"ala", "ma", "kota"}, 4, 4);
    TaggerSetup setup;
    setup.tags = {"O", "B-persName"};
    setup.embeddings = table;
    TaggerModel m(setup, toy_config(), 4);
    const double *begin = table->row(0).data();
    const double *end = begin + 12;
    std::set<std::string> names;
    for (const auto &p : m.parameters()) {
        names.insert(p.name);
        EXPECT_TRUE(p.value.data() + p.value.size() <= begin || p.value.data() >= end) << p.name;
    }
    EXPECT_TRUE(names.count("embedding.unk"));
    EXPECT_TRUE(names.count("crf.transitions"));
    EXPECT_FALSE(names.count("char.embedding"));
}

// ---------------------------------------------------------------------------
// Optimizer

TEST(Nadam, ZeroGradientsLeaveParametersUnchanged)
{
    std::vector<double> p = {0.3, -1.2};
    std::vector<double> g = {0.0, 0.0};
    NadamState state;
    for (int i = 0; i < 3; ++i) {
        nadam_step({std::span<double>(p)}, {std::span<const double>(g)}, state);
    }
    EXPECT_EQ(p, (std::vector<double>{0.3, -1.2}));
}

TEST(Nadam, SingleStepMatchesHandFormula)
{
    std::vector<double> p = {0.5};
    std::vector<double> g = {1.0};
    NadamState state;
    nadam_step({std::span<double>(p)}, {std::span<const double>(g)}, state);
    EXPECT_NEAR(p[0], 0.49788709665457953, 1e-15);
    EXPECT_EQ(state.t, 1u);
}

TEST(Nadam, SymmetricAndRejectsNonFinite)
{
    std::vector<double> p = {1.0, 2.0, 1.0};
    std::vector<double> g = {0.3, -0.1, 0.3};
    NadamState state;
    for (int i = 0; i < 5; ++i) {
        nadam_step({std::span<double>(p)}, {std::span<const double>(g)}, state);
    }
    EXPECT_EQ(p[0], p[2]);
    std::vector<double> bad = {0.1, std::nan(""), 0.0};
    auto before = p;
    EXPECT_THROW(nadam_step({std::span<double>(p)}, {std::span<const double>(bad)}, state), Error);
    EXPECT_EQ(p, before);
    std::vector<double> short_grad = {0.1};
    EXPECT_THROW(nadam_step({std::span<double>(p)}, {std::span<const double>(short_grad)}, state), Error);
}

// ---------------------------------------------------------------------------
// Training

struct ToyCorpus {
    std::vector<TaggedSentence> data;
    std::shared_ptr<const EmbeddingTable> table;
    std::vector<Vocabulary> features;
};

// Thirty template sentences over a closed vocabulary.
ToyCorpus toy_corpus()
{
    const std::vector<std::string> first = {"Jan", "Anna", "Piotr", "Maria"};
    const std::vector<std::string> last = {"Kowalski", "Nowak", "Wiśniewski"};
    const std::vector<std::string> place = {"Kraków", "Gdańsk", "Poznań", "Lublin"};
    const std::vector<std::string> org = {"Orlen", "Pekao"};
    std::vector<std::string> vocab;
    for (const auto *list : {&first, &last, &place, &org}) {
        for (const auto &w : *list) {
            vocab.push_back(unicode::to_lower(w));
        }
    }
    for (const auto *w : {"mieszka", "w", "pracuje", "dla", "jedzie", "do", "lubi", "deszcz", "."}) {
        vocab.emplace_back(w);
    }
    ToyCorpus c;
    c.table = random_table(vocab, 8, 42);
    c.features = {Vocabulary("capitalization", capitalization_vocabulary())};
    Rng rng(7);
    auto pick = [&](const std::vector<std::string> &v) { return v[rng.index(v.size())]; };
    for (int i = 0; i < 30; ++i) {
        std::vector<std::string> words;
        TagSequence gold;
        auto add = [&](const std::string &w, const std::string &tag) {
            words.push_back(w);
            gold.push_back(tag);
        };
        switch (i % 3) {
        case 0:
            add(pick(first), "B-persName");
            add(pick(last), "I-persName");
            add("mieszka", "O");
            add("w", "O");
            add(pick(place), "B-placeName");
            break;
        case 1:
            add(pick(first), "B-persName");
            add("pracuje", "O");
            add("dla", "O");
            add(pick(org), "B-orgName");
            break;
        default:
            if (i == 2) {
                add("lubi", "O");
                add("deszcz", "O");
                break;
            }
            add("jedzie", "O");
            add("do", "O");
            add(pick(place), "B-placeName");
            break;
        }
        add(".", "O");
        TaggedSentence s;
        s.tokens = tokens(words);
        s.features = {capitalization_stream(s.tokens)};
        s.gold = gold;
        c.data.push_back(std::move(s));
    }
    return c;
}

TaggerSetup toy_setup(const ToyCorpus &c)
{
    TaggerSetup setup;
    setup.tags = collect_tag_vocabulary(c.data);
    setup.embeddings = c.table;
    setup.features = c.features;
    return setup;
}

TaggerConfig train_config()
{
    TaggerConfig cfg;
    cfg.layers = 1;
    cfg.hidden = 8;
    cfg.dropout = 0.0;
    cfg.epochs = 50;
    cfg.batch_size = 4;
    cfg.chars.kind = CharEncoderKind::none;
    cfg.optimizer.learning_rate = 0.01;
    return cfg;
}

double exact_f1(const TaggerModel &m, const std::vector<TaggedSentence> &data)
{
    double tp = 0, np = 0, ng = 0;
    for (const auto &s : data) {
        auto pred = bio_decode(m.predict(s), TagScheme::BIO, false);
        auto gold = bio_decode(s.gold, TagScheme::BIO, false);
        np += static_cast<double>(pred.size());
        ng += static_cast<double>(gold.size());
        for (const auto &p : pred) {
            tp += std::count_if(gold.begin(), gold.end(), [&](const EntitySpan &g) {
                return g.start == p.start && g.end == p.end && g.category == p.category;
            });
        }
    }
    return np + ng == 0 ? 1.0 : 2 * tp / (np + ng);
}

TEST(TaggerTraining, OverfitsToyCorpus)
{
    auto c = toy_corpus();
    auto r = train_tagger(c.data, toy_setup(c), train_config(), 11);
    ASSERT_EQ(r.epoch_losses.size(), 50u);
    EXPECT_LT(r.epoch_losses.back(), 0.1 * r.epoch_losses.front());
    EXPECT_GE(exact_f1(r.model, c.data), 0.95);
    EXPECT_EQ(r.model.predict(c.data[2]), (TagSequence{"O", "O", "O"}));
}

TEST(TaggerTraining, ZeroEpochsReturnsInitialModel)
{
    auto c = toy_corpus();
    auto cfg = train_config();
    cfg.epochs = 0;
    auto r = train_tagger(c.data, toy_setup(c), cfg, 11);
    EXPECT_TRUE(r.epoch_losses.empty());
    TaggerModel fresh(toy_setup(c), cfg, detail::derive_seed(11, 0));
    EXPECT_EQ(r.model.loss(c.data[0]), fresh.loss(c.data[0]));
    EXPECT_THROW(train_tagger({}, toy_setup(c), cfg, 1), Error);
}

TEST(TaggerTraining, SameSeedSameTrajectory)
{
    auto c = toy_corpus();
    auto cfg = train_config();
    cfg.epochs = 3;
    cfg.dropout = 0.25;
    cfg.chars.kind = CharEncoderKind::conv;
    cfg.chars.embedding_dim = 4;
    cfg.chars.filters = 3;
    auto setup = toy_setup(c);
    setup.chars = CharVocabulary::build({c.data[0].tokens, c.data[1].tokens});
    auto a = train_tagger(c.data, setup, cfg, 5);
    auto b = train_tagger(c.data, setup, cfg, 5);
    EXPECT_EQ(a.step_losses, b.step_losses);
    EXPECT_EQ(a.epoch_losses, b.epoch_losses);
    auto other = train_tagger(c.data, setup, cfg, 6);
    EXPECT_NE(a.step_losses, other.step_losses);
}

// ---------------------------------------------------------------------------
// Cascade

TEST(Cascade, MaskRestrictsSubcategories)
{
    const TagSequence main_tags = {"B-persName", "I-persName", "O", "B-orgName", "B-placeName"};
    const std::vector<std::string> sub = {"O",
                                          "B-persName_forename",
                                          "B-persName_surname",
                                          "B-persName_addName",
                                          "B-placeName_settlement",
                                          "I-placeName_settlement"};
    auto m = sub_tag_mask(main_tags, sub);
    EXPECT_EQ(m[0], (std::vector<bool>{true, true, true, true, false, false}));
    EXPECT_EQ(m[1], (std::vector<bool>{true, true, true, true, false, false}));
    EXPECT_EQ(m[2], (std::vector<bool>{true, false, false, false, false, false}));
    EXPECT_EQ(m[3], (std::vector<bool>{true, false, false, false, false, false}));
    EXPECT_EQ(m[4], (std::vector<bool>{true, false, false, false, true, true}));
}

struct CascadePair {
    TaggerModel main;
    TaggerModel sub;
};

CascadePair cascade_pair(const ToyCorpus &c, std::uint64_t seed)
{
    auto cfg = train_config();
    auto main_setup = toy_setup(c);
    TaggerModel main(main_setup, cfg, seed);
    TaggerSetup sub_setup = main_setup;
    sub_setup.role = TaggerRole::sub;
    sub_setup.tags = {"O", "B-persName_forename", "B-persName_surname", "B-placeName_settlement",
                      "I-placeName_settlement"};
    sub_setup.parent_tags = main.tags();
    // Large random weights make unconstrained output spread over all tags.
    cfg.init_scale = 2.0;
    return {main, TaggerModel(sub_setup, cfg, seed + 1)};
}

TEST(Cascade, MaskedPredictionsRespectMainSpans)
{
    auto c = toy_corpus();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto [main, sub] = cascade_pair(c, seed);
        for (const auto &s : c.data) {
            auto out = predict_cascade(main, sub, s);
            ASSERT_EQ(out.sub.size(), s.tokens.size());
            auto allowed = sub_tag_mask(out.main, sub.tags());
            for (std::size_t i = 0; i < out.sub.size(); ++i) {
                auto y = sub.crf().tag_index(out.sub[i]);
                EXPECT_TRUE(allowed[i][y]) << out.main[i] << " -> " << out.sub[i];
            }
        }
    }
}

TEST(Cascade, UnmaskedEqualsIndependentRuns)
{
    auto c = toy_corpus();
    auto [main, sub] = cascade_pair(c, 3);
    for (const auto &s : c.data) {
        auto out = predict_cascade(main, sub, s, false);
        auto m = main.predict(s);
        auto sub_input = s;
        sub_input.parent = m;
        EXPECT_EQ(out.main, m);
        EXPECT_EQ(out.sub, sub.predict(sub_input));
    }
    EXPECT_THROW(predict_cascade(main, main, c.data[0]), Error);
    auto [other_main, other_sub] = cascade_pair(c, 4);
    TaggerSetup mismatched = toy_setup(c);
    mismatched.role = TaggerRole::sub;
    mismatched.parent_tags = {"O", "B-persName"};
    TaggerModel wrong(mismatched, train_config(), 1);
    EXPECT_THROW(predict_cascade(main, wrong, c.data[0]), Error);
}

TEST(Cascade, AllOutsideMainGivesAllOutsideSub)
{
    auto c = toy_corpus();
    auto r = train_tagger(c.data, toy_setup(c), train_config(), 11);
    auto [unused, sub] = cascade_pair(c, 2);
    TaggerSetup sub_setup = toy_setup(c);
    sub_setup.role = TaggerRole::sub;
    sub_setup.tags = sub.tags();
    sub_setup.parent_tags = r.model.tags();
    TaggerModel untrained_sub(sub_setup, train_config(), 9);
    auto out = predict_cascade(r.model, untrained_sub, c.data[2]);
    EXPECT_EQ(out.main, TagSequence(3, "O"));
    EXPECT_EQ(out.sub, TagSequence(3, "O"));
}

// ---------------------------------------------------------------------------
// Files

TEST(Checkpoint, RoundTripPreservesPredictions)
{
    auto t = toy_model(TaggerRole::sub, CharEncoderKind::birecurrent, 6);
    auto path = temp_path("wikiner_tagger_test.bin");
    t.model.save_file(path);
    auto back = TaggerModel::load_file(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.loss(t.sentence), t.model.loss(t.sentence));
    EXPECT_EQ(back.predict(t.sentence), t.model.predict(t.sentence));
    EXPECT_EQ(back.role(), TaggerRole::sub);
    EXPECT_EQ(back.parent_tags(), t.model.parent_tags());
    EXPECT_EQ(back.config().chars.kind, CharEncoderKind::birecurrent);
    EXPECT_THROW(TaggerModel::load_file(temp_path("wikiner_missing_model.bin")), Error);
}

TEST(Embeddings, TextFormat)
{
    std::istringstream in("3 2\nKot 0.5 1\npies -1 2e-1\n\nkot 9 9\n");
    auto t = EmbeddingTable::read(in);
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.dimension(), 2u);
    EXPECT_EQ(t.find("KOT"), std::optional<std::size_t>(0));
    EXPECT_DOUBLE_EQ(t.row(1)(1), 0.2);
    EXPECT_FALSE(t.find("słoń"));

    std::istringstream commented("# vectors below\n#\n1 2\n#tag 3 4\n# 5 6\n");
    auto c = EmbeddingTable::read(commented);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(c.find("#tag"), std::optional<std::size_t>(0));
    EXPECT_EQ(c.find("#"), std::optional<std::size_t>(1));

    std::istringstream mismatch("a 1 2\nb 1 2 3\n");
    try {
        EmbeddingTable::read(mismatch);
        FAIL();
    } catch (const FormatError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream bad_value("a 1 x\n");
    EXPECT_THROW(EmbeddingTable::read(bad_value), FormatError);
    std::istringstream empty("");
    EXPECT_THROW(EmbeddingTable::read(empty), Error);
    EXPECT_THROW(EmbeddingTable::load_file(temp_path("wikiner_missing.vec")), Error);
}

TEST(Embeddings, ContextualFileRequiresCoverage)
{
    ContextualVectors cv(3);
    cv.set("d1", 0, Matrix::Ones(2, 3));
    cv.set("d1", 1, Matrix::Zero(1, 3));
    EXPECT_THROW(cv.set("d1", 2, Matrix::Zero(1, 4)), Error);
    auto path = temp_path("wikiner_ctx_test.bin");
    cv.save_file(path);
    auto back = ContextualVectors::load_file(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.dimension(), 3u);
    EXPECT_EQ(back.get("d1", 0, 2), Matrix::Ones(2, 3));

    Document doc;
    doc.id = "d1";
    doc.sentences = {make_sentence({"a", "b"}), make_sentence({"c"})};
    EXPECT_NO_THROW(back.require_coverage({doc}));
    doc.sentences.push_back(make_sentence({"d"}));
    EXPECT_THROW(back.require_coverage({doc}), Error);
    doc.sentences.pop_back();
    doc.sentences[1] = make_sentence({"c", "e"});
    EXPECT_THROW(back.require_coverage({doc}), Error);
    doc.id = "d2";
    EXPECT_THROW(back.require_coverage({doc}), Error);
}

} // namespace
