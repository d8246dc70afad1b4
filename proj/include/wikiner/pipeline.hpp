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

#ifndef WIKINER_PIPELINE_HPP
#define WIKINER_PIPELINE_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <wikiner/corpus.hpp>
#include <wikiner/entitylinker.hpp>
#include <wikiner/evaluation.hpp>
#include <wikiner/features.hpp>
#include <wikiner/neural.hpp>
#include <wikiner/serialization.hpp>
#include <wikiner/tokenizer.hpp>
#include <wikiner/wikigraph.hpp>

namespace wikiner
{

// Knowledge base plus the optional trained disambiguator, stored together.
struct Snapshot {
    KnowledgeBase kb;
    std::optional<Disambiguator> disambiguator;

    static constexpr std::uint32_t kVersion = 1;

    void save_file(const std::string &path) const { save_binary(path, "snapshot", kVersion, *this); }
    static Snapshot load_file(const std::string &path) { return load_binary<Snapshot>(path, "snapshot", kVersion); }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(kb, disambiguator);
    }
};

// ---------------------------------------------------------------------------
// Configuration

namespace detail
{

inline void reject_unknown_keys(const nlohmann::json &j, const std::vector<std::string> &known, const std::string &where)
{
    if (!j.is_object()) {
        throw Error(where + " must be a JSON object");
    }
    for (const auto &[key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read_key(const nlohmann::json &j, const char *key, T &out)
{
    if (auto it = j.find(key); it != j.end()) {
        if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
            if (!it->is_number_unsigned()) {
                throw Error(std::string("bad value for '") + key + "': expected a non-negative integer");
            }
        }
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception &e) {
            throw Error(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

} // namespace detail

inline void apply_tagger_json(const nlohmann::json &j, TaggerConfig &cfg)
{
    detail::reject_unknown_keys(j,
                                {"layers", "hidden", "dropout", "epochs", "batch_size", "shuffle",
                                 "constrain_transitions", "init_scale", "learning_rate", "beta1", "beta2", "epsilon",
                                 "schedule_decay", "char_encoder"},
                                "tagger config");
    detail::read_key(j, "layers", cfg.layers);
    detail::read_key(j, "hidden", cfg.hidden);
    detail::read_key(j, "dropout", cfg.dropout);
    detail::read_key(j, "epochs", cfg.epochs);
    detail::read_key(j, "batch_size", cfg.batch_size);
    detail::read_key(j, "shuffle", cfg.shuffle);
    detail::read_key(j, "constrain_transitions", cfg.constrain_transitions);
    detail::read_key(j, "init_scale", cfg.init_scale);
    detail::read_key(j, "learning_rate", cfg.optimizer.learning_rate);
    detail::read_key(j, "beta1", cfg.optimizer.beta1);
    detail::read_key(j, "beta2", cfg.optimizer.beta2);
    detail::read_key(j, "epsilon", cfg.optimizer.epsilon);
    detail::read_key(j, "schedule_decay", cfg.optimizer.schedule_decay);
    if (auto it = j.find("char_encoder"); it != j.end()) {
        detail::reject_unknown_keys(*it, {"kind", "embedding_dim", "filters", "width", "hidden"}, "char_encoder");
        std::string kind(to_string(cfg.chars.kind));
        detail::read_key(*it, "kind", kind);
        cfg.chars.kind = parse_char_encoder_kind(kind);
        detail::read_key(*it, "embedding_dim", cfg.chars.embedding_dim);
        detail::read_key(*it, "filters", cfg.chars.filters);
        detail::read_key(*it, "width", cfg.chars.width);
        detail::read_key(*it, "hidden", cfg.chars.hidden);
    }
    cfg.validate();
}

inline nlohmann::json tagger_to_json(const TaggerConfig &cfg)
{
    return {{"layers", cfg.layers},
            {"hidden", cfg.hidden},
            {"dropout", cfg.dropout},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"shuffle", cfg.shuffle},
            {"constrain_transitions", cfg.constrain_transitions},
            {"init_scale", cfg.init_scale},
            {"learning_rate", cfg.optimizer.learning_rate},
            {"beta1", cfg.optimizer.beta1},
            {"beta2", cfg.optimizer.beta2},
            {"epsilon", cfg.optimizer.epsilon},
            {"schedule_decay", cfg.optimizer.schedule_decay},
            {"char_encoder",
             {{"kind", std::string(to_string(cfg.chars.kind))},
              {"embedding_dim", cfg.chars.embedding_dim},
              {"filters", cfg.chars.filters},
              {"width", cfg.chars.width},
              {"hidden", cfg.chars.hidden}}}};
}

struct GazetteerSpec {
    std::string name;
    std::string path;
    MatchMode mode = MatchMode::lemma;
};

enum class TokenizerMode : std::uint8_t { fallback, whitespace };

// See README for the key layout. Paths are resolved against the directory of
// the config file.
struct PipelineConfig {
    std::vector<std::string> features{"capitalization"};
    std::vector<GazetteerSpec> gazetteers;
    std::string snapshot;
    std::string seeds;
    LinkerConfig linker;
    std::string person_names;
    std::string common_words;
    std::string main_model;
    std::string sub_model;
    std::string embeddings;
    std::string contextual;
    std::string derived_lexicon;
    TokenizerMode tokenizer = TokenizerMode::fallback;
    TaggerConfig tagger;
    std::uint64_t seed = 1;

    static PipelineConfig from_json(const nlohmann::json &j, const std::filesystem::path &base = {})
    {
        detail::reject_unknown_keys(j,
                                    {"features", "gazetteers", "snapshot", "seeds", "linker", "models", "embeddings",
                                     "contextual", "derived_lexicon", "tokenizer", "tagger", "seed"},
                                    "pipeline config");
        PipelineConfig c;
        auto path = [&](const nlohmann::json &v) -> std::string {
            auto p = std::filesystem::path(v.get<std::string>());
            if (p.empty() || p.is_absolute() || base.empty()) {
                return p.string();
            }
            return (base / p).lexically_normal().string();
        };
        detail::read_key(j, "features", c.features);
        if (auto it = j.find("gazetteers"); it != j.end()) {
            if (!it->is_object()) {
                throw Error("gazetteers must map names to {path, mode}");
            }
            for (const auto &[name, spec] : it->items()) {
                detail::reject_unknown_keys(spec, {"path", "mode"}, "gazetteer '" + name + "'");
                GazetteerSpec g{name, path(spec.at("path")), MatchMode::lemma};
                std::string mode = "lemma";
                detail::read_key(spec, "mode", mode);
                if (mode == "surface") {
                    g.mode = MatchMode::surface;
                } else if (mode != "lemma") {
                    throw Error("gazetteer mode must be lemma or surface");
                }
                c.gazetteers.push_back(std::move(g));
            }
        }
        for (const char *key : {"snapshot", "seeds", "embeddings", "contextual", "derived_lexicon"}) {
            if (auto it = j.find(key); it != j.end()) {
                std::string value = path(*it);
                std::string k = key;
                (k == "snapshot"     ? c.snapshot
                 : k == "seeds"      ? c.seeds
                 : k == "embeddings" ? c.embeddings
                 : k == "contextual" ? c.contextual
                                     : c.derived_lexicon)
                    = value;
            }
        }
        if (auto it = j.find("linker"); it != j.end()) {
            detail::reject_unknown_keys(*it,
                                        {"link_probability_threshold", "min_sense_probability", "person_names",
                                         "common_words", "filters"},
                                        "linker config");
            detail::read_key(*it, "link_probability_threshold", c.linker.link_probability_threshold);
            detail::read_key(*it, "min_sense_probability", c.linker.min_sense_probability);
            if (auto p = it->find("person_names"); p != it->end()) {
                c.person_names = path(*p);
            }
            if (auto p = it->find("common_words"); p != it->end()) {
                c.common_words = path(*p);
            }
            if (auto f = it->find("filters"); f != it->end()) {
                detail::reject_unknown_keys(*f, {"single_character", "numeric", "person_name", "lowercase_common"},
                                            "linker filters");
                for (auto rule : {FilterRule::single_character, FilterRule::numeric, FilterRule::person_name,
                                  FilterRule::lowercase_common}) {
                    bool on = c.linker.filters.on(rule);
                    detail::read_key(*f, std::string(to_string(rule)).c_str(), on);
                    c.linker.filters.enabled[static_cast<std::size_t>(rule)] = on;
                }
            }
        }
        if (auto it = j.find("models"); it != j.end()) {
            detail::reject_unknown_keys(*it, {"main", "sub"}, "models");
            if (auto p = it->find("main"); p != it->end()) {
                c.main_model = path(*p);
            }
            if (auto p = it->find("sub"); p != it->end()) {
                c.sub_model = path(*p);
            }
        }
        if (auto it = j.find("tokenizer"); it != j.end()) {
            auto mode = it->get<std::string>();
            if (mode == "whitespace") {
                c.tokenizer = TokenizerMode::whitespace;
            } else if (mode != "fallback") {
                throw Error("tokenizer must be fallback or whitespace");
            }
        }
        if (auto it = j.find("tagger"); it != j.end()) {
            apply_tagger_json(*it, c.tagger);
        }
        detail::read_key(j, "seed", c.seed);
        return c;
    }

    static PipelineConfig load_file(const std::string &file)
    {
        std::ifstream in(file);
        if (!in) {
            throw Error("cannot open config " + file);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in, nullptr, true, true);
        } catch (const nlohmann::json::parse_error &e) {
            throw Error(file + ": " + e.what());
        }
        return from_json(j, std::filesystem::path(file).parent_path());
    }
};

// ---------------------------------------------------------------------------
// Resources

struct Resources {
    PipelineConfig config;
    std::map<std::string, Gazetteer> gazetteers;
    std::optional<Gazetteer> person_names;
    std::optional<Gazetteer> common_words;
    std::shared_ptr<const Snapshot> snapshot;
    Labeling labeling;
    std::shared_ptr<const EmbeddingTable> embeddings;
    std::optional<ContextualVectors> contextual;
    std::optional<DerivedLexicon> derived;
    std::optional<TaggerModel> main_model;
    std::optional<TaggerModel> sub_model;

    [[nodiscard]] const Disambiguator *disambiguator() const
    {
        return snapshot && snapshot->disambiguator ? &*snapshot->disambiguator : nullptr;
    }
};

namespace detail
{

inline std::ifstream open_resource(const std::string &path, const std::string &what)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("missing " + what + ": " + path);
    }
    return in;
}

} // namespace detail

// Loads every file named by the config; any missing file fails here.
inline Resources load_resources(const PipelineConfig &cfg, bool load_models = true)
{
    Resources r;
    r.config = cfg;
    for (const auto &g : cfg.gazetteers) {
        auto in = detail::open_resource(g.path, "gazetteer '" + g.name + "'");
        r.gazetteers.emplace(g.name, Gazetteer::load(g.name, in, g.mode));
    }
    if (!cfg.person_names.empty()) {
        auto in = detail::open_resource(cfg.person_names, "person-name lexicon");
        r.person_names = Gazetteer::load("person_names", in, MatchMode::lemma);
    }
    if (!cfg.common_words.empty()) {
        auto in = detail::open_resource(cfg.common_words, "common-word lexicon");
        r.common_words = Gazetteer::load("common_words", in, MatchMode::lemma);
    }
    if (!cfg.snapshot.empty()) {
        r.snapshot = std::make_shared<const Snapshot>(Snapshot::load_file(cfg.snapshot));
        std::map<NodeId, NodeLabel> seeds;
        if (!cfg.seeds.empty()) {
            auto in = detail::open_resource(cfg.seeds, "seed file");
            seeds = read_seeds(in);
        }
        r.labeling = propagate_labels(r.snapshot->kb.graph, seeds);
    }
    if (!cfg.embeddings.empty()) {
        r.embeddings = std::make_shared<const EmbeddingTable>(EmbeddingTable::load_file(cfg.embeddings));
    }
    if (!cfg.contextual.empty()) {
        r.contextual = ContextualVectors::load_file(cfg.contextual);
    }
    if (!cfg.derived_lexicon.empty()) {
        auto in = detail::open_resource(cfg.derived_lexicon, "derived lexicon");
        r.derived = DerivedLexicon::load(in);
    }
    if (load_models && !cfg.main_model.empty()) {
        r.main_model = TaggerModel::load_file(cfg.main_model);
        if (!cfg.sub_model.empty()) {
            r.sub_model = TaggerModel::load_file(cfg.sub_model);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Feature extraction

// Produces the ordered one-hot streams named in the config: `capitalization`,
// `gazetteer:<name>` and `linker`.
class FeatureExtractor
{
public:
    explicit FeatureExtractor(const Resources &res) : res_(res)
    {
        for (const auto &f : res.config.features) {
            if (f == "capitalization") {
                vocabs_.emplace_back(f, capitalization_vocabulary());
            } else if (f.rfind("gazetteer:", 0) == 0) {
                auto name = f.substr(10);
                auto it = res.gazetteers.find(name);
                if (it == res.gazetteers.end()) {
                    throw Error("feature '" + f + "' names an unconfigured gazetteer");
                }
                vocabs_.emplace_back(f, it->second.labels());
            } else if (f == "linker") {
                if (!res.snapshot) {
                    throw Error("the linker feature needs a statistics snapshot");
                }
                vocabs_.emplace_back(f, linker_vocabulary());
            } else {
                throw Error("unknown feature extractor '" + f + "'");
            }
        }
    }

    [[nodiscard]] const std::vector<Vocabulary> &vocabularies() const { return vocabs_; }

    [[nodiscard]] std::vector<LinkedMention> link(const std::vector<Token> &tokens) const
    {
        if (!res_.snapshot) {
            throw Error("entity linking needs a statistics snapshot");
        }
        return link_document(tokens, res_.snapshot->kb, res_.labeling, res_.disambiguator(), res_.config.linker,
                             res_.person_names ? &*res_.person_names : nullptr,
                             res_.common_words ? &*res_.common_words : nullptr);
    }

    [[nodiscard]] std::vector<LabelStream> streams(const std::vector<Token> &tokens) const
    {
        std::vector<LabelStream> out;
        for (const auto &f : res_.config.features) {
            if (f == "capitalization") {
                out.push_back(capitalization_stream(tokens));
            } else if (f == "linker") {
                out.push_back(linker_stream(link(tokens), tokens.size()));
            } else {
                out.push_back(res_.gazetteers.at(f.substr(10)).match(tokens));
            }
        }
        return out;
    }

private:
    const Resources &res_;
    std::vector<Vocabulary> vocabs_;
};

// ---------------------------------------------------------------------------
// Training

inline TaggedSentence make_tagged(const Sentence &s, const FeatureExtractor &fx, const Resources &res,
                                  const std::string &doc_id, std::size_t sentence_index)
{
    TaggedSentence t;
    t.tokens = s.tokens;
    t.features = fx.streams(s.tokens);
    if (res.contextual) {
        t.contextual = res.contextual->get(doc_id, sentence_index, s.tokens.size());
    }
    return t;
}

struct ModelPair {
    TaggerModel main;
    std::optional<TaggerModel> sub; // absent when the corpus has no sub-layer spans
    std::vector<double> main_losses;
    std::vector<double> sub_losses;
};

inline ModelPair train_models(const std::vector<Document> &docs, const FeatureExtractor &fx, const Resources &res,
                              const TaggerConfig &cfg, std::uint64_t seed)
{
    std::vector<TaggedSentence> main_data, sub_data;
    std::vector<std::vector<Token>> all_tokens;
    bool any_sub = false;
    for (const auto &d : docs) {
        for (std::size_t i = 0; i < d.sentences.size(); ++i) {
            const auto &s = d.sentences[i];
            if (s.tokens.empty()) {
                continue;
            }
            auto t = make_tagged(s, fx, res, d.id, i);
            t.gold = bio_encode(s.layer(Layer::main), s.tokens.size(), cfg.scheme);
            TaggedSentence sub = t;
            sub.parent = t.gold;
            sub.gold = bio_encode(s.layer(Layer::sub), s.tokens.size(), cfg.scheme);
            any_sub = any_sub || !s.layer(Layer::sub).empty();
            all_tokens.push_back(s.tokens);
            main_data.push_back(std::move(t));
            sub_data.push_back(std::move(sub));
        }
    }
    if (main_data.empty()) {
        throw Error("training corpus contains no sentences");
    }
    TaggerSetup setup;
    setup.role = TaggerRole::main;
    setup.tags = collect_tag_vocabulary(main_data, cfg.scheme);
    setup.embeddings = res.embeddings;
    setup.contextual_dim = res.contextual ? res.contextual->dimension() : 0;
    setup.chars = CharVocabulary::build(all_tokens);
    setup.features = fx.vocabularies();
    auto main = train_tagger(main_data, setup, cfg, seed);
    spdlog::info("main tagger: {} sentences, {} tags", main_data.size(), setup.tags.size());

    ModelPair out{std::move(main.model), std::nullopt, std::move(main.epoch_losses), {}};
    if (any_sub) {
        TaggerSetup sub_setup = setup;
        sub_setup.role = TaggerRole::sub;
        sub_setup.parent_tags = setup.tags;
        sub_setup.tags = collect_tag_vocabulary(sub_data, cfg.scheme);
        auto sub = train_tagger(sub_data, sub_setup, cfg, detail::derive_seed(seed, 7));
        out.sub = std::move(sub.model);
        out.sub_losses = std::move(sub.epoch_losses);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Annotation

inline std::vector<Sentence> tokenize_text(const std::string &text, TokenizerMode mode)
{
    if (mode == TokenizerMode::fallback) {
        return split_sentences(text);
    }
    std::vector<Sentence> out;
    for (const auto &line : split(text, '\n')) {
        auto words = split_whitespace(line);
        if (!words.empty()) {
            out.push_back(make_sentence(words));
        }
    }
    return out;
}

class Annotator
{
public:
    Annotator(const Resources &res, const TaggerModel &main, const TaggerModel *sub)
        : res_(res), fx_(res), main_(main), sub_(sub)
    {
        if (main.feature_vocabularies() != fx_.vocabularies()) {
            throw Error("tagger checkpoint was trained with a different feature configuration");
        }
        if (sub && sub->parent_tags() != main.tags()) {
            throw Error("sub tagger does not match the main tagger's tag set");
        }
        if (main.contextual_dim() > 0 && !res.contextual) {
            throw Error("tagger needs contextual vectors but none are configured");
        }
    }

    explicit Annotator(const Resources &res)
        : Annotator(res, require(res.main_model), res.sub_model ? &*res.sub_model : nullptr)
    {
    }

    [[nodiscard]] const FeatureExtractor &features() const { return fx_; }

    // Pre-tokenized input; tokens are used verbatim and existing spans are
    // replaced.
    [[nodiscard]] Document annotate(Document doc) const
    {
        for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
            auto &s = doc.sentences[i];
            s.spans.clear();
            if (s.tokens.empty()) {
                continue;
            }
            auto input = make_tagged(s, fx_, res_, doc.id, i);
            TagSequence main_tags, sub_tags;
            if (sub_) {
                auto r = predict_cascade(main_, *sub_, input, mask_);
                main_tags = std::move(r.main);
                sub_tags = std::move(r.sub);
            } else {
                main_tags = main_.predict(input);
            }
            s.spans = bio_decode(main_tags, main_.config().scheme, false, Layer::main);
            if (!sub_tags.empty()) {
                auto sub = bio_decode(sub_tags, sub_->config().scheme, false, Layer::sub);
                s.spans.insert(s.spans.end(), sub.begin(), sub.end());
            }
            s.sort_spans();
        }
        if (res_.derived) {
            doc = mark_derived(std::move(doc), *res_.derived);
        }
        return doc;
    }

    [[nodiscard]] Document annotate_text(const std::string &text, const std::string &id = "doc0") const
    {
        return annotate(Document{id, tokenize_text(text, res_.config.tokenizer)});
    }

    void set_sub_masking(bool on) { mask_ = on; }

private:
    static const TaggerModel &require(const std::optional<TaggerModel> &m)
    {
        if (!m) {
            throw Error("annotation needs a main tagger checkpoint");
        }
        return *m;
    }

    const Resources &res_;
    FeatureExtractor fx_;
    const TaggerModel &main_;
    const TaggerModel *sub_;
    bool mask_ = true;
};

// ---------------------------------------------------------------------------
// Cross-validation sweep

// Fold index for each of n units: a seeded shuffle dealt round-robin.
inline std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed)
{
    if (folds < 2) {
        throw Error("cross-validation needs at least two folds");
    }
    if (n < folds) {
        throw Error("corpus has " + std::to_string(n) + " sentences, fewer than " + std::to_string(folds) + " folds");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::size_t> fold(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold[order[i]] = i % folds;
    }
    return fold;
}

struct SweepEntry {
    std::string name;
    TaggerConfig config;
};

struct SweepRow {
    std::string name;
    TaggerConfig config;
    std::vector<double> fold_scores; // exact F1 per fold
    double mean = 0.0;
};

// Cartesian product of `axes` (key -> array of values) applied to `base`.
// Keys are the tagger JSON keys; row names list the chosen values.
inline std::vector<SweepEntry> expand_grid(const TaggerConfig &base, const nlohmann::json &axes)
{
    std::vector<SweepEntry> out{{"", base}};
    if (axes.is_null()) {
        out.front().name = "base";
        return out;
    }
    if (!axes.is_object()) {
        throw Error("sweep grid must map tagger keys to value arrays");
    }
    for (const auto &[key, values] : axes.items()) {
        if (!values.is_array() || values.empty()) {
            throw Error("sweep axis '" + key + "' needs a non-empty array");
        }
        std::vector<SweepEntry> next;
        for (const auto &e : out) {
            for (const auto &v : values) {
                auto patched = tagger_to_json(e.config);
                patched[key] = v;
                SweepEntry n{e.name.empty() ? "" : e.name + ",", base};
                apply_tagger_json(patched, n.config);
                n.name += key + "=" + v.dump();
                next.push_back(std::move(n));
            }
        }
        out = std::move(next);
    }
    return out;
}

inline std::vector<SweepRow> sweep(const std::vector<SweepEntry> &grid, const std::vector<Document> &corpus,
                                   const Resources &res, std::size_t folds, std::uint64_t seed)
{
    struct Unit {
        std::size_t doc;
        std::size_t sentence;
    };
    std::vector<Unit> units;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        for (std::size_t s = 0; s < corpus[d].sentences.size(); ++s) {
            if (!corpus[d].sentences[s].tokens.empty()) {
                units.push_back({d, s});
            }
        }
    }
    auto fold_of = fold_assignment(units.size(), folds, seed);
    if (res.contextual) {
        // Fold documents renumber their sentences, which breaks the
        // (document, sentence) addressing of contextual vectors.
        throw Error("sweep does not support contextual vectors");
    }
    FeatureExtractor fx(res);
    std::vector<SweepRow> rows;
    for (const auto &entry : grid) {
        SweepRow row{entry.name, entry.config, {}, 0.0};
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<Document> train(corpus.size()), test(corpus.size());
            for (std::size_t d = 0; d < corpus.size(); ++d) {
                train[d].id = test[d].id = corpus[d].id;
            }
            for (std::size_t u = 0; u < units.size(); ++u) {
                auto &target = fold_of[u] == f ? test : train;
                target[units[u].doc].sentences.push_back(corpus[units[u].doc].sentences[units[u].sentence]);
            }
            auto models = train_models(train, fx, res, entry.config, seed);
            Annotator annot(res, models.main, models.sub ? &*models.sub : nullptr);
            std::vector<Document> pred;
            for (const auto &d : test) {
                pred.push_back(annot.annotate(d));
            }
            row.fold_scores.push_back(evaluate(pred, test).exact());
        }
        row.mean = std::accumulate(row.fold_scores.begin(), row.fold_scores.end(), 0.0)
                   / static_cast<double>(row.fold_scores.size());
        spdlog::info("sweep {}: mean exact F1 {:.2f}", row.name, row.mean);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// JSON views shared by the CLI and the service

inline nlohmann::json span_to_json(const EntitySpan &s)
{
    return {{"start", s.start},
            {"end", s.end},
            {"category", to_string(s.category)},
            {"layer", s.layer == Layer::main ? "main" : "sub"}};
}

inline nlohmann::json document_to_json(const Document &doc)
{
    nlohmann::json sents = nlohmann::json::array();
    for (const auto &s : doc.sentences) {
        nlohmann::json toks = nlohmann::json::array();
        for (const auto &t : s.tokens) {
            toks.push_back(t.surface);
        }
        nlohmann::json spans = nlohmann::json::array();
        for (const auto &sp : s.spans) {
            spans.push_back(span_to_json(sp));
        }
        sents.push_back({{"tokens", toks}, {"spans", spans}});
    }
    return {{"id", doc.id}, {"sentences", sents}};
}

inline nlohmann::json report_to_json(const EvalReport &r)
{
    nlohmann::json cats = nlohmann::json::array();
    for (const auto &c : r.categories) {
        cats.push_back({{"category", c.category},
                        {"precision", c.exact.precision()},
                        {"recall", c.exact.recall()},
                        {"f1", c.exact.f1()},
                        {"overlap_f1", c.overlap.f1()},
                        {"gold", c.exact.gold},
                        {"predicted", c.exact.predicted}});
    }
    return {{"categories", cats},
            {"precision", r.exact_counts.precision()},
            {"recall", r.exact_counts.recall()},
            {"exact", r.exact()},
            {"overlap", r.overlap()},
            {"final", r.final()}};
}

} // namespace wikiner

#endif
