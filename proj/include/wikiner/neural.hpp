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

#ifndef WIKINER_NEURAL_HPP
#define WIKINER_NEURAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include <wikiner/common.hpp>
#include <wikiner/corpus.hpp>
#include <wikiner/crf.hpp>
#include <wikiner/features.hpp>
#include <wikiner/optim.hpp>
#include <wikiner/serialization.hpp>
#include <wikiner/unicode.hpp>

namespace wikiner
{

using RowVector = Eigen::RowVectorXd;

// Trainable tensor with its gradient accumulator.
struct Param {
    Matrix value;
    Matrix grad;

    void resize(Eigen::Index rows, Eigen::Index cols)
    {
        value = Matrix::Zero(rows, cols);
        grad = Matrix::Zero(rows, cols);
    }

    void init_uniform(Rng &rng, double scale)
    {
        for (Eigen::Index i = 0; i < value.size(); ++i) {
            value.data()[i] = rng.uniform(-scale, scale);
        }
    }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(value);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(value);
        grad = Matrix::Zero(value.rows(), value.cols());
    }
};

// Flat view of one parameter block, used by the optimizer and by gradient
// checks.
struct ParamView {
    std::string name;
    std::span<double> value;
    std::span<double> grad;
};

template <typename A, typename B>
ParamView view_of(const std::string &name, A &value, B &grad)
{
    return ParamView{name, {value.data(), static_cast<std::size_t>(value.size())},
                     {grad.data(), static_cast<std::size_t>(grad.size())}};
}

inline ParamView view_of(const std::string &name, Param &p) { return view_of(name, p.value, p.grad); }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// Embeddings

// Frozen word vectors keyed by lowercased base form. Unknown keys map to a
// separate UNK row that the tagger owns and trains.
class EmbeddingTable
{
public:
    EmbeddingTable() = default;

    EmbeddingTable(std::vector<std::string> words, Matrix vectors) : words_(std::move(words)), vectors_(std::move(vectors))
    {
        check(static_cast<Eigen::Index>(words_.size()) == vectors_.rows(), "embedding rows do not match word count");
        rebuild();
    }

    // Text format: `word v1 ... vd` per line. A leading `count dim` header
    // line, as written by word2vec, is skipped.
    static EmbeddingTable read(std::istream &in)
    {
        std::vector<std::string> words;
        std::vector<std::vector<double>> rows;
        std::optional<std::size_t> dim;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            auto fields = split_whitespace(line);
            if (fields.empty()) {
                continue;
            }
            if (rows.empty() && fields.size() == 2 && is_unsigned(fields[0]) && is_unsigned(fields[1])) {
                continue;
            }
            if (fields[0][0] == '#' && (fields.size() < 2 || !is_number(fields[1]))) {
                continue;
            }
            if (fields.size() < 2) {
                throw FormatError("embedding line needs a word and at least one value", line_no);
            }
            std::vector<double> v;
            for (std::size_t i = 1; i < fields.size(); ++i) {
                try {
                    std::size_t used = 0;
                    v.push_back(std::stod(fields[i], &used));
                    if (used != fields[i].size()) {
                        throw std::invalid_argument(fields[i]);
                    }
                } catch (const std::exception &) {
                    throw FormatError("bad embedding value '" + fields[i] + "'", line_no);
                }
            }
            if (dim && *dim != v.size()) {
                throw FormatError("embedding dimension " + std::to_string(v.size()) + " differs from "
                                      + std::to_string(*dim),
                                  line_no);
            }
            dim = v.size();
            words.push_back(unicode::to_lower(fields[0]));
            rows.push_back(std::move(v));
        }
        if (!dim) {
            throw Error("embedding file contains no vectors");
        }
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(*dim));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < *dim; ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
        return EmbeddingTable(std::move(words), std::move(m));
    }

    static EmbeddingTable load_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot open embeddings " + path);
        }
        return read(in);
    }

    [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(vectors_.cols()); }
    [[nodiscard]] std::size_t size() const { return words_.size(); }
    [[nodiscard]] bool empty() const { return words_.empty(); }

    [[nodiscard]] std::optional<std::size_t> find(const std::string &key) const
    {
        auto it = index_.find(unicode::to_lower(key));
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(words_, vectors_);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(words_, vectors_);
        rebuild();
    }

private:
    static bool is_unsigned(const std::string &s)
    {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    }

    static bool is_number(const std::string &s)
    {
        char *end = nullptr;
        std::strtod(s.c_str(), &end);
        return !s.empty() && end == s.c_str() + s.size();
    }

    void rebuild()
    {
        index_.clear();
        for (std::size_t i = 0; i < words_.size(); ++i) {
            index_.emplace(words_[i], i); // first occurrence wins
        }
    }

    std::vector<std::string> words_;
    Matrix vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Precomputed contextual vectors: one n x d matrix per (document, sentence).
class ContextualVectors
{
public:
    ContextualVectors() = default;
    explicit ContextualVectors(std::size_t dimension) : dimension_(dimension) {}

    [[nodiscard]] std::size_t dimension() const { return dimension_; }

    void set(const std::string &doc, std::size_t sentence, Matrix vectors)
    {
        check(static_cast<std::size_t>(vectors.cols()) == dimension_, "contextual vector dimension mismatch");
        auto &sents = docs_[doc];
        if (sents.size() <= sentence) {
            sents.resize(sentence + 1);
        }
        sents[sentence] = std::move(vectors);
    }

    [[nodiscard]] const Matrix &get(const std::string &doc, std::size_t sentence, std::size_t tokens) const
    {
        auto it = docs_.find(doc);
        if (it == docs_.end() || sentence >= it->second.size()) {
            throw Error("no contextual vectors for document '" + doc + "' sentence " + std::to_string(sentence));
        }
        const auto &m = it->second[sentence];
        if (static_cast<std::size_t>(m.rows()) != tokens) {
            throw Error("contextual vectors for document '" + doc + "' sentence " + std::to_string(sentence) + " cover "
                        + std::to_string(m.rows()) + " of " + std::to_string(tokens) + " tokens");
        }
        return m;
    }

    // Fails unless every token of every sentence has a vector.
    void require_coverage(const std::vector<Document> &docs) const
    {
        for (const auto &d : docs) {
            for (std::size_t s = 0; s < d.sentences.size(); ++s) {
                (void)get(d.id, s, d.sentences[s].tokens.size());
            }
        }
    }

    void save_file(const std::string &path) const { save_binary(path, "contextual", 1, *this); }
    static ContextualVectors load_file(const std::string &path)
    {
        return load_binary<ContextualVectors>(path, "contextual", 1);
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(dimension_, docs_);
    }

private:
    std::size_t dimension_ = 0;
    std::map<std::string, std::vector<Matrix>> docs_;
};

// ---------------------------------------------------------------------------
// Recurrent cell

// Single-direction LSTM. Gate blocks in the stacked weights are ordered
// input, forget, candidate, output.
struct LstmCell {
    Param W; // 4H x d
    Param U; // 4H x H
    Param b; // 4H x 1

    struct Cache {
        Matrix x;
        Matrix gates; // post-activation, n x 4H
        Matrix c;
        Matrix h;
    };

    [[nodiscard]] Eigen::Index hidden() const { return U.value.cols(); }
    [[nodiscard]] Eigen::Index input_dim() const { return W.value.cols(); }

    void init(std::size_t input, std::size_t hidden_units, Rng &rng, double scale = 0.1)
    {
        const auto d = static_cast<Eigen::Index>(input);
        const auto h = static_cast<Eigen::Index>(hidden_units);
        W.resize(4 * h, d);
        U.resize(4 * h, h);
        b.resize(4 * h, 1);
        W.init_uniform(rng, scale);
        U.init_uniform(rng, scale);
        b.value.block(h, 0, h, 1).setOnes();
    }

    Matrix forward(const Matrix &x, Cache *cache) const
    {
        const auto n = x.rows();
        const auto H = hidden();
        check(x.cols() == input_dim(), "LSTM input width mismatch");
        Matrix z = x * W.value.transpose();
        z.rowwise() += b.value.col(0).transpose();
        Matrix gates(n, 4 * H), c(n, H), h(n, H);
        RowVector hp = RowVector::Zero(H), cp = RowVector::Zero(H);
        for (Eigen::Index t = 0; t < n; ++t) {
            RowVector zt = z.row(t) + hp * U.value.transpose();
            for (Eigen::Index j = 0; j < H; ++j) {
                const double i = sigmoid(zt(j));
                const double f = sigmoid(zt(H + j));
                const double g = std::tanh(zt(2 * H + j));
                const double o = sigmoid(zt(3 * H + j));
                gates(t, j) = i;
                gates(t, H + j) = f;
                gates(t, 2 * H + j) = g;
                gates(t, 3 * H + j) = o;
                c(t, j) = f * cp(j) + i * g;
                h(t, j) = o * std::tanh(c(t, j));
            }
            hp = h.row(t);
            cp = c.row(t);
        }
        if (cache) {
            cache->x = x;
            cache->gates = std::move(gates);
            cache->c = std::move(c);
            cache->h = h;
        }
        return h;
    }

    // Accumulates parameter gradients; returns the gradient w.r.t. the input.
    Matrix backward(const Cache &cc, const Matrix &dh_out)
    {
        const auto n = cc.x.rows();
        const auto H = hidden();
        Matrix dz(n, 4 * H);
        RowVector dh_next = RowVector::Zero(H), dc_next = RowVector::Zero(H);
        for (Eigen::Index t = n - 1; t >= 0; --t) {
            RowVector dh = dh_out.row(t) + dh_next;
            for (Eigen::Index j = 0; j < H; ++j) {
                const double i = cc.gates(t, j);
                const double f = cc.gates(t, H + j);
                const double g = cc.gates(t, 2 * H + j);
                const double o = cc.gates(t, 3 * H + j);
                const double cprev = t > 0 ? cc.c(t - 1, j) : 0.0;
                const double tc = std::tanh(cc.c(t, j));
                const double d_o = dh(j) * tc;
                const double dc = dh(j) * o * (1.0 - tc * tc) + dc_next(j);
                dc_next(j) = dc * f;
                dz(t, j) = dc * g * i * (1.0 - i);
                dz(t, H + j) = dc * cprev * f * (1.0 - f);
                dz(t, 2 * H + j) = dc * i * (1.0 - g * g);
                dz(t, 3 * H + j) = d_o * o * (1.0 - o);
            }
            if (t > 0) {
                U.grad.noalias() += dz.row(t).transpose() * cc.h.row(t - 1);
            }
            dh_next = dz.row(t) * U.value;
        }
        W.grad.noalias() += dz.transpose() * cc.x;
        b.grad += dz.colwise().sum().transpose();
        return dz * W.value;
    }

    void collect(const std::string &prefix, std::vector<ParamView> &out)
    {
        out.push_back(view_of(prefix + ".W", W));
        out.push_back(view_of(prefix + ".U", U));
        out.push_back(view_of(prefix + ".b", b));
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(W, U, b);
    }
};

struct BiLstmLayer {
    LstmCell fwd;
    LstmCell bwd;

    struct Cache {
        LstmCell::Cache f;
        LstmCell::Cache b;
    };

    [[nodiscard]] Eigen::Index output_dim() const { return fwd.hidden() + bwd.hidden(); }

    Matrix forward(const Matrix &x, Cache *cache) const
    {
        Matrix hf = fwd.forward(x, cache ? &cache->f : nullptr);
        Matrix reversed = x.colwise().reverse();
        Matrix hb = bwd.forward(reversed, cache ? &cache->b : nullptr);
        Matrix out(x.rows(), output_dim());
        out << hf, hb.colwise().reverse();
        return out;
    }

    Matrix backward(const Cache &cc, const Matrix &dout)
    {
        const auto H = fwd.hidden();
        Matrix dx = fwd.backward(cc.f, dout.leftCols(H));
        Matrix db_rev = dout.rightCols(bwd.hidden()).colwise().reverse();
        Matrix dxb = bwd.backward(cc.b, db_rev);
        dx += dxb.colwise().reverse();
        return dx;
    }

    void collect(const std::string &prefix, std::vector<ParamView> &out)
    {
        fwd.collect(prefix + ".fwd", out);
        bwd.collect(prefix + ".bwd", out);
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(fwd, bwd);
    }
};

// Stacked bidirectional layers. Each layer's input is multiplied by one
// inverted-dropout mask drawn per sequence and shared by all positions.
struct RecurrentStack {
    std::vector<BiLstmLayer> layers;
    double dropout = 0.0;

    struct Cache {
        std::vector<RowVector> masks;
        std::vector<BiLstmLayer::Cache> layers;
    };

    void init(std::size_t input, std::size_t num_layers, std::size_t hidden, double p, Rng &rng)
    {
        check(num_layers > 0 && hidden > 0, "recurrent stack needs positive layer and unit counts");
        check(p >= 0.0 && p < 1.0, "dropout must lie in [0, 1)");
        dropout = p;
        layers.assign(num_layers, {});
        std::size_t d = input;
        for (auto &l : layers) {
            l.fwd.init(d, hidden, rng);
            l.bwd.init(d, hidden, rng);
            d = 2 * hidden;
        }
    }

    [[nodiscard]] Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().output_dim(); }

    // `rng` non-null means training mode.
    Matrix forward(const Matrix &x0, Rng *rng, Cache *cache) const
    {
        if (x0.rows() == 0) {
            throw Error("recurrent stack needs a non-empty sequence");
        }
        if (cache) {
            cache->masks.assign(layers.size(), {});
            cache->layers.assign(layers.size(), {});
        }
        Matrix x = x0;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            RowVector mask = RowVector::Ones(x.cols());
            if (rng && dropout > 0.0) {
                const double keep = 1.0 / (1.0 - dropout);
                for (Eigen::Index j = 0; j < mask.size(); ++j) {
                    mask(j) = rng->uniform() < dropout ? 0.0 : keep;
                }
                x = x.array().rowwise() * mask.array();
            }
            x = layers[l].forward(x, cache ? &cache->layers[l] : nullptr);
            if (cache) {
                cache->masks[l] = std::move(mask);
            }
        }
        return x;
    }

    Matrix backward(const Cache &cc, Matrix d)
    {
        for (std::size_t l = layers.size(); l-- > 0;) {
            d = layers[l].backward(cc.layers[l], d);
            d = d.array().rowwise() * cc.masks[l].array();
        }
        return d;
    }

    void collect(std::vector<ParamView> &out)
    {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            layers[l].collect("rnn" + std::to_string(l), out);
        }
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(layers, dropout);
    }
};

// ---------------------------------------------------------------------------
// Character encoders

enum class CharEncoderKind : std::uint8_t { none, conv, birecurrent };

inline std::string_view to_string(CharEncoderKind k)
{
    switch (k) {
    case CharEncoderKind::none:
        return "none";
    case CharEncoderKind::conv:
        return "conv";
    case CharEncoderKind::birecurrent:
        return "birecurrent";
    }
    return "none";
}

inline CharEncoderKind parse_char_encoder_kind(std::string_view s)
{
    for (auto k : {CharEncoderKind::none, CharEncoderKind::conv, CharEncoderKind::birecurrent}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    throw Error("unknown character encoder '" + std::string(s) + "'");
}

struct CharEncoderConfig {
    CharEncoderKind kind = CharEncoderKind::conv;
    std::size_t embedding_dim = 50;
    std::size_t filters = 30;
    std::size_t width = 3;
    std::size_t hidden = 100; // per direction

    [[nodiscard]] std::size_t output_dim() const
    {
        switch (kind) {
        case CharEncoderKind::none:
            return 0;
        case CharEncoderKind::conv:
            return filters;
        case CharEncoderKind::birecurrent:
            return 2 * hidden;
        }
        return 0;
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(kind, embedding_dim, filters, width, hidden);
    }
};

// Code point ids; index 0 is reserved for unseen characters.
class CharVocabulary
{
public:
    CharVocabulary() = default;

    static CharVocabulary build(const std::vector<std::vector<Token>> &sentences)
    {
        CharVocabulary v;
        std::vector<char32_t> seen;
        for (const auto &s : sentences) {
            for (const auto &t : s) {
                for (char32_t c : unicode::decode(t.surface)) {
                    seen.push_back(c);
                }
            }
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (char32_t c : seen) {
            v.chars_.push_back(static_cast<std::uint32_t>(c));
        }
        v.rebuild();
        return v;
    }

    [[nodiscard]] std::size_t size() const { return chars_.size() + 1; }

    [[nodiscard]] std::vector<std::size_t> encode(std::string_view surface) const
    {
        std::vector<std::size_t> out;
        for (char32_t c : unicode::decode(surface)) {
            auto it = index_.find(static_cast<std::uint32_t>(c));
            out.push_back(it == index_.end() ? 0 : it->second);
        }
        return out;
    }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(chars_);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(chars_);
        rebuild();
    }

private:
    void rebuild()
    {
        index_.clear();
        for (std::size_t i = 0; i < chars_.size(); ++i) {
            index_.emplace(chars_[i], i + 1);
        }
    }

    std::vector<std::uint32_t> chars_;
    std::unordered_map<std::uint32_t, std::size_t> index_;
};

struct CharEncoder {
    CharEncoderConfig cfg;
    Param embedding; // chars x embedding_dim
    Param kernel;    // filters x (width * embedding_dim)
    Param bias;      // filters x 1
    BiLstmLayer rnn;

    struct Cache {
        std::vector<std::size_t> chars;
        Matrix embedded;                  // m x e
        Matrix windows;                   // m x (width * e), conv only
        std::vector<Eigen::Index> argmax; // per filter, conv only
        BiLstmLayer::Cache rnn;
    };

    void init(const CharEncoderConfig &c, std::size_t vocab, Rng &rng)
    {
        cfg = c;
        if (cfg.kind == CharEncoderKind::none) {
            return;
        }
        check(cfg.embedding_dim > 0, "character embedding dimension must be positive");
        embedding.resize(static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(cfg.embedding_dim));
        embedding.init_uniform(rng, 0.1);
        if (cfg.kind == CharEncoderKind::conv) {
            check(cfg.width % 2 == 1 && cfg.filters > 0, "convolution needs an odd width and at least one filter");
            kernel.resize(static_cast<Eigen::Index>(cfg.filters), static_cast<Eigen::Index>(cfg.width * cfg.embedding_dim));
            bias.resize(static_cast<Eigen::Index>(cfg.filters), 1);
            kernel.init_uniform(rng, 0.1);
        } else {
            rnn.fwd.init(cfg.embedding_dim, cfg.hidden, rng);
            rnn.bwd.init(cfg.embedding_dim, cfg.hidden, rng);
        }
    }

    [[nodiscard]] std::size_t output_dim() const { return cfg.output_dim(); }

    [[nodiscard]] Vector encode(const std::vector<std::size_t> &chars, Cache *cache) const
    {
        if (cfg.kind == CharEncoderKind::none) {
            return Vector(0);
        }
        check(!chars.empty(), "character encoder needs a non-empty surface");
        const auto m = static_cast<Eigen::Index>(chars.size());
        const auto e = static_cast<Eigen::Index>(cfg.embedding_dim);
        Matrix emb(m, e);
        for (Eigen::Index i = 0; i < m; ++i) {
            auto id = chars[static_cast<std::size_t>(i)];
            check(static_cast<Eigen::Index>(id) < embedding.value.rows(), "character id out of range");
            emb.row(i) = embedding.value.row(static_cast<Eigen::Index>(id));
        }
        Vector out;
        if (cfg.kind == CharEncoderKind::conv) {
            const auto w = static_cast<Eigen::Index>(cfg.width);
            const auto half = w / 2;
            Matrix windows = Matrix::Zero(m, w * e);
            for (Eigen::Index t = 0; t < m; ++t) {
                for (Eigen::Index k = 0; k < w; ++k) {
                    const auto src = t + k - half;
                    if (src >= 0 && src < m) {
                        windows.block(t, k * e, 1, e) = emb.row(src);
                    }
                }
            }
            Matrix conv = windows * kernel.value.transpose();
            conv.rowwise() += bias.value.col(0).transpose();
            out.resize(conv.cols());
            std::vector<Eigen::Index> arg(static_cast<std::size_t>(conv.cols()), 0);
            for (Eigen::Index f = 0; f < conv.cols(); ++f) {
                Eigen::Index best = 0;
                for (Eigen::Index t = 1; t < m; ++t) {
                    if (conv(t, f) > conv(best, f)) {
                        best = t;
                    }
                }
                arg[static_cast<std::size_t>(f)] = best;
                out(f) = conv(best, f);
            }
            if (cache) {
                cache->windows = std::move(windows);
                cache->argmax = std::move(arg);
            }
        } else {
            BiLstmLayer::Cache rc;
            Matrix h = rnn.forward(emb, cache ? &rc : nullptr);
            const auto H = rnn.fwd.hidden();
            out.resize(2 * H);
            out.head(H) = h.row(m - 1).head(H).transpose();
            out.tail(H) = h.row(0).tail(H).transpose();
            if (cache) {
                cache->rnn = std::move(rc);
            }
        }
        if (cache) {
            cache->chars = chars;
            cache->embedded = std::move(emb);
        }
        return out;
    }

    void backward(const Cache &cc, const Vector &dout)
    {
        if (cfg.kind == CharEncoderKind::none) {
            return;
        }
        const auto m = cc.embedded.rows();
        const auto e = cc.embedded.cols();
        Matrix demb = Matrix::Zero(m, e);
        if (cfg.kind == CharEncoderKind::conv) {
            const auto w = static_cast<Eigen::Index>(cfg.width);
            const auto half = w / 2;
            for (Eigen::Index f = 0; f < dout.size(); ++f) {
                const auto t = cc.argmax[static_cast<std::size_t>(f)];
                const double g = dout(f);
                kernel.grad.row(f) += g * cc.windows.row(t);
                bias.grad(f, 0) += g;
                for (Eigen::Index k = 0; k < w; ++k) {
                    const auto src = t + k - half;
                    if (src >= 0 && src < m) {
                        demb.row(src) += g * kernel.value.block(f, k * e, 1, e);
                    }
                }
            }
        } else {
            const auto H = rnn.fwd.hidden();
            Matrix dh = Matrix::Zero(m, 2 * H);
            dh.row(m - 1).head(H) = dout.head(H).transpose();
            dh.row(0).tail(H) = dout.tail(H).transpose();
            demb = rnn.backward(cc.rnn, dh);
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            embedding.grad.row(static_cast<Eigen::Index>(cc.chars[static_cast<std::size_t>(i)])) += demb.row(i);
        }
    }

    void collect(std::vector<ParamView> &out)
    {
        if (cfg.kind == CharEncoderKind::none) {
            return;
        }
        out.push_back(view_of("char.embedding", embedding));
        if (cfg.kind == CharEncoderKind::conv) {
            out.push_back(view_of("char.kernel", kernel));
            out.push_back(view_of("char.bias", bias));
        } else {
            rnn.collect("char.rnn", out);
        }
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(cfg, embedding, kernel, bias, rnn);
    }
};

// ---------------------------------------------------------------------------
// Word representation

// Block widths of the concatenated word vector, in concatenation order.
struct WordVectorLayout {
    std::size_t static_dim = 0;
    std::size_t contextual_dim = 0;
    std::size_t char_dim = 0;
    std::vector<std::size_t> onehot_dims;
    std::size_t parent_dim = 0;

    [[nodiscard]] std::size_t total() const
    {
        return static_dim + contextual_dim + char_dim
               + std::accumulate(onehot_dims.begin(), onehot_dims.end(), std::size_t{0}) + parent_dim;
    }

    [[nodiscard]] std::size_t static_offset() const { return 0; }
    [[nodiscard]] std::size_t char_offset() const { return static_dim + contextual_dim; }
};

inline Vector build_word_vector(const WordVectorLayout &layout, const Vector &static_part, const Vector &contextual,
                                const Vector &chars, const std::vector<OneHotVector> &onehots,
                                const std::optional<OneHotVector> &parent)
{
    auto mismatch = [](const std::string &what, std::size_t want, std::size_t got) {
        return Error(what + " block has dimension " + std::to_string(got) + ", model expects " + std::to_string(want));
    };
    if (static_cast<std::size_t>(static_part.size()) != layout.static_dim) {
        throw mismatch("static embedding", layout.static_dim, static_cast<std::size_t>(static_part.size()));
    }
    if (static_cast<std::size_t>(contextual.size()) != layout.contextual_dim) {
        throw mismatch("contextual embedding", layout.contextual_dim, static_cast<std::size_t>(contextual.size()));
    }
    if (static_cast<std::size_t>(chars.size()) != layout.char_dim) {
        throw mismatch("character", layout.char_dim, static_cast<std::size_t>(chars.size()));
    }
    if (onehots.size() != layout.onehot_dims.size()) {
        throw Error("expected " + std::to_string(layout.onehot_dims.size()) + " one-hot blocks, got "
                    + std::to_string(onehots.size()));
    }
    for (std::size_t i = 0; i < onehots.size(); ++i) {
        if (onehots[i].dimension != layout.onehot_dims[i]) {
            throw mismatch("one-hot '" + onehots[i].source + "'", layout.onehot_dims[i], onehots[i].dimension);
        }
    }
    const std::size_t parent_got = parent ? parent->dimension : 0;
    if (parent_got != layout.parent_dim) {
        throw mismatch("parent label", layout.parent_dim, parent_got);
    }
    Vector out = Vector::Zero(static_cast<Eigen::Index>(layout.total()));
    Eigen::Index at = 0;
    out.segment(at, static_part.size()) = static_part;
    at += static_part.size();
    out.segment(at, contextual.size()) = contextual;
    at += contextual.size();
    out.segment(at, chars.size()) = chars;
    at += chars.size();
    for (const auto &oh : onehots) {
        out(at + static_cast<Eigen::Index>(oh.active)) = 1.0;
        at += static_cast<Eigen::Index>(oh.dimension);
    }
    if (parent) {
        out(at + static_cast<Eigen::Index>(parent->active)) = 1.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tagger

enum class TaggerRole : std::uint8_t { main, sub };

struct TaggerConfig {
    std::size_t layers = 3;
    std::size_t hidden = 100; // per direction
    double dropout = 0.25;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    bool shuffle = true;
    bool constrain_transitions = true;
    double init_scale = 0.1;
    NadamConfig optimizer;
    TagScheme scheme = TagScheme::BIO;
    CharEncoderConfig chars;

    void validate() const
    {
        check(layers > 0 && hidden > 0 && batch_size > 0, "tagger layers, units and batch size must be positive");
        check(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
        check(optimizer.learning_rate > 0.0, "learning rate must be positive");
    }

    template <class Archive>
    void serialize(Archive &ar)
    {
        ar(layers, hidden, dropout, epochs, batch_size, shuffle, constrain_transitions, init_scale,
           optimizer.learning_rate, optimizer.beta1, optimizer.beta2, optimizer.epsilon, optimizer.schedule_decay,
           scheme, chars);
    }
};

// One tagger input sentence with its extractor streams.
struct TaggedSentence {
    std::vector<Token> tokens;
    std::vector<LabelStream> features; // one per model feature vocabulary
    std::optional<Matrix> contextual;  // n x contextual dim
    TagSequence parent;                // main-layer tags, sub model only
    TagSequence gold;                  // empty at inference time
};

// Everything fixed before training: tag set, vocabularies, resources.
struct TaggerSetup {
    TaggerRole role = TaggerRole::main;
    std::vector<std::string> tags;
    std::shared_ptr<const EmbeddingTable> embeddings; // may be null
    std::size_t contextual_dim = 0;
    CharVocabulary chars;
    std::vector<Vocabulary> features;
    std::vector<std::string> parent_tags; // sub model only
};

class TaggerModel
{
public:
    TaggerModel() = default;

    TaggerModel(TaggerSetup setup, const TaggerConfig &cfg, std::uint64_t seed) : cfg_(cfg)
    {
        cfg_.validate();
        check(!setup.tags.empty(), "tagger needs a tag vocabulary");
        check(setup.role == TaggerRole::main || !setup.parent_tags.empty(), "sub tagger needs the parent tag set");
        role_ = setup.role;
        embeddings_ = setup.embeddings;
        contextual_dim_ = setup.contextual_dim;
        chars_ = std::move(setup.chars);
        features_ = std::move(setup.features);
        parent_tags_ = std::move(setup.parent_tags);
        rebuild_parent_index();

        Rng rng(seed);
        const std::size_t sdim = embeddings_ ? embeddings_->dimension() : 0;
        unk_.resize(static_cast<Eigen::Index>(sdim), 1);
        unk_.init_uniform(rng, cfg_.init_scale);
        char_encoder_.init(cfg_.chars, chars_.size(), rng);
        stack_.init(layout().total(), cfg_.layers, cfg_.hidden, cfg_.dropout, rng);
        const auto k = static_cast<Eigen::Index>(setup.tags.size());
        proj_w_.resize(k, stack_.output_dim());
        proj_w_.init_uniform(rng, cfg_.init_scale);
        proj_b_.resize(k, 1);
        crf_ = CrfModel(std::move(setup.tags), cfg_.constrain_transitions);
        zero_crf_grads();
    }

    [[nodiscard]] const TaggerConfig &config() const { return cfg_; }
    [[nodiscard]] TaggerRole role() const { return role_; }
    [[nodiscard]] const std::vector<std::string> &tags() const { return crf_.tags(); }
    [[nodiscard]] const std::vector<std::string> &parent_tags() const { return parent_tags_; }
    [[nodiscard]] const std::vector<Vocabulary> &feature_vocabularies() const { return features_; }
    [[nodiscard]] const CrfModel &crf() const { return crf_; }
    [[nodiscard]] const RecurrentStack &stack() const { return stack_; }
    [[nodiscard]] std::size_t contextual_dim() const { return contextual_dim_; }

    [[nodiscard]] WordVectorLayout layout() const
    {
        WordVectorLayout l;
        l.static_dim = embeddings_ ? embeddings_->dimension() : 0;
        l.contextual_dim = contextual_dim_;
        l.char_dim = cfg_.chars.output_dim();
        for (const auto &v : features_) {
            l.onehot_dims.push_back(v.dimension());
        }
        l.parent_dim = parent_tags_.size();
        return l;
    }

    struct Cache {
        Matrix inputs;
        std::vector<bool> unknown; // static lookup fell back to UNK
        std::vector<CharEncoder::Cache> chars;
        RecurrentStack::Cache stack;
        Matrix hidden;
    };

    [[nodiscard]] Matrix word_vectors(const TaggedSentence &s, Cache *cache = nullptr) const
    {
        const auto n = s.tokens.size();
        const auto lay = layout();
        check(s.features.size() == features_.size(),
              "sentence carries " + std::to_string(s.features.size()) + " feature streams, model expects "
                  + std::to_string(features_.size()));
        if (contextual_dim_ > 0) {
            check(s.contextual && static_cast<std::size_t>(s.contextual->rows()) == n
                      && static_cast<std::size_t>(s.contextual->cols()) == contextual_dim_,
                  "contextual vectors missing or mis-sized for sentence");
        }
        if (role_ == TaggerRole::sub) {
            check(s.parent.size() == n, "sub tagger needs one parent tag per token");
        }
        Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lay.total()));
        if (cache) {
            cache->unknown.assign(n, false);
            cache->chars.assign(n, {});
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto &tok = s.tokens[i];
            Vector st(static_cast<Eigen::Index>(lay.static_dim));
            if (embeddings_) {
                if (auto r = embeddings_->find(tok.key())) {
                    st = embeddings_->row(*r).transpose();
                } else {
                    st = unk_.value.col(0);
                    if (cache) {
                        cache->unknown[i] = true;
                    }
                }
            }
            Vector ctx = contextual_dim_ > 0 ? Vector(s.contextual->row(static_cast<Eigen::Index>(i)).transpose())
                                             : Vector(0);
            Vector ch = char_encoder_.encode(chars_.encode(tok.surface), cache ? &cache->chars[i] : nullptr);
            std::vector<OneHotVector> oh;
            for (std::size_t f = 0; f < features_.size(); ++f) {
                check(s.features[f].size() == n, "feature stream length does not match sentence");
                oh.push_back(encode_onehot(s.features[f][i], features_[f]));
            }
            std::optional<OneHotVector> parent;
            if (role_ == TaggerRole::sub) {
                auto it = parent_index_.find(s.parent[i]);
                if (it == parent_index_.end()) {
                    throw Error("parent tag '" + s.parent[i] + "' is not in the main tag vocabulary");
                }
                parent = OneHotVector{"parent", parent_tags_.size(), it->second};
            }
            X.row(static_cast<Eigen::Index>(i)) = build_word_vector(lay, st, ctx, ch, oh, parent).transpose();
        }
        return X;
    }

    // `dropout_rng` non-null selects training mode.
    [[nodiscard]] EmissionMatrix emissions(const TaggedSentence &s, Rng *dropout_rng = nullptr,
                                           Cache *cache = nullptr) const
    {
        if (s.tokens.empty()) {
            throw Error("cannot tag an empty sentence");
        }
        Matrix X = word_vectors(s, cache);
        Matrix H = stack_.forward(X, dropout_rng, cache ? &cache->stack : nullptr);
        Matrix em = H * proj_w_.value.transpose();
        em.rowwise() += proj_b_.value.col(0).transpose();
        if (cache) {
            cache->inputs = std::move(X);
            cache->hidden = std::move(H);
        }
        return em;
    }

    [[nodiscard]] double loss(const TaggedSentence &s) const
    {
        auto em = emissions(s);
        auto gold = crf_.tag_indices(s.gold);
        return log_partition(em, crf_) - path_score(em, crf_, gold);
    }

    // Adds scale * d(loss)/d(params) into the gradient buffers and returns the
    // unscaled loss.
    double accumulate_gradient(const TaggedSentence &s, Rng *dropout_rng, double scale = 1.0)
    {
        Cache cache;
        auto em = emissions(s, dropout_rng, &cache);
        auto g = nll_gradient(crf_, em, crf_.tag_indices(s.gold));
        crf_dT_ += scale * g.d_transitions;
        crf_dstart_ += scale * g.d_start;
        crf_dstop_ += scale * g.d_stop;
        Matrix dem = scale * g.d_emissions;
        proj_w_.grad.noalias() += dem.transpose() * cache.hidden;
        proj_b_.grad += dem.colwise().sum().transpose();
        Matrix dH = dem * proj_w_.value;
        Matrix dX = stack_.backward(cache.stack, dH);
        const auto lay = layout();
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            if (cache.unknown[i]) {
                unk_.grad.col(0) += dX.row(row).segment(0, static_cast<Eigen::Index>(lay.static_dim)).transpose();
            }
            if (lay.char_dim > 0) {
                Vector dc = dX.row(row)
                                .segment(static_cast<Eigen::Index>(lay.char_offset()), static_cast<Eigen::Index>(lay.char_dim))
                                .transpose();
                char_encoder_.backward(cache.chars[i], dc);
            }
        }
        return g.loss;
    }

    // Trainable blocks; the static embedding table is frozen and absent.
    std::vector<ParamView> parameters()
    {
        std::vector<ParamView> out;
        if (unk_.value.size() > 0) {
            out.push_back(view_of("embedding.unk", unk_));
        }
        char_encoder_.collect(out);
        stack_.collect(out);
        out.push_back(view_of("proj.W", proj_w_));
        out.push_back(view_of("proj.b", proj_b_));
        out.push_back(view_of("crf.transitions", crf_.transitions, crf_dT_));
        out.push_back(view_of("crf.start", crf_.start, crf_dstart_));
        out.push_back(view_of("crf.stop", crf_.stop, crf_dstop_));
        return out;
    }

    void zero_grad()
    {
        for (auto &p : parameters()) {
            std::fill(p.grad.begin(), p.grad.end(), 0.0);
        }
    }

    // `allowed(i, y)` false forbids tag y at token i.
    [[nodiscard]] TagSequence predict(const TaggedSentence &s, const std::vector<std::vector<bool>> *allowed = nullptr) const
    {
        auto em = emissions(s);
        if (allowed) {
            check(allowed->size() == s.tokens.size(), "tag mask length does not match sentence");
            for (std::size_t i = 0; i < allowed->size(); ++i) {
                for (std::size_t y = 0; y < crf_.num_tags(); ++y) {
                    if (!(*allowed)[i][y]) {
                        em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y)) += kForbidden;
                    }
                }
            }
        }
        return crf_.tag_names(viterbi(em, crf_).path);
    }

    void save_file(const std::string &path) const { save_binary(path, "tagger", kCheckpointVersion, *this); }
    static TaggerModel load_file(const std::string &path)
    {
        return load_binary<TaggerModel>(path, "tagger", kCheckpointVersion);
    }

    template <class Archive>
    void save(Archive &ar) const
    {
        const bool has_embeddings = static_cast<bool>(embeddings_);
        ar(cfg_, role_, has_embeddings);
        if (has_embeddings) {
            ar(*embeddings_);
        }
        ar(contextual_dim_, chars_, features_, parent_tags_, unk_, char_encoder_, stack_, proj_w_, proj_b_, crf_);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        bool has_embeddings = false;
        ar(cfg_, role_, has_embeddings);
        embeddings_.reset();
        if (has_embeddings) {
            auto table = std::make_shared<EmbeddingTable>();
            ar(*table);
            embeddings_ = std::move(table);
        }
        ar(contextual_dim_, chars_, features_, parent_tags_, unk_, char_encoder_, stack_, proj_w_, proj_b_, crf_);
        rebuild_parent_index();
        zero_crf_grads();
    }

    static constexpr std::uint32_t kCheckpointVersion = 1;

private:
    void rebuild_parent_index()
    {
        parent_index_.clear();
        for (std::size_t i = 0; i < parent_tags_.size(); ++i) {
            parent_index_.emplace(parent_tags_[i], i);
        }
    }

    void zero_crf_grads()
    {
        const auto k = static_cast<Eigen::Index>(crf_.num_tags());
        crf_dT_ = Matrix::Zero(k, k);
        crf_dstart_ = Vector::Zero(k);
        crf_dstop_ = Vector::Zero(k);
    }

    TaggerConfig cfg_;
    TaggerRole role_ = TaggerRole::main;
    std::shared_ptr<const EmbeddingTable> embeddings_;
    std::size_t contextual_dim_ = 0;
    CharVocabulary chars_;
    std::vector<Vocabulary> features_;
    std::vector<std::string> parent_tags_;
    std::unordered_map<std::string, std::size_t> parent_index_;
    Param unk_;
    CharEncoder char_encoder_;
    RecurrentStack stack_;
    Param proj_w_;
    Param proj_b_;
    CrfModel crf_;
    Matrix crf_dT_;
    Vector crf_dstart_;
    Vector crf_dstop_;
};

struct TaggerTrainResult {
    TaggerModel model;
    std::vector<double> epoch_losses; // mean training NLL per epoch
    std::vector<double> step_losses;  // mean NLL per mini-batch
};

namespace detail
{

// Independent, reproducible sub-streams of one run seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

inline TaggerTrainResult train_tagger(const std::vector<TaggedSentence> &data, TaggerSetup setup,
                                      const TaggerConfig &cfg, std::uint64_t seed)
{
    if (data.empty()) {
        throw Error("cannot train a tagger on an empty corpus");
    }
    TaggerTrainResult out{TaggerModel(std::move(setup), cfg, detail::derive_seed(seed, 0)), {}, {}};
    auto &model = out.model;
    for (const auto &s : data) {
        check(s.gold.size() == s.tokens.size(), "training sentence needs one gold tag per token");
    }
    Rng order_rng(detail::derive_seed(seed, 1));
    Rng dropout_rng(detail::derive_seed(seed, 2));
    NadamState state;
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            order_rng.shuffle(order);
        }
        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
            const double scale = 1.0 / static_cast<double>(b1 - b0);
            model.zero_grad();
            double batch_loss = 0.0;
            for (std::size_t i = b0; i < b1; ++i) {
                batch_loss += model.accumulate_gradient(data[order[i]], &dropout_rng, scale);
            }
            epoch_loss += batch_loss;
            out.step_losses.push_back(batch_loss * scale);
            auto params = model.parameters();
            std::vector<std::span<double>> values;
            std::vector<std::span<const double>> grads;
            for (auto &p : params) {
                values.push_back(p.value);
                grads.emplace_back(p.grad.data(), p.grad.size());
            }
            nadam_step(values, grads, state, cfg.optimizer);
        }
        out.epoch_losses.push_back(epoch_loss / static_cast<double>(data.size()));
    }
    return out;
}

// Tag vocabulary over the labels present in `data`, sorted for stability.
inline std::vector<std::string> collect_tag_vocabulary(const std::vector<TaggedSentence> &data,
                                                       TagScheme scheme = TagScheme::BIO)
{
    std::vector<std::string> labels;
    for (const auto &s : data) {
        for (const auto &t : s.gold) {
            auto p = parse_tag(t);
            if (p.prefix != 'O') {
                labels.push_back(p.label);
            }
        }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return tag_vocabulary(labels, scheme);
}

// ---------------------------------------------------------------------------
// Main -> sub cascade

struct CascadeResult {
    TagSequence main;
    TagSequence sub;
};

// Sub tags allowed under each main tag: only subcategories of a persName or
// placeName span at that token, plus O.
inline std::vector<std::vector<bool>> sub_tag_mask(const TagSequence &main_tags, const std::vector<std::string> &sub_tags)
{
    std::vector<std::optional<EntityCategory>> sub_cats;
    for (const auto &t : sub_tags) {
        auto p = parse_tag(t);
        sub_cats.push_back(p.prefix == 'O' ? std::nullopt : std::optional<EntityCategory>(parse_category(p.label)));
    }
    std::vector<std::vector<bool>> allowed(main_tags.size(), std::vector<bool>(sub_tags.size(), false));
    for (std::size_t i = 0; i < main_tags.size(); ++i) {
        auto mp = parse_tag(main_tags[i]);
        std::optional<MainCategory> main;
        if (mp.prefix != 'O') {
            main = parse_category(mp.label).main;
        }
        for (std::size_t y = 0; y < sub_tags.size(); ++y) {
            if (!sub_cats[y]) {
                allowed[i][y] = true;
            } else if (main && sub_cats[y]->sub && sub_cats[y]->main == *main && sub_allowed(*main, *sub_cats[y]->sub)) {
                allowed[i][y] = true;
            }
        }
    }
    return allowed;
}

inline CascadeResult predict_cascade(const TaggerModel &main, const TaggerModel &sub, const TaggedSentence &input,
                                     bool mask = true)
{
    if (sub.role() != TaggerRole::sub || sub.parent_tags() != main.tags()) {
        throw Error("sub tagger was not trained on this main tagger's tag vocabulary");
    }
    CascadeResult out;
    if (input.tokens.empty()) {
        return out;
    }
    out.main = main.predict(input);
    TaggedSentence sub_input = input;
    sub_input.parent = out.main;
    if (mask) {
        auto allowed = sub_tag_mask(out.main, sub.tags());
        out.sub = sub.predict(sub_input, &allowed);
    } else {
        out.sub = sub.predict(sub_input);
    }
    return out;
}

} // namespace wikiner

#endif
