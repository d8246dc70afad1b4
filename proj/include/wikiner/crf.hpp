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

#ifndef WIKINER_CRF_HPP
#define WIKINER_CRF_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include <wikiner/common.hpp>
#include <wikiner/corpus.hpp>
#include <wikiner/optim.hpp>

namespace wikiner
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n x |tags| scores, one row per token.
using EmissionMatrix = Matrix;

inline constexpr double kForbidden = -1e9;

inline double log_sum_exp(const Eigen::Ref<const Vector> &v)
{
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) {
        return m;
    }
    return m + std::log((v.array() - m).exp().sum());
}

// Linear-chain CRF over a fixed tag set. transitions(i, j) scores tag i
// followed by tag j. In constrained mode the BIO-illegal moves carry a fixed
// kForbidden penalty on top of the learned weights.
class CrfModel
{
public:
    CrfModel() = default;

    explicit CrfModel(std::vector<std::string> tags, bool constrained = false, std::size_t num_features = 0)
        : tags_(std::move(tags)), constrained_(constrained)
    {
        const auto k = static_cast<Eigen::Index>(tags_.size());
        check(k > 0, "CRF needs at least one tag");
        transitions = Matrix::Zero(k, k);
        start = Vector::Zero(k);
        stop = Vector::Zero(k);
        feature_weights = Matrix::Zero(static_cast<Eigen::Index>(num_features), k);
        rebuild();
    }

    [[nodiscard]] std::size_t num_tags() const { return tags_.size(); }
    [[nodiscard]] const std::vector<std::string> &tags() const { return tags_; }
    [[nodiscard]] bool constrained() const { return constrained_; }

    [[nodiscard]] std::size_t tag_index(const std::string &tag) const
    {
        auto it = index_.find(tag);
        if (it == index_.end()) {
            throw Error("unknown tag '" + tag + "'");
        }
        return it->second;
    }

    [[nodiscard]] std::vector<std::size_t> tag_indices(const TagSequence &tags) const
    {
        std::vector<std::size_t> out;
        out.reserve(tags.size());
        for (const auto &t : tags) {
            out.push_back(tag_index(t));
        }
        return out;
    }

    [[nodiscard]] TagSequence tag_names(const std::vector<std::size_t> &path) const
    {
        TagSequence out;
        for (auto i : path) {
            out.push_back(tags_[i]);
        }
        return out;
    }

    [[nodiscard]] Matrix effective_transitions() const { return transitions + transition_mask_; }
    [[nodiscard]] Vector effective_start() const { return start + start_mask_; }

    // Standalone mode: emission rows are sums of feature weight rows.
    [[nodiscard]] EmissionMatrix emissions(const std::vector<std::vector<std::size_t>> &features) const
    {
        EmissionMatrix em = EmissionMatrix::Zero(static_cast<Eigen::Index>(features.size()),
                                                 static_cast<Eigen::Index>(num_tags()));
        for (std::size_t i = 0; i < features.size(); ++i) {
            for (auto f : features[i]) {
                check(static_cast<Eigen::Index>(f) < feature_weights.rows(), "feature id out of range");
                em.row(static_cast<Eigen::Index>(i)) += feature_weights.row(static_cast<Eigen::Index>(f));
            }
        }
        return em;
    }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(tags_, constrained_, transitions, start, stop, feature_weights);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(tags_, constrained_, transitions, start, stop, feature_weights);
        rebuild();
    }

    Matrix transitions;
    Vector start;
    Vector stop;
    Matrix feature_weights; // features x tags

private:
    void rebuild()
    {
        index_.clear();
        for (std::size_t i = 0; i < tags_.size(); ++i) {
            index_.emplace(tags_[i], i);
        }
        const auto k = static_cast<Eigen::Index>(tags_.size());
        transition_mask_ = Matrix::Zero(k, k);
        start_mask_ = Vector::Zero(k);
        if (!constrained_) {
            return;
        }
        std::vector<ParsedTag> parsed;
        for (const auto &t : tags_) {
            parsed.push_back(parse_tag(t));
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto &to = parsed[static_cast<std::size_t>(j)];
            if (to.prefix == 'I') {
                start_mask_(j) = kForbidden;
                for (Eigen::Index i = 0; i < k; ++i) {
                    const auto &from = parsed[static_cast<std::size_t>(i)];
                    if (from.prefix == 'O' || from.label != to.label) {
                        transition_mask_(i, j) = kForbidden;
                    }
                }
            }
        }
    }

    std::vector<std::string> tags_;
    bool constrained_ = false;
    std::unordered_map<std::string, std::size_t> index_;
    Matrix transition_mask_;
    Vector start_mask_;
};

inline double path_score(const EmissionMatrix &em, const CrfModel &model, const std::vector<std::size_t> &path)
{
    check(static_cast<Eigen::Index>(path.size()) == em.rows(), "path length does not match emissions");
    if (path.empty()) {
        return 0.0;
    }
    const Matrix trans = model.effective_transitions();
    const Vector start = model.effective_start();
    double s = start(static_cast<Eigen::Index>(path[0])) + model.stop(static_cast<Eigen::Index>(path.back()));
    for (std::size_t i = 0; i < path.size(); ++i) {
        s += em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(path[i]));
        if (i > 0) {
            s += trans(static_cast<Eigen::Index>(path[i - 1]), static_cast<Eigen::Index>(path[i]));
        }
    }
    return s;
}

namespace detail
{

inline void check_emissions(const EmissionMatrix &em, const CrfModel &model)
{
    if (em.rows() == 0) {
        throw Error("CRF inference needs at least one token");
    }
    check(em.cols() == static_cast<Eigen::Index>(model.num_tags()), "emission width does not match tag count");
}

// Log-space forward and backward tables.
struct Lattice {
    Matrix alpha;
    Matrix beta;
    double log_z = 0.0;
};

inline Lattice forward_backward(const EmissionMatrix &em, const CrfModel &model)
{
    check_emissions(em, model);
    const auto n = em.rows();
    const auto k = em.cols();
    const Matrix trans = model.effective_transitions();
    Lattice lat;
    lat.alpha.resize(n, k);
    lat.beta.resize(n, k);
    lat.alpha.row(0) = (model.effective_start() + em.row(0).transpose()).transpose();
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index y = 0; y < k; ++y) {
            lat.alpha(i, y) = em(i, y) + log_sum_exp(lat.alpha.row(i - 1).transpose() + trans.col(y));
        }
    }
    lat.beta.row(n - 1) = model.stop.transpose();
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        for (Eigen::Index y = 0; y < k; ++y) {
            Vector next = trans.row(y).transpose() + em.row(i + 1).transpose() + lat.beta.row(i + 1).transpose();
            lat.beta(i, y) = log_sum_exp(next);
        }
    }
    lat.log_z = log_sum_exp(lat.alpha.row(n - 1).transpose() + model.stop);
    return lat;
}

} // namespace detail

inline double log_partition(const EmissionMatrix &em, const CrfModel &model)
{
    detail::check_emissions(em, model);
    const auto n = em.rows();
    const auto k = em.cols();
    const Matrix trans = model.effective_transitions();
    Vector alpha = model.effective_start() + em.row(0).transpose();
    Vector next(k);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index y = 0; y < k; ++y) {
            next(y) = em(i, y) + log_sum_exp(alpha + trans.col(y));
        }
        alpha.swap(next);
    }
    return log_sum_exp(alpha + model.stop);
}

struct ViterbiResult {
    std::vector<std::size_t> path;
    double score = 0.0;
};

// Ties go to the lowest tag index at every step.
inline ViterbiResult viterbi(const EmissionMatrix &em, const CrfModel &model)
{
    detail::check_emissions(em, model);
    const auto n = em.rows();
    const auto k = em.cols();
    const Matrix trans = model.effective_transitions();
    Vector delta = model.effective_start() + em.row(0).transpose();
    std::vector<std::vector<std::size_t>> back(static_cast<std::size_t>(n), std::vector<std::size_t>(static_cast<std::size_t>(k), 0));
    Vector next(k);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index y = 0; y < k; ++y) {
            Eigen::Index arg = 0;
            double best = delta(0) + trans(0, y);
            for (Eigen::Index p = 1; p < k; ++p) {
                double s = delta(p) + trans(p, y);
                if (s > best) {
                    best = s;
                    arg = p;
                }
            }
            next(y) = best + em(i, y);
            back[static_cast<std::size_t>(i)][static_cast<std::size_t>(y)] = static_cast<std::size_t>(arg);
        }
        delta.swap(next);
    }
    Vector final_scores = delta + model.stop;
    Eigen::Index last = 0;
    for (Eigen::Index y = 1; y < k; ++y) {
        if (final_scores(y) > final_scores(last)) {
            last = y;
        }
    }
    ViterbiResult out;
    out.score = final_scores(last);
    out.path.assign(static_cast<std::size_t>(n), 0);
    out.path.back() = static_cast<std::size_t>(last);
    for (Eigen::Index i = n - 1; i > 0; --i) {
        out.path[static_cast<std::size_t>(i - 1)] = back[static_cast<std::size_t>(i)][out.path[static_cast<std::size_t>(i)]];
    }
    return out;
}

// Per-token tag marginals.
inline Matrix marginals(const EmissionMatrix &em, const CrfModel &model)
{
    auto lat = detail::forward_backward(em, model);
    return (lat.alpha + lat.beta).array().unaryExpr([&](double v) { return std::exp(v - lat.log_z); });
}

struct CrfGradient {
    double loss = 0.0;
    Matrix d_transitions;
    Vector d_start;
    Vector d_stop;
    Matrix d_emissions;
};

// Negative log-likelihood of `gold` and its gradient: expected minus
// observed counts from forward-backward.
inline CrfGradient nll_gradient(const CrfModel &model, const EmissionMatrix &em, const std::vector<std::size_t> &gold)
{
    detail::check_emissions(em, model);
    check(static_cast<Eigen::Index>(gold.size()) == em.rows(), "gold length does not match emissions");
    const auto n = em.rows();
    const auto k = em.cols();
    for (auto g : gold) {
        if (g >= model.num_tags()) {
            throw Error("gold sequence contains unknown tag index " + std::to_string(g));
        }
    }
    auto lat = detail::forward_backward(em, model);
    const Matrix trans = model.effective_transitions();

    CrfGradient grad;
    grad.loss = lat.log_z - path_score(em, model, gold);
    grad.d_emissions = (lat.alpha + lat.beta).array().unaryExpr([&](double v) { return std::exp(v - lat.log_z); });
    grad.d_start = grad.d_emissions.row(0).transpose();
    grad.d_stop = grad.d_emissions.row(n - 1).transpose();
    grad.d_transitions = Matrix::Zero(k, k);
    for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) {
                grad.d_transitions(a, b)
                    += std::exp(lat.alpha(i - 1, a) + trans(a, b) + em(i, b) + lat.beta(i, b) - lat.log_z);
            }
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        auto g = static_cast<Eigen::Index>(gold[static_cast<std::size_t>(i)]);
        grad.d_emissions(i, g) -= 1.0;
        if (i > 0) {
            grad.d_transitions(static_cast<Eigen::Index>(gold[static_cast<std::size_t>(i - 1)]), g) -= 1.0;
        }
    }
    grad.d_start(static_cast<Eigen::Index>(gold.front())) -= 1.0;
    grad.d_stop(static_cast<Eigen::Index>(gold.back())) -= 1.0;
    return grad;
}

inline CrfGradient nll_gradient(const CrfModel &model, const EmissionMatrix &em, const TagSequence &gold)
{
    return nll_gradient(model, em, model.tag_indices(gold));
}

// ---------------------------------------------------------------------------
// Standalone training over sparse binary features

struct CrfExample {
    std::vector<std::vector<std::size_t>> features; // active feature ids per token
    std::vector<std::size_t> gold;
};

struct CrfTrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32; // 0 = full batch
    bool shuffle = true;
    std::uint64_t seed = 1;
    double l2 = 0.0;
    NadamConfig optimizer{0.05};
};

struct CrfTrainResult {
    CrfModel model;
    std::vector<double> epoch_losses; // mean NLL seen during each epoch
};

inline CrfTrainResult train_crf(const std::vector<CrfExample> &data, std::vector<std::string> tags,
                                std::size_t num_features, const CrfTrainConfig &cfg = {}, bool constrained = false)
{
    if (data.empty()) {
        throw Error("cannot train a CRF on an empty dataset");
    }
    CrfTrainResult out{CrfModel(std::move(tags), constrained, num_features), {}};
    auto &model = out.model;
    NadamState state;
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = cfg.batch_size == 0 ? data.size() : cfg.batch_size;
    const auto k = static_cast<Eigen::Index>(model.num_tags());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            rng.shuffle(order);
        }
        double epoch_loss = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
            const std::size_t b1 = std::min(order.size(), b0 + batch);
            const double scale = 1.0 / static_cast<double>(b1 - b0);
            Matrix g_trans = Matrix::Zero(k, k);
            Vector g_start = Vector::Zero(k), g_stop = Vector::Zero(k);
            Matrix g_feat = Matrix::Zero(model.feature_weights.rows(), k);
            for (std::size_t bi = b0; bi < b1; ++bi) {
                const auto &ex = data[order[bi]];
                auto g = nll_gradient(model, model.emissions(ex.features), ex.gold);
                epoch_loss += g.loss;
                g_trans += scale * g.d_transitions;
                g_start += scale * g.d_start;
                g_stop += scale * g.d_stop;
                for (std::size_t i = 0; i < ex.features.size(); ++i) {
                    for (auto f : ex.features[i]) {
                        g_feat.row(static_cast<Eigen::Index>(f)) += scale * g.d_emissions.row(static_cast<Eigen::Index>(i));
                    }
                }
            }
            if (cfg.l2 > 0.0) {
                g_trans += cfg.l2 * model.transitions;
                g_feat += cfg.l2 * model.feature_weights;
            }
            nadam_step({std::span<double>(model.transitions.data(), static_cast<std::size_t>(model.transitions.size())),
                        std::span<double>(model.start.data(), static_cast<std::size_t>(model.start.size())),
                        std::span<double>(model.stop.data(), static_cast<std::size_t>(model.stop.size())),
                        std::span<double>(model.feature_weights.data(), static_cast<std::size_t>(model.feature_weights.size()))},
                       {std::span<const double>(g_trans.data(), static_cast<std::size_t>(g_trans.size())),
                        std::span<const double>(g_start.data(), static_cast<std::size_t>(g_start.size())),
                        std::span<const double>(g_stop.data(), static_cast<std::size_t>(g_stop.size())),
                        std::span<const double>(g_feat.data(), static_cast<std::size_t>(g_feat.size()))},
                       state, cfg.optimizer);
        }
        out.epoch_losses.push_back(epoch_loss / static_cast<double>(data.size()));
    }
    return out;
}

// String feature names to dense ids, grown while building training data.
class FeatureAlphabet
{
public:
    std::size_t add(const std::string &name)
    {
        auto [it, inserted] = index_.emplace(name, names_.size());
        if (inserted) {
            names_.push_back(name);
        }
        return it->second;
    }

    [[nodiscard]] std::optional<std::size_t> find(const std::string &name) const
    {
        auto it = index_.find(name);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] const std::vector<std::string> &names() const { return names_; }

    template <class Archive>
    void save(Archive &ar) const
    {
        ar(names_);
    }

    template <class Archive>
    void load(Archive &ar)
    {
        ar(names_);
        index_.clear();
        for (std::size_t i = 0; i < names_.size(); ++i) {
            index_.emplace(names_[i], i);
        }
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace wikiner

#endif
