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

#ifndef WIKINER_OPTIM_HPP
#define WIKINER_OPTIM_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <wikiner/common.hpp>

namespace wikiner
{

struct NadamConfig {
    double learning_rate = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    // Momentum warm-up schedule; 0 gives a constant momentum of beta1.
    double schedule_decay = 0.004;
};

struct NadamState {
    std::uint64_t t = 0;
    double momentum_product = 1.0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// One Nesterov-accelerated Adam update over a set of parameter blocks, with
// the momentum schedule mu_t = beta1 * (1 - 0.5 * 0.96^(t * decay)). All
// blocks share the step counter. Throws on a non-finite gradient before
// touching any parameter.
inline void nadam_step(const std::vector<std::span<double>> &params, const std::vector<std::span<const double>> &grads,
                       NadamState &state, const NadamConfig &cfg = {})
{
    check(params.size() == grads.size(), "nadam: parameter/gradient block count mismatch");
    for (std::size_t b = 0; b < grads.size(); ++b) {
        check(params[b].size() == grads[b].size(), "nadam: block " + std::to_string(b) + " shape mismatch");
        for (std::size_t i = 0; i < grads[b].size(); ++i) {
            if (!std::isfinite(grads[b][i])) {
                throw Error("nadam: non-finite gradient in block " + std::to_string(b) + " at element "
                            + std::to_string(i) + " (step " + std::to_string(state.t + 1) + ")");
            }
        }
    }
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), {});
        state.v.assign(params.size(), {});
        for (std::size_t b = 0; b < params.size(); ++b) {
            state.m[b].assign(params[b].size(), 0.0);
            state.v[b].assign(params[b].size(), 0.0);
        }
    }
    const double t = static_cast<double>(++state.t);
    const double mu_t = cfg.beta1 * (1.0 - 0.5 * std::pow(0.96, t * cfg.schedule_decay));
    const double mu_next = cfg.beta1 * (1.0 - 0.5 * std::pow(0.96, (t + 1.0) * cfg.schedule_decay));
    const double prod = state.momentum_product * mu_t;
    const double prod_next = prod * mu_next;
    state.momentum_product = prod;
    const double v_correction = 1.0 - std::pow(cfg.beta2, t);

    for (std::size_t b = 0; b < params.size(); ++b) {
        auto &m = state.m[b];
        auto &v = state.v[b];
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double g = grads[b][i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double g_hat = g / (1.0 - prod);
            const double m_hat = m[i] / (1.0 - prod_next);
            const double v_hat = v[i] / v_correction;
            const double m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
            params[b][i] -= cfg.learning_rate * m_bar / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

} // namespace wikiner

#endif
