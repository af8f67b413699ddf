// Copyright 2026 The ttm Authors
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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Poisson reduced-rank scaling of entity x word count panels over time:
// counts y_ij(t) ~ Poisson(mu) with log mu = a_i(t) + b_j + U(t)_i . V_j.
// Entity factors are free per time slice, word loadings V are shared, so
// the rows of U(t) are positions in one common latent space. Fitting is
// cyclic block ascent with a monotone log-likelihood trace.

namespace ttm::prr {

struct CountPanel {
    std::vector<std::string> times;     // T labels, ascending
    std::vector<std::string> entities;  // I labels
    std::vector<std::string> words;     // J labels
    std::vector<std::vector<std::int64_t>> counts;  // T slices, each I x J row-major

    std::size_t T() const { return times.size(); }
    std::size_t I() const { return entities.size(); }
    std::size_t J() const { return words.size(); }
    std::int64_t at(std::size_t t, std::size_t i, std::size_t j) const {
        return counts[t][i * J() + j];
    }

    void validate() const;  // dims consistent, counts >= 0, no all-zero slice

    /// Long-format CSV with header columns time, entity, word, count.
    /// Distinct labels are sorted lexicographically; duplicate cells sum.
    static CountPanel from_csv(const std::string& content);
};

struct PrrConfig {
    int rank = 2;
    int max_iters = 300;
    double tol = 1e-7;  // stop when the log-likelihood gain drops below this
    std::uint64_t seed = 1;

    void validate() const;
};

struct PrrFit {
    int rank = 0;
    std::vector<std::string> times, entities, words;
    std::vector<std::vector<double>> a;  // T x I entity intercepts
    std::vector<double> b;               // J word intercepts (time-constant)
    std::vector<std::vector<double>> u;  // T slices, each I x rank row-major
    std::vector<double> v;               // J x rank row-major, unit-norm columns
    std::vector<double> trace;           // log-likelihood per iteration (index 0 = initial)
    double log_likelihood = 0.0;

    double mu(std::size_t t, std::size_t i, std::size_t j) const;
    std::string to_json() const;
};

/// Maximizes sum_(t,i,j) [y log mu - mu] by cyclic block ascent: closed-form
/// intercept updates, then damped single-Newton steps per factor coordinate
/// with step-halving to enforce ascent. Stops at max_iters or when the gain
/// drops below tol. V columns are normalized to unit length at the end (U
/// absorbs the scale; mu is unchanged).
PrrFit fit_prr(const CountPanel& panel, const PrrConfig& config);

/// U(t) after identification normalization; row i at time t is entity i's
/// position.
std::vector<std::vector<double>> latent_positions(const PrrFit& fit);

/// 2 sum [y log(y/mu) - (y - mu)] with 0 log 0 = 0; zero iff mu == y.
double deviance(const PrrFit& fit, const CountPanel& panel);

}  // namespace ttm::prr
