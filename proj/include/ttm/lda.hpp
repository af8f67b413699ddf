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

// Latent Dirichlet Allocation by collapsed Gibbs sampling. A fit is strictly
// sequential (sweeps are order-dependent); independent fits with different
// seeds may run concurrently. States are immutable once fitted.

namespace ttm::lda {

using TokenIds = std::vector<std::int32_t>;
using Docs = std::vector<TokenIds>;

struct LdaConfig {
    int K = 10;                  // topic count
    double alpha = 0.1;          // symmetric document-topic prior
    double eta = 0.01;           // symmetric topic-word prior
    int iterations = 200;        // Gibbs sweeps
    std::uint64_t seed = 1;

    void validate() const;  // throws ConfigError
};

/// Collapsed Gibbs sampler state: per-token topic assignments plus the count
/// matrices they induce. Invariants (exact, integer arithmetic):
///   sum_w n_kw[k][w] == n_k[k],  sum_k n_dk[d][k] == len(doc d),
///   counts rebuilt from assignments match the stored matrices.
class LdaState {
public:
    LdaState() = default;

    /// Builds a state from explicit assignments, rebuilding all counts.
    static LdaState from_assignments(Docs docs, LdaConfig config, std::int32_t vocab_size,
                                     std::vector<TokenIds> assignments);

    const LdaConfig& config() const { return config_; }
    std::int32_t vocab_size() const { return V_; }
    const Docs& docs() const { return docs_; }
    const std::vector<TokenIds>& assignments() const { return assignments_; }

    std::int64_t doc_count() const { return static_cast<std::int64_t>(docs_.size()); }
    std::int32_t n_dk(std::size_t d, int k) const { return n_dk_[d * config_.K + k]; }
    std::int32_t n_kw(int k, std::int32_t w) const { return n_kw_[static_cast<std::size_t>(k) * V_ + w]; }
    std::int32_t n_k(int k) const { return n_k_[k]; }

    /// Topic-word count row (length V).
    const std::int32_t* n_kw_row(int k) const { return n_kw_.data() + static_cast<std::size_t>(k) * V_; }

    std::string to_json() const;
    static LdaState from_json(const std::string& text);  // throws StateError

private:
    friend LdaState fit_lda(const Docs&, const LdaConfig&, std::int32_t);

    LdaConfig config_;
    std::int32_t V_ = 0;
    Docs docs_;
    std::vector<TokenIds> assignments_;
    std::vector<std::int32_t> n_dk_;  // D x K
    std::vector<std::int32_t> n_kw_;  // K x V
    std::vector<std::int32_t> n_k_;   // K

    void rebuild_counts();  // from docs_ + assignments_
};

/// Fits by collapsed Gibbs sampling; deterministic given config.seed.
/// Full-conditional weight of topic k for token w in document d (current
/// token excluded from counts): (n_dk + alpha) * (n_kw + eta) / (n_k + V*eta).
LdaState fit_lda(const Docs& docs, const LdaConfig& config, std::int32_t vocab_size);

/// phi[k][w] = (n_kw + eta) / (n_k + V*eta); rows sum to 1.
std::vector<std::vector<double>> phi(const LdaState& state);

/// theta[d][k] = (n_dk + alpha) / (N_d + K*alpha); rows sum to 1.
std::vector<std::vector<double>> theta(const LdaState& state);

/// Joint collapsed log-likelihood of words and assignments, from the count
/// matrices via log-gamma sums. Topics with n_k == 0 contribute only the
/// normalizer constant log Gamma(V*eta) - V*log Gamma(eta).
double log_likelihood(const LdaState& state);

}  // namespace ttm::lda
