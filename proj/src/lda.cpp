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

#include "ttm/lda.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/rng.hpp"

namespace ttm::lda {

void LdaConfig::validate() const {
    if (K < 1) throw ConfigError("lda: K must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("lda: alpha must be > 0");
    if (!(eta > 0.0)) throw ConfigError("lda: eta must be > 0");
    if (iterations < 1) throw ConfigError("lda: iterations must be >= 1");
}

void LdaState::rebuild_counts() {
    const int K = config_.K;
    n_dk_.assign(docs_.size() * K, 0);
    n_kw_.assign(static_cast<std::size_t>(K) * V_, 0);
    n_k_.assign(K, 0);
    for (std::size_t d = 0; d < docs_.size(); ++d) {
        for (std::size_t i = 0; i < docs_[d].size(); ++i) {
            const std::int32_t w = docs_[d][i];
            const std::int32_t k = assignments_[d][i];
            ++n_dk_[d * K + k];
            ++n_kw_[static_cast<std::size_t>(k) * V_ + w];
            ++n_k_[k];
        }
    }
}

LdaState LdaState::from_assignments(Docs docs, LdaConfig config, std::int32_t vocab_size,
                                    std::vector<TokenIds> assignments) {
    config.validate();
    if (vocab_size < 1) throw ConfigError("lda: vocab_size must be >= 1");
    if (docs.size() != assignments.size()) throw ConfigError("lda: docs/assignments size mismatch");
    for (std::size_t d = 0; d < docs.size(); ++d) {
        if (docs[d].size() != assignments[d].size())
            throw ConfigError("lda: token/assignment length mismatch in document " + std::to_string(d));
        for (std::int32_t w : docs[d])
            if (w < 0 || w >= vocab_size)
                throw ConfigError("lda: token id " + std::to_string(w) + " out of range [0," +
                                  std::to_string(vocab_size) + ")");
        for (std::int32_t z : assignments[d])
            if (z < 0 || z >= config.K) throw ConfigError("lda: topic id out of range");
    }
    LdaState state;
    state.config_ = config;
    state.V_ = vocab_size;
    state.docs_ = std::move(docs);
    state.assignments_ = std::move(assignments);
    state.rebuild_counts();
    return state;
}

LdaState fit_lda(const Docs& docs, const LdaConfig& config, std::int32_t vocab_size) {
    config.validate();
    if (vocab_size < 1) throw ConfigError("lda: vocab_size must be >= 1");
    for (const auto& doc : docs)
        for (std::int32_t w : doc)
            if (w < 0 || w >= vocab_size)
                throw ConfigError("lda: token id " + std::to_string(w) + " out of range [0," +
                                  std::to_string(vocab_size) + ")");

    LdaState state;
    state.config_ = config;
    state.V_ = vocab_size;
    state.docs_ = docs;

    const int K = config.K;
    const std::int32_t V = vocab_size;
    const double alpha = config.alpha;
    const double eta = config.eta;
    const double V_eta = static_cast<double>(V) * eta;

    rng::Xoshiro256StarStar gen(config.seed);

    // Uniform random initialization, then counts from the assignments.
    state.assignments_.resize(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        state.assignments_[d].resize(docs[d].size());
        for (auto& z : state.assignments_[d]) z = static_cast<std::int32_t>(gen.next_below(K));
    }
    state.rebuild_counts();

    auto& n_dk = state.n_dk_;
    auto& n_kw = state.n_kw_;
    auto& n_k = state.n_k_;
    std::vector<double> weight(K);

    for (int sweep = 0; sweep < config.iterations; ++sweep) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            const auto& doc = docs[d];
            auto& z_d = state.assignments_[d];
            for (std::size_t i = 0; i < doc.size(); ++i) {
                const std::int32_t w = doc[i];
                const std::int32_t old_k = z_d[i];
                --n_dk[d * K + old_k];
                --n_kw[static_cast<std::size_t>(old_k) * V + w];
                --n_k[old_k];

                double total = 0.0;
                for (int k = 0; k < K; ++k) {
                    const double wk = (n_dk[d * K + k] + alpha) *
                                      (n_kw[static_cast<std::size_t>(k) * V + w] + eta) /
                                      (n_k[k] + V_eta);
                    weight[k] = wk;
                    total += wk;
                }
                double u = gen.next_double() * total;
                int new_k = K - 1;
                for (int k = 0; k < K; ++k) {
                    u -= weight[k];
                    if (u < 0.0) {
                        new_k = k;
                        break;
                    }
                }

                z_d[i] = new_k;
                ++n_dk[d * K + new_k];
                ++n_kw[static_cast<std::size_t>(new_k) * V + w];
                ++n_k[new_k];
            }
        }
    }
    return state;
}

std::vector<std::vector<double>> phi(const LdaState& state) {
    const int K = state.config().K;
    const std::int32_t V = state.vocab_size();
    const double eta = state.config().eta;
    const double V_eta = static_cast<double>(V) * eta;
    std::vector<std::vector<double>> result(K, std::vector<double>(V));
    for (int k = 0; k < K; ++k) {
        const double denom = state.n_k(k) + V_eta;
        for (std::int32_t w = 0; w < V; ++w) result[k][w] = (state.n_kw(k, w) + eta) / denom;
    }
    return result;
}

std::vector<std::vector<double>> theta(const LdaState& state) {
    const int K = state.config().K;
    const double alpha = state.config().alpha;
    const double K_alpha = K * alpha;
    std::vector<std::vector<double>> result(state.docs().size(), std::vector<double>(K));
    for (std::size_t d = 0; d < state.docs().size(); ++d) {
        const double denom = static_cast<double>(state.docs()[d].size()) + K_alpha;
        for (int k = 0; k < K; ++k) result[d][k] = (state.n_dk(d, k) + alpha) / denom;
    }
    return result;
}

double log_likelihood(const LdaState& state) {
    const int K = state.config().K;
    const std::int32_t V = state.vocab_size();
    const double alpha = state.config().alpha;
    const double eta = state.config().eta;

    // Word part. Empty topics keep only the per-topic normalizer constant.
    double ll = K * (std::lgamma(V * eta) - V * std::lgamma(eta));
    for (int k = 0; k < K; ++k) {
        if (state.n_k(k) == 0) continue;
        double topic = -std::lgamma(state.n_k(k) + V * eta);
        for (std::int32_t w = 0; w < V; ++w) topic += std::lgamma(state.n_kw(k, w) + eta);
        ll += topic;
    }
    // Assignment prior part.
    const std::int64_t D = state.doc_count();
    ll += D * (std::lgamma(K * alpha) - K * std::lgamma(alpha));
    for (std::size_t d = 0; d < state.docs().size(); ++d) {
        double doc = -std::lgamma(static_cast<double>(state.docs()[d].size()) + K * alpha);
        for (int k = 0; k < K; ++k) doc += std::lgamma(state.n_dk(d, k) + alpha);
        ll += doc;
    }
    return ll;
}

std::string LdaState::to_json() const {
    nlohmann::json j;
    j["config"] = {{"K", config_.K},
                   {"alpha", config_.alpha},
                   {"eta", config_.eta},
                   {"iterations", config_.iterations},
                   {"seed", config_.seed}};
    j["vocab_size"] = V_;
    j["docs"] = docs_;
    j["assignments"] = assignments_;
    return j.dump();
}

LdaState LdaState::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("lda state: invalid JSON: ") + e.what());
    }
    try {
        LdaConfig config;
        config.K = j.at("config").at("K").get<int>();
        config.alpha = j.at("config").at("alpha").get<double>();
        config.eta = j.at("config").at("eta").get<double>();
        config.iterations = j.at("config").at("iterations").get<int>();
        config.seed = j.at("config").at("seed").get<std::uint64_t>();
        return from_assignments(j.at("docs").get<Docs>(), config, j.at("vocab_size").get<std::int32_t>(),
                                j.at("assignments").get<std::vector<TokenIds>>());
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("lda state: missing or mistyped field: ") + e.what());
    } catch (const ConfigError& e) {
        throw StateError(std::string("lda state: inconsistent: ") + e.what());
    }
}

}  // namespace ttm::lda
