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

#include "ttm/prototype.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/kernels.hpp"
#include "ttm/parallel.hpp"

namespace ttm::prototype {

void PrototypeConfig::validate() const {
    if (replicates < 2) throw ConfigError("prototype: replicates must be >= 2");
    if (word_prob_threshold > 0.0 && word_prob_threshold >= 1.0)
        throw ConfigError("prototype: word_prob_threshold must be in (0,1)");
    base.validate();
}

double default_threshold(std::int32_t vocab_size) {
    if (vocab_size < 2) throw ConfigError("prototype: default threshold needs vocab_size >= 2");
    return 1.0 / static_cast<double>(vocab_size);
}

double topic_similarity(const std::vector<double>& phi_a, const std::vector<double>& phi_b, double c) {
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("prototype: threshold must be in (0,1)");
    return kernels::jaccard_similarity(phi_a, phi_b, c);
}

std::vector<TopicMatch> match_topics(const std::vector<std::vector<double>>& phis_a,
                                     const std::vector<std::vector<double>>& phis_b, double c) {
    if (phis_a.size() != phis_b.size())
        throw ConfigError("prototype: topic count mismatch (" + std::to_string(phis_a.size()) +
                          " vs " + std::to_string(phis_b.size()) + ")");
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("prototype: threshold must be in (0,1)");
    const std::size_t K = phis_a.size();
    const auto sim = kernels::jaccard_matrix(phis_a, phis_b, c);

    std::vector<bool> a_used(K, false), b_used(K, false);
    std::vector<TopicMatch> matches;
    matches.reserve(K);
    for (std::size_t round = 0; round < K; ++round) {
        int best_a = -1, best_b = -1;
        double best = -1.0;
        for (std::size_t i = 0; i < K; ++i) {
            if (a_used[i]) continue;
            for (std::size_t j = 0; j < K; ++j) {
                if (b_used[j]) continue;
                if (sim[i * K + j] > best) {
                    best = sim[i * K + j];
                    best_a = static_cast<int>(i);
                    best_b = static_cast<int>(j);
                }
            }
        }
        a_used[best_a] = true;
        b_used[best_b] = true;
        matches.push_back({best_a, best_b, best});
    }
    std::sort(matches.begin(), matches.end(),
              [](const TopicMatch& x, const TopicMatch& y) { return x.a < y.a; });
    return matches;
}

double replicate_similarity(const lda::LdaState& run_a, const lda::LdaState& run_b, double c) {
    if (run_a.config().K != run_b.config().K)
        throw ConfigError("prototype: replicate K mismatch");
    if (run_a.vocab_size() != run_b.vocab_size())
        throw ConfigError("prototype: replicate vocabulary mismatch");
    const auto matches = match_topics(lda::phi(run_a), lda::phi(run_b), c);
    double total = 0.0;
    for (const auto& m : matches) total += m.similarity;
    return total / static_cast<double>(matches.size());
}

PrototypeSelection select_prototype(const std::vector<lda::LdaState>& runs, double c) {
    const int R = static_cast<int>(runs.size());
    if (R < 2) throw ConfigError("prototype: need at least 2 replicates");
    for (const auto& run : runs) {
        if (run.config().K != runs.front().config().K)
            throw ConfigError("prototype: replicate K mismatch");
        if (run.vocab_size() != runs.front().vocab_size())
            throw ConfigError("prototype: replicate vocabulary mismatch");
    }

    PrototypeSelection sel;
    sel.pairwise.assign(R, std::vector<double>(R, 1.0));

    // Independent upper-triangle entries.
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < R; ++i)
        for (int j = i + 1; j < R; ++j) cells.emplace_back(i, j);
    std::vector<double> values(cells.size());
    if (parallel::enabled()) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel::threads())
        for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(cells.size()); ++idx)
            values[idx] = replicate_similarity(runs[cells[idx].first], runs[cells[idx].second], c);
    } else {
        for (std::size_t idx = 0; idx < cells.size(); ++idx)
            values[idx] = replicate_similarity(runs[cells[idx].first], runs[cells[idx].second], c);
    }
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        sel.pairwise[cells[idx].first][cells[idx].second] = values[idx];
        sel.pairwise[cells[idx].second][cells[idx].first] = values[idx];
    }

    sel.mean_similarity.assign(R, 0.0);
    for (int i = 0; i < R; ++i) {
        double total = 0.0;
        for (int j = 0; j < R; ++j)
            if (j != i) total += sel.pairwise[i][j];
        sel.mean_similarity[i] = total / static_cast<double>(R - 1);
    }
    sel.chosen = 0;
    for (int i = 1; i < R; ++i)
        if (sel.mean_similarity[i] > sel.mean_similarity[sel.chosen]) sel.chosen = i;
    return sel;
}

PrototypeFit fit_prototype(const lda::Docs& docs, const PrototypeConfig& config,
                           std::int32_t vocab_size) {
    config.validate();
    // Validate up front: the replicate loop bodies must not throw inside the
    // parallel region.
    for (const auto& doc : docs)
        for (std::int32_t w : doc)
            if (w < 0 || w >= vocab_size)
                throw ConfigError("prototype: token id " + std::to_string(w) + " out of range [0," +
                                  std::to_string(vocab_size) + ")");
    const double c = config.word_prob_threshold > 0.0 ? config.word_prob_threshold
                                                      : default_threshold(vocab_size);
    const int R = config.replicates;

    PrototypeFit fit;
    fit.runs.resize(R);
    if (parallel::enabled()) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel::threads())
        for (int r = 0; r < R; ++r) {
            lda::LdaConfig cfg = config.base;
            cfg.seed = config.base.seed + static_cast<std::uint64_t>(r);
            fit.runs[r] = lda::fit_lda(docs, cfg, vocab_size);
        }
    } else {
        for (int r = 0; r < R; ++r) {
            lda::LdaConfig cfg = config.base;
            cfg.seed = config.base.seed + static_cast<std::uint64_t>(r);
            fit.runs[r] = lda::fit_lda(docs, cfg, vocab_size);
        }
    }
    fit.selection = select_prototype(fit.runs, c);
    return fit;
}

std::string PrototypeSelection::to_json() const {
    nlohmann::json j;
    j["chosen"] = chosen;
    j["mean_similarity"] = mean_similarity;
    j["pairwise"] = pairwise;
    return j.dump();
}

}  // namespace ttm::prototype
