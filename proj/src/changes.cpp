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

#include "ttm/changes.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/kernels.hpp"
#include "ttm/parallel.hpp"
#include "ttm/rng.hpp"

namespace ttm::changes {

void MonitorConfig::validate() const {
    if (reference_window < 1) throw ConfigError("changes: reference_window must be >= 1");
    if (bootstrap_samples < 1) throw ConfigError("changes: bootstrap_samples must be >= 1");
    if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("changes: quantile must be in (0,1)");
    if (impact_words < 1) throw ConfigError("changes: impact_words must be >= 1");
}

namespace {

// Topic-k word counts of chunk t, zero-padded to the current vocabulary.
std::vector<double> chunk_counts(const rolling::RollingModel& model, int k, int t) {
    const rolling::ChunkRecord& rec = model.record(t);
    std::vector<double> v(model.vocabulary().size(), 0.0);
    const std::size_t off = static_cast<std::size_t>(k) * rec.vocab_size_at_fit;
    for (std::int32_t w = 0; w < rec.vocab_size_at_fit; ++w)
        v[w] = static_cast<double>(rec.n_kw[off + w]);
    return v;
}

// Element-wise sum of topic-k counts over chunks [from, to).
std::vector<double> window_counts(const rolling::RollingModel& model, int k, int from, int to) {
    std::vector<double> v(model.vocabulary().size(), 0.0);
    for (int s = from; s < to; ++s) {
        const rolling::ChunkRecord& rec = model.record(s);
        const std::size_t off = static_cast<std::size_t>(k) * rec.vocab_size_at_fit;
        for (std::int32_t w = 0; w < rec.vocab_size_at_fit; ++w)
            v[w] += static_cast<double>(rec.n_kw[off + w]);
    }
    return v;
}

// Cosine with the zero-vector convention: both zero -> 1, one zero -> 0.
double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 && nb == 0.0) return 1.0;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void check_point(const rolling::RollingModel& model, int k, int t, int z) {
    if (k < 0 || k >= model.config().base.K) throw ConfigError("changes: topic index out of range");
    if (t > model.last_fitted_chunk()) throw ConfigError("changes: chunk index out of range");
    if (t < model.config().warmup_chunks)
        throw ConfigError("changes: chunk " + std::to_string(t) + " is inside the warm-up");
    if (z < 1) throw ConfigError("changes: reference window must be >= 1");
    if (t - z < 0) throw ConfigError("changes: reference window reaches before chunk 0");
}

double threshold_for(const std::vector<double>& chunk, const std::vector<double>& reference,
                     const MonitorConfig& config, int k, int t, bool run_serial) {
    double n_t_d = 0.0;
    for (double c : chunk) n_t_d += c;
    const std::int64_t n_t = static_cast<std::int64_t>(n_t_d);
    if (n_t < 1) return 0.0;

    // Support of the reference; the simulated draws live on it, and cosines
    // against the reference are unchanged by dropping shared zeros.
    std::vector<double> support;
    support.reserve(reference.size());
    for (double r : reference)
        if (r > 0.0) support.push_back(r);
    if (support.empty()) return 0.0;

    const std::uint64_t stream =
        rng::derive_seed(config.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(t)});
    const auto cosines =
        run_serial
            ? kernels::bootstrap_cosines_serial(support, n_t, config.bootstrap_samples, stream)
            : kernels::bootstrap_cosines(support, n_t, config.bootstrap_samples, stream);
    return kernels::lower_quantile(cosines, config.quantile);
}

std::vector<WordImpact> impacts_for(const std::vector<double>& chunk,
                                    const std::vector<double>& reference,
                                    const corpus::Vocabulary& vocabulary, int top_n) {
    double dot = 0.0, nc = 0.0, nr = 0.0;
    for (std::size_t w = 0; w < chunk.size(); ++w) {
        dot += chunk[w] * reference[w];
        nc += chunk[w] * chunk[w];
        nr += reference[w] * reference[w];
    }
    const auto cos_of = [](double d, double a, double b) {
        if (a <= 0.0 && b <= 0.0) return 1.0;
        if (a <= 0.0 || b <= 0.0) return 0.0;
        return d / (std::sqrt(a) * std::sqrt(b));
    };
    const double base = cos_of(dot, nc, nr);

    std::vector<WordImpact> impacts;
    for (std::size_t w = 0; w < chunk.size(); ++w) {
        if (chunk[w] == 0.0 && reference[w] == 0.0) continue;
        const double without = cos_of(dot - chunk[w] * reference[w], nc - chunk[w] * chunk[w],
                                      nr - reference[w] * reference[w]);
        impacts.push_back({vocabulary.words[w], without - base});
    }
    std::sort(impacts.begin(), impacts.end(), [](const WordImpact& a, const WordImpact& b) {
        if (a.impact != b.impact) return a.impact > b.impact;
        return a.word < b.word;
    });
    if (static_cast<int>(impacts.size()) > top_n) impacts.resize(top_n);
    return impacts;
}

}  // namespace

double topic_stability(const rolling::RollingModel& model, int k, int t, int z) {
    check_point(model, k, t, z);
    return cosine(chunk_counts(model, k, t), window_counts(model, k, t - z, t));
}

double monitor_threshold(const rolling::RollingModel& model, int k, int t,
                         const MonitorConfig& config) {
    config.validate();
    check_point(model, k, t, config.reference_window);
    return threshold_for(chunk_counts(model, k, t),
                         window_counts(model, k, t - config.reference_window, t), config, k, t,
                         false);
}

std::vector<WordImpact> loo_word_impacts(const rolling::RollingModel& model, int k, int t, int z,
                                         int top_n) {
    check_point(model, k, t, z);
    if (top_n < 1) throw ConfigError("changes: top_n must be >= 1");
    return impacts_for(chunk_counts(model, k, t), window_counts(model, k, t - z, t),
                       model.vocabulary(), top_n);
}

ChangeReport detect_changes(const rolling::RollingModel& model, const MonitorConfig& config) {
    config.validate();
    const int warmup = model.config().warmup_chunks;
    const int z = config.reference_window;
    const int last = model.last_fitted_chunk();
    if (last - warmup + 1 < z)
        throw ConfigError("changes: need at least " + std::to_string(z) +
                          " post-warm-up chunks, have " + std::to_string(last - warmup + 1));

    const int K = model.config().base.K;
    const int first = std::max(warmup, z);

    struct TopicResult {
        std::vector<StabilityPoint> points;
        std::vector<std::pair<int, std::vector<WordImpact>>> impacts;  // chunk -> ranked words
    };
    std::vector<TopicResult> per_topic(K);

    const auto run_topic = [&](int k) {
        TopicResult& res = per_topic[k];
        int window_start = 0;  // restarts at each detected change
        for (int t = first; t <= last; ++t) {
            const int from = std::max(window_start, t - z);
            const auto chunk = chunk_counts(model, k, t);
            const auto reference = window_counts(model, k, from, t);
            StabilityPoint p;
            p.topic = k;
            p.chunk = t;
            p.stability = cosine(chunk, reference);
            p.threshold = threshold_for(chunk, reference, config, k, t, /*run_serial=*/true);
            p.is_change = p.stability < p.threshold;
            if (p.is_change) {
                res.impacts.emplace_back(
                    t, impacts_for(chunk, reference, model.vocabulary(), config.impact_words));
                window_start = t;
            }
            res.points.push_back(p);
        }
    };

    if (parallel::enabled()) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel::threads())
        for (int k = 0; k < K; ++k) run_topic(k);
    } else {
        for (int k = 0; k < K; ++k) run_topic(k);
    }

    ChangeReport report;
    for (int k = 0; k < K; ++k) {
        for (const auto& p : per_topic[k].points) {
            report.points.push_back(p);
            if (p.is_change) report.change_points.emplace_back(p.topic, p.chunk);
        }
        for (auto& [chunk, impacts] : per_topic[k].impacts)
            report.impacts.emplace(std::make_pair(k, chunk), std::move(impacts));
    }
    return report;
}

std::string ChangeReport::to_json() const {
    nlohmann::json j;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
        pts.push_back({{"topic", p.topic},
                       {"chunk", p.chunk},
                       {"stability", p.stability},
                       {"threshold", p.threshold},
                       {"is_change", p.is_change}});
    j["points"] = std::move(pts);
    nlohmann::json cps = nlohmann::json::array();
    for (const auto& [topic, chunk] : change_points) cps.push_back({{"topic", topic}, {"chunk", chunk}});
    j["change_points"] = std::move(cps);
    nlohmann::json imps = nlohmann::json::array();
    for (const auto& [key, words] : impacts) {
        nlohmann::json ws = nlohmann::json::array();
        for (const auto& wi : words) ws.push_back({{"word", wi.word}, {"impact", wi.impact}});
        imps.push_back({{"topic", key.first}, {"chunk", key.second}, {"words", std::move(ws)}});
    }
    j["impacts"] = std::move(imps);
    return j.dump();
}

}  // namespace ttm::changes
