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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ttm/rolling.hpp"

// Change monitoring over a rolling model: per-topic stability of each
// chunk's topic-word counts against a reference window of recent chunks,
// with a simulated sampling-noise threshold. Stability is cosine similarity;
// an all-zero vector against a nonzero one scores 0, two all-zero vectors
// score 1 (empty topics must not fire changes against empty references).
// The whole report is a pure function of (model, config).

namespace ttm::changes {

struct MonitorConfig {
    int reference_window = 4;   // z, chunks
    int bootstrap_samples = 500;  // B
    double quantile = 0.01;     // q, lower quantile of the simulated cosines
    std::uint64_t seed = 1;
    int impact_words = 10;      // ranked words reported per detected change

    void validate() const;
};

struct StabilityPoint {
    int topic = 0;
    int chunk = 0;
    double stability = 1.0;
    double threshold = 0.0;
    bool is_change = false;  // stability < threshold
};

struct WordImpact {
    std::string word;
    double impact = 0.0;
};

struct ChangeReport {
    std::vector<StabilityPoint> points;                 // ordered by (topic, chunk)
    std::vector<std::pair<int, int>> change_points;     // exactly the flagged points
    std::map<std::pair<int, int>, std::vector<WordImpact>> impacts;

    std::string to_json() const;
};

/// Cosine similarity between chunk t's topic-k count vector and the summed
/// counts of chunks (t-z .. t-1). Requires t past the warm-up and t-z >= 0.
double topic_stability(const rolling::RollingModel& model, int k, int t, int z);

/// Empirical lower q-quantile of cosines between the reference and B
/// multinomial draws of the chunk's topic token count from the normalized
/// reference. 0 when the chunk or the reference holds no topic-k tokens.
/// Sample streams derive from (seed, k, t, sample), so the value is
/// independent of evaluation order.
double monitor_threshold(const rolling::RollingModel& model, int k, int t,
                         const MonitorConfig& config);

/// For every word in the union of chunk and reference supports: the change
/// in stability when that coordinate is removed from both vectors. Positive
/// impact marks words that drove the dissimilarity. Top_n by descending
/// impact, ties lexicographic.
std::vector<WordImpact> loo_word_impacts(const rolling::RollingModel& model, int k, int t, int z,
                                         int top_n);

/// Full monitoring sweep. After a change is flagged at (k, t*), topic k's
/// reference window restarts there: subsequent windows are
/// [max(t*, t-z), t-1] until z post-change chunks have accumulated.
/// Requires at least z post-warm-up chunks. Topics are processed
/// independently (in parallel when enabled) with identical results.
ChangeReport detect_changes(const rolling::RollingModel& model, const MonitorConfig& config);

}  // namespace ttm::changes
