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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "ttm/changes.hpp"
#include "ttm/error.hpp"
#include "ttm/rng.hpp"

using namespace ttm;
using changes::MonitorConfig;

namespace {

// Builds a rolling state with exact per-chunk topic-word counts through the
// checkpoint loader: counts[t][k][w] tokens of word w assigned to topic k.
rolling::RollingModel state_from_counts(
    const std::vector<std::string>& words,
    const std::vector<std::vector<std::vector<std::int64_t>>>& counts, int warmup = 1,
    int memory = 1) {
    const int K = static_cast<int>(counts.front().size());
    nlohmann::json j;
    j["format"] = "ttm-rolling-checkpoint";
    j["version"] = 1;
    j["config"] = {{"base",
                    {{"K", K}, {"alpha", 0.1}, {"eta", 0.01}, {"iterations", 1}, {"seed", 1}}},
                   {"warmup_chunks", warmup},
                   {"memory", memory},
                   {"vocab_min_count", 1},
                   {"use_prototype", false},
                   {"prototype", {{"replicates", 2}, {"word_prob_threshold", 0.0}}}};
    std::vector<std::int64_t> word_counts(words.size(), 0);
    j["vocabulary"] = {{"words", words}, {"counts", word_counts}, {"min_count", 1}};
    nlohmann::json chunks = nlohmann::json::array();
    for (std::size_t t = 0; t < counts.size(); ++t) {
        std::vector<std::int32_t> doc, assign;
        for (int k = 0; k < K; ++k)
            for (std::size_t w = 0; w < words.size(); ++w)
                for (std::int64_t n = 0; n < counts[t][k][w]; ++n) {
                    doc.push_back(static_cast<std::int32_t>(w));
                    assign.push_back(k);
                }
        chunks.push_back({{"index", static_cast<int>(t)},
                          {"label", "c" + std::to_string(t)},
                          {"doc_ids", {"doc" + std::to_string(t)}},
                          {"docs", {doc}},
                          {"assignments", {assign}},
                          {"vocab_size", static_cast<std::int32_t>(words.size())}});
    }
    j["chunks"] = std::move(chunks);
    return rolling::RollingModel::from_json(j.dump());
}

MonitorConfig config_of(int z, int B, double q, std::uint64_t seed = 77) {
    MonitorConfig cfg;
    cfg.reference_window = z;
    cfg.bootstrap_samples = B;
    cfg.quantile = q;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("topic_stability closed forms") {
    // Chunk (1,1,0) against reference (1,0,1): cosine 0.5.
    const auto m = state_from_counts({"aa", "bb", "cc"},
                                     {{{1, 0, 1}}, {{1, 1, 0}}});
    CHECK(changes::topic_stability(m, 0, 1, 1) == doctest::Approx(0.5));

    // Proportional vectors: 1.
    const auto prop = state_from_counts({"aa", "bb"}, {{{2, 4}}, {{1, 2}}});
    CHECK(changes::topic_stability(prop, 0, 1, 1) == doctest::Approx(1.0));

    // Disjoint supports: 0.
    const auto disj = state_from_counts({"aa", "bb"}, {{{3, 0}}, {{0, 5}}});
    CHECK(changes::topic_stability(disj, 0, 1, 1) == 0.0);
}

TEST_CASE("topic_stability zero-vector conventions") {
    // Both empty: 1. One empty: 0.
    const auto both = state_from_counts({"aa"}, {{{0}}, {{0}}});
    CHECK(changes::topic_stability(both, 0, 1, 1) == 1.0);
    const auto chunk_only = state_from_counts({"aa"}, {{{0}}, {{4}}});
    CHECK(changes::topic_stability(chunk_only, 0, 1, 1) == 0.0);
    const auto ref_only = state_from_counts({"aa"}, {{{4}}, {{0}}});
    CHECK(changes::topic_stability(ref_only, 0, 1, 1) == 0.0);
}

TEST_CASE("topic_stability is scale invariant") {
    const auto a = state_from_counts({"aa", "bb", "cc"}, {{{2, 3, 1}}, {{1, 2, 0}}});
    const auto b = state_from_counts({"aa", "bb", "cc"}, {{{2, 3, 1}}, {{3, 6, 0}}});  // chunk x3
    const auto c = state_from_counts({"aa", "bb", "cc"}, {{{8, 12, 4}}, {{1, 2, 0}}});  // ref x4
    const double base = changes::topic_stability(a, 0, 1, 1);
    CHECK(changes::topic_stability(b, 0, 1, 1) == doctest::Approx(base).epsilon(1e-12));
    CHECK(changes::topic_stability(c, 0, 1, 1) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("topic_stability rejects bad indices") {
    const auto m = state_from_counts({"aa"}, {{{1}}, {{1}}});
    CHECK_THROWS_AS(changes::topic_stability(m, 0, 0, 1), ConfigError);   // inside warm-up
    CHECK_THROWS_AS(changes::topic_stability(m, 0, 1, 2), ConfigError);   // window before 0
    CHECK_THROWS_AS(changes::topic_stability(m, 1, 1, 1), ConfigError);   // bad topic
    CHECK_THROWS_AS(changes::topic_stability(m, 0, 7, 1), ConfigError);   // bad chunk
}

TEST_CASE("monitor_threshold degenerate reference gives 1") {
    // Reference concentrated on one word: every sample is parallel.
    const auto m = state_from_counts({"aa", "bb"}, {{{9, 0}}, {{4, 0}}});
    CHECK(changes::monitor_threshold(m, 0, 1, config_of(1, 200, 0.01)) == doctest::Approx(1.0));
}

TEST_CASE("monitor_threshold zero chunk or zero reference -> 0") {
    const auto empty_chunk = state_from_counts({"aa"}, {{{5}}, {{0}}});
    CHECK(changes::monitor_threshold(empty_chunk, 0, 1, config_of(1, 50, 0.1)) == 0.0);
    const auto empty_ref = state_from_counts({"aa"}, {{{0}}, {{5}}});
    CHECK(changes::monitor_threshold(empty_ref, 0, 1, config_of(1, 50, 0.1)) == 0.0);
}

TEST_CASE("monitor_threshold is deterministic") {
    const auto m = state_from_counts({"aa", "bb", "cc"}, {{{5, 3, 2}}, {{4, 4, 2}}});
    const auto cfg = config_of(1, 400, 0.05);
    CHECK(changes::monitor_threshold(m, 0, 1, cfg) == changes::monitor_threshold(m, 0, 1, cfg));
}

TEST_CASE("monitor_threshold matches the exhaustive multinomial oracle") {
    // p = (0.5, 0.5), n_t = 2. Outcomes: (2,0) and (0,2) with cosine
    // 1/sqrt(2) (probability 1/2 combined), (1,1) with cosine 1
    // (probability 1/2). Lower quantiles: q <= 0.5 -> 1/sqrt(2), q > 0.5 -> 1.
    const auto m = state_from_counts({"aa", "bb"}, {{{1, 1}}, {{1, 1}}});
    const double lo = 1.0 / std::sqrt(2.0);
    CHECK(changes::monitor_threshold(m, 0, 1, config_of(1, 5000, 0.01)) ==
          doctest::Approx(lo).epsilon(0.02));
    CHECK(changes::monitor_threshold(m, 0, 1, config_of(1, 5000, 0.40)) ==
          doctest::Approx(lo).epsilon(0.02));
    CHECK(changes::monitor_threshold(m, 0, 1, config_of(1, 5000, 0.80)) ==
          doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("monitor_threshold is monotone in q and bounded") {
    const auto m = state_from_counts({"aa", "bb", "cc", "dd"},
                                     {{{6, 5, 4, 3}}, {{5, 5, 4, 4}}});
    double prev = -1.0;
    for (double q : {0.01, 0.05, 0.2, 0.5, 0.9}) {
        const double thr = changes::monitor_threshold(m, 0, 1, config_of(1, 500, q));
        CHECK(thr >= prev);
        CHECK(thr >= 0.0);
        CHECK(thr <= 1.0);
        prev = thr;
    }
}

TEST_CASE("loo_word_impacts hand-computed example") {
    // Chunk (1,0), reference (1,1): stability 1/sqrt(2). Removing word 2
    // makes the vectors parallel (impact +0.2929...), removing word 1 leaves
    // (0) vs (1) which scores 0 one-sidedly (impact -0.7071...).
    const auto m = state_from_counts({"aa", "bb"}, {{{1, 1}}, {{1, 0}}});
    const auto impacts = changes::loo_word_impacts(m, 0, 1, 1, 10);
    REQUIRE(impacts.size() == 2);
    CHECK(impacts[0].word == "bb");
    CHECK(impacts[0].impact == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)));
    CHECK(impacts[1].word == "aa");
    CHECK(impacts[1].impact == doctest::Approx(0.0 - 1.0 / std::sqrt(2.0)));
}

TEST_CASE("loo_word_impacts: absent words are not ranked; proportional vectors give none positive") {
    const auto m = state_from_counts({"aa", "bb", "zz"}, {{{1, 1, 0}}, {{1, 0, 0}}});
    const auto impacts = changes::loo_word_impacts(m, 0, 1, 1, 10);
    for (const auto& wi : impacts) CHECK(wi.word != "zz");

    const auto prop = state_from_counts({"aa", "bb"}, {{{2, 4}}, {{1, 2}}});
    for (const auto& wi : changes::loo_word_impacts(prop, 0, 1, 1, 10))
        CHECK(wi.impact <= doctest::Approx(0.0));
}

TEST_CASE("detect_changes: constant stream has stability 1 and no flags") {
    std::vector<std::vector<std::vector<std::int64_t>>> counts(8, {{5, 3, 2}});
    const auto m = state_from_counts({"aa", "bb", "cc"}, counts);
    const auto report = changes::detect_changes(m, config_of(2, 200, 0.05));
    CHECK(report.change_points.empty());
    for (const auto& p : report.points) {
        CHECK(p.stability == doctest::Approx(1.0));
        CHECK_FALSE(p.is_change);
    }
}

TEST_CASE("detect_changes flags an injected swap and restarts the window") {
    // Pure regime A for chunks 0..3, pure regime B from chunk 4 on. Exactly
    // one flag, at the switch; the restarted window keeps the rest quiet.
    std::vector<std::vector<std::vector<std::int64_t>>> counts;
    for (int t = 0; t < 4; ++t) counts.push_back({{20, 10, 0, 0}});
    for (int t = 4; t < 9; ++t) counts.push_back({{0, 0, 20, 10}});
    const auto m = state_from_counts({"aa", "bb", "cc", "dd"}, counts);
    const auto report = changes::detect_changes(m, config_of(2, 300, 0.02));
    CHECK(report.change_points ==
          std::vector<std::pair<int, int>>{{0, 4}});
    // Impacts for the flagged point exist and lead with regime-B words.
    const auto it = report.impacts.find({0, 4});
    REQUIRE(it != report.impacts.end());
    CHECK((it->second.front().word == "cc" || it->second.front().word == "dd"));
}

TEST_CASE("detect_changes flag list matches its own points") {
    std::vector<std::vector<std::vector<std::int64_t>>> counts;
    rng::Xoshiro256StarStar gen(3);
    for (int t = 0; t < 7; ++t) {
        std::vector<std::int64_t> row(4);
        for (auto& x : row) x = static_cast<std::int64_t>(gen.next_below(20));
        counts.push_back({row});
    }
    const auto m = state_from_counts({"aa", "bb", "cc", "dd"}, counts);
    const auto report = changes::detect_changes(m, config_of(2, 150, 0.1));
    std::vector<std::pair<int, int>> recomputed;
    for (const auto& p : report.points)
        if (p.is_change) recomputed.emplace_back(p.topic, p.chunk);
    CHECK(report.change_points == recomputed);

    const auto again = changes::detect_changes(m, config_of(2, 150, 0.1));
    CHECK(again.to_json() == report.to_json());
}

TEST_CASE("detect_changes requires z post-warm-up chunks") {
    const auto m = state_from_counts({"aa"}, {{{1}}, {{1}}});
    CHECK_THROWS_AS(changes::detect_changes(m, config_of(4, 10, 0.1)), ConfigError);
}

TEST_CASE("stationary multinomial stream stays under the 2q false-alarm bound") {
    // 20 seeded runs of an 8-chunk stream whose chunks are multinomial draws
    // from one fixed distribution; the aggregate flag rate must be <= 2q.
    const std::vector<double> p = {0.3, 0.25, 0.2, 0.15, 0.1};
    const int n_per_chunk = 200;
    const double q = 0.05;
    int points = 0, flags = 0;
    for (std::uint64_t run = 0; run < 20; ++run) {
        rng::Xoshiro256StarStar gen(1000 + run);
        std::vector<std::vector<std::vector<std::int64_t>>> counts;
        for (int t = 0; t < 8; ++t) {
            std::vector<std::int64_t> row(p.size(), 0);
            for (int i = 0; i < n_per_chunk; ++i) {
                double u = gen.next_double();
                std::size_t w = 0;
                for (; w + 1 < p.size(); ++w) {
                    if (u < p[w]) break;
                    u -= p[w];
                }
                ++row[w];
            }
            counts.push_back({row});
        }
        const auto m = state_from_counts({"aa", "bb", "cc", "dd", "ee"}, counts);
        const auto report = changes::detect_changes(m, config_of(2, 300, q, 500 + run));
        points += static_cast<int>(report.points.size());
        flags += static_cast<int>(report.change_points.size());
    }
    CHECK(points == 20 * 6);
    CHECK(static_cast<double>(flags) / points <= 2.0 * q);
}
