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

#include "ttm/error.hpp"
#include "ttm/lda.hpp"
#include "ttm/rng.hpp"

using namespace ttm;
using lda::Docs;
using lda::LdaConfig;

namespace {

// Independent count rebuild used to cross-check the fitted state.
void check_state_consistency(const lda::LdaState& state) {
    const int K = state.config().K;
    const std::int32_t V = state.vocab_size();
    std::vector<std::int64_t> n_kw(static_cast<std::size_t>(K) * V, 0);
    std::vector<std::int64_t> n_k(K, 0);
    std::int64_t total = 0;
    for (std::size_t d = 0; d < state.docs().size(); ++d) {
        REQUIRE(state.docs()[d].size() == state.assignments()[d].size());
        std::vector<std::int64_t> n_dk(K, 0);
        for (std::size_t i = 0; i < state.docs()[d].size(); ++i) {
            const auto w = state.docs()[d][i];
            const auto k = state.assignments()[d][i];
            ++n_kw[static_cast<std::size_t>(k) * V + w];
            ++n_k[k];
            ++n_dk[k];
            ++total;
        }
        for (int k = 0; k < K; ++k) CHECK(state.n_dk(d, k) == n_dk[k]);
    }
    std::int64_t total_from_topics = 0;
    for (int k = 0; k < K; ++k) {
        std::int64_t row = 0;
        for (std::int32_t w = 0; w < V; ++w) {
            CHECK(state.n_kw(k, w) == n_kw[static_cast<std::size_t>(k) * V + w]);
            row += state.n_kw(k, w);
        }
        CHECK(row == state.n_k(k));
        CHECK(state.n_k(k) == n_k[k]);
        total_from_topics += state.n_k(k);
    }
    CHECK(total_from_topics == total);
}

}  // namespace

TEST_CASE("K=1 forces all assignments to topic 0 and counts word frequencies") {
    const Docs docs = {{0, 1, 0}, {2, 0}};
    LdaConfig cfg;
    cfg.K = 1;
    cfg.iterations = 3;
    cfg.seed = 42;
    const auto state = lda::fit_lda(docs, cfg, 3);
    for (const auto& doc : state.assignments())
        for (auto z : doc) CHECK(z == 0);
    CHECK(state.n_kw(0, 0) == 3);
    CHECK(state.n_kw(0, 1) == 1);
    CHECK(state.n_kw(0, 2) == 1);
    check_state_consistency(state);
}

TEST_CASE("fit recovers two disjoint-vocabulary topics") {
    // Documents over {0,1} and documents over {2,3}; oracle is the
    // generating partition, checked after the best topic-to-half matching.
    Docs docs;
    rng::Xoshiro256StarStar gen(7);
    for (int d = 0; d < 20; ++d) {
        lda::TokenIds doc;
        const bool first_half = d % 2 == 0;
        for (int i = 0; i < 30; ++i)
            doc.push_back(first_half ? static_cast<std::int32_t>(gen.next_below(2))
                                     : static_cast<std::int32_t>(2 + gen.next_below(2)));
        docs.push_back(doc);
    }
    LdaConfig cfg;
    cfg.K = 2;
    cfg.alpha = 0.1;
    cfg.eta = 0.01;
    cfg.iterations = 200;
    cfg.seed = 3;
    const auto state = lda::fit_lda(docs, cfg, 4);
    const auto p = lda::phi(state);

    // Assign each topic to the half where it puts more mass, then require
    // >= 0.9 of the aligned topic's mass on its own half.
    const double mass0_first = p[0][0] + p[0][1];
    const double best0 = std::max(mass0_first, p[0][2] + p[0][3]);
    const double mass1_first = p[1][0] + p[1][1];
    const double best1 = std::max(mass1_first, p[1][2] + p[1][3]);
    CHECK(best0 >= 0.9);
    CHECK(best1 >= 0.9);
    CHECK((mass0_first > 0.5) != (mass1_first > 0.5));  // opposite halves
    check_state_consistency(state);
}

TEST_CASE("same seed gives identical assignments, different seed differs") {
    Docs docs;
    rng::Xoshiro256StarStar gen(11);
    for (int d = 0; d < 10; ++d) {
        lda::TokenIds doc;
        for (int i = 0; i < 20; ++i) doc.push_back(static_cast<std::int32_t>(gen.next_below(6)));
        docs.push_back(doc);
    }
    LdaConfig cfg;
    cfg.K = 3;
    cfg.iterations = 20;
    cfg.seed = 123;
    const auto a = lda::fit_lda(docs, cfg, 6);
    const auto b = lda::fit_lda(docs, cfg, 6);
    CHECK(a.assignments() == b.assignments());

    cfg.seed = 124;
    const auto c = lda::fit_lda(docs, cfg, 6);
    CHECK(a.assignments() != c.assignments());
}

TEST_CASE("phi closed forms") {
    // Corpus ["a","a","b"], K=1, eta=1, V=2: phi = [3/5, 2/5].
    LdaConfig cfg;
    cfg.K = 1;
    cfg.eta = 1.0;
    cfg.iterations = 1;
    const auto state = lda::fit_lda({{0, 0, 1}}, cfg, 2);
    const auto p = lda::phi(state);
    CHECK(p[0][0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(p[0][1] == doctest::Approx(0.4).epsilon(1e-12));

    // An empty topic yields the uniform row.
    cfg.K = 2;
    const auto empty_topic =
        lda::LdaState::from_assignments({{0, 1}}, cfg, 2, {{0, 0}});
    const auto p2 = lda::phi(empty_topic);
    CHECK(p2[1][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p2[1][1] == doctest::Approx(0.5).epsilon(1e-12));

    for (const auto& row : p2) {
        double sum = 0.0;
        for (double x : row) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("theta closed forms") {
    LdaConfig cfg;
    cfg.K = 2;
    cfg.alpha = 1.0;
    cfg.iterations = 1;

    // Empty document: prior only.
    const auto s1 = lda::LdaState::from_assignments({{}}, cfg, 1, {{}});
    const auto t1 = lda::theta(s1);
    CHECK(t1[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t1[0][1] == doctest::Approx(0.5).epsilon(1e-12));

    // Three tokens all in topic 0: [0.8, 0.2].
    const auto s2 = lda::LdaState::from_assignments({{0, 0, 0}}, cfg, 1, {{0, 0, 0}});
    const auto t2 = lda::theta(s2);
    CHECK(t2[0][0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(t2[0][1] == doctest::Approx(0.2).epsilon(1e-12));

    // K=1: all rows [1.0].
    cfg.K = 1;
    const auto s3 = lda::fit_lda({{0, 0}}, cfg, 1);
    CHECK(lda::theta(s3)[0][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_likelihood closed forms") {
    LdaConfig cfg;
    cfg.K = 3;
    cfg.eta = 0.5;
    cfg.alpha = 0.1;
    cfg.iterations = 1;

    // Zero documents: only the per-topic normalizer constant remains.
    const auto empty = lda::LdaState::from_assignments({}, cfg, 4, {});
    const double expected_const =
        3.0 * (std::lgamma(4 * 0.5) - 4 * std::lgamma(0.5));
    CHECK(lda::log_likelihood(empty) == doctest::Approx(expected_const).epsilon(1e-12));

    // Tiny corpus oracle: tokens (a, a, b), V=2, K=1.
    cfg.K = 1;
    cfg.eta = 0.25;
    const auto tiny = lda::LdaState::from_assignments({{0, 0, 1}}, cfg, 2, {{0, 0, 0}});
    const double eta = 0.25, alpha = 0.1;
    double oracle = std::lgamma(2 * eta) - 2 * std::lgamma(eta);        // constant
    oracle += std::lgamma(2 + eta) + std::lgamma(1 + eta) - std::lgamma(3 + 2 * eta);
    oracle += std::lgamma(1 * alpha) - 1 * std::lgamma(alpha);          // doc prior constant
    oracle += std::lgamma(3 + alpha) - std::lgamma(3 + 1 * alpha);
    CHECK(lda::log_likelihood(tiny) == doctest::Approx(oracle).epsilon(1e-12));

    // Any fitted state: finite.
    cfg.K = 4;
    const auto fitted = lda::fit_lda({{0, 1, 2}, {3, 0}}, cfg, 4);
    CHECK(std::isfinite(lda::log_likelihood(fitted)));
}

TEST_CASE("exchange sanity: permuting topic labels permutes phi rows") {
    Docs docs = {{0, 1, 2, 3}, {1, 2, 0}};
    LdaConfig cfg;
    cfg.K = 3;
    cfg.iterations = 10;
    cfg.seed = 5;
    const auto state = lda::fit_lda(docs, cfg, 4);
    const auto p = lda::phi(state);

    const int perm[3] = {2, 0, 1};
    auto permuted_z = state.assignments();
    for (auto& doc : permuted_z)
        for (auto& z : doc) z = perm[z];
    const auto permuted = lda::LdaState::from_assignments(docs, cfg, 4, permuted_z);
    const auto p2 = lda::phi(permuted);
    for (int k = 0; k < 3; ++k) CHECK(p[k] == p2[perm[k]]);
}

TEST_CASE("rejections") {
    LdaConfig cfg;
    cfg.K = 0;
    CHECK_THROWS_AS(lda::fit_lda({{0}}, cfg, 1), ConfigError);
    cfg.K = 1;
    CHECK_THROWS_AS(lda::fit_lda({{5}}, cfg, 3), ConfigError);  // token id >= V
    cfg.alpha = -1.0;
    CHECK_THROWS_AS(lda::fit_lda({{0}}, cfg, 1), ConfigError);
}

TEST_CASE("serialization round-trips and validates") {
    Docs docs = {{0, 1}, {2}};
    LdaConfig cfg;
    cfg.K = 2;
    cfg.iterations = 5;
    cfg.seed = 17;
    const auto state = lda::fit_lda(docs, cfg, 3);
    const auto text = state.to_json();
    const auto loaded = lda::LdaState::from_json(text);
    CHECK(loaded.assignments() == state.assignments());
    CHECK(loaded.docs() == state.docs());
    CHECK(loaded.to_json() == text);
    check_state_consistency(loaded);

    CHECK_THROWS_AS(lda::LdaState::from_json("{broken"), StateError);
    CHECK_THROWS_AS(lda::LdaState::from_json("{}"), StateError);
}
