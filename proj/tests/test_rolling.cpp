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

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/rolling.hpp"
#include "ttm/rng.hpp"

using namespace ttm;
using corpus::Document;
using rolling::RollingConfig;
using rolling::RollingModel;

namespace {

Document make_doc(std::string id, std::vector<std::string> tokens, const std::string& date) {
    Document d;
    d.id = std::move(id);
    d.tokens = std::move(tokens);
    d.timestamp = corpus::parse_date(date);
    return d;
}

// Yearly corpus over explicit token lists, one sub-list per chunk-year
// starting at 2000. Every document repeats its tokens `reps` times.
corpus::ChunkedCorpus corpus_of(const std::vector<std::vector<std::vector<std::string>>>& years,
                                int reps = 1) {
    corpus::ChunkedCorpus c;
    int id = 0;
    for (std::size_t y = 0; y < years.size(); ++y) {
        for (const auto& tokens : years[y]) {
            std::vector<std::string> repeated;
            for (int r = 0; r < reps; ++r)
                repeated.insert(repeated.end(), tokens.begin(), tokens.end());
            c.documents.push_back(make_doc("d" + std::to_string(id++), repeated,
                                           std::to_string(2000 + y) + "-06-01"));
        }
        if (years[y].empty())
            c.documents.push_back(make_doc("pad" + std::to_string(y), {},
                                           std::to_string(2000 + y) + "-06-01"));
    }
    for (std::size_t i = 0; i < c.documents.size(); ++i) c.doc_pos.emplace(c.documents[i].id, i);
    c.chunks = corpus::chunk_by_period(c.documents, corpus::Period::year);
    c.vocabulary = corpus::build_vocabulary(c.documents, 1);
    return c;
}

RollingConfig basic_config(int K = 1, int warmup = 1, int memory = 1) {
    RollingConfig cfg;
    cfg.base.K = K;
    cfg.base.alpha = 0.1;
    cfg.base.eta = 0.01;
    cfg.base.iterations = 20;
    cfg.base.seed = 11;
    cfg.warmup_chunks = warmup;
    cfg.memory = memory;
    cfg.vocab_min_count = 1;
    return cfg;
}

std::vector<Document> docs_of(const corpus::ChunkedCorpus& c, int t) {
    std::vector<Document> docs;
    for (const auto& id : c.chunks[t].doc_ids) docs.push_back(c.doc(id));
    return docs;
}

}  // namespace

TEST_CASE("init with one warm-up chunk and K=1 assigns everything to topic 0") {
    const auto c = corpus_of({{{"aa", "bb", "aa"}, {"bb", "cc"}}});
    const auto model = RollingModel::init(c, basic_config());
    CHECK(model.last_fitted_chunk() == 0);
    for (const auto& doc : model.record(0).assignments)
        for (auto z : doc) CHECK(z == 0);
    // Chunk phi of a 1-chunk warm-up equals lda::phi of the warm-up fit.
    const auto phis = model.chunk_phi(0);
    lda::LdaConfig lda_cfg = basic_config().base;
    lda_cfg.K = 1;
    const auto direct = lda::fit_lda(
        {{model.vocabulary().id("aa"), model.vocabulary().id("bb"), model.vocabulary().id("aa")},
         {model.vocabulary().id("bb"), model.vocabulary().id("cc")}},
        lda_cfg, 3);
    const auto direct_phi = lda::phi(direct);
    for (std::int32_t w = 0; w < 3; ++w) CHECK(phis[0][w] == direct_phi[0][w]);
}

TEST_CASE("warm-up chunk records partition the joint fit counts") {
    const auto c = corpus_of({{{"aa", "bb"}, {"cc", "aa"}}, {{"bb", "cc", "dd"}}});
    auto cfg = basic_config(2, 2);
    const auto model = RollingModel::init(c, cfg);
    CHECK(model.last_fitted_chunk() == 1);

    // Sum of per-chunk counts equals the full warm-up count matrix.
    const auto& r0 = model.record(0);
    const auto& r1 = model.record(1);
    const std::int32_t V = model.vocabulary().size();
    std::int64_t total = 0;
    for (int k = 0; k < 2; ++k)
        for (std::int32_t w = 0; w < V; ++w)
            total += r0.n_kw[k * V + w] + r1.n_kw[k * V + w];
    CHECK(total == 7);  // all warm-up tokens
}

TEST_CASE("init rejects corpora with fewer chunks than the warm-up") {
    const auto c = corpus_of({{{"aa", "bb"}}});
    CHECK_THROWS_AS(RollingModel::init(c, basic_config(1, 3)), ConfigError);
}

TEST_CASE("same seed and corpus give identical rolling states") {
    const auto c = corpus_of({{{"aa", "bb", "cc"}}, {{"bb", "cc"}}, {{"aa", "dd"}}}, 3);
    const auto cfg = basic_config(2, 1, 2);
    auto a = RollingModel::init(c, cfg);
    auto b = RollingModel::init(c, cfg);
    for (int t = 1; t < 3; ++t) {
        a.update(t, docs_of(c, t), c.chunks[t].label);
        b.update(t, docs_of(c, t), c.chunks[t].label);
    }
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("empty next chunk advances the index and changes nothing else") {
    const auto c = corpus_of({{{"aa", "bb", "aa", "cc"}}});
    auto model = RollingModel::init(c, basic_config(2));
    const auto phi_before = model.chunk_phi(0);
    model.update(1, {});
    CHECK(model.last_fitted_chunk() == 1);
    CHECK(model.record(1).docs.empty());
    CHECK(model.chunk_phi(0) == phi_before);
}

TEST_CASE("update rejects out-of-order chunk indices") {
    const auto c = corpus_of({{{"aa", "bb"}}});
    auto model = RollingModel::init(c, basic_config());
    CHECK_THROWS_AS(model.update(2, {}), ConfigError);
    CHECK_THROWS_AS(model.update(0, {}), ConfigError);
}

TEST_CASE("memory m=1 only includes the immediately previous chunk") {
    // Chunk 0 holds word "ee" exclusively; with m=1 its counts must have
    // zero weight in the memory for chunk 2.
    const auto c = corpus_of({{{"ee", "ee", "ee"}}, {{"aa", "bb"}}, {{"aa", "bb"}}});
    auto model = RollingModel::init(c, basic_config(1, 1, 1));
    model.update(1, docs_of(c, 1));
    const auto memory = model.memory_counts(2);
    const std::int32_t ee = model.vocabulary().id("ee");
    REQUIRE(ee >= 0);
    CHECK(memory[ee] == 0);
    const std::int32_t aa = model.vocabulary().id("aa");
    CHECK(memory[aa] > 0);
}

TEST_CASE("vocabulary shift moves the dominant topic's support") {
    // Topics over {aa,bb} switch to {cc,dd} at chunk 3.
    std::vector<std::vector<std::vector<std::string>>> years;
    for (int t = 0; t < 3; ++t) years.push_back({{"aa", "bb", "aa", "bb"}});
    for (int t = 3; t < 5; ++t) years.push_back({{"cc", "dd", "cc", "dd"}});
    const auto c = corpus_of(years, 10);
    auto model = RollingModel::init(c, basic_config(1, 1, 1));
    for (int t = 1; t < 5; ++t) model.update(t, docs_of(c, t));

    const auto before = model.top_words(2, 0, 2);
    const auto after = model.top_words(4, 0, 2);
    CHECK(before == std::vector<std::string>{"aa", "bb"});
    CHECK(after == std::vector<std::string>{"cc", "dd"});
}

TEST_CASE("chunk_phi rows sum to one and empty topics are uniform") {
    const auto c = corpus_of({{{"aa", "bb", "cc"}}, {{"aa"}}}, 4);
    auto model = RollingModel::init(c, basic_config(3, 1, 1));
    model.update(1, docs_of(c, 1));
    for (int t = 0; t <= 1; ++t) {
        const auto phis = model.chunk_phi(t);
        for (const auto& row : phis) {
            double sum = 0.0;
            for (double x : row) sum += x;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // A topic with no tokens anywhere in window+chunk is uniform.
    auto empty_corpus = corpus_of({{{"aa", "aa"}}});
    auto m2 = RollingModel::init(empty_corpus, basic_config(2, 1, 1));
    m2.update(1, {});
    const auto phis = m2.chunk_phi(1);
    bool found_uniform = false;
    for (const auto& row : phis) {
        if (row[0] == doctest::Approx(1.0 / m2.vocabulary().size())) found_uniform = true;
    }
    CHECK(found_uniform);
}

TEST_CASE("top_words ordering, ties and clamping") {
    const auto c = corpus_of({{{"bb", "bb", "bb", "aa", "aa", "cc"}}});
    const auto model = RollingModel::init(c, basic_config());
    CHECK(model.top_words(0, 0, 2) == std::vector<std::string>{"bb", "aa"});
    // Tie between aa (2) and... cc has 1; test tie via equal counts.
    const auto tie_corpus = corpus_of({{{"bb", "aa", "bb", "aa"}}});
    const auto tie_model = RollingModel::init(tie_corpus, basic_config());
    CHECK(tie_model.top_words(0, 0, 2) == std::vector<std::string>{"aa", "bb"});
    CHECK(model.top_words(0, 0, 100).size() == 3);  // clamped to V
    CHECK_THROWS_AS(model.top_words(0, 0, 0), ConfigError);
    CHECK_THROWS_AS(model.top_words(0, 5, 1), ConfigError);
    CHECK_THROWS_AS(model.top_words(9, 0, 1), ConfigError);
}

TEST_CASE("update is append-only for past records") {
    const auto c = corpus_of({{{"aa", "bb", "cc"}}, {{"bb", "dd"}}, {{"dd", "ee"}}}, 5);
    auto model = RollingModel::init(c, basic_config(2, 1, 1));
    model.update(1, docs_of(c, 1));
    const auto before = nlohmann::json::parse(model.to_json());
    model.update(2, docs_of(c, 2));
    const auto after = nlohmann::json::parse(model.to_json());
    for (int t = 0; t <= 1; ++t) CHECK(before["chunks"][t] == after["chunks"][t]);
}

TEST_CASE("vocabulary ids are stable across updates; new words admitted by threshold") {
    const auto c = corpus_of({{{"aa", "bb", "aa"}}, {{"bb", "cc", "cc", "dd"}}});
    auto cfg = basic_config();
    cfg.vocab_min_count = 2;
    auto model = RollingModel::init(c, cfg);
    const auto ids_before = model.vocabulary().index_of;
    CHECK(model.vocabulary().id("aa") >= 0);
    CHECK(model.vocabulary().id("bb") == -1);  // below threshold in warm-up

    model.update(1, docs_of(c, 1));
    // cc reaches the threshold inside chunk 1; dd and bb do not.
    CHECK(model.vocabulary().id("cc") >= 0);
    CHECK(model.vocabulary().id("dd") == -1);
    for (const auto& [word, id] : ids_before) {
        auto it = model.vocabulary().index_of.find(word);
        REQUIRE(it != model.vocabulary().index_of.end());
        CHECK(it->second == id);
    }
}

TEST_CASE("checkpoint round-trips byte-identically and rejects corruption") {
    const auto c = corpus_of({{{"aa", "bb", "cc"}}, {{"bb", "cc"}}}, 3);
    auto model = RollingModel::init(c, basic_config(2, 1, 1));
    model.update(1, docs_of(c, 1), c.chunks[1].label);
    const auto text = model.to_json();
    const auto loaded = RollingModel::from_json(text);
    CHECK(loaded.to_json() == text);

    CHECK_THROWS_AS(RollingModel::from_json("{oops"), StateError);
    CHECK_THROWS_AS(RollingModel::from_json("{}"), StateError);
    auto j = nlohmann::json::parse(text);
    j["chunks"][0]["assignments"][0][0] = 99;  // topic id out of range
    CHECK_THROWS_AS(RollingModel::from_json(j.dump()), StateError);
    j = nlohmann::json::parse(text);
    j["chunks"][1]["index"] = 5;  // gap
    CHECK_THROWS_AS(RollingModel::from_json(j.dump()), StateError);
}

TEST_CASE("memory-window locality: chunks before t-m do not affect chunk t") {
    // Six chunks, m=2. Two models share records up to chunk 3, but model B's
    // chunk-1 record is surgically replaced via the checkpoint. Chunks >= 4
    // must come out bit-identical because the window never reaches chunk 1.
    std::vector<std::vector<std::vector<std::string>>> years;
    for (int t = 0; t < 4; ++t)
        years.push_back({{"aa", "bb", "cc"}, {"bb", "cc", "dd"}});
    const auto c = corpus_of(years, 6);
    auto cfg = basic_config(2, 2, 2);

    auto model_a = RollingModel::init(c, cfg);
    for (int t = 2; t < 4; ++t) model_a.update(t, docs_of(c, t));
    const std::string snapshot = model_a.to_json();

    auto j = nlohmann::json::parse(snapshot);
    j["chunks"][1]["doc_ids"] = {"edited"};
    j["chunks"][1]["docs"] = {{0, 0, 1}};
    j["chunks"][1]["assignments"] = {{0, 1, 1}};
    auto model_b = RollingModel::from_json(j.dump());

    const std::vector<Document> extra = {make_doc("x1", {"cc", "dd", "cc", "aa"}, "2004-06-01"),
                                         make_doc("x2", {"bb", "bb", "dd"}, "2004-06-01")};
    model_a.update(4, extra);
    model_b.update(4, extra);
    CHECK(model_a.chunk_phi(4) == model_b.chunk_phi(4));
    CHECK(model_a.record(4).assignments == model_b.record(4).assignments);

    model_a.update(5, {});
    model_b.update(5, {});
    CHECK(model_a.chunk_phi(5) == model_b.chunk_phi(5));

    // Sanity: the edit does change chunk 1 itself.
    CHECK(model_a.chunk_phi(1) != model_b.chunk_phi(1));
}

TEST_CASE("prototype warm-up selects a replicate deterministically") {
    const auto c = corpus_of({{{"aa", "bb", "cc", "dd"}, {"aa", "cc"}}}, 8);
    auto cfg = basic_config(2, 1, 1);
    cfg.use_prototype = true;
    cfg.prototype.replicates = 3;
    const auto model = RollingModel::init(c, cfg);
    REQUIRE(model.warmup_selection().has_value());
    CHECK(model.warmup_selection()->pairwise.size() == 3);
    const auto again = RollingModel::init(c, cfg);
    CHECK(again.to_json() == model.to_json());
}
