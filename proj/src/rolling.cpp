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

#include "ttm/rolling.hpp"

#include <algorithm>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/rng.hpp"

namespace ttm::rolling {

void RollingConfig::validate() const {
    base.validate();
    if (warmup_chunks < 1) throw ConfigError("rolling: warmup_chunks must be >= 1");
    if (memory < 1) throw ConfigError("rolling: memory must be >= 1");
    if (vocab_min_count < 1) throw ConfigError("rolling: vocab_min_count must be >= 1");
    if (use_prototype) {
        prototype::PrototypeConfig p = prototype;
        p.base = base;
        p.validate();
    }
}

std::int64_t ChunkRecord::topic_total(int k) const {
    std::int64_t total = 0;
    const std::size_t off = static_cast<std::size_t>(k) * vocab_size_at_fit;
    for (std::int32_t w = 0; w < vocab_size_at_fit; ++w) total += n_kw[off + w];
    return total;
}

namespace {

std::vector<std::int32_t> rebuild_chunk_counts(const lda::Docs& docs,
                                               const std::vector<lda::TokenIds>& assignments, int K,
                                               std::int32_t V) {
    std::vector<std::int32_t> n_kw(static_cast<std::size_t>(K) * V, 0);
    for (std::size_t d = 0; d < docs.size(); ++d)
        for (std::size_t i = 0; i < docs[d].size(); ++i)
            ++n_kw[static_cast<std::size_t>(assignments[d][i]) * V + docs[d][i]];
    return n_kw;
}

}  // namespace

lda::Docs RollingModel::map_docs(const std::vector<corpus::Document>& docs) const {
    lda::Docs mapped(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        mapped[d].reserve(docs[d].tokens.size());
        for (const auto& tok : docs[d].tokens) {
            const std::int32_t id = vocabulary_.id(tok);
            if (id >= 0) mapped[d].push_back(id);
        }
    }
    return mapped;
}

void RollingModel::extend_vocabulary(const std::vector<corpus::Document>& docs) {
    std::unordered_map<std::string, std::int64_t> fresh;  // words not yet in the vocabulary
    for (const auto& doc : docs) {
        for (const auto& tok : doc.tokens) {
            const std::int32_t id = vocabulary_.id(tok);
            if (id >= 0) ++vocabulary_.counts[id];
            else ++fresh[tok];
        }
    }
    std::vector<std::pair<std::string, std::int64_t>> admitted;
    for (const auto& [word, count] : fresh)
        if (count >= config_.vocab_min_count) admitted.emplace_back(word, count);
    // Same ordering rule as build_vocabulary, applied to the newcomers only;
    // existing ids stay untouched.
    std::sort(admitted.begin(), admitted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [word, count] : admitted) {
        vocabulary_.index_of.emplace(word, vocabulary_.size());
        vocabulary_.words.push_back(word);
        vocabulary_.counts.push_back(count);
    }
}

RollingModel RollingModel::init(const corpus::ChunkedCorpus& corpus, const RollingConfig& config) {
    config.validate();
    const int warmup = config.warmup_chunks;
    if (static_cast<int>(corpus.chunks.size()) < warmup)
        throw ConfigError("rolling: corpus has " + std::to_string(corpus.chunks.size()) +
                          " chunks, needs at least warmup_chunks = " + std::to_string(warmup));

    RollingModel model;
    model.config_ = config;

    // Vocabulary over the warm-up documents only; later chunks extend it.
    std::vector<corpus::Document> warmup_docs;
    for (int t = 0; t < warmup; ++t)
        for (const auto& id : corpus.chunks[t].doc_ids) warmup_docs.push_back(corpus.doc(id));
    model.vocabulary_ = corpus::build_vocabulary(warmup_docs, config.vocab_min_count);
    if (model.vocabulary_.size() == 0)
        throw ConfigError("rolling: empty warm-up vocabulary (lower vocab_min_count?)");

    const lda::Docs mapped = model.map_docs(warmup_docs);

    lda::LdaState fitted;
    if (config.use_prototype) {
        prototype::PrototypeConfig proto = config.prototype;
        proto.base = config.base;
        auto fit = prototype::fit_prototype(mapped, proto, model.vocabulary_.size());
        model.warmup_selection_ = fit.selection;
        fitted = std::move(fit.runs[fit.selection.chosen]);
    } else {
        fitted = lda::fit_lda(mapped, config.base, model.vocabulary_.size());
    }

    // Split the joint warm-up fit back into per-chunk records.
    std::size_t cursor = 0;
    for (int t = 0; t < warmup; ++t) {
        ChunkRecord rec;
        rec.index = t;
        rec.label = corpus.chunks[t].label;
        rec.doc_ids = corpus.chunks[t].doc_ids;
        rec.vocab_size_at_fit = model.vocabulary_.size();
        for (std::size_t i = 0; i < rec.doc_ids.size(); ++i) {
            rec.docs.push_back(fitted.docs()[cursor]);
            rec.assignments.push_back(fitted.assignments()[cursor]);
            ++cursor;
        }
        rec.n_kw = rebuild_chunk_counts(rec.docs, rec.assignments, config.base.K,
                                        rec.vocab_size_at_fit);
        model.records_.push_back(std::move(rec));
    }
    return model;
}

std::vector<std::int64_t> RollingModel::memory_counts(int t) const {
    const int K = config_.base.K;
    const std::int32_t V = vocabulary_.size();
    std::vector<std::int64_t> memory(static_cast<std::size_t>(K) * V, 0);
    const int from = std::max(0, t - config_.memory);
    for (int s = from; s < t; ++s) {
        const ChunkRecord& rec = records_[s];
        for (int k = 0; k < K; ++k) {
            const std::size_t src = static_cast<std::size_t>(k) * rec.vocab_size_at_fit;
            const std::size_t dst = static_cast<std::size_t>(k) * V;
            for (std::int32_t w = 0; w < rec.vocab_size_at_fit; ++w)
                memory[dst + w] += rec.n_kw[src + w];
        }
    }
    return memory;
}

void RollingModel::update(int chunk_index, const std::vector<corpus::Document>& docs,
                          const std::string& label) {
    const int expected = last_fitted_chunk() + 1;
    if (chunk_index != expected)
        throw ConfigError("rolling: out-of-order chunk " + std::to_string(chunk_index) +
                          " (expected " + std::to_string(expected) + ")");

    extend_vocabulary(docs);
    const std::int32_t V = vocabulary_.size();
    const int K = config_.base.K;
    const int t = chunk_index;

    ChunkRecord rec;
    rec.index = t;
    rec.label = label;
    for (const auto& doc : docs) rec.doc_ids.push_back(doc.id);
    rec.docs = map_docs(docs);
    rec.vocab_size_at_fit = V;

    // Fixed memory from the window, evolving counts for the new chunk.
    const std::vector<std::int64_t> memory = memory_counts(t);
    std::vector<std::int64_t> memory_k(K, 0);
    for (int k = 0; k < K; ++k) {
        const std::size_t off = static_cast<std::size_t>(k) * V;
        for (std::int32_t w = 0; w < V; ++w) memory_k[k] += memory[off + w];
    }
    std::int64_t memory_total = 0;
    for (int k = 0; k < K; ++k) memory_total += memory_k[k];

    rng::Xoshiro256StarStar gen(config_.base.seed ^ static_cast<std::uint64_t>(chunk_index));

    // Initial topics from the memory marginal (uniform when memory is empty).
    rec.assignments.resize(rec.docs.size());
    for (std::size_t d = 0; d < rec.docs.size(); ++d) {
        rec.assignments[d].resize(rec.docs[d].size());
        for (auto& z : rec.assignments[d]) {
            if (memory_total == 0) {
                z = static_cast<std::int32_t>(gen.next_below(K));
            } else {
                double u = gen.next_double() * static_cast<double>(memory_total);
                int pick = K - 1;
                for (int k = 0; k < K; ++k) {
                    u -= static_cast<double>(memory_k[k]);
                    if (u < 0.0) {
                        pick = k;
                        break;
                    }
                }
                z = pick;
            }
        }
    }

    std::vector<std::int32_t> n_kw_new(static_cast<std::size_t>(K) * V, 0);
    std::vector<std::int32_t> n_k_new(K, 0);
    std::vector<std::int32_t> n_dk(rec.docs.size() * K, 0);
    for (std::size_t d = 0; d < rec.docs.size(); ++d) {
        for (std::size_t i = 0; i < rec.docs[d].size(); ++i) {
            const std::int32_t w = rec.docs[d][i];
            const std::int32_t k = rec.assignments[d][i];
            ++n_kw_new[static_cast<std::size_t>(k) * V + w];
            ++n_k_new[k];
            ++n_dk[d * K + k];
        }
    }

    const double alpha = config_.base.alpha;
    const double eta = config_.base.eta;
    const double V_eta = static_cast<double>(V) * eta;
    std::vector<double> weight(K);

    for (int sweep = 0; sweep < config_.base.iterations; ++sweep) {
        for (std::size_t d = 0; d < rec.docs.size(); ++d) {
            const auto& doc = rec.docs[d];
            auto& z_d = rec.assignments[d];
            for (std::size_t i = 0; i < doc.size(); ++i) {
                const std::int32_t w = doc[i];
                const std::int32_t old_k = z_d[i];
                --n_dk[d * K + old_k];
                --n_kw_new[static_cast<std::size_t>(old_k) * V + w];
                --n_k_new[old_k];

                double total = 0.0;
                for (int k = 0; k < K; ++k) {
                    const std::size_t off = static_cast<std::size_t>(k) * V + w;
                    const double wk = (n_dk[d * K + k] + alpha) *
                                      (static_cast<double>(memory[off]) + n_kw_new[off] + eta) /
                                      (static_cast<double>(memory_k[k]) + n_k_new[k] + V_eta);
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
                ++n_kw_new[static_cast<std::size_t>(new_k) * V + w];
                ++n_k_new[new_k];
            }
        }
    }

    rec.n_kw = std::move(n_kw_new);
    records_.push_back(std::move(rec));
}

const ChunkRecord& RollingModel::record(int t) const {
    if (t < 0 || t > last_fitted_chunk())
        throw ConfigError("rolling: chunk index " + std::to_string(t) + " out of range");
    return records_[t];
}

std::vector<std::vector<double>> RollingModel::chunk_phi(int t) const {
    const ChunkRecord& rec = record(t);
    const int K = config_.base.K;
    const std::int32_t V = vocabulary_.size();
    const double eta = config_.base.eta;
    const double V_eta = static_cast<double>(V) * eta;

    const std::vector<std::int64_t> memory = memory_counts(t);
    std::vector<std::vector<double>> result(K, std::vector<double>(V));
    for (int k = 0; k < K; ++k) {
        std::vector<std::int64_t> counts(V, 0);
        const std::size_t mem_off = static_cast<std::size_t>(k) * V;
        for (std::int32_t w = 0; w < V; ++w) counts[w] = memory[mem_off + w];
        const std::size_t own_off = static_cast<std::size_t>(k) * rec.vocab_size_at_fit;
        for (std::int32_t w = 0; w < rec.vocab_size_at_fit; ++w) counts[w] += rec.n_kw[own_off + w];

        std::int64_t total = 0;
        for (std::int32_t w = 0; w < V; ++w) total += counts[w];
        const double denom = static_cast<double>(total) + V_eta;
        for (std::int32_t w = 0; w < V; ++w)
            result[k][w] = (static_cast<double>(counts[w]) + eta) / denom;
    }
    return result;
}

std::vector<std::pair<std::string, double>> RollingModel::top_words_scored(int t, int k,
                                                                           int n) const {
    if (k < 0 || k >= config_.base.K) throw ConfigError("rolling: topic index out of range");
    if (n < 1) throw ConfigError("rolling: top_words needs n >= 1");
    const auto phis = chunk_phi(t);
    const auto& row = phis[k];
    const std::int32_t V = vocabulary_.size();
    std::vector<std::int32_t> order(V);
    for (std::int32_t w = 0; w < V; ++w) order[w] = w;
    std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        return vocabulary_.words[a] < vocabulary_.words[b];
    });
    const std::int32_t take = std::min<std::int32_t>(n, V);
    std::vector<std::pair<std::string, double>> words;
    words.reserve(take);
    for (std::int32_t i = 0; i < take; ++i)
        words.emplace_back(vocabulary_.words[order[i]], row[order[i]]);
    return words;
}

std::vector<std::string> RollingModel::top_words(int t, int k, int n) const {
    const auto scored = top_words_scored(t, k, n);
    std::vector<std::string> words;
    words.reserve(scored.size());
    for (const auto& [word, prob] : scored) words.push_back(word);
    return words;
}

std::string RollingModel::to_json() const {
    nlohmann::json j;
    j["format"] = "ttm-rolling-checkpoint";
    j["version"] = 1;
    j["config"] = {
        {"base",
         {{"K", config_.base.K},
          {"alpha", config_.base.alpha},
          {"eta", config_.base.eta},
          {"iterations", config_.base.iterations},
          {"seed", config_.base.seed}}},
        {"warmup_chunks", config_.warmup_chunks},
        {"memory", config_.memory},
        {"vocab_min_count", config_.vocab_min_count},
        {"use_prototype", config_.use_prototype},
        {"prototype",
         {{"replicates", config_.prototype.replicates},
          {"word_prob_threshold", config_.prototype.word_prob_threshold}}}};
    j["vocabulary"] = {{"words", vocabulary_.words},
                       {"counts", vocabulary_.counts},
                       {"min_count", vocabulary_.min_count}};
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& rec : records_) {
        chunks.push_back({{"index", rec.index},
                          {"label", rec.label},
                          {"doc_ids", rec.doc_ids},
                          {"docs", rec.docs},
                          {"assignments", rec.assignments},
                          {"vocab_size", rec.vocab_size_at_fit}});
    }
    j["chunks"] = std::move(chunks);
    return j.dump();
}

RollingModel RollingModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("rolling checkpoint: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ttm-rolling-checkpoint")
            throw StateError("rolling checkpoint: unrecognized format tag");

        RollingModel model;
        const auto& jc = j.at("config");
        model.config_.base.K = jc.at("base").at("K").get<int>();
        model.config_.base.alpha = jc.at("base").at("alpha").get<double>();
        model.config_.base.eta = jc.at("base").at("eta").get<double>();
        model.config_.base.iterations = jc.at("base").at("iterations").get<int>();
        model.config_.base.seed = jc.at("base").at("seed").get<std::uint64_t>();
        model.config_.warmup_chunks = jc.at("warmup_chunks").get<int>();
        model.config_.memory = jc.at("memory").get<int>();
        model.config_.vocab_min_count = jc.at("vocab_min_count").get<int>();
        model.config_.use_prototype = jc.at("use_prototype").get<bool>();
        model.config_.prototype.replicates = jc.at("prototype").at("replicates").get<int>();
        model.config_.prototype.word_prob_threshold =
            jc.at("prototype").at("word_prob_threshold").get<double>();
        model.config_.prototype.base = model.config_.base;
        model.config_.validate();

        const auto& jv = j.at("vocabulary");
        model.vocabulary_.words = jv.at("words").get<std::vector<std::string>>();
        model.vocabulary_.counts = jv.at("counts").get<std::vector<std::int64_t>>();
        model.vocabulary_.min_count = jv.at("min_count").get<int>();
        if (model.vocabulary_.words.size() != model.vocabulary_.counts.size())
            throw StateError("rolling checkpoint: vocabulary words/counts size mismatch");
        for (std::size_t i = 0; i < model.vocabulary_.words.size(); ++i) {
            if (!model.vocabulary_.index_of.emplace(model.vocabulary_.words[i],
                                                    static_cast<std::int32_t>(i)).second)
                throw StateError("rolling checkpoint: duplicate vocabulary word \"" +
                                 model.vocabulary_.words[i] + "\"");
        }

        const int K = model.config_.base.K;
        int expected_index = 0;
        for (const auto& jrec : j.at("chunks")) {
            ChunkRecord rec;
            rec.index = jrec.at("index").get<int>();
            if (rec.index != expected_index)
                throw StateError("rolling checkpoint: chunk records have gaps");
            ++expected_index;
            rec.label = jrec.at("label").get<std::string>();
            rec.doc_ids = jrec.at("doc_ids").get<std::vector<std::string>>();
            rec.docs = jrec.at("docs").get<lda::Docs>();
            rec.assignments = jrec.at("assignments").get<std::vector<lda::TokenIds>>();
            rec.vocab_size_at_fit = jrec.at("vocab_size").get<std::int32_t>();
            if (rec.vocab_size_at_fit < 0 || rec.vocab_size_at_fit > model.vocabulary_.size())
                throw StateError("rolling checkpoint: chunk vocab_size out of range");
            if (rec.docs.size() != rec.assignments.size() || rec.docs.size() != rec.doc_ids.size())
                throw StateError("rolling checkpoint: docs/assignments/doc_ids size mismatch");
            for (std::size_t d = 0; d < rec.docs.size(); ++d) {
                if (rec.docs[d].size() != rec.assignments[d].size())
                    throw StateError("rolling checkpoint: token/assignment length mismatch");
                for (std::int32_t w : rec.docs[d])
                    if (w < 0 || w >= rec.vocab_size_at_fit)
                        throw StateError("rolling checkpoint: token id out of range");
                for (std::int32_t z : rec.assignments[d])
                    if (z < 0 || z >= K) throw StateError("rolling checkpoint: topic id out of range");
            }
            rec.n_kw = rebuild_chunk_counts(rec.docs, rec.assignments, K, rec.vocab_size_at_fit);
            model.records_.push_back(std::move(rec));
        }
        if (model.records_.empty()) throw StateError("rolling checkpoint: no chunk records");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("rolling checkpoint: missing or mistyped field: ") + e.what());
    } catch (const ConfigError& e) {
        throw StateError(std::string("rolling checkpoint: invalid config: ") + e.what());
    }
}

}  // namespace ttm::rolling
