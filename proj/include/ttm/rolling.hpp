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
#include <optional>
#include <string>
#include <vector>

#include "ttm/corpus.hpp"
#include "ttm/lda.hpp"
#include "ttm/prototype.hpp"

// Rolling LDA: an initial fit over warm-up chunks, then chunk-by-chunk
// updates where new tokens are sampled against a fixed memory of the last m
// chunks' topic-word counts. History is append-only: stored assignments and
// counts of past chunks never change. Updates are strictly sequential per
// model; distinct models may progress concurrently.

namespace ttm::rolling {

struct RollingConfig {
    lda::LdaConfig base;
    int warmup_chunks = 1;
    int memory = 1;              // m, in chunks
    int vocab_min_count = 1;
    bool use_prototype = false;
    prototype::PrototypeConfig prototype;  // base is overridden by `base` at fit time

    void validate() const;
};

/// One fitted chunk: its documents as token ids over the vocabulary as of
/// that chunk, their topic assignments, and the induced topic-word counts.
struct ChunkRecord {
    int index = 0;
    std::string label;
    std::vector<std::string> doc_ids;
    lda::Docs docs;
    std::vector<lda::TokenIds> assignments;
    std::int32_t vocab_size_at_fit = 0;
    std::vector<std::int32_t> n_kw;  // K x vocab_size_at_fit, rebuilt from assignments

    std::int64_t topic_total(int k) const;  // sum_w n_kw[k][w]
};

class RollingModel {
public:
    /// Builds the vocabulary from the warm-up chunks, fits one LDA over all
    /// warm-up documents (a prototype selection when configured) and stores
    /// per-chunk records. Requires corpus.chunks.size() >= warmup_chunks.
    static RollingModel init(const corpus::ChunkedCorpus& corpus, const RollingConfig& config);

    /// Appends chunk `chunk_index` (must equal last_fitted_chunk()+1):
    /// extends the vocabulary with new words reaching vocab_min_count inside
    /// this chunk (existing ids never change), then Gibbs-samples the new
    /// tokens against the memory window. Per-chunk seed: base.seed XOR index.
    void update(int chunk_index, const std::vector<corpus::Document>& docs,
                const std::string& label = "");

    int last_fitted_chunk() const { return static_cast<int>(records_.size()) - 1; }
    const RollingConfig& config() const { return config_; }
    const corpus::Vocabulary& vocabulary() const { return vocabulary_; }
    const std::vector<ChunkRecord>& records() const { return records_; }
    const ChunkRecord& record(int t) const;

    /// Sum of the topic-word counts of chunks (t-m .. t-1), zero-padded to
    /// the current vocabulary. K x V row-major.
    std::vector<std::int64_t> memory_counts(int t) const;

    /// Smoothed topic-word distributions of chunk t over memory + own
    /// counts; same normalization as lda::phi.
    std::vector<std::vector<double>> chunk_phi(int t) const;

    /// n words of topic k with the highest chunk_phi mass, ties lexicographic.
    std::vector<std::string> top_words(int t, int k, int n) const;

    /// top_words with each word's chunk_phi probability attached.
    std::vector<std::pair<std::string, double>> top_words_scored(int t, int k, int n) const;

    /// Selection metadata of the warm-up prototype fit, when one was used.
    const std::optional<prototype::PrototypeSelection>& warmup_selection() const {
        return warmup_selection_;
    }

    /// Checkpoint: config, vocabulary, per-chunk records. Counts are rebuilt
    /// on load and the result validated.
    std::string to_json() const;
    static RollingModel from_json(const std::string& text);  // throws StateError

private:
    RollingConfig config_;
    corpus::Vocabulary vocabulary_;  // growing; ids stable once assigned
    std::vector<ChunkRecord> records_;
    std::optional<prototype::PrototypeSelection> warmup_selection_;

    void extend_vocabulary(const std::vector<corpus::Document>& docs);
    lda::Docs map_docs(const std::vector<corpus::Document>& docs) const;
};

}  // namespace ttm::rolling
