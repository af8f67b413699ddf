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

#include "ttm/lda.hpp"

// Replicate selection: run R independent LDA fits and keep the most central
// one under pairwise topic-matching similarity. Similarity between topics is
// thresholded Jaccard over above-threshold word sets; greedy matching pairs
// the topics of two runs.

namespace ttm::prototype {

struct PrototypeConfig {
    int replicates = 5;                     // R
    double word_prob_threshold = 0.0;       // c; <= 0 means 1/V at fit time
    lda::LdaConfig base;                    // replicate r is fit with seed base.seed + r

    void validate() const;
};

/// 1/V, the vocabulary-relative default for the word probability threshold.
double default_threshold(std::int32_t vocab_size);

struct TopicMatch {
    int a = 0;
    int b = 0;
    double similarity = 0.0;
};

struct PrototypeSelection {
    int chosen = 0;                               // argmax of mean_similarity, ties -> lowest index
    std::vector<double> mean_similarity;          // per replicate, mean over the others
    std::vector<std::vector<double>> pairwise;    // R x R, symmetric, unit diagonal

    std::string to_json() const;
};

/// Thresholded Jaccard similarity of two topic-word distributions.
double topic_similarity(const std::vector<double>& phi_a, const std::vector<double>& phi_b, double c);

/// Greedy maximum matching between two equal-sized topic sets: repeatedly
/// pick the unmatched pair with the highest similarity, ties resolved by
/// lowest (a, b). Result is sorted by a-index.
std::vector<TopicMatch> match_topics(const std::vector<std::vector<double>>& phis_a,
                                     const std::vector<std::vector<double>>& phis_b, double c);

/// Mean matched-pair similarity between two fitted runs (same K and V).
double replicate_similarity(const lda::LdaState& run_a, const lda::LdaState& run_b, double c);

/// Most central replicate by mean pairwise similarity. Requires >= 2 runs
/// with homogeneous K and vocabulary.
PrototypeSelection select_prototype(const std::vector<lda::LdaState>& runs, double c);

struct PrototypeFit {
    PrototypeSelection selection;
    std::vector<lda::LdaState> runs;

    const lda::LdaState& chosen_run() const { return runs[selection.chosen]; }
};

/// Fits R replicates (seeds base.seed + r, independent, run concurrently)
/// and selects the prototype.
PrototypeFit fit_prototype(const lda::Docs& docs, const PrototypeConfig& config,
                           std::int32_t vocab_size);

}  // namespace ttm::prototype
