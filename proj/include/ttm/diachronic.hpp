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
#include <filesystem>
#include <string>
#include <vector>

#include "ttm/corpus.hpp"

// Diachronic embeddings: skip-gram with negative sampling per time chunk,
// orthogonal Procrustes alignment chaining each chunk onto the previous one,
// neighbor queries and word trajectories with a PCA projection to 2D.
// Alignment applies a rotation to whole spaces, so within-chunk cosines and
// neighbor lists are invariant under it.

namespace ttm::diachronic {

struct SgnsConfig {
    int dim = 50;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025;
    int min_count = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Input vectors of one chunk's trained model, V x dim row-major.
struct EmbeddingMatrix {
    corpus::Vocabulary vocabulary;
    int dim = 0;
    int chunk_index = 0;
    std::vector<double> vectors;

    const double* row(std::int32_t w) const { return vectors.data() + static_cast<std::size_t>(w) * dim; }
    double* row(std::int32_t w) { return vectors.data() + static_cast<std::size_t>(w) * dim; }
};

/// Chained alignment output: chunk 0 is the raw space, every later chunk is
/// rotated onto its aligned predecessor. Rotations are orthogonal within
/// 1e-8 in Frobenius norm.
struct AlignedSeries {
    std::vector<EmbeddingMatrix> chunks;
    std::vector<std::vector<double>> rotations;            // per transition, dim x dim row-major
    std::vector<std::vector<std::string>> shared_vocab;    // per transition
};

/// Trains SGNS over one chunk's documents (windows do not cross document
/// boundaries). Objective per (center, context) pair: log sigma(u.v) plus
/// `negatives` terms log sigma(-u.v') with negatives from the unigram
/// distribution raised to 0.75. Deterministic given config.seed.
EmbeddingMatrix train_sgns(const std::vector<std::vector<std::string>>& docs,
                           const SgnsConfig& config, int chunk_index = 0);

struct ProcrustesResult {
    std::vector<double> rotation;        // dim x dim row-major
    EmbeddingMatrix aligned;             // full source matrix times rotation
    std::vector<std::string> shared;     // intersection vocabulary used for the fit
};

/// Orthogonal Procrustes: the rotation minimizing ||S R - T||_F over the
/// shared-vocabulary rows (unit-normalized for computing R only), solved via
/// SVD of S^T T as R = U V^T. Reflections are permitted unless
/// force_rotation flips the smallest singular direction to reach det +1.
/// Requires at least dim shared words.
ProcrustesResult align_procrustes(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                                  bool force_rotation = false);

/// Chains align_procrustes over consecutive chunks.
AlignedSeries align_series(std::vector<EmbeddingMatrix> embeddings, bool force_rotation = false);

struct Neighbor {
    std::string word;
    double cosine = 0.0;
};

/// Top-n words by cosine similarity, query excluded, ties lexicographic.
std::vector<Neighbor> neighbors(const EmbeddingMatrix& embedding, const std::string& word, int n);

struct TrajectoryPoint {
    int chunk_index = 0;
    std::vector<double> vector;          // aligned embedding of the word
    std::vector<Neighbor> nearest;
    double x = 0.0;                      // PCA projection, fitted on the word's
    double y = 0.0;                      // vectors across all returned chunks
};

struct Trajectory {
    std::string word;
    std::vector<TrajectoryPoint> points;
};

/// One point per chunk whose vocabulary contains the word. Throws QueryError
/// when the word appears in no chunk.
Trajectory trajectory(const AlignedSeries& series, const std::string& word, int neighbors_per_chunk);

/// Binary container (magic, version, V, dim, row-major doubles,
/// little-endian) plus a `<path>.vocab.json` sidecar.
void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& embedding);
EmbeddingMatrix read_embedding(const std::filesystem::path& path);  // throws StateError

}  // namespace ttm::diachronic
