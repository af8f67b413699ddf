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

#include "ttm/diachronic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/io_util.hpp"
#include "ttm/kernels.hpp"
#include "ttm/rng.hpp"

namespace ttm::diachronic {

void SgnsConfig::validate() const {
    if (dim < 2) throw ConfigError("sgns: dim must be >= 2");
    if (window < 1) throw ConfigError("sgns: window must be >= 1");
    if (negatives < 1) throw ConfigError("sgns: negatives must be >= 1");
    if (epochs < 1) throw ConfigError("sgns: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("sgns: learning_rate must be > 0");
    if (min_count < 1) throw ConfigError("sgns: min_count must be >= 1");
}

namespace {

double sigmoid(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

EmbeddingMatrix train_sgns(const std::vector<std::vector<std::string>>& docs,
                           const SgnsConfig& config, int chunk_index) {
    config.validate();

    std::vector<corpus::Document> wrapped(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) wrapped[d].tokens = docs[d];
    corpus::Vocabulary vocab = corpus::build_vocabulary(wrapped, config.min_count);
    if (vocab.size() == 0)
        throw ConfigError("sgns: empty effective vocabulary after min_count filtering");

    std::vector<std::vector<std::int32_t>> ids(docs.size());
    std::int64_t total_tokens = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& tok : docs[d]) {
            const std::int32_t id = vocab.id(tok);
            if (id >= 0) ids[d].push_back(id);
        }
        total_tokens += static_cast<std::int64_t>(ids[d].size());
    }

    const std::int32_t V = vocab.size();
    const int dim = config.dim;

    // Negative sampling from unigram^0.75 via a cumulative table.
    std::vector<double> noise_cdf(V);
    double acc = 0.0;
    for (std::int32_t w = 0; w < V; ++w) {
        acc += std::pow(static_cast<double>(vocab.counts[w]), 0.75);
        noise_cdf[w] = acc;
    }

    rng::Xoshiro256StarStar gen(config.seed);

    EmbeddingMatrix emb;
    emb.vocabulary = vocab;
    emb.dim = dim;
    emb.chunk_index = chunk_index;
    emb.vectors.resize(static_cast<std::size_t>(V) * dim);
    const double spread = 0.5 / static_cast<double>(dim);
    for (auto& x : emb.vectors) x = gen.next_in(-spread, spread);
    std::vector<double> context(static_cast<std::size_t>(V) * dim, 0.0);

    auto& input = emb.vectors;
    std::vector<double> grad_acc(dim);
    const std::int64_t schedule = config.epochs * total_tokens;
    std::int64_t processed = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto& sentence : ids) {
            const int len = static_cast<int>(sentence.size());
            for (int pos = 0; pos < len; ++pos) {
                const double progress = static_cast<double>(processed) / static_cast<double>(schedule + 1);
                const double lr = config.learning_rate * std::max(1.0 - progress, 1e-4);
                ++processed;

                const std::int32_t center = sentence[pos];
                double* u = input.data() + static_cast<std::size_t>(center) * dim;

                for (int off = -config.window; off <= config.window; ++off) {
                    if (off == 0) continue;
                    const int q = pos + off;
                    if (q < 0 || q >= len) continue;
                    const std::int32_t ctx = sentence[q];

                    std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
                    for (int s = 0; s < config.negatives + 1; ++s) {
                        std::int32_t target;
                        double label;
                        if (s == 0) {
                            target = ctx;
                            label = 1.0;
                        } else {
                            const double uomega = gen.next_double() * acc;
                            const auto it =
                                std::upper_bound(noise_cdf.begin(), noise_cdf.end(), uomega);
                            target = static_cast<std::int32_t>(it - noise_cdf.begin());
                            if (target >= V) target = V - 1;
                            if (target == ctx) continue;
                            label = 0.0;
                        }
                        double* w = context.data() + static_cast<std::size_t>(target) * dim;
                        double dot = 0.0;
                        for (int e = 0; e < dim; ++e) dot += u[e] * w[e];
                        const double g = (label - sigmoid(dot)) * lr;
                        for (int e = 0; e < dim; ++e) grad_acc[e] += g * w[e];
                        for (int e = 0; e < dim; ++e) w[e] += g * u[e];
                    }
                    for (int e = 0; e < dim; ++e) u[e] += grad_acc[e];
                }
            }
        }
    }
    return emb;
}

namespace {

// Rows of the shared vocabulary, unit-normalized (zero rows stay zero).
std::vector<double> normalized_shared_rows(const EmbeddingMatrix& emb,
                                           const std::vector<std::int32_t>& rows) {
    const int dim = emb.dim;
    std::vector<double> out(rows.size() * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = emb.row(rows[i]);
        double norm = 0.0;
        for (int e = 0; e < dim; ++e) norm += src[e] * src[e];
        norm = std::sqrt(norm);
        const double scale = norm > 0.0 ? 1.0 / norm : 0.0;
        for (int e = 0; e < dim; ++e) out[i * dim + e] = src[e] * scale;
    }
    return out;
}

}  // namespace

ProcrustesResult align_procrustes(const EmbeddingMatrix& source, const EmbeddingMatrix& target,
                                  bool force_rotation) {
    if (source.dim != target.dim) throw ConfigError("procrustes: dimension mismatch");
    const int dim = source.dim;

    std::vector<std::string> shared;
    std::vector<std::int32_t> src_rows, tgt_rows;
    for (std::int32_t w = 0; w < source.vocabulary.size(); ++w) {
        const std::int32_t t = target.vocabulary.id(source.vocabulary.words[w]);
        if (t >= 0) {
            shared.push_back(source.vocabulary.words[w]);
            src_rows.push_back(w);
            tgt_rows.push_back(t);
        }
    }
    if (static_cast<int>(shared.size()) < dim)
        throw ConfigError("procrustes: shared vocabulary has " + std::to_string(shared.size()) +
                          " words, need at least dim = " + std::to_string(dim));

    const auto S = normalized_shared_rows(source, src_rows);
    const auto T = normalized_shared_rows(target, tgt_rows);
    const auto M = kernels::crossprod(S, T, shared.size(), dim);

    Eigen::MatrixXd m(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) m(r, c) = M[static_cast<std::size_t>(r) * dim + c];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u = svd.matrixU();
    const Eigen::MatrixXd v = svd.matrixV();
    Eigen::MatrixXd rot = u * v.transpose();
    if (force_rotation && rot.determinant() < 0.0) {
        u.col(dim - 1) *= -1.0;  // smallest singular direction
        rot = u * v.transpose();
    }

    ProcrustesResult result;
    result.shared = std::move(shared);
    result.rotation.resize(static_cast<std::size_t>(dim) * dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) result.rotation[static_cast<std::size_t>(r) * dim + c] = rot(r, c);

    result.aligned = source;
    for (std::int32_t w = 0; w < source.vocabulary.size(); ++w) {
        const double* src = source.row(w);
        double* dst = result.aligned.row(w);
        for (int c = 0; c < dim; ++c) {
            double x = 0.0;
            for (int r = 0; r < dim; ++r) x += src[r] * rot(r, c);
            dst[c] = x;
        }
    }
    return result;
}

AlignedSeries align_series(std::vector<EmbeddingMatrix> embeddings, bool force_rotation) {
    if (embeddings.empty()) throw ConfigError("align_series: need at least one embedding");
    AlignedSeries series;
    series.chunks.push_back(std::move(embeddings.front()));
    for (std::size_t t = 1; t < embeddings.size(); ++t) {
        auto res = align_procrustes(embeddings[t], series.chunks.back(), force_rotation);
        series.chunks.push_back(std::move(res.aligned));
        series.rotations.push_back(std::move(res.rotation));
        series.shared_vocab.push_back(std::move(res.shared));
    }
    return series;
}

std::vector<Neighbor> neighbors(const EmbeddingMatrix& embedding, const std::string& word, int n) {
    if (n < 1) throw ConfigError("neighbors: n must be >= 1");
    const std::int32_t q = embedding.vocabulary.id(word);
    if (q < 0) throw QueryError("unknown word \"" + word + "\"");

    const int dim = embedding.dim;
    const double* qv = embedding.row(q);
    double qn = 0.0;
    for (int e = 0; e < dim; ++e) qn += qv[e] * qv[e];
    qn = std::sqrt(qn);

    std::vector<Neighbor> all;
    all.reserve(embedding.vocabulary.size());
    for (std::int32_t w = 0; w < embedding.vocabulary.size(); ++w) {
        if (w == q) continue;
        const double* wv = embedding.row(w);
        double dot = 0.0, wn = 0.0;
        for (int e = 0; e < dim; ++e) {
            dot += qv[e] * wv[e];
            wn += wv[e] * wv[e];
        }
        wn = std::sqrt(wn);
        const double cos = (qn > 0.0 && wn > 0.0) ? dot / (qn * wn) : 0.0;
        all.push_back({embedding.vocabulary.words[w], cos});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return a.word < b.word;
    });
    if (static_cast<int>(all.size()) > n) all.resize(n);
    return all;
}

Trajectory trajectory(const AlignedSeries& series, const std::string& word,
                      int neighbors_per_chunk) {
    if (neighbors_per_chunk < 1) throw ConfigError("trajectory: neighbors_per_chunk must be >= 1");
    Trajectory traj;
    traj.word = word;
    for (const auto& emb : series.chunks) {
        const std::int32_t id = emb.vocabulary.id(word);
        if (id < 0) continue;
        TrajectoryPoint p;
        p.chunk_index = emb.chunk_index;
        p.vector.assign(emb.row(id), emb.row(id) + emb.dim);
        p.nearest = neighbors(emb, word, neighbors_per_chunk);
        traj.points.push_back(std::move(p));
    }
    if (traj.points.empty()) throw QueryError("word \"" + word + "\" appears in no chunk");

    // PCA over the word's aligned vectors; single points and ties are fine
    // (centered data of one point projects to the origin).
    const int dim = series.chunks.front().dim;
    const std::size_t k = traj.points.size();
    Eigen::MatrixXd x(k, dim);
    for (std::size_t i = 0; i < k; ++i)
        for (int e = 0; e < dim; ++e) x(i, e) = traj.points[i].vector[e];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // Columns ordered by ascending eigenvalue; take the last two. Fix each
    // axis sign so the largest-magnitude loading is positive.
    Eigen::VectorXd pc1 = eig.eigenvectors().col(dim - 1);
    Eigen::VectorXd pc2 = dim >= 2 ? eig.eigenvectors().col(dim - 2) : Eigen::VectorXd::Zero(dim);
    const auto fix_sign = [](Eigen::VectorXd& v) {
        int arg = 0;
        for (int i = 1; i < v.size(); ++i)
            if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
        if (v(arg) < 0.0) v = -v;
    };
    fix_sign(pc1);
    fix_sign(pc2);
    for (std::size_t i = 0; i < k; ++i) {
        traj.points[i].x = x.row(i).dot(pc1);
        traj.points[i].y = x.row(i).dot(pc2);
    }
    return traj;
}

namespace {
constexpr char kMagic[8] = {'T', 'T', 'M', 'E', 'M', 'B', '0', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void append_raw(std::string& buf, const T& value) {
    buf.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(const std::string& buf, std::size_t& off) {
    T value;
    std::memcpy(&value, buf.data() + off, sizeof(T));
    off += sizeof(T);
    return value;
}
}  // namespace

void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& embedding) {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    append_raw(buf, kVersion);
    append_raw(buf, static_cast<std::uint64_t>(embedding.vocabulary.size()));
    append_raw(buf, static_cast<std::uint64_t>(embedding.dim));
    for (double v : embedding.vectors) append_raw(buf, v);
    io::write_file_atomic(path, buf);

    nlohmann::json j;
    j["chunk_index"] = embedding.chunk_index;
    j["words"] = embedding.vocabulary.words;
    j["counts"] = embedding.vocabulary.counts;
    j["min_count"] = embedding.vocabulary.min_count;
    io::write_file_atomic(path.string() + ".vocab.json", j.dump());
}

EmbeddingMatrix read_embedding(const std::filesystem::path& path) {
    const std::string buf = io::read_file(path);
    if (buf.size() < sizeof(kMagic) + sizeof(std::uint32_t) + 2 * sizeof(std::uint64_t))
        throw StateError("embedding container too short: " + path.string());
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
        throw StateError("embedding container has wrong magic: " + path.string());
    std::size_t off = sizeof(kMagic);
    if (read_raw<std::uint32_t>(buf, off) != kVersion)
        throw StateError("embedding container has unsupported version: " + path.string());
    const std::uint64_t V = read_raw<std::uint64_t>(buf, off);
    const std::uint64_t dim = read_raw<std::uint64_t>(buf, off);
    if (buf.size() != off + V * dim * sizeof(double))
        throw StateError("embedding container has truncated payload: " + path.string());

    EmbeddingMatrix emb;
    emb.dim = static_cast<int>(dim);
    emb.vectors.resize(V * dim);
    for (auto& v : emb.vectors) v = read_raw<double>(buf, off);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path.string() + ".vocab.json"));
        emb.chunk_index = j.at("chunk_index").get<int>();
        emb.vocabulary.words = j.at("words").get<std::vector<std::string>>();
        emb.vocabulary.counts = j.at("counts").get<std::vector<std::int64_t>>();
        emb.vocabulary.min_count = j.at("min_count").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw StateError("embedding vocabulary sidecar is corrupt: " + path.string() + ": " +
                         e.what());
    }
    if (emb.vocabulary.words.size() != V || emb.vocabulary.counts.size() != V)
        throw StateError("embedding sidecar vocabulary size mismatch: " + path.string());
    for (std::size_t i = 0; i < emb.vocabulary.words.size(); ++i)
        emb.vocabulary.index_of.emplace(emb.vocabulary.words[i], static_cast<std::int32_t>(i));
    return emb;
}

}  // namespace ttm::diachronic
