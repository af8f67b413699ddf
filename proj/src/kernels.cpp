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

#include "ttm/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "ttm/error.hpp"
#include "ttm/parallel.hpp"
#include "ttm/rng.hpp"

namespace ttm::kernels {

double jaccard_similarity(const std::vector<double>& a, const std::vector<double>& b, double c) {
    if (a.size() != b.size())
        throw ConfigError("jaccard: vocabulary size mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    std::size_t both = 0, either = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
        const bool in_a = a[w] > c;
        const bool in_b = b[w] > c;
        both += in_a && in_b;
        either += in_a || in_b;
    }
    if (either == 0) return 1.0;
    return static_cast<double>(both) / static_cast<double>(either);
}

std::vector<double> jaccard_matrix_serial(const std::vector<std::vector<double>>& a,
                                          const std::vector<std::vector<double>>& b, double c) {
    std::vector<double> m(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            m[i * b.size() + j] = jaccard_similarity(a[i], b[j], c);
    return m;
}

std::vector<double> jaccard_matrix_omp(const std::vector<std::vector<double>>& a,
                                       const std::vector<std::vector<double>>& b, double c) {
    std::vector<double> m(a.size() * b.size());
    const std::int64_t cells = static_cast<std::int64_t>(a.size() * b.size());
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
    for (std::int64_t cell = 0; cell < cells; ++cell) {
        const std::size_t i = static_cast<std::size_t>(cell) / b.size();
        const std::size_t j = static_cast<std::size_t>(cell) % b.size();
        m[cell] = jaccard_similarity(a[i], b[j], c);
    }
    return m;
}

std::vector<double> jaccard_matrix(const std::vector<std::vector<double>>& a,
                                   const std::vector<std::vector<double>>& b, double c) {
    return parallel::enabled() ? jaccard_matrix_omp(a, b, c) : jaccard_matrix_serial(a, b, c);
}

namespace {

// One multinomial draw of size n from the cumulative weights, then the
// cosine of the drawn counts against the reference.
double one_bootstrap_cosine(const std::vector<double>& reference, const std::vector<double>& cumulative,
                            std::int64_t n, std::uint64_t stream_seed) {
    rng::Xoshiro256StarStar gen(stream_seed);
    const double total = cumulative.back();
    std::vector<std::int64_t> counts(reference.size(), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = gen.next_double() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        if (idx >= counts.size()) idx = counts.size() - 1;
        ++counts[idx];
    }
    double dot = 0.0, ns = 0.0, nr = 0.0;
    for (std::size_t w = 0; w < reference.size(); ++w) {
        dot += static_cast<double>(counts[w]) * reference[w];
        ns += static_cast<double>(counts[w]) * static_cast<double>(counts[w]);
        nr += reference[w] * reference[w];
    }
    return dot / (std::sqrt(ns) * std::sqrt(nr));
}

std::vector<double> cumulative_of(const std::vector<double>& reference) {
    std::vector<double> cumulative(reference.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        acc += reference[i];
        cumulative[i] = acc;
    }
    return cumulative;
}

}  // namespace

std::vector<double> bootstrap_cosines_serial(const std::vector<double>& reference, std::int64_t n,
                                             int samples, std::uint64_t seed) {
    if (reference.empty()) throw ConfigError("bootstrap: empty reference");
    const auto cumulative = cumulative_of(reference);
    std::vector<double> out(samples);
    for (int b = 0; b < samples; ++b)
        out[b] = one_bootstrap_cosine(reference, cumulative, n,
                                      rng::derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    return out;
}

std::vector<double> bootstrap_cosines_omp(const std::vector<double>& reference, std::int64_t n,
                                          int samples, std::uint64_t seed) {
    if (reference.empty()) throw ConfigError("bootstrap: empty reference");
    const auto cumulative = cumulative_of(reference);
    std::vector<double> out(samples);
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
    for (int b = 0; b < samples; ++b)
        out[b] = one_bootstrap_cosine(reference, cumulative, n,
                                      rng::derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    return out;
}

std::vector<double> bootstrap_cosines(const std::vector<double>& reference, std::int64_t n,
                                      int samples, std::uint64_t seed) {
    return parallel::enabled() ? bootstrap_cosines_omp(reference, n, samples, seed)
                               : bootstrap_cosines_serial(reference, n, samples, seed);
}

std::vector<double> crossprod_serial(const std::vector<double>& a, const std::vector<double>& b,
                                     std::size_t n, std::size_t d) {
    std::vector<double> m(d * d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += a[i * d + r] * b[i * d + c];
            m[r * d + c] = acc;
        }
    }
    return m;
}

std::vector<double> crossprod_omp(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t n, std::size_t d) {
    std::vector<double> m(d * d);
    const std::int64_t cells = static_cast<std::int64_t>(d * d);
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
    for (std::int64_t cell = 0; cell < cells; ++cell) {
        const std::size_t r = static_cast<std::size_t>(cell) / d;
        const std::size_t c = static_cast<std::size_t>(cell) % d;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i * d + r] * b[i * d + c];
        m[cell] = acc;
    }
    return m;
}

std::vector<double> crossprod(const std::vector<double>& a, const std::vector<double>& b,
                              std::size_t n, std::size_t d) {
    return parallel::enabled() ? crossprod_omp(a, b, n, d) : crossprod_serial(a, b, n, d);
}

double lower_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile of empty sample");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("quantile level must be in (0,1)");
    std::sort(values.begin(), values.end());
    const double k = std::ceil(q * static_cast<double>(values.size()));
    std::size_t idx = k < 1.0 ? 0 : static_cast<std::size_t>(k) - 1;
    if (idx >= values.size()) idx = values.size() - 1;
    return values[idx];
}

}  // namespace ttm::kernels
