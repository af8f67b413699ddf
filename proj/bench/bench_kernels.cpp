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

// Times every parallel kernel against its serial reference and checks that
// the outputs agree bit-for-bit while doing so.
//
//   bench_kernels [threads] [repeats]

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <omp.h>

#include "ttm/kernels.hpp"
#include "ttm/parallel.hpp"
#include "ttm/prototype.hpp"
#include "ttm/prr.hpp"
#include "ttm/rng.hpp"

using namespace ttm;

namespace {

int g_repeats = 5;

void report(const char* name, const std::function<void()>& serial,
            const std::function<void()>& parallel_fn, bool identical) {
    serial();  // warm-up
    double t_serial = omp_get_wtime();
    for (int r = 0; r < g_repeats; ++r) serial();
    t_serial = (omp_get_wtime() - t_serial) / g_repeats;

    parallel_fn();
    double t_parallel = omp_get_wtime();
    for (int r = 0; r < g_repeats; ++r) parallel_fn();
    t_parallel = (omp_get_wtime() - t_parallel) / g_repeats;

    std::printf("%-28s serial %8.2f ms   omp %8.2f ms   speedup %5.2fx   identical %s\n", name,
                1e3 * t_serial, 1e3 * t_parallel, t_serial / t_parallel, identical ? "yes" : "NO");
}

std::vector<std::vector<double>> random_distributions(int rows, int cols, std::uint64_t seed) {
    rng::Xoshiro256StarStar gen(seed);
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    for (auto& row : out) {
        double total = 0.0;
        for (auto& x : row) {
            x = gen.next_double();
            total += x;
        }
        for (auto& x : row) x /= total;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) parallel::set_threads(std::atoi(argv[1]));
    if (argc > 2) g_repeats = std::atoi(argv[2]);
    std::printf("threads: %d, repeats: %d\n\n", parallel::threads(), g_repeats);

    {
        const auto a = random_distributions(64, 5000, 1);
        const auto b = random_distributions(64, 5000, 2);
        const double c = 1.0 / 5000;
        const bool same =
            kernels::jaccard_matrix_serial(a, b, c) == kernels::jaccard_matrix_omp(a, b, c);
        report("jaccard_matrix 64x64x5000",
               [&] { (void)kernels::jaccard_matrix_serial(a, b, c); },
               [&] { (void)kernels::jaccard_matrix_omp(a, b, c); }, same);
    }

    {
        rng::Xoshiro256StarStar gen(3);
        std::vector<double> reference(2000);
        for (auto& x : reference) x = 1.0 + gen.next_double() * 50.0;
        const bool same = kernels::bootstrap_cosines_serial(reference, 5000, 500, 9) ==
                          kernels::bootstrap_cosines_omp(reference, 5000, 500, 9);
        report("bootstrap_cosines B=500",
               [&] { (void)kernels::bootstrap_cosines_serial(reference, 5000, 500, 9); },
               [&] { (void)kernels::bootstrap_cosines_omp(reference, 5000, 500, 9); }, same);
    }

    {
        const std::size_t n = 20000, d = 64;
        rng::Xoshiro256StarStar gen(4);
        std::vector<double> a(n * d), b(n * d);
        for (auto& x : a) x = gen.next_in(-1, 1);
        for (auto& x : b) x = gen.next_in(-1, 1);
        const bool same =
            kernels::crossprod_serial(a, b, n, d) == kernels::crossprod_omp(a, b, n, d);
        report("crossprod 20000x64",
               [&] { (void)kernels::crossprod_serial(a, b, n, d); },
               [&] { (void)kernels::crossprod_omp(a, b, n, d); }, same);
    }

    {
        // Whole PRR fits, serial vs parallel passes.
        rng::Xoshiro256StarStar gen(5);
        prr::CountPanel panel;
        const std::size_t T = 4, I = 40, J = 120;
        for (std::size_t t = 0; t < T; ++t) panel.times.push_back("t" + std::to_string(t));
        for (std::size_t i = 0; i < I; ++i) panel.entities.push_back("e" + std::to_string(i));
        for (std::size_t j = 0; j < J; ++j) panel.words.push_back("w" + std::to_string(j));
        panel.counts.assign(T, std::vector<std::int64_t>(I * J));
        for (auto& slice : panel.counts)
            for (auto& y : slice) y = static_cast<std::int64_t>(gen.next_below(25));
        prr::PrrConfig cfg;
        cfg.rank = 2;
        cfg.max_iters = 10;
        cfg.tol = 1e-12;
        cfg.seed = 6;

        const int saved = parallel::threads();
        parallel::set_threads(1);
        const auto fit_serial = prr::fit_prr(panel, cfg);
        parallel::set_threads(saved);
        const auto fit_parallel = prr::fit_prr(panel, cfg);
        const bool same = fit_serial.trace == fit_parallel.trace && fit_serial.v == fit_parallel.v;

        report("fit_prr 4x40x120 r=2",
               [&] {
                   parallel::set_threads(1);
                   (void)prr::fit_prr(panel, cfg);
                   parallel::set_threads(saved);
               },
               [&] { (void)prr::fit_prr(panel, cfg); }, same);
    }

    {
        // Replicate similarity matrix over fitted LDA runs.
        rng::Xoshiro256StarStar gen(7);
        lda::Docs docs;
        for (int d = 0; d < 60; ++d) {
            lda::TokenIds doc;
            for (int i = 0; i < 40; ++i) doc.push_back(static_cast<std::int32_t>(gen.next_below(300)));
            docs.push_back(doc);
        }
        lda::LdaConfig cfg;
        cfg.K = 12;
        cfg.iterations = 15;
        std::vector<lda::LdaState> runs;
        for (std::uint64_t r = 0; r < 8; ++r) {
            cfg.seed = 100 + r;
            runs.push_back(lda::fit_lda(docs, cfg, 300));
        }
        const int saved = parallel::threads();
        parallel::set_threads(1);
        const auto sel_serial = prototype::select_prototype(runs, 1.0 / 300);
        parallel::set_threads(saved);
        const auto sel_parallel = prototype::select_prototype(runs, 1.0 / 300);
        const bool same = sel_serial.pairwise == sel_parallel.pairwise;

        report("select_prototype R=8 K=12",
               [&] {
                   parallel::set_threads(1);
                   (void)prototype::select_prototype(runs, 1.0 / 300);
                   parallel::set_threads(saved);
               },
               [&] { (void)prototype::select_prototype(runs, 1.0 / 300); }, same);
    }

    return 0;
}
