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

#include "ttm/prr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/io_util.hpp"
#include "ttm/parallel.hpp"
#include "ttm/rng.hpp"

namespace ttm::prr {

void CountPanel::validate() const {
    if (times.empty() || entities.empty() || words.empty())
        throw ConfigError("prr: panel must have at least one time, entity and word");
    if (counts.size() != T()) throw ConfigError("prr: panel has " + std::to_string(counts.size()) +
                                                " count slices for " + std::to_string(T()) + " times");
    for (std::size_t t = 0; t < T(); ++t) {
        if (counts[t].size() != I() * J())
            throw ConfigError("prr: slice " + std::to_string(t) + " has wrong cell count");
        std::int64_t positive = 0;
        for (std::int64_t y : counts[t]) {
            if (y < 0) throw ConfigError("prr: negative count in slice " + std::to_string(t));
            positive += y > 0;
        }
        if (positive == 0)
            throw ConfigError("prr: slice " + std::to_string(t) + " (" + times[t] +
                              ") has no positive count");
    }
}

CountPanel CountPanel::from_csv(const std::string& content) {
    const auto rows = io::csv_parse(content);
    if (rows.empty()) throw IoError("prr: empty CSV");
    const auto& header = rows.front();
    int time_col = -1, entity_col = -1, word_col = -1, count_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "time") time_col = static_cast<int>(i);
        else if (header[i] == "entity") entity_col = static_cast<int>(i);
        else if (header[i] == "word") word_col = static_cast<int>(i);
        else if (header[i] == "count") count_col = static_cast<int>(i);
    }
    if (time_col < 0 || entity_col < 0 || word_col < 0 || count_col < 0)
        throw IoError("prr: CSV header must contain time, entity, word, count");

    struct Cell {
        std::string time, entity, word;
        std::int64_t count;
    };
    std::vector<Cell> cells;
    std::set<std::string> time_set, entity_set, word_set;
    const std::size_t needed =
        static_cast<std::size_t>(std::max({time_col, entity_col, word_col, count_col})) + 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < needed)
            throw IoError("prr: row " + std::to_string(r + 1) + ": too few CSV fields");
        Cell cell;
        cell.time = rows[r][time_col];
        cell.entity = rows[r][entity_col];
        cell.word = rows[r][word_col];
        try {
            std::size_t pos = 0;
            cell.count = std::stoll(rows[r][count_col], &pos);
            if (pos != rows[r][count_col].size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw IoError("prr: row " + std::to_string(r + 1) + ": count is not an integer: \"" +
                          rows[r][count_col] + "\"");
        }
        if (cell.count < 0)
            throw IoError("prr: row " + std::to_string(r + 1) + ": negative count");
        time_set.insert(cell.time);
        entity_set.insert(cell.entity);
        word_set.insert(cell.word);
        cells.push_back(std::move(cell));
    }

    CountPanel panel;
    panel.times.assign(time_set.begin(), time_set.end());
    panel.entities.assign(entity_set.begin(), entity_set.end());
    panel.words.assign(word_set.begin(), word_set.end());
    std::map<std::string, std::size_t> t_of, i_of, j_of;
    for (std::size_t t = 0; t < panel.times.size(); ++t) t_of[panel.times[t]] = t;
    for (std::size_t i = 0; i < panel.entities.size(); ++i) i_of[panel.entities[i]] = i;
    for (std::size_t j = 0; j < panel.words.size(); ++j) j_of[panel.words[j]] = j;
    panel.counts.assign(panel.T(), std::vector<std::int64_t>(panel.I() * panel.J(), 0));
    for (const auto& cell : cells)
        panel.counts[t_of[cell.time]][i_of[cell.entity] * panel.J() + j_of[cell.word]] += cell.count;
    panel.validate();
    return panel;
}

void PrrConfig::validate() const {
    if (rank < 1) throw ConfigError("prr: rank must be >= 1");
    if (max_iters < 1) throw ConfigError("prr: max_iters must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("prr: tol must be > 0");
}

namespace {

// Intercepts are clamped so exp() stays finite even for all-zero rows whose
// unconstrained optimum is -infinity. A boxed maximum of a concave
// per-coordinate objective still yields monotone ascent.
constexpr double kInterceptBound = 30.0;
constexpr int kMaxHalvings = 40;

double clamp_intercept(double x) { return std::clamp(x, -kInterceptBound, kInterceptBound); }

struct Workspace {
    const CountPanel& panel;
    int rank;
    std::size_t T, I, J;
    std::vector<std::vector<double>> a;   // T x I
    std::vector<double> b;                // J
    std::vector<std::vector<double>> u;   // T slices, I x rank
    std::vector<double> v;                // J x rank
    std::vector<std::vector<double>> mu;  // T slices, I x J

    explicit Workspace(const CountPanel& p, int r)
        : panel(p), rank(r), T(p.T()), I(p.I()), J(p.J()) {}

    double dot_uv(std::size_t t, std::size_t i, std::size_t j) const {
        const double* ui = u[t].data() + i * rank;
        const double* vj = v.data() + j * rank;
        double s = 0.0;
        for (int r = 0; r < rank; ++r) s += ui[r] * vj[r];
        return s;
    }

    void recompute_mu_row(std::size_t t, std::size_t i) {
        double* row = mu[t].data() + i * J;
        for (std::size_t j = 0; j < J; ++j) row[j] = std::exp(a[t][i] + b[j] + dot_uv(t, i, j));
    }

    double row_loglik(std::size_t t, std::size_t i) const {
        const double* row = mu[t].data() + i * J;
        const std::int64_t* y = panel.counts[t].data() + i * J;
        double ll = 0.0;
        for (std::size_t j = 0; j < J; ++j)
            ll += (y[j] > 0 ? static_cast<double>(y[j]) * std::log(row[j]) : 0.0) - row[j];
        return ll;
    }

    // -- block updates; every (t,i) row / every column j is independent -----

    void update_entity_intercept(std::size_t t, std::size_t i) {
        double y_sum = 0.0, s = 0.0;
        const std::int64_t* y = panel.counts[t].data() + i * J;
        for (std::size_t j = 0; j < J; ++j) {
            y_sum += static_cast<double>(y[j]);
            s += std::exp(b[j] + dot_uv(t, i, j));
        }
        a[t][i] = clamp_intercept(std::log(y_sum) - std::log(s));
        recompute_mu_row(t, i);
    }

    void update_word_intercept(std::size_t j) {
        double y_sum = 0.0, s = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < I; ++i) {
                y_sum += static_cast<double>(panel.at(t, i, j));
                s += std::exp(a[t][i] + dot_uv(t, i, j));
            }
        b[j] = clamp_intercept(std::log(y_sum) - std::log(s));
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < I; ++i)
                mu[t][i * J + j] = std::exp(a[t][i] + b[j] + dot_uv(t, i, j));
    }

    void update_entity_factors(std::size_t t, std::size_t i) {
        double* row = mu[t].data() + i * J;
        const std::int64_t* y = panel.counts[t].data() + i * J;
        double* ui = u[t].data() + i * rank;
        for (int r = 0; r < rank; ++r) {
            double g = 0.0, h = 0.0;
            for (std::size_t j = 0; j < J; ++j) {
                const double vjr = v[j * rank + r];
                g += (static_cast<double>(y[j]) - row[j]) * vjr;
                h += row[j] * vjr * vjr;
            }
            if (!(h > 1e-12)) continue;
            double ll_old = 0.0;
            for (std::size_t j = 0; j < J; ++j)
                ll_old += (y[j] > 0 ? static_cast<double>(y[j]) * std::log(row[j]) : 0.0) - row[j];
            double step = g / h;
            for (int half = 0; half < kMaxHalvings; ++half, step *= 0.5) {
                double ll_new = 0.0;
                for (std::size_t j = 0; j < J; ++j) {
                    const double m = row[j] * std::exp(step * v[j * rank + r]);
                    ll_new += (y[j] > 0 ? static_cast<double>(y[j]) * std::log(m) : 0.0) - m;
                }
                if (ll_new >= ll_old && std::isfinite(ll_new)) {
                    ui[r] += step;
                    for (std::size_t j = 0; j < J; ++j) row[j] *= std::exp(step * v[j * rank + r]);
                    break;
                }
            }
        }
    }

    void update_word_loadings(std::size_t j) {
        double* vj = v.data() + j * rank;
        for (int r = 0; r < rank; ++r) {
            double g = 0.0, h = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t i = 0; i < I; ++i) {
                    const double uir = u[t][i * rank + r];
                    const double m = mu[t][i * J + j];
                    g += (static_cast<double>(panel.at(t, i, j)) - m) * uir;
                    h += m * uir * uir;
                }
            if (!(h > 1e-12)) continue;
            double ll_old = 0.0;
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t i = 0; i < I; ++i) {
                    const double m = mu[t][i * J + j];
                    const std::int64_t y = panel.at(t, i, j);
                    ll_old += (y > 0 ? static_cast<double>(y) * std::log(m) : 0.0) - m;
                }
            double step = g / h;
            for (int half = 0; half < kMaxHalvings; ++half, step *= 0.5) {
                double ll_new = 0.0;
                for (std::size_t t = 0; t < T; ++t)
                    for (std::size_t i = 0; i < I; ++i) {
                        const double m =
                            mu[t][i * J + j] * std::exp(step * u[t][i * rank + r]);
                        const std::int64_t y = panel.at(t, i, j);
                        ll_new += (y > 0 ? static_cast<double>(y) * std::log(m) : 0.0) - m;
                    }
                if (ll_new >= ll_old && std::isfinite(ll_new)) {
                    vj[r] += step;
                    for (std::size_t t = 0; t < T; ++t)
                        for (std::size_t i = 0; i < I; ++i)
                            mu[t][i * J + j] *= std::exp(step * u[t][i * rank + r]);
                    break;
                }
            }
        }
    }

    // Whole-panel log-likelihood with a fixed summation order (per-slice
    // partials, then a serial sum), identical for serial and parallel runs.
    double total_loglik() const {
        std::vector<double> partial(T, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i < I; ++i) s += row_loglik(t, i);
            partial[t] = s;
        }
        double total = 0.0;
        for (double p : partial) total += p;
        return total;
    }

    // -- pass drivers: serial reference and OpenMP twin ---------------------

    void intercept_a_pass_serial() {
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < I; ++i) update_entity_intercept(t, i);
    }
    void intercept_a_pass_omp() {
        const std::int64_t n = static_cast<std::int64_t>(T * I);
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
        for (std::int64_t x = 0; x < n; ++x)
            update_entity_intercept(static_cast<std::size_t>(x) / I, static_cast<std::size_t>(x) % I);
    }

    void intercept_b_pass_serial() {
        for (std::size_t j = 0; j < J; ++j) update_word_intercept(j);
    }
    void intercept_b_pass_omp() {
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
        for (std::int64_t j = 0; j < static_cast<std::int64_t>(J); ++j)
            update_word_intercept(static_cast<std::size_t>(j));
    }

    void factors_u_pass_serial() {
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < I; ++i) update_entity_factors(t, i);
    }
    void factors_u_pass_omp() {
        const std::int64_t n = static_cast<std::int64_t>(T * I);
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
        for (std::int64_t x = 0; x < n; ++x)
            update_entity_factors(static_cast<std::size_t>(x) / I, static_cast<std::size_t>(x) % I);
    }

    void loadings_v_pass_serial() {
        for (std::size_t j = 0; j < J; ++j) update_word_loadings(j);
    }
    void loadings_v_pass_omp() {
#pragma omp parallel for schedule(static) num_threads(parallel::threads())
        for (std::int64_t j = 0; j < static_cast<std::int64_t>(J); ++j)
            update_word_loadings(static_cast<std::size_t>(j));
    }

    void iterate(bool use_omp) {
        if (use_omp) {
            intercept_a_pass_omp();
            intercept_b_pass_omp();
            factors_u_pass_omp();
            loadings_v_pass_omp();
        } else {
            intercept_a_pass_serial();
            intercept_b_pass_serial();
            factors_u_pass_serial();
            loadings_v_pass_serial();
        }
    }
};

}  // namespace

PrrFit fit_prr(const CountPanel& panel, const PrrConfig& config) {
    panel.validate();
    config.validate();
    const std::size_t T = panel.T(), I = panel.I(), J = panel.J();
    if (static_cast<std::size_t>(config.rank) > std::min(I, J))
        throw ConfigError("prr: rank " + std::to_string(config.rank) + " exceeds min(I,J) = " +
                          std::to_string(std::min(I, J)));

    Workspace ws(panel, config.rank);

    // Pooled counts drive the intercept init; factors start as small noise.
    std::vector<double> row_sum(I, 0.0), col_sum(J, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < I; ++i)
            for (std::size_t j = 0; j < J; ++j) {
                row_sum[i] += static_cast<double>(panel.at(t, i, j));
                col_sum[j] += static_cast<double>(panel.at(t, i, j));
            }
    ws.a.assign(T, std::vector<double>(I, 0.0));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < I; ++i)
            ws.a[t][i] = std::log(row_sum[i] / static_cast<double>(J) + 0.5);
    ws.b.resize(J);
    for (std::size_t j = 0; j < J; ++j)
        ws.b[j] = std::log(col_sum[j] / static_cast<double>(I) + 0.5);

    rng::Xoshiro256StarStar gen(config.seed);
    ws.u.assign(T, std::vector<double>(I * config.rank));
    for (std::size_t t = 0; t < T; ++t)
        for (auto& x : ws.u[t]) x = gen.next_in(-0.01, 0.01);
    ws.v.resize(J * config.rank);
    for (auto& x : ws.v) x = gen.next_in(-0.01, 0.01);

    ws.mu.assign(T, std::vector<double>(I * J));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < I; ++i) ws.recompute_mu_row(t, i);

    const bool use_omp = parallel::enabled();
    PrrFit fit;
    fit.trace.push_back(ws.total_loglik());
    for (int iter = 0; iter < config.max_iters; ++iter) {
        ws.iterate(use_omp);
        const double ll = ws.total_loglik();
        const double gain = ll - fit.trace.back();
        fit.trace.push_back(ll);
        if (gain < config.tol) break;
    }

    // Identification: unit-norm V columns, U absorbs the scale.
    for (int r = 0; r < config.rank; ++r) {
        double norm = 0.0;
        for (std::size_t j = 0; j < J; ++j) norm += ws.v[j * config.rank + r] * ws.v[j * config.rank + r];
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (std::size_t j = 0; j < J; ++j) ws.v[j * config.rank + r] /= norm;
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t i = 0; i < I; ++i) ws.u[t][i * config.rank + r] *= norm;
        }
    }

    fit.rank = config.rank;
    fit.times = panel.times;
    fit.entities = panel.entities;
    fit.words = panel.words;
    fit.a = std::move(ws.a);
    fit.b = std::move(ws.b);
    fit.u = std::move(ws.u);
    fit.v = std::move(ws.v);
    fit.log_likelihood = fit.trace.back();
    return fit;
}

double PrrFit::mu(std::size_t t, std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (int r = 0; r < rank; ++r) s += u[t][i * rank + r] * v[j * rank + r];
    return std::exp(a[t][i] + b[j] + s);
}

std::vector<std::vector<double>> latent_positions(const PrrFit& fit) { return fit.u; }

double deviance(const PrrFit& fit, const CountPanel& panel) {
    if (fit.times.size() != panel.T() || fit.entities.size() != panel.I() ||
        fit.words.size() != panel.J())
        throw ConfigError("prr: fit/panel dimension mismatch");
    double dev = 0.0;
    for (std::size_t t = 0; t < panel.T(); ++t)
        for (std::size_t i = 0; i < panel.I(); ++i)
            for (std::size_t j = 0; j < panel.J(); ++j) {
                const double y = static_cast<double>(panel.at(t, i, j));
                const double m = fit.mu(t, i, j);
                dev += (y > 0.0 ? y * std::log(y / m) : 0.0) - (y - m);
            }
    return 2.0 * dev;
}

std::string PrrFit::to_json() const {
    nlohmann::json j;
    j["rank"] = rank;
    j["times"] = times;
    j["entities"] = entities;
    j["words"] = words;
    j["a"] = a;
    j["b"] = b;
    j["u"] = u;
    j["v"] = v;
    j["trace"] = trace;
    j["log_likelihood"] = log_likelihood;
    return j.dump();
}

}  // namespace ttm::prr
