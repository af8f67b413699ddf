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

#include "ttm/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/io_util.hpp"
#include "ttm/parallel.hpp"
#include "ttm/rng.hpp"

namespace ttm::pipeline {

namespace {

// ---- config file ----------------------------------------------------------

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects an integer, got \"" + value + "\"");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects a number, got \"" + value + "\"");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects an unsigned integer, got \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: " + key + " expects true/false, got \"" + value + "\"");
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> items;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            const std::string t = trim(cur);
            if (!t.empty()) items.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string t = trim(cur);
    if (!t.empty()) items.push_back(t);
    return items;
}

void apply_key(PipelineConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string full = section + "." + key;
    if (section == "pipeline") {
        if (key == "input") cfg.input = value;
        else if (key == "format") cfg.format = value;
        else if (key == "out") cfg.out_dir = value;
        else if (key == "period") cfg.period = value;
        else if (key == "seed") cfg.seed = parse_u64(full, value);
        else if (key == "threads") cfg.threads = parse_int(full, value);
        else if (key == "stopwords") cfg.stopwords = value;
        else if (key == "min_count") cfg.min_count = parse_int(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "lda") {
        if (key == "topics") cfg.rolling.base.K = parse_int(full, value);
        else if (key == "alpha") cfg.rolling.base.alpha = parse_real(full, value);
        else if (key == "eta") cfg.rolling.base.eta = parse_real(full, value);
        else if (key == "iterations") cfg.rolling.base.iterations = parse_int(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "prototype") {
        if (key == "enabled") cfg.rolling.use_prototype = parse_bool(full, value);
        else if (key == "replicates") cfg.rolling.prototype.replicates = parse_int(full, value);
        else if (key == "word_prob_threshold")
            cfg.rolling.prototype.word_prob_threshold = parse_real(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "rolling") {
        if (key == "warmup_chunks") cfg.rolling.warmup_chunks = parse_int(full, value);
        else if (key == "memory") cfg.rolling.memory = parse_int(full, value);
        else if (key == "vocab_min_count") cfg.rolling.vocab_min_count = parse_int(full, value);
        else if (key == "top_words") cfg.top_words = parse_int(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "changes") {
        if (key == "reference_window") cfg.monitor.reference_window = parse_int(full, value);
        else if (key == "bootstrap_samples") cfg.monitor.bootstrap_samples = parse_int(full, value);
        else if (key == "quantile") cfg.monitor.quantile = parse_real(full, value);
        else if (key == "impact_words") cfg.monitor.impact_words = parse_int(full, value);
        else if (key == "checkpoint") cfg.checkpoint = value;
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "embed") {
        if (key == "dim") cfg.sgns.dim = parse_int(full, value);
        else if (key == "window") cfg.sgns.window = parse_int(full, value);
        else if (key == "negatives") cfg.sgns.negatives = parse_int(full, value);
        else if (key == "epochs") cfg.sgns.epochs = parse_int(full, value);
        else if (key == "learning_rate") cfg.sgns.learning_rate = parse_real(full, value);
        else if (key == "min_count") cfg.sgns.min_count = parse_int(full, value);
        else if (key == "force_rotation") cfg.force_rotation = parse_bool(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "trajectory") {
        if (key == "words") cfg.trajectory_words = parse_list(value);
        else if (key == "neighbors") cfg.trajectory_neighbors = parse_int(full, value);
        else if (key == "embeddings_dir") cfg.embeddings_dir = value;
        else throw ConfigError("config: unknown key " + full);
    } else if (section == "prr") {
        if (key == "rank") cfg.prr.rank = parse_int(full, value);
        else if (key == "max_iters") cfg.prr.max_iters = parse_int(full, value);
        else if (key == "tol") cfg.prr.tol = parse_real(full, value);
        else throw ConfigError("config: unknown key " + full);
    } else {
        throw ConfigError("config: unknown section [" + section + "]");
    }
}

// ---- shared helpers --------------------------------------------------------

template <typename Fn>
void parallel_for_index(std::int64_t n, Fn&& fn) {
    if (!parallel::enabled()) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(parallel::threads())
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

void require_input_path(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path is required");
    if (!std::filesystem::exists(path)) throw ConfigError(what + " path does not exist: " + path);
}

std::filesystem::path out_path(const PipelineConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return std::filesystem::path(cfg.out_dir) / name;
}

std::string resolve_format(const PipelineConfig& cfg) {
    if (!cfg.format.empty()) {
        if (cfg.format != "jsonl" && cfg.format != "csv" && cfg.format != "corpus")
            throw ConfigError("unknown input format \"" + cfg.format + "\" (jsonl|csv|corpus)");
        return cfg.format;
    }
    const std::string ext = std::filesystem::path(cfg.input).extension().string();
    if (ext == ".jsonl") return "jsonl";
    if (ext == ".csv") return "csv";
    if (ext == ".json") return "corpus";
    throw ConfigError("cannot infer input format from \"" + cfg.input + "\"; pass --format");
}

std::string corpus_to_json(const corpus::ChunkedCorpus& c, const std::string& period) {
    nlohmann::json j;
    j["format"] = "ttm-corpus";
    j["version"] = 1;
    j["period"] = period;
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : c.documents)
        docs.push_back({{"id", d.id}, {"date", d.timestamp.to_string()}, {"tokens", d.tokens}});
    j["documents"] = std::move(docs);
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& ch : c.chunks)
        chunks.push_back({{"index", ch.index},
                          {"label", ch.label},
                          {"start", ch.period_start.to_string()},
                          {"end", ch.period_end.to_string()},
                          {"doc_ids", ch.doc_ids}});
    j["chunks"] = std::move(chunks);
    j["vocabulary"] = {{"words", c.vocabulary.words},
                       {"counts", c.vocabulary.counts},
                       {"min_count", c.vocabulary.min_count}};
    return j.dump();
}

corpus::ChunkedCorpus corpus_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("corpus artifact: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "ttm-corpus")
            throw StateError("corpus artifact: unrecognized format tag");
        corpus::ChunkedCorpus c;
        for (const auto& jd : j.at("documents")) {
            corpus::Document d;
            d.id = jd.at("id").get<std::string>();
            d.timestamp = corpus::parse_date(jd.at("date").get<std::string>());
            d.tokens = jd.at("tokens").get<std::vector<std::string>>();
            c.doc_pos.emplace(d.id, c.documents.size());
            c.documents.push_back(std::move(d));
        }
        for (const auto& jc : j.at("chunks")) {
            corpus::TimeChunk ch;
            ch.index = jc.at("index").get<int>();
            ch.label = jc.at("label").get<std::string>();
            ch.period_start = corpus::parse_date(jc.at("start").get<std::string>());
            ch.period_end = corpus::parse_date(jc.at("end").get<std::string>());
            ch.doc_ids = jc.at("doc_ids").get<std::vector<std::string>>();
            for (const auto& id : ch.doc_ids)
                if (!c.doc_pos.contains(id))
                    throw StateError("corpus artifact: chunk references unknown document \"" + id +
                                     "\"");
            c.chunks.push_back(std::move(ch));
        }
        const auto& jv = j.at("vocabulary");
        c.vocabulary.words = jv.at("words").get<std::vector<std::string>>();
        c.vocabulary.counts = jv.at("counts").get<std::vector<std::int64_t>>();
        c.vocabulary.min_count = jv.at("min_count").get<int>();
        for (std::size_t i = 0; i < c.vocabulary.words.size(); ++i)
            c.vocabulary.index_of.emplace(c.vocabulary.words[i], static_cast<std::int32_t>(i));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("corpus artifact: missing or mistyped field: ") + e.what());
    } catch (const ConfigError& e) {
        throw StateError(std::string("corpus artifact: invalid value: ") + e.what());
    }
}

std::vector<corpus::Document> chunk_documents(const corpus::ChunkedCorpus& c, int t) {
    std::vector<corpus::Document> docs;
    docs.reserve(c.chunks[t].doc_ids.size());
    for (const auto& id : c.chunks[t].doc_ids) docs.push_back(c.doc(id));
    return docs;
}

}  // namespace

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
    const std::string content = io::read_file(path);
    std::istringstream in(content);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config:" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config:" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("config:" + std::to_string(lineno) + ": key outside any [section]");
        apply_key(config, section, key, value);
    }
}

void finalize_config(PipelineConfig& config) {
    if (config.threads > 0) parallel::set_threads(config.threads);
    // All randomness flows from the single pipeline seed: rolling consumes it
    // directly, the other modules get fixed derived streams.
    config.rolling.base.seed = config.seed;
    config.rolling.prototype.base = config.rolling.base;
    config.monitor.seed = rng::derive_seed(config.seed, {1});
    config.sgns.seed = rng::derive_seed(config.seed, {2});
    config.prr.seed = rng::derive_seed(config.seed, {3});
}

corpus::ChunkedCorpus load_corpus(const PipelineConfig& config) {
    require_input_path(config.input, "input");
    const std::string format = resolve_format(config);
    if (format == "corpus") return corpus_from_json(io::read_file(config.input));

    const auto records = format == "jsonl" ? corpus::read_jsonl(config.input)
                                           : corpus::read_csv(config.input);
    auto docs = corpus::ingest(records);
    if (!config.stopwords.empty()) {
        require_input_path(config.stopwords, "stopwords");
        docs = corpus::remove_stopwords(std::move(docs), corpus::read_stopwords(config.stopwords));
    }
    corpus::ChunkedCorpus c;
    c.documents = std::move(docs);
    for (std::size_t i = 0; i < c.documents.size(); ++i) c.doc_pos.emplace(c.documents[i].id, i);
    c.chunks = corpus::chunk_by_period(c.documents, corpus::parse_period(config.period));
    c.vocabulary = corpus::build_vocabulary(c.documents, config.min_count);
    return c;
}

void cmd_ingest(const PipelineConfig& config) {
    const auto c = load_corpus(config);
    io::write_file_atomic(out_path(config, "corpus.json"), corpus_to_json(c, config.period));
}

void cmd_rolling(const PipelineConfig& config, const std::string& resume_checkpoint) {
    const auto c = load_corpus(config);

    rolling::RollingModel model;
    int next_chunk = 0;
    if (resume_checkpoint.empty()) {
        model = rolling::RollingModel::init(c, config.rolling);
        next_chunk = config.rolling.warmup_chunks;
    } else {
        require_input_path(resume_checkpoint, "checkpoint");
        model = rolling::RollingModel::from_json(io::read_file(resume_checkpoint));
        // The rechunked corpus must agree with the fitted history.
        if (static_cast<int>(c.chunks.size()) <= model.last_fitted_chunk())
            throw StateError("resume: corpus has fewer chunks than the checkpoint");
        for (int t = 0; t <= model.last_fitted_chunk(); ++t)
            if (c.chunks[t].label != model.record(t).label)
                throw StateError("resume: chunk " + std::to_string(t) + " label \"" +
                                 c.chunks[t].label + "\" does not match checkpoint \"" +
                                 model.record(t).label + "\"");
        next_chunk = model.last_fitted_chunk() + 1;
    }
    for (int t = next_chunk; t < static_cast<int>(c.chunks.size()); ++t)
        model.update(t, chunk_documents(c, t), c.chunks[t].label);

    io::write_file_atomic(out_path(config, "checkpoint.json"), model.to_json());
    if (model.warmup_selection())
        io::write_file_atomic(out_path(config, "prototype.json"),
                              model.warmup_selection()->to_json());

    std::string csv = io::csv_row({"chunk", "topic", "rank", "word", "probability"}) + "\n";
    for (int t = 0; t <= model.last_fitted_chunk(); ++t) {
        for (int k = 0; k < config.rolling.base.K; ++k) {
            const auto scored = model.top_words_scored(t, k, config.top_words);
            for (std::size_t r = 0; r < scored.size(); ++r)
                csv += io::csv_row({std::to_string(t), std::to_string(k), std::to_string(r + 1),
                                    scored[r].first, io::format_double(scored[r].second)}) +
                       "\n";
        }
    }
    io::write_file_atomic(out_path(config, "top_words.csv"), csv);
}

void cmd_changes(const PipelineConfig& config) {
    const std::string checkpoint =
        config.checkpoint.empty() ? out_path(config, "checkpoint.json").string() : config.checkpoint;
    require_input_path(checkpoint, "checkpoint");
    const auto model = rolling::RollingModel::from_json(io::read_file(checkpoint));
    const auto report = changes::detect_changes(model, config.monitor);

    io::write_file_atomic(out_path(config, "report.json"), report.to_json());

    // One plot-data file per topic: chunk, stability, threshold, is_change.
    const int K = model.config().base.K;
    std::vector<std::string> csvs(K, io::csv_row({"chunk", "stability", "threshold", "is_change"}) +
                                         "\n");
    for (const auto& p : report.points)
        csvs[p.topic] += io::csv_row({std::to_string(p.chunk), io::format_double(p.stability),
                                      io::format_double(p.threshold),
                                      p.is_change ? "true" : "false"}) +
                         "\n";
    for (int k = 0; k < K; ++k)
        io::write_file_atomic(out_path(config, "changes_topic_" + std::to_string(k) + ".csv"),
                              csvs[k]);
}

void cmd_embed(const PipelineConfig& config) {
    const auto c = load_corpus(config);

    // Chunks whose filtered token stream is trainable; the rest are skipped.
    std::vector<int> trainable;
    for (const auto& chunk : c.chunks) {
        if (chunk.doc_ids.empty()) continue;
        std::vector<corpus::Document> docs;
        for (const auto& id : chunk.doc_ids) docs.push_back(c.doc(id));
        if (corpus::build_vocabulary(docs, config.sgns.min_count).size() > 0)
            trainable.push_back(chunk.index);
    }
    if (trainable.empty()) throw ConfigError("embed: no chunk has trainable content");

    std::vector<diachronic::EmbeddingMatrix> raw(trainable.size());
    parallel_for_index(static_cast<std::int64_t>(trainable.size()), [&](std::int64_t i) {
        const int t = trainable[i];
        std::vector<std::vector<std::string>> docs;
        for (const auto& id : c.chunks[t].doc_ids) docs.push_back(c.doc(id).tokens);
        diachronic::SgnsConfig cfg = config.sgns;
        cfg.seed = rng::derive_seed(config.sgns.seed, {static_cast<std::uint64_t>(t)});
        raw[i] = diachronic::train_sgns(docs, cfg, t);
    });

    const auto series = diachronic::align_series(std::move(raw), config.force_rotation);

    for (const auto& emb : series.chunks)
        diachronic::write_embedding(
            out_path(config, "chunk_" + std::to_string(emb.chunk_index) + ".emb"), emb);

    nlohmann::json j;
    j["format"] = "ttm-alignment";
    j["version"] = 1;
    j["dim"] = config.sgns.dim;
    j["trained_chunks"] = trainable;
    nlohmann::json transitions = nlohmann::json::array();
    for (std::size_t i = 0; i < series.rotations.size(); ++i)
        transitions.push_back({{"from", series.chunks[i].chunk_index},
                               {"to", series.chunks[i + 1].chunk_index},
                               {"shared_words", series.shared_vocab[i].size()},
                               {"rotation", series.rotations[i]}});
    j["transitions"] = std::move(transitions);
    io::write_file_atomic(out_path(config, "alignment.json"), j.dump());
}

void cmd_trajectory(const PipelineConfig& config) {
    if (config.trajectory_words.empty())
        throw ConfigError("trajectory: no words requested (set [trajectory] words or --words)");
    const std::string dir = config.embeddings_dir.empty() ? config.out_dir : config.embeddings_dir;
    const std::filesystem::path alignment = std::filesystem::path(dir) / "alignment.json";
    require_input_path(alignment.string(), "alignment");

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(alignment));
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("alignment artifact: invalid JSON: ") + e.what());
    }
    std::vector<int> trained;
    try {
        trained = j.at("trained_chunks").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("alignment artifact: missing or mistyped field: ") + e.what());
    }
    if (trained.empty()) throw StateError("alignment artifact: no trained chunks");

    diachronic::AlignedSeries series;
    for (int t : trained)
        series.chunks.push_back(diachronic::read_embedding(
            std::filesystem::path(dir) / ("chunk_" + std::to_string(t) + ".emb")));

    for (const auto& word : config.trajectory_words) {
        const auto traj = diachronic::trajectory(series, word, config.trajectory_neighbors);
        std::vector<std::string> header = {"chunk", "x", "y"};
        for (int i = 1; i <= config.trajectory_neighbors; ++i)
            header.push_back("neighbor_" + std::to_string(i));
        std::string csv = io::csv_row(header) + "\n";
        for (const auto& p : traj.points) {
            std::vector<std::string> row = {std::to_string(p.chunk_index), io::format_double(p.x),
                                            io::format_double(p.y)};
            for (int i = 0; i < config.trajectory_neighbors; ++i)
                row.push_back(i < static_cast<int>(p.nearest.size()) ? p.nearest[i].word : "");
            csv += io::csv_row(row) + "\n";
        }
        io::write_file_atomic(out_path(config, "trajectory_" + word + ".csv"), csv);
    }
}

void cmd_prr(const PipelineConfig& config) {
    require_input_path(config.input, "input");
    const auto panel = prr::CountPanel::from_csv(io::read_file(config.input));
    const auto fit = prr::fit_prr(panel, config.prr);

    io::write_file_atomic(out_path(config, "prr_fit.json"), fit.to_json());

    std::vector<std::string> header = {"time", "entity"};
    for (int r = 1; r <= fit.rank; ++r) header.push_back("coord_" + std::to_string(r));
    std::string csv = io::csv_row(header) + "\n";
    const auto positions = prr::latent_positions(fit);
    for (std::size_t t = 0; t < fit.times.size(); ++t)
        for (std::size_t i = 0; i < fit.entities.size(); ++i) {
            std::vector<std::string> row = {fit.times[t], fit.entities[i]};
            for (int r = 0; r < fit.rank; ++r)
                row.push_back(io::format_double(positions[t][i * fit.rank + r]));
            csv += io::csv_row(row) + "\n";
        }
    io::write_file_atomic(out_path(config, "prr_positions.csv"), csv);
}

}  // namespace ttm::pipeline
