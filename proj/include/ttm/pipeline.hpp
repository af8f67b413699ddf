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

#include "ttm/changes.hpp"
#include "ttm/corpus.hpp"
#include "ttm/diachronic.hpp"
#include "ttm/prr.hpp"
#include "ttm/rolling.hpp"

// Pipeline plumbing behind the CLI: one flat config (file < flags), seed
// derivation, artifact writing. Artifacts are written to temp names and
// renamed on success, contain no absolute paths, and reproduce byte-for-byte
// under an unchanged (input, config, seed) triple.

namespace ttm::pipeline {

struct PipelineConfig {
    // [pipeline]
    std::string input;
    std::string format;      // jsonl | csv | corpus; inferred from extension when empty
    std::string out_dir = ".";
    std::string period = "year";
    std::uint64_t seed = 1;
    int threads = 0;         // 0 keeps the OpenMP default
    std::string stopwords;   // optional path
    int min_count = 1;       // corpus artifact vocabulary threshold

    // [rolling] (+ nested [lda]/[prototype] blocks)
    rolling::RollingConfig rolling;
    int top_words = 10;

    // [changes]
    changes::MonitorConfig monitor;
    std::string checkpoint;  // input checkpoint for `changes`; defaults to <out>/checkpoint.json

    // [embed]
    diachronic::SgnsConfig sgns;
    bool force_rotation = false;

    // [trajectory]
    std::vector<std::string> trajectory_words;
    int trajectory_neighbors = 5;
    std::string embeddings_dir;  // defaults to out_dir

    // [prr]
    prr::PrrConfig prr;
};

/// Parses the TOML-like config file ("[section]" headers, "key = value"
/// lines, '#' comments) over the defaults. Throws ConfigError on unknown
/// keys or malformed lines.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Fills the per-module seeds from the global seed (rolling uses it
/// directly; changes, embed and prr use fixed derived streams) and applies
/// the thread budget.
void finalize_config(PipelineConfig& config);

// Commands. Each writes its artifacts under config.out_dir and throws a
// typed error on failure (the CLI maps types to exit codes).
void cmd_ingest(const PipelineConfig& config);
void cmd_rolling(const PipelineConfig& config, const std::string& resume_checkpoint = "");
void cmd_changes(const PipelineConfig& config);
void cmd_embed(const PipelineConfig& config);
void cmd_trajectory(const PipelineConfig& config);
void cmd_prr(const PipelineConfig& config);

/// Loads a corpus from raw jsonl/csv input or from a corpus.json artifact.
corpus::ChunkedCorpus load_corpus(const PipelineConfig& config);

}  // namespace ttm::pipeline
