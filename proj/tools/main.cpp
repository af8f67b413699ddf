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

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ttm/error.hpp"
#include "ttm/pipeline.hpp"

// Exit codes: 0 success, 2 config error, 3 IO error, 4 corrupt state,
// 5 query error.

namespace {

struct CliArgs {
    std::string config_path;
    std::string input, format, out, period, stopwords, checkpoint, resume, embeddings_dir;
    std::vector<std::string> words;
    std::uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false, input_set = false, format_set = false, out_set = false,
         period_set = false, threads_set = false, stopwords_set = false;
};

void add_common_flags(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("--config", args.config_path, "TOML-like config file (flags win)");
    cmd->add_option("--input", args.input, "input path")->each([&](const std::string&) {
        args.input_set = true;
    });
    cmd->add_option("--format", args.format, "input format: jsonl|csv|corpus")
        ->each([&](const std::string&) { args.format_set = true; });
    cmd->add_option("--out", args.out, "output directory")->each([&](const std::string&) {
        args.out_set = true;
    });
    cmd->add_option("--period", args.period, "chunk period: year|quarter|month")
        ->each([&](const std::string&) { args.period_set = true; });
    cmd->add_option("--seed", args.seed, "global pipeline seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--threads", args.threads, "thread budget for the parallel kernels")
        ->each([&](const std::string&) { args.threads_set = true; });
    cmd->add_option("--stopwords", args.stopwords, "stop-word list, one word per line")
        ->each([&](const std::string&) { args.stopwords_set = true; });
}

ttm::pipeline::PipelineConfig build_config(const CliArgs& args) {
    ttm::pipeline::PipelineConfig config;
    if (!args.config_path.empty()) {
        if (!std::filesystem::exists(args.config_path))
            throw ttm::ConfigError("config path does not exist: " + args.config_path);
        ttm::pipeline::apply_config_file(config, args.config_path);
    }
    if (args.input_set) config.input = args.input;
    if (args.format_set) config.format = args.format;
    if (args.out_set) config.out_dir = args.out;
    if (args.period_set) config.period = args.period;
    if (args.seed_set) config.seed = args.seed;
    if (args.threads_set) config.threads = args.threads;
    if (args.stopwords_set) config.stopwords = args.stopwords;
    if (!args.checkpoint.empty()) config.checkpoint = args.checkpoint;
    if (!args.words.empty()) config.trajectory_words = args.words;
    if (!args.embeddings_dir.empty()) config.embeddings_dir = args.embeddings_dir;
    ttm::pipeline::finalize_config(config);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ttm - temporal text mining toolkit"};
    app.require_subcommand(1);

    CliArgs args;

    CLI::App* ingest = app.add_subcommand("ingest", "tokenize and chunk a corpus");
    CLI::App* rolling = app.add_subcommand("rolling", "fit a rolling topic model");
    CLI::App* changes = app.add_subcommand("changes", "monitor topics for change points");
    CLI::App* embed = app.add_subcommand("embed", "train and align per-chunk embeddings");
    CLI::App* trajectory = app.add_subcommand("trajectory", "export word trajectories");
    CLI::App* prr = app.add_subcommand("prr", "Poisson reduced-rank document scaling");

    for (CLI::App* cmd : {ingest, rolling, changes, embed, trajectory, prr})
        add_common_flags(cmd, args);
    rolling->add_option("--resume", args.resume, "continue from an existing checkpoint");
    changes->add_option("--checkpoint", args.checkpoint, "rolling checkpoint to monitor");
    trajectory->add_option("--words,-w", args.words, "words to track (comma separated)")
        ->delimiter(',');
    trajectory->add_option("--embeddings-dir", args.embeddings_dir,
                           "directory holding embed output (defaults to --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto config = build_config(args);
        if (ingest->parsed()) ttm::pipeline::cmd_ingest(config);
        else if (rolling->parsed()) ttm::pipeline::cmd_rolling(config, args.resume);
        else if (changes->parsed()) ttm::pipeline::cmd_changes(config);
        else if (embed->parsed()) ttm::pipeline::cmd_embed(config);
        else if (trajectory->parsed()) ttm::pipeline::cmd_trajectory(config);
        else if (prr->parsed()) ttm::pipeline::cmd_prr(config);
        return 0;
    } catch (const ttm::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ttm::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ttm::StateError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ttm::QueryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    }
}
