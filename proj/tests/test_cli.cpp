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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "ttm/io_util.hpp"
#include "ttm/rng.hpp"

namespace fs = std::filesystem;
using ttm::io::read_file;
using ttm::io::write_file_atomic;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(TTM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ttm_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small four-year corpus with a shared vocabulary of ten words.
std::string tiny_jsonl() {
    const std::vector<std::string> pool = {"alpha", "beta",  "gamma", "delta", "epsil",
                                           "zetaa", "etaaa", "theta", "iotaa", "kappa"};
    ttm::rng::Xoshiro256StarStar gen(12345);
    std::string out;
    int id = 0;
    for (int year = 2020; year <= 2023; ++year) {
        for (int d = 0; d < 6; ++d) {
            std::string text;
            for (const auto& w : pool) text += w + " ";  // every word in every chunk
            for (int i = 0; i < 20; ++i) text += pool[gen.next_below(10)] + " ";
            out += "{\"id\":\"d" + std::to_string(id++) + "\",\"text\":\"" + text +
                   "\",\"date\":\"" + std::to_string(year) + "-06-01\"}\n";
        }
    }
    return out;
}

std::string tiny_config(const fs::path& input, const fs::path& out) {
    return "[pipeline]\n"
           "input = " + input.string() + "\n"
           "out = " + out.string() + "\n"
           "period = year\n"
           "seed = 42\n\n"
           "[lda]\n"
           "topics = 2\n"
           "iterations = 30\n\n"
           "[rolling]\n"
           "warmup_chunks = 2\n"
           "memory = 2\n"
           "top_words = 5\n\n"
           "[changes]\n"
           "reference_window = 2\n"
           "bootstrap_samples = 100\n"
           "quantile = 0.05\n\n"
           "[embed]\n"
           "dim = 4\n"
           "window = 2\n"
           "negatives = 2\n"
           "epochs = 2\n\n"
           "[trajectory]\n"
           "words = alpha\n"
           "neighbors = 2\n\n"
           "[prr]\n"
           "rank = 1\n"
           "max_iters = 50\n";
}

std::map<std::string, std::string> dir_tree(const fs::path& dir) {
    std::map<std::string, std::string> tree;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file())
            tree[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
    return tree;
}

}  // namespace

TEST_CASE("full pipeline: ingest, rolling, changes, embed, trajectory") {
    const fs::path dir = fresh_dir("pipeline");
    const fs::path input = dir / "in.jsonl";
    const fs::path out = dir / "out";
    const fs::path cfg = dir / "ttm.conf";
    write_file_atomic(input, tiny_jsonl());
    write_file_atomic(cfg, tiny_config(input, out));
    const std::string base = "--config " + cfg.string();

    REQUIRE(run("ingest " + base) == 0);
    CHECK(fs::exists(out / "corpus.json"));

    REQUIRE(run("rolling " + base) == 0);
    CHECK(fs::exists(out / "checkpoint.json"));
    const std::string top_words = read_file(out / "top_words.csv");
    CHECK(top_words.rfind("chunk,topic,rank,word,probability\n", 0) == 0);

    REQUIRE(run("changes " + base) == 0);
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "changes_topic_0.csv"));
    CHECK(fs::exists(out / "changes_topic_1.csv"));
    CHECK_FALSE(fs::exists(out / "changes_topic_2.csv"));  // exactly K files
    const std::string topic_csv = read_file(out / "changes_topic_0.csv");
    CHECK(topic_csv.rfind("chunk,stability,threshold,is_change\n", 0) == 0);

    REQUIRE(run("embed " + base) == 0);
    for (int t = 0; t < 4; ++t) CHECK(fs::exists(out / ("chunk_" + std::to_string(t) + ".emb")));
    CHECK(fs::exists(out / "alignment.json"));

    REQUIRE(run("trajectory " + base) == 0);
    const std::string traj = read_file(out / "trajectory_alpha.csv");
    CHECK(traj.rfind("chunk,x,y,neighbor_1,neighbor_2\n", 0) == 0);
    // One row per chunk containing the word (plus the header).
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 5);

    // The rolling command can consume the ingest artifact directly.
    const fs::path out2 = dir / "out2";
    REQUIRE(run("rolling " + base + " --input " + (out / "corpus.json").string() +
                " --format corpus --out " + out2.string()) == 0);
    CHECK(read_file(out2 / "checkpoint.json") == read_file(out / "checkpoint.json"));
}

TEST_CASE("reruns with the same seed are byte-identical; different seeds differ") {
    const fs::path dir = fresh_dir("determinism");
    const fs::path input = dir / "in.jsonl";
    write_file_atomic(input, tiny_jsonl());
    const fs::path out_a = dir / "a";
    const fs::path out_b = dir / "b";
    const fs::path cfg_a = dir / "a.conf";
    const fs::path cfg_b = dir / "b.conf";
    write_file_atomic(cfg_a, tiny_config(input, out_a));
    write_file_atomic(cfg_b, tiny_config(input, out_b));

    for (const std::string cmd : {"rolling", "changes", "embed", "trajectory"}) {
        REQUIRE(run(cmd + " --config " + cfg_a.string()) == 0);
        REQUIRE(run(cmd + " --config " + cfg_b.string()) == 0);
    }
    CHECK(dir_tree(out_a) == dir_tree(out_b));

    // A different seed changes at least the checkpoint.
    const fs::path out_c = dir / "c";
    REQUIRE(run("rolling --config " + cfg_a.string() + " --out " + out_c.string() +
                " --seed 43") == 0);
    CHECK(read_file(out_c / "checkpoint.json") != read_file(out_a / "checkpoint.json"));
}

TEST_CASE("prr command fits a long-format CSV") {
    const fs::path dir = fresh_dir("prr");
    const fs::path input = dir / "counts.csv";
    std::string csv = "time,entity,word,count\n";
    ttm::rng::Xoshiro256StarStar gen(5);
    for (const std::string& t : {"2020", "2021"})
        for (const std::string& e : {"p1", "p2", "p3"})
            for (const std::string& w : {"w1", "w2", "w3", "w4"})
                csv += t + "," + e + "," + w + "," + std::to_string(1 + gen.next_below(9)) + "\n";
    write_file_atomic(input, csv);
    const fs::path out = dir / "out";

    REQUIRE(run("prr --input " + input.string() + " --out " + out.string() + " --seed 7") == 0);
    CHECK(fs::exists(out / "prr_fit.json"));
    const std::string positions = read_file(out / "prr_positions.csv");
    CHECK(positions.rfind("time,entity,coord_1,coord_2\n", 0) == 0);
    CHECK(std::count(positions.begin(), positions.end(), '\n') == 7);  // header + 2*3 rows
}

TEST_CASE("exit codes follow the documented discipline") {
    const fs::path dir = fresh_dir("exit_codes");
    const fs::path input = dir / "in.jsonl";
    write_file_atomic(input, tiny_jsonl());
    const fs::path out = dir / "out";
    const std::string base = " --out " + out.string() + " --period year --seed 1";

    // 2: config errors.
    CHECK(run("rolling --input " + (dir / "missing.jsonl").string() + base) == 2);
    CHECK(run("rolling --input " + input.string() + base + " --format nope") == 2);
    CHECK(run("rolling") == 2);  // no input at all
    CHECK(run("bogus_subcommand") == 2);
    const fs::path bad_cfg = dir / "bad.conf";
    write_file_atomic(bad_cfg, "[lda]\nbogus_key = 1\n");
    CHECK(run("rolling --config " + bad_cfg.string()) == 2);

    // 3: unreadable input content.
    const fs::path broken = dir / "broken.jsonl";
    write_file_atomic(broken, "{not json at all\n");
    CHECK(run("rolling --input " + broken.string() + base) == 3);

    // 4: corrupt checkpoint.
    fs::create_directories(out);
    write_file_atomic(out / "checkpoint.json", "{\"format\":\"wrong\"}");
    CHECK(run("changes --input " + input.string() + base) == 4);

    // 5: unknown trajectory word.
    const fs::path cfg = dir / "ttm.conf";
    write_file_atomic(cfg, tiny_config(input, dir / "out5"));
    REQUIRE(run("embed --config " + cfg.string()) == 0);
    CHECK(run("trajectory --config " + cfg.string() + " --words notaword") == 5);

    // 0: help.
    CHECK(run("--help") == 0);
}

TEST_CASE("flags override the config file") {
    const fs::path dir = fresh_dir("flag_override");
    const fs::path input = dir / "in.jsonl";
    write_file_atomic(input, tiny_jsonl());
    const fs::path out_file = dir / "out_file";
    const fs::path out_flag = dir / "out_flag";
    const fs::path cfg = dir / "ttm.conf";
    write_file_atomic(cfg, tiny_config(input, out_file));

    REQUIRE(run("ingest --config " + cfg.string() + " --out " + out_flag.string()) == 0);
    CHECK(fs::exists(out_flag / "corpus.json"));
    CHECK_FALSE(fs::exists(out_file / "corpus.json"));
}

TEST_CASE("rolling --resume continues a checkpoint incrementally") {
    const fs::path dir = fresh_dir("resume");
    const fs::path full_input = dir / "full.jsonl";
    write_file_atomic(full_input, tiny_jsonl());

    // Prefix corpus: first three years only.
    std::string prefix;
    std::istringstream lines(tiny_jsonl());
    std::string line;
    while (std::getline(lines, line))
        if (line.find("2023-") == std::string::npos) prefix += line + "\n";
    const fs::path prefix_input = dir / "prefix.jsonl";
    write_file_atomic(prefix_input, prefix);

    const fs::path out_full = dir / "full";
    const fs::path out_prefix = dir / "prefix";
    const fs::path out_resumed = dir / "resumed";
    const fs::path cfg_full = dir / "full.conf";
    const fs::path cfg_prefix = dir / "prefix.conf";
    write_file_atomic(cfg_full, tiny_config(full_input, out_full));
    write_file_atomic(cfg_prefix, tiny_config(prefix_input, out_prefix));

    REQUIRE(run("rolling --config " + cfg_full.string()) == 0);
    REQUIRE(run("rolling --config " + cfg_prefix.string()) == 0);
    REQUIRE(run("rolling --config " + cfg_full.string() + " --out " + out_resumed.string() +
                " --resume " + (out_prefix / "checkpoint.json").string()) == 0);
    CHECK(read_file(out_resumed / "checkpoint.json") == read_file(out_full / "checkpoint.json"));
}
