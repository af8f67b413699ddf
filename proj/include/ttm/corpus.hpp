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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

// Time-stamped corpus handling: normalization, tokenization, vocabularies
// and partitioning into ordered calendar chunks. All operations here are
// pure functions over immutable inputs.

namespace ttm::corpus {

/// Calendar date, UTC, day resolution. Sub-day precision in the input is
/// truncated on parse.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31, validated against the month

    auto operator<=>(const Date&) const = default;
    std::string to_string() const;  // YYYY-MM-DD
};

/// Parses an ISO-8601 calendar date ("2014-03-01"); anything after the day
/// ("2014-03-01T12:30:00Z") is truncated. Throws ConfigError when invalid.
Date parse_date(const std::string& text);

struct Document {
    std::string id;
    std::vector<std::string> tokens;
    Date timestamp;
};

enum class Period { year, quarter, month };

Period parse_period(const std::string& name);  // "year" | "quarter" | "month"

/// Half-open calendar interval [period_start, period_end) holding the ids of
/// the documents whose timestamps fall inside it. Chunks are contiguous and
/// ordered; empty periods between the corpus extremes are kept.
struct TimeChunk {
    int index = 0;
    Date period_start;
    Date period_end;
    std::string label;  // "2014", "2014-Q2" or "2014-05"
    std::vector<std::string> doc_ids;
};

/// Words retained by a count threshold, ordered by descending corpus count
/// with lexicographic tie-break; index_of maps each word onto 0..V-1.
struct Vocabulary {
    std::vector<std::string> words;
    std::unordered_map<std::string, std::int32_t> index_of;
    std::vector<std::int64_t> counts;  // parallel to words
    int min_count = 1;

    std::int32_t size() const { return static_cast<std::int32_t>(words.size()); }
    /// -1 when the word is not in the vocabulary.
    std::int32_t id(const std::string& word) const {
        auto it = index_of.find(word);
        return it == index_of.end() ? -1 : it->second;
    }
};

struct ChunkedCorpus {
    std::vector<Document> documents;                        // ingest order
    std::unordered_map<std::string, std::size_t> doc_pos;   // id -> index in documents
    std::vector<TimeChunk> chunks;
    Vocabulary vocabulary;

    const Document& doc(const std::string& id) const;
};

/// One raw input record prior to tokenization.
struct RawRecord {
    std::string id;
    std::string text;
    std::string date;
};

/// Unicode-aware lowercasing, split on any non-letter/non-digit, tokens
/// shorter than 2 codepoints dropped. Letter classification covers Latin,
/// Latin-1/Extended, Greek and Cyrillic; other codepoints act as separators.
std::vector<std::string> tokenize(const std::string& raw_text);

/// Tokenizes records in input order. Rejects duplicate ids and unparseable
/// dates, naming the offender.
std::vector<Document> ingest(const std::vector<RawRecord>& records);

/// Words with total count >= min_count, ordered per Vocabulary.
Vocabulary build_vocabulary(const std::vector<Document>& docs, int min_count);

/// One chunk per calendar period between the min and max timestamp,
/// inclusive, with empty intermediate periods kept. Document order inside a
/// chunk follows input order.
std::vector<TimeChunk> chunk_by_period(const std::vector<Document>& docs, Period period);

/// Convenience bundle: ingest + chunk + vocabulary.
ChunkedCorpus build_corpus(const std::vector<RawRecord>& records, Period period, int min_count);

/// Optional stop-word filtering: removes the listed tokens from every
/// document. The file holds one word per line (applied post-tokenization).
std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path);
std::vector<Document> remove_stopwords(std::vector<Document> docs,
                                       const std::unordered_set<std::string>& stopwords);

/// JSONL reader: one object per line with fields `id`, `text`, `date`.
std::vector<RawRecord> read_jsonl(const std::filesystem::path& path);

/// CSV reader with header columns id, text, date (any order, RFC 4180).
std::vector<RawRecord> read_csv(const std::filesystem::path& path);

}  // namespace ttm::corpus
