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

#include "ttm/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ttm/error.hpp"
#include "ttm/io_util.hpp"

namespace ttm::corpus {

namespace {

// --- UTF-8 + case folding ------------------------------------------------
//
// Coverage: Basic Latin, Latin-1, Latin Extended-A/B, Greek, Cyrillic.
// Codepoints outside these ranges count as separators. Extended-B letters
// are recognized but not case-mapped (their mappings are irregular and the
// corpora this targets do not exercise them).

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one codepoint starting at `i`; advances `i`. Invalid bytes decode
// to U+FFFD and advance a single byte.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + len > s.size()) {
        ++i;
        return kReplacement;
    }
    for (int k = 1; k < len; ++k) {
        const unsigned char bk = byte(i + k);
        if ((bk & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (bk & 0x3F);
    }
    // overlong / out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        cp > 0x10FFFF) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_letter(char32_t c) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) return true;
    if ((c >= 0xC0 && c <= 0xF6 && c != 0xD7) || (c >= 0xF8 && c <= 0xFF)) return true;
    if (c >= 0x100 && c <= 0x24F) return true;  // Latin Extended-A/B
    if (c == 0x386 || (c >= 0x388 && c <= 0x38A) || c == 0x38C ||
        (c >= 0x38E && c <= 0x3A1) || (c >= 0x3A3 && c <= 0x3FF))
        return true;                                        // Greek
    if ((c >= 0x400 && c <= 0x481) || (c >= 0x48A && c <= 0x4FF)) return true;  // Cyrillic
    if (c == 0x1E9E) return true;  // capital sharp s
    return false;
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 0x20;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;  // Latin-1 uppercase
    if (c == 0x1E9E) return 0xDF;                              // capital sharp s
    if (c >= 0x100 && c <= 0x17F) {                            // Latin Extended-A
        if (c == 0x130) return 0x69;   // dotted capital I -> i (simple mapping)
        if (c == 0x178) return 0xFF;   // capital Y diaeresis
        if ((c <= 0x137 || (c >= 0x14A && c <= 0x177)) && c % 2 == 0) return c + 1;
        if (((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) && c % 2 == 1) return c + 1;
        return c;
    }
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 0x20;  // Greek
    if (c == 0x386) return 0x3AC;
    if (c >= 0x388 && c <= 0x38A) return c + 0x25;
    if (c == 0x38C) return 0x3CC;
    if (c == 0x38E || c == 0x38F) return c + 0x3F;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;  // Cyrillic
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x460 && c <= 0x4FF && c % 2 == 0) return c + 1;
    return c;
}

// --- dates ----------------------------------------------------------------

bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return kDays[month - 1];
}

}  // namespace

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date parse_date(const std::string& text) {
    // YYYY-MM-DD, optionally followed by a time part that is dropped.
    if (text.size() < 10 || text[4] != '-' || text[7] != '-' ||
        !all_digits(text, 0, 4) || !all_digits(text, 5, 7) || !all_digits(text, 8, 10))
        throw ConfigError("unparseable date: \"" + text + "\"");
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ')
        throw ConfigError("unparseable date: \"" + text + "\"");
    Date d;
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw ConfigError("invalid calendar date: \"" + text + "\"");
    return d;
}

Period parse_period(const std::string& name) {
    if (name == "year") return Period::year;
    if (name == "quarter") return Period::quarter;
    if (name == "month") return Period::month;
    throw ConfigError("unknown period \"" + name + "\" (expected year|quarter|month)");
}

std::vector<std::string> tokenize(const std::string& raw_text) {
    std::vector<std::string> tokens;
    std::string current;
    int current_len = 0;
    const auto flush = [&] {
        if (current_len >= 2) tokens.push_back(current);
        current.clear();
        current_len = 0;
    };
    std::size_t i = 0;
    while (i < raw_text.size()) {
        const char32_t cp = decode_utf8(raw_text, i);
        if (is_letter(cp) || is_digit(cp)) {
            encode_utf8(to_lower(cp), current);
            ++current_len;
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::vector<Document> ingest(const std::vector<RawRecord>& records) {
    std::vector<Document> docs;
    docs.reserve(records.size());
    std::unordered_set<std::string> seen;
    for (const auto& rec : records) {
        if (!seen.insert(rec.id).second)
            throw ConfigError("duplicate document id \"" + rec.id + "\"");
        Document doc;
        doc.id = rec.id;
        doc.tokens = tokenize(rec.text);
        try {
            doc.timestamp = parse_date(rec.date);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " in record \"" + rec.id + "\"");
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

Vocabulary build_vocabulary(const std::vector<Document>& docs, int min_count) {
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    std::unordered_map<std::string, std::int64_t> counts;
    for (const auto& doc : docs)
        for (const auto& tok : doc.tokens) ++counts[tok];

    std::vector<std::pair<std::string, std::int64_t>> retained;
    for (const auto& [word, count] : counts)
        if (count >= min_count) retained.emplace_back(word, count);
    std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.min_count = min_count;
    vocab.words.reserve(retained.size());
    vocab.counts.reserve(retained.size());
    for (std::size_t i = 0; i < retained.size(); ++i) {
        vocab.words.push_back(retained[i].first);
        vocab.counts.push_back(retained[i].second);
        vocab.index_of.emplace(retained[i].first, static_cast<std::int32_t>(i));
    }
    return vocab;
}

namespace {

struct PeriodKey {
    int year;
    int sub;  // 0 for yearly, quarter 1..4, month 1..12
    auto operator<=>(const PeriodKey&) const = default;
};

PeriodKey key_of(const Date& d, Period p) {
    switch (p) {
        case Period::year: return {d.year, 0};
        case Period::quarter: return {d.year, (d.month - 1) / 3 + 1};
        case Period::month: return {d.year, d.month};
    }
    return {d.year, 0};
}

PeriodKey next_key(PeriodKey k, Period p) {
    switch (p) {
        case Period::year: return {k.year + 1, 0};
        case Period::quarter: return k.sub == 4 ? PeriodKey{k.year + 1, 1} : PeriodKey{k.year, k.sub + 1};
        case Period::month: return k.sub == 12 ? PeriodKey{k.year + 1, 1} : PeriodKey{k.year, k.sub + 1};
    }
    return k;
}

Date start_of(PeriodKey k, Period p) {
    switch (p) {
        case Period::year: return {k.year, 1, 1};
        case Period::quarter: return {k.year, 3 * (k.sub - 1) + 1, 1};
        case Period::month: return {k.year, k.sub, 1};
    }
    return {k.year, 1, 1};
}

std::string label_of(PeriodKey k, Period p) {
    char buf[16];
    switch (p) {
        case Period::year: std::snprintf(buf, sizeof(buf), "%04d", k.year); break;
        case Period::quarter: std::snprintf(buf, sizeof(buf), "%04d-Q%d", k.year, k.sub); break;
        case Period::month: std::snprintf(buf, sizeof(buf), "%04d-%02d", k.year, k.sub); break;
    }
    return buf;
}

}  // namespace

std::vector<TimeChunk> chunk_by_period(const std::vector<Document>& docs, Period period) {
    if (docs.empty()) return {};

    PeriodKey lo = key_of(docs.front().timestamp, period);
    PeriodKey hi = lo;
    for (const auto& doc : docs) {
        const PeriodKey k = key_of(doc.timestamp, period);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }

    std::vector<TimeChunk> chunks;
    std::vector<PeriodKey> keys;
    for (PeriodKey k = lo;; k = next_key(k, period)) {
        TimeChunk chunk;
        chunk.index = static_cast<int>(chunks.size());
        chunk.period_start = start_of(k, period);
        chunk.period_end = start_of(next_key(k, period), period);
        chunk.label = label_of(k, period);
        chunks.push_back(std::move(chunk));
        keys.push_back(k);
        if (k == hi) break;
    }

    std::unordered_map<std::string, std::size_t> chunk_index;
    for (std::size_t i = 0; i < keys.size(); ++i) chunk_index.emplace(label_of(keys[i], period), i);
    for (const auto& doc : docs) {
        const std::size_t i = chunk_index.at(label_of(key_of(doc.timestamp, period), period));
        chunks[i].doc_ids.push_back(doc.id);
    }
    return chunks;
}

const Document& ChunkedCorpus::doc(const std::string& id) const {
    auto it = doc_pos.find(id);
    if (it == doc_pos.end()) throw QueryError("unknown document id \"" + id + "\"");
    return documents[it->second];
}

ChunkedCorpus build_corpus(const std::vector<RawRecord>& records, Period period, int min_count) {
    ChunkedCorpus corpus;
    corpus.documents = ingest(records);
    for (std::size_t i = 0; i < corpus.documents.size(); ++i)
        corpus.doc_pos.emplace(corpus.documents[i].id, i);
    corpus.chunks = chunk_by_period(corpus.documents, period);
    corpus.vocabulary = build_vocabulary(corpus.documents, min_count);
    return corpus;
}

std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path) {
    std::unordered_set<std::string> words;
    std::istringstream in(io::read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) words.insert(line);
    }
    return words;
}

std::vector<Document> remove_stopwords(std::vector<Document> docs,
                                       const std::unordered_set<std::string>& stopwords) {
    for (auto& doc : docs) {
        std::erase_if(doc.tokens, [&](const std::string& t) { return stopwords.contains(t); });
    }
    return docs;
}

std::vector<RawRecord> read_jsonl(const std::filesystem::path& path) {
    std::istringstream in(io::read_file(path));
    std::vector<RawRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") || !obj.contains("date"))
            throw IoError(path.string() + ":" + std::to_string(lineno) +
                          ": expected object with fields id, text, date");
        records.push_back({obj["id"].get<std::string>(), obj["text"].get<std::string>(),
                           obj["date"].get<std::string>()});
    }
    return records;
}

std::vector<RawRecord> read_csv(const std::filesystem::path& path) {
    const auto rows = io::csv_parse(io::read_file(path));
    if (rows.empty()) throw IoError(path.string() + ": empty CSV file");
    const auto& header = rows.front();
    int id_col = -1, text_col = -1, date_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "id") id_col = static_cast<int>(i);
        else if (header[i] == "text") text_col = static_cast<int>(i);
        else if (header[i] == "date") date_col = static_cast<int>(i);
    }
    if (id_col < 0 || text_col < 0 || date_col < 0)
        throw IoError(path.string() + ": CSV header must contain id, text, date");

    std::vector<RawRecord> records;
    const std::size_t needed = static_cast<std::size_t>(std::max({id_col, text_col, date_col})) + 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < needed)
            throw IoError(path.string() + ": row " + std::to_string(r + 1) + ": too few CSV fields");
        records.push_back({rows[r][id_col], rows[r][text_col], rows[r][date_col]});
    }
    return records;
}

}  // namespace ttm::corpus
