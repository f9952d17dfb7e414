#include "hkg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "hkg/rng.hpp"
#include "hkg/textio.hpp"

namespace hkg {
namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Rewrites malformed UTF-8 bytes as '?', the same defect the cleaner already
// repairs. Returns the number of rewritten bytes via `replaced`.
std::string sanitize_utf8(const std::string& in, std::size_t* replaced) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        unsigned char b = static_cast<unsigned char>(in[i]);
        std::size_t len = 0;
        if (b < 0x80) len = 1;
        else if ((b & 0xE0) == 0xC0 && b >= 0xC2) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0 && b <= 0xF4) len = 4;

        bool ok = len > 0 && i + len <= in.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            unsigned char cont = static_cast<unsigned char>(in[i + k]);
            if ((cont & 0xC0) != 0x80) ok = false;
        }
        if (ok) {
            out.append(in, i, len);
            i += len;
        } else {
            out.push_back('?');
            if (replaced) ++*replaced;
            ++i;
        }
    }
    return out;
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
}

// The dataset mixes separator conventions row by row, so detection is per row.
std::vector<std::string> detect_segments(const std::string& row, LoadFormat format) {
    if (format == LoadFormat::tsv) return split_on(row, "\t");
    if (row.find('\t') != std::string::npos) return split_on(row, "\t");
    if (row.find(" / ") != std::string::npos) return split_on(row, " / ");
    if (row.find('$') != std::string::npos) return split_on(row, "$");
    if (row.find("\\n") != std::string::npos) return split_on(row, "\\n");
    return {row};
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::size_t count_nonblank(const std::vector<std::string>& segments) {
    std::size_t n = 0;
    for (const auto& s : segments)
        if (!is_blank(s)) ++n;
    return n;
}

// Strips one layer of CSV quoting and collapses doubled quotes.
std::string csv_unquote(const std::string& s) {
    if (s.size() < 2 || s.front() != '"' || s.back() != '"') return s;
    std::string out;
    out.reserve(s.size() - 2);
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i] == '"' && i + 2 < s.size() && s[i + 1] == '"') {
            out.push_back('"');
            ++i;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::string clean_line(const std::string& raw) {
    std::string repaired;
    repaired.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '?') {
            if (i > 0 && i + 1 < raw.size() && is_alpha(raw[i - 1]) && is_alpha(raw[i + 1]))
                repaired.push_back(' ');
            continue;
        }
        if (c == '\r' || c == '\v' || c == '\f') {
            repaired.push_back(' ');
            continue;
        }
        repaired.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }

    std::vector<std::string> kept;
    for (const std::string& tok : split_ws(repaired)) {
        if (tok.size() == 1 && is_alpha(tok[0]) && tok != "a" && tok != "i" && tok != "o")
            continue;
        kept.push_back(tok);
    }
    return join(kept, " ");
}

}  // namespace

const char* source_name(Source s) {
    switch (s) {
        case Source::human: return "human";
        case Source::greedy: return "greedy";
        case Source::beam: return "beam";
        case Source::rnn_char: return "rnn_char";
        case Source::rnn_word: return "rnn_word";
    }
    return "unknown";
}

std::optional<Source> parse_source(const std::string& name) {
    for (Source s : {Source::human, Source::greedy, Source::beam, Source::rnn_char,
                     Source::rnn_word})
        if (name == source_name(s)) return s;
    return std::nullopt;
}

const char* reject_name(CleanReject r) {
    switch (r) {
        case CleanReject::none: return "none";
        case CleanReject::too_few_lines: return "too_few_lines";
        case CleanReject::too_many_lines: return "too_many_lines";
    }
    return "unknown";
}

std::vector<RawRecord> load_dataset(const std::filesystem::path& path, LoadFormat format,
                                    LoadReport* report) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    std::string text = sanitize_utf8(read_file(path), &rep.replaced_bytes);
    std::vector<std::string> lines = split_lines(text);

    // (row text, file row index) candidates before the segment check.
    std::vector<RawRecord> candidates;
    if (format == LoadFormat::one_per_line) {
        std::vector<std::string> block;
        std::size_t block_start = 0;
        auto flush = [&](std::size_t end_row) {
            (void)end_row;
            if (!block.empty()) {
                candidates.push_back({join(block, "\t"), block_start});
                block.clear();
            }
        };
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (is_blank(lines[i])) {
                flush(i);
            } else {
                if (block.empty()) block_start = i;
                block.push_back(lines[i]);
            }
        }
        flush(lines.size());
    } else {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (is_blank(lines[i])) continue;
            std::string row = format == LoadFormat::csv ? csv_unquote(lines[i]) : lines[i];
            candidates.push_back({std::move(row), i});
        }
    }

    std::vector<RawRecord> records;
    records.reserve(candidates.size());
    for (RawRecord& cand : candidates) {
        if (count_nonblank(detect_segments(cand.text, format)) < 3) {
            rep.skips.push_back({cand.row, "too_few_segments"});
            continue;
        }
        records.push_back(std::move(cand));
    }
    return records;
}

CleanResult clean_record(const RawRecord& record) {
    std::vector<std::string> lines;
    for (const std::string& seg : detect_segments(record.text, LoadFormat::auto_detect)) {
        std::string cleaned = clean_line(seg);
        if (!cleaned.empty()) lines.push_back(std::move(cleaned));
    }
    if (lines.size() < 3) return {std::nullopt, CleanReject::too_few_lines};
    if (lines.size() > 3) return {std::nullopt, CleanReject::too_many_lines};
    Haiku h;
    h.lines = {std::move(lines[0]), std::move(lines[1]), std::move(lines[2])};
    h.source = Source::human;
    return {std::move(h), CleanReject::none};
}

CorpusSplit split_corpus(const std::vector<Haiku>& corpus, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw DataError("split ratio must be in (0, 1)");
    if (corpus.size() < 2) throw DataError("need at least 2 haikus to split");

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::size_t n_train = static_cast<std::size_t>(ratio * static_cast<double>(corpus.size()));
    CorpusSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? split.train : split.test).push_back(corpus[order[i]]);
    }
    return split;
}

std::vector<std::string> first_lines(const CorpusSplit& split, Which which) {
    const std::vector<Haiku>& sel = which == Which::train ? split.train : split.test;
    std::vector<std::string> out;
    out.reserve(sel.size());
    for (const Haiku& h : sel) out.push_back(h.lines[0]);
    return out;
}

Vocabulary::Vocabulary(const std::vector<Haiku>& corpus) {
    std::map<std::string, std::int64_t> counts;
    for (const Haiku& h : corpus)
        for (const std::string& line : h.lines)
            for (const std::string& tok : split_ws(line)) ++counts[tok];
    for (auto& [word, count] : counts) add(word, count);
}

std::int64_t Vocabulary::id_of(const std::string& word) const {
    auto it = ids_.find(word);
    return it == ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vocabulary::add(const std::string& word, std::int64_t count) {
    auto [it, inserted] = ids_.emplace(word, words_.size());
    if (inserted) {
        words_.push_back(word);
        counts_.push_back(count);
    } else {
        counts_[it->second] += count;
    }
}

void write_corpus(const std::filesystem::path& path, const std::vector<Haiku>& corpus) {
    std::string out;
    for (const Haiku& h : corpus) {
        out += h.lines[0];
        out += " / ";
        out += h.lines[1];
        out += " / ";
        out += h.lines[2];
        out += '\n';
    }
    write_file(path, out);
}

std::vector<Haiku> read_corpus(const std::filesystem::path& path, Source source) {
    std::vector<Haiku> corpus;
    for (const RawRecord& rec : load_dataset(path, LoadFormat::auto_detect)) {
        CleanResult res = clean_record(rec);
        if (!res.haiku)
            throw DataError("corpus row " + std::to_string(rec.row) +
                            " is not a clean haiku (" + reject_name(res.reject) + "): " +
                            path.string());
        res.haiku->source = source;
        corpus.push_back(std::move(*res.haiku));
    }
    return corpus;
}

void write_skip_report(const std::filesystem::path& path, const std::vector<SkipEntry>& skips) {
    std::string out = "row_index,reason\n";
    for (const SkipEntry& s : skips) {
        out += std::to_string(s.row);
        out += ',';
        out += s.reason;
        out += '\n';
    }
    write_file(path, out);
}

}  // namespace hkg
