#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hkg {

enum class Source { human, greedy, beam, rnn_char, rnn_word };

const char* source_name(Source s);
std::optional<Source> parse_source(const std::string& name);

struct Haiku {
    std::array<std::string, 3> lines;
    Source source = Source::human;
};

// One dataset row as read, separators and artifacts intact. `row` is the
// 0-based position in the input file.
struct RawRecord {
    std::string text;
    std::size_t row = 0;
};

enum class LoadFormat { auto_detect, csv, tsv, one_per_line };

struct SkipEntry {
    std::size_t row;
    std::string reason;
};

struct LoadReport {
    std::vector<SkipEntry> skips;
    std::size_t replaced_bytes = 0;  // invalid UTF-8 bytes rewritten as '?'
};

// Reads one RawRecord per logical haiku row. Rows whose line separator cannot
// be detected with at least 3 segments are skipped and counted in the report.
// auto_detect probes each row for a tab, " / ", '$', or a literal "\n" escape,
// in that order. one_per_line treats blank-line separated blocks as rows
// (block lines joined with tabs). Invalid UTF-8 bytes become '?' so the
// cleaning stage can repair them like any other scraping artifact.
std::vector<RawRecord> load_dataset(const std::filesystem::path& path, LoadFormat format,
                                    LoadReport* report = nullptr);

enum class CleanReject { none, too_few_lines, too_many_lines };

const char* reject_name(CleanReject r);

struct CleanResult {
    std::optional<Haiku> haiku;
    CleanReject reject = CleanReject::none;
};

// Repairs scraping artifacts and normalizes a record into a 3-line haiku:
// '?' flanked by letters becomes a space, every other '?' is dropped,
// text is lowercased (ASCII), whitespace collapses, and single-letter tokens
// outside {a, i, o} are deleted. Rows that do not end up with exactly 3
// non-empty lines are rejected with a reason. Idempotent.
CleanResult clean_record(const RawRecord& record);

struct CorpusSplit {
    std::vector<Haiku> train;
    std::vector<Haiku> test;
    std::uint64_t seed = 0;
};

// Deterministic seeded shuffle; first floor(ratio*N) haikus go to train.
// Requires 0 < ratio < 1 and at least 2 haikus.
CorpusSplit split_corpus(const std::vector<Haiku>& corpus, double ratio, std::uint64_t seed);

enum class Which { train, test };

std::vector<std::string> first_lines(const CorpusSplit& split, Which which);

// Word ids are dense, contiguous from 0, assigned in sorted word order.
class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(const std::vector<Haiku>& corpus);

    std::size_t size() const { return words_.size(); }
    const std::vector<std::string>& words() const { return words_; }
    const std::string& word(std::size_t id) const { return words_[id]; }
    std::int64_t count(std::size_t id) const { return counts_[id]; }

    // -1 when out of vocabulary.
    std::int64_t id_of(const std::string& word) const;
    bool contains(const std::string& word) const { return id_of(word) >= 0; }

    void add(const std::string& word, std::int64_t count);

    bool operator==(const Vocabulary& other) const = default;

private:
    std::vector<std::string> words_;
    std::vector<std::int64_t> counts_;
    std::unordered_map<std::string, std::size_t> ids_;
};

// Cleaned-corpus row files: one haiku per row, lines joined by " / ".
void write_corpus(const std::filesystem::path& path, const std::vector<Haiku>& corpus);
std::vector<Haiku> read_corpus(const std::filesystem::path& path, Source source = Source::human);

void write_skip_report(const std::filesystem::path& path, const std::vector<SkipEntry>& skips);

}  // namespace hkg
