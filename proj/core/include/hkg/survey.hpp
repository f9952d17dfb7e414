#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hkg/corpus.hpp"

namespace hkg {

struct SurveyItem {
    std::string item_id;
    Haiku poem;
};

struct SurveySheet {
    std::string sheet_id;
    std::vector<SurveyItem> items;
};

using SurveyKey = std::map<std::string, Source>;

struct ScoreRecord {
    std::string rater_id;
    std::string item_id;
    int q1_quality = 0;
    int q2_humanlike = 0;
};

struct AggregateRow {
    Source engine = Source::human;
    std::string question;
    double mean = 0.0;
    std::size_t n = 0;

    bool operator==(const AggregateRow& other) const = default;
};

// First n_per_engine poems of each pool, shuffled together under the seed.
// Item ids are assigned in sheet order; the key is kept separate so the
// sheet itself never names an engine.
std::pair<SurveySheet, SurveyKey> make_survey(const std::map<Source, std::vector<Haiku>>& pools,
                                              std::size_t n_per_engine, std::uint64_t seed);

// Mean score per (engine, question) over the records; every record's item_id
// must appear in the key.
std::vector<AggregateRow> aggregate(const std::vector<ScoreRecord>& scores,
                                    const SurveyKey& key);

void write_sheet(const std::filesystem::path& path, const SurveySheet& sheet);
void write_key(const std::filesystem::path& path, const SurveyKey& key);
SurveyKey read_key(const std::filesystem::path& path);
std::vector<ScoreRecord> read_scores(const std::filesystem::path& path);
void write_report(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

}  // namespace hkg
