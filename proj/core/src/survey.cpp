#include "hkg/survey.hpp"

#include <algorithm>
#include <set>

#include "hkg/rng.hpp"
#include "hkg/textio.hpp"

namespace hkg {

namespace {

std::string item_id_for(std::size_t index, std::size_t total) {
    std::size_t width = 3;
    for (std::size_t n = total; n > 999; n /= 10) ++width;
    std::string digits = std::to_string(index + 1);
    return "i" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::vector<std::string> split_csv_row(const std::string& row) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : row) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::pair<SurveySheet, SurveyKey> make_survey(const std::map<Source, std::vector<Haiku>>& pools,
                                              std::size_t n_per_engine, std::uint64_t seed) {
    std::vector<std::pair<Source, Haiku>> picked;
    for (const auto& [engine, pool] : pools) {
        if (pool.size() < n_per_engine)
            throw DataError(std::string("make_survey: pool '") + source_name(engine) +
                            "' has " + std::to_string(pool.size()) + " poems, need " +
                            std::to_string(n_per_engine));
        for (std::size_t i = 0; i < n_per_engine; ++i) picked.emplace_back(engine, pool[i]);
    }

    Rng rng(derive_seed(seed, "survey"));
    rng.shuffle(picked);

    SurveySheet sheet;
    sheet.sheet_id = "sheet-" + std::to_string(seed);
    SurveyKey key;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        std::string id = item_id_for(i, picked.size());
        sheet.items.push_back({id, picked[i].second});
        key.emplace(id, picked[i].first);
    }
    return {std::move(sheet), std::move(key)};
}

std::vector<AggregateRow> aggregate(const std::vector<ScoreRecord>& scores,
                                    const SurveyKey& key) {
    std::set<std::string> unknown;
    for (const ScoreRecord& s : scores)
        if (!key.count(s.item_id)) unknown.insert(s.item_id);
    if (!unknown.empty())
        throw DataError("aggregate: unknown item ids: " +
                        join({unknown.begin(), unknown.end()}, ", "));

    std::map<Source, std::pair<double, double>> totals;
    std::map<Source, std::size_t> counts;
    for (const ScoreRecord& s : scores) {
        if (s.q1_quality < 1 || s.q1_quality > 10 || s.q2_humanlike < 1 || s.q2_humanlike > 10)
            throw DataError("aggregate: scores for item " + s.item_id +
                            " fall outside 1..10");
        Source engine = key.at(s.item_id);
        totals[engine].first += s.q1_quality;
        totals[engine].second += s.q2_humanlike;
        ++counts[engine];
    }

    std::vector<AggregateRow> rows;
    for (const auto& [engine, total] : totals) {
        double n = static_cast<double>(counts[engine]);
        rows.push_back({engine, "q1_quality", total.first / n, counts[engine]});
        rows.push_back({engine, "q2_humanlike", total.second / n, counts[engine]});
    }
    return rows;
}

void write_sheet(const std::filesystem::path& path, const SurveySheet& sheet) {
    std::string out = "poem survey " + sheet.sheet_id + "\n";
    out += "rate every poem on both questions, from 1 (low) to 10 (high):\n";
    out += "q1: how good was this poem?\n";
    out += "q2: how likely is it that a person wrote this poem?\n";
    for (const SurveyItem& item : sheet.items) {
        out += "\nitem " + item.item_id + "\n";
        for (const std::string& line : item.poem.lines) out += line + "\n";
    }
    write_file(path, out);
}

void write_key(const std::filesystem::path& path, const SurveyKey& key) {
    std::string out = "item_id,engine\n";
    for (const auto& [id, engine] : key) out += id + "," + source_name(engine) + "\n";
    write_file(path, out);
}

SurveyKey read_key(const std::filesystem::path& path) {
    std::vector<std::string> lines = split_lines(read_file(path));
    if (lines.empty() || lines[0] != "item_id,engine")
        throw DataError("bad key file header: " + path.string());
    SurveyKey key;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv_row(lines[i]);
        if (fields.size() != 2)
            throw DataError("bad key row " + std::to_string(i + 1) + ": " + path.string());
        auto engine = parse_source(fields[1]);
        if (!engine)
            throw DataError("unknown engine '" + fields[1] + "' in key: " + path.string());
        key.emplace(fields[0], *engine);
    }
    return key;
}

std::vector<ScoreRecord> read_scores(const std::filesystem::path& path) {
    std::vector<std::string> lines = split_lines(read_file(path));
    if (lines.empty() || lines[0] != "rater_id,item_id,q1,q2")
        throw DataError("bad scores file header: " + path.string());
    std::vector<ScoreRecord> scores;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split_csv_row(lines[i]);
        if (fields.size() != 4)
            throw DataError("bad score row " + std::to_string(i + 1) + ": " + path.string());
        ScoreRecord s;
        s.rater_id = fields[0];
        s.item_id = fields[1];
        s.q1_quality = static_cast<int>(parse_int(fields[2]));
        s.q2_humanlike = static_cast<int>(parse_int(fields[3]));
        if (s.q1_quality < 1 || s.q1_quality > 10 || s.q2_humanlike < 1 || s.q2_humanlike > 10)
            throw DataError("score outside 1..10 at row " + std::to_string(i + 1) + ": " +
                            path.string());
        scores.push_back(std::move(s));
    }
    return scores;
}

void write_report(const std::filesystem::path& path, const std::vector<AggregateRow>& rows) {
    std::string out = "engine,question,mean,n\n";
    for (const AggregateRow& r : rows)
        out += std::string(source_name(r.engine)) + "," + r.question + "," +
               format_double(r.mean) + "," + std::to_string(r.n) + "\n";
    write_file(path, out);
}

}  // namespace hkg
