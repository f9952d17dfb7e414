#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hkg/corpus.hpp"

namespace hkg {

// Context token for the start of a line; usable as `prev` in bigram queries.
inline constexpr const char* kLineStart = "<s>";

// Add-alpha smoothed unigram/bigram cost model. Bigram counts run across line
// boundaries within a haiku (a generator may seed a line with the last word of
// the previous one) but never across haikus; each line additionally
// contributes a start-sentinel bigram to its first word. Out-of-vocabulary
// mass is folded into one reserved token, so smoothed conditionals normalize
// to 1 for every context.
class NGramModel {
public:
    NGramModel() = default;

    static NGramModel train(const std::vector<Haiku>& corpus, double alpha = 0.1);

    // -ln of the smoothed unigram probability. Finite for OOV words.
    double unigram_cost(const std::string& word) const;

    // -ln[(count(prev,next)+alpha) / (outgoing(prev)+alpha*(V+1))].
    // `prev` may be kLineStart. Finite for any pair, OOV included.
    double bigram_cost(const std::string& prev, const std::string& next) const;

    // Vocab word minimizing bigram_cost(prev, .) outside `banned`; ties break
    // lexicographically. Throws ModelError when every word is banned.
    std::string argmin_next(const std::string& prev, const std::set<std::string>& banned = {}) const;

    // Lowest-unigram-cost vocab word outside `banned` (greedy fallback when
    // there is no usable previous word).
    std::string argmin_unigram(const std::set<std::string>& banned = {}) const;

    const Vocabulary& vocab() const { return vocab_; }
    double alpha() const { return alpha_; }
    std::int64_t total_tokens() const { return total_tokens_; }

    void save(const std::filesystem::path& path) const;
    static NGramModel load(const std::filesystem::path& path);

    bool operator==(const NGramModel& other) const = default;

private:
    // Sentinel context id; word ids come from vocab_.
    static constexpr std::int64_t kStartId = -1;

    std::int64_t context_total(std::int64_t prev_id) const;

    Vocabulary vocab_;
    double alpha_ = 0.1;
    std::int64_t total_tokens_ = 0;
    std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> bigram_counts_;
    std::map<std::int64_t, std::int64_t> context_totals_;  // outgoing bigrams per prev
};

}  // namespace hkg
