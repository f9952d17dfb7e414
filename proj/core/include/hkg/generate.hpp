#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hkg/corpus.hpp"
#include "hkg/embedding.hpp"
#include "hkg/ngram.hpp"
#include "hkg/simpredictor.hpp"
#include "hkg/syllable.hpp"

namespace hkg {

struct SearchConfig {
    std::size_t k = 20;
    std::size_t beam_width = 20;
    std::array<int, 2> line_budgets{7, 5};
    bool strict_budget = true;
};

// Lines 2 and 3 by repeated cheapest-bigram steps from the previous word,
// appending words until the line reaches its syllable budget. Immediate
// repeats are banned; an OOV seed word falls back to the cheapest unigram.
Haiku generate_greedy(const std::string& first_line, const NGramModel& ngram,
                      const SyllableLexicon& lex,
                      const std::array<int, 2>& line_budgets = {7, 5});

// n distinct haikus drawn from `test` without replacement, order seeded.
std::vector<Haiku> sample_oracle(const std::vector<Haiku>& test, std::size_t n,
                                 std::uint64_t seed);

struct BeamLineResult {
    std::string line;
    double cost = 0.0;
    bool strict = false;  // the strict-budget search produced this line

    bool operator==(const BeamLineResult& other) const = default;
};

// Beam search from the state (start_word, "", 0). Actions are the k most
// similar words to the state's previous word; a step costs
// |similarity(previous_word, a) - predicted similarity for the prefix|.
// Goal: syllables == budget when strict, >= budget otherwise. A strict
// search whose beam empties is retried once relaxed.
BeamLineResult beam_line(const std::string& start_word, int budget, const EmbeddingModel& emb,
                         const LinearSimilarityModel& sim, const NGramModel& ngram,
                         const SyllableLexicon& lex, const SearchConfig& cfg);

struct BeamPoem {
    Haiku haiku;
    BeamLineResult line2;
    BeamLineResult line3;
};

BeamPoem generate_beam(const std::string& first_line, const EmbeddingModel& emb,
                       const LinearSimilarityModel& sim, const NGramModel& ngram,
                       const SyllableLexicon& lex, const SearchConfig& cfg);

}  // namespace hkg
