#include "hkg/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "hkg/rng.hpp"
#include "hkg/textio.hpp"

namespace hkg {

namespace {

std::string greedy_line(const std::string& seed_word, int budget, const NGramModel& ngram,
                        const SyllableLexicon& lex) {
    std::vector<std::string> words;
    std::string prev = seed_word;
    int syllables = 0;
    while (syllables < budget) {
        std::string next = ngram.argmin_next(prev, {prev});
        syllables += count_token_lenient(next, lex);
        words.push_back(next);
        prev = std::move(next);
    }
    return join(words, " ");
}

}  // namespace

Haiku generate_greedy(const std::string& first_line, const NGramModel& ngram,
                      const SyllableLexicon& lex, const std::array<int, 2>& line_budgets) {
    std::vector<std::string> tokens = split_ws(first_line);
    if (tokens.empty()) throw DataError("generate_greedy: empty first line");
    if (line_budgets[0] < 1 || line_budgets[1] < 1)
        throw DataError("generate_greedy: line budgets must be positive");

    std::string seed = tokens.back();
    if (!ngram.vocab().contains(seed)) seed = ngram.argmin_unigram({});

    Haiku out;
    out.source = Source::greedy;
    out.lines[0] = first_line;
    out.lines[1] = greedy_line(seed, line_budgets[0], ngram, lex);
    out.lines[2] = greedy_line(split_ws(out.lines[1]).back(), line_budgets[1], ngram, lex);
    return out;
}

std::vector<Haiku> sample_oracle(const std::vector<Haiku>& test, std::size_t n,
                                 std::uint64_t seed) {
    if (n > test.size())
        throw DataError("sample_oracle: asked for " + std::to_string(n) + " poems from " +
                        std::to_string(test.size()));
    std::vector<std::size_t> order(test.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<Haiku> picked;
    picked.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Haiku h = test[order[i]];
        h.source = Source::human;
        picked.push_back(std::move(h));
    }
    return picked;
}

namespace {

struct BeamNode {
    std::vector<std::string> words;
    std::string prev;
    int syllables = 0;
    double cost = 0.0;
};

std::optional<BeamNode> beam_pass(const std::string& start_word, int budget, bool strict,
                                  const EmbeddingModel& emb, const LinearSimilarityModel& sim,
                                  const NGramModel& ngram, const SyllableLexicon& lex,
                                  const SearchConfig& cfg) {
    std::vector<BeamNode> beam{{{}, start_word, 0, 0.0}};
    std::vector<BeamNode> goals;

    auto line_of = [](const BeamNode& n) { return join(n.words, " "); };
    auto better = [&](const BeamNode& a, const BeamNode& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        return line_of(a) < line_of(b);
    };

    // Every word adds at least one syllable, so `budget` expansions suffice.
    for (int depth = 0; depth < budget && !beam.empty(); ++depth) {
        std::vector<BeamNode> next;
        for (const BeamNode& node : beam) {
            std::vector<std::string> prefix;
            prefix.reserve(node.words.size() + 1);
            prefix.push_back(start_word);
            prefix.insert(prefix.end(), node.words.begin(), node.words.end());
            double predicted = predict_similarity(sim, prefix, ngram);

            for (const auto& [word, similarity] : emb.k_most_similar(node.prev, cfg.k)) {
                int syllables = node.syllables + count_token_lenient(word, lex);
                if (strict && syllables > budget) continue;
                BeamNode child;
                child.words = node.words;
                child.words.push_back(word);
                child.prev = word;
                child.syllables = syllables;
                child.cost = node.cost + std::abs(similarity - predicted);
                bool goal = strict ? syllables == budget : syllables >= budget;
                (goal ? goals : next).push_back(std::move(child));
            }
        }
        std::sort(next.begin(), next.end(), better);
        if (next.size() > cfg.beam_width) next.resize(cfg.beam_width);
        beam = std::move(next);
    }

    if (goals.empty()) return std::nullopt;
    return *std::min_element(goals.begin(), goals.end(), better);
}

}  // namespace

BeamLineResult beam_line(const std::string& start_word, int budget, const EmbeddingModel& emb,
                         const LinearSimilarityModel& sim, const NGramModel& ngram,
                         const SyllableLexicon& lex, const SearchConfig& cfg) {
    if (budget < 0) throw DataError("beam_line: negative syllable budget");
    if (cfg.k < 1 || cfg.beam_width < 1)
        throw DataError("beam_line: k and beam_width must be at least 1");
    if (budget == 0) return {"", 0.0, cfg.strict_budget};

    if (auto best = beam_pass(start_word, budget, cfg.strict_budget, emb, sim, ngram, lex, cfg))
        return {join(best->words, " "), best->cost, cfg.strict_budget};
    if (cfg.strict_budget)
        if (auto best = beam_pass(start_word, budget, false, emb, sim, ngram, lex, cfg))
            return {join(best->words, " "), best->cost, false};
    throw ModelError("no_completion: no line of " + std::to_string(budget) +
                     " syllables reachable from '" + start_word + "'");
}

BeamPoem generate_beam(const std::string& first_line, const EmbeddingModel& emb,
                       const LinearSimilarityModel& sim, const NGramModel& ngram,
                       const SyllableLexicon& lex, const SearchConfig& cfg) {
    std::vector<std::string> tokens = split_ws(first_line);
    std::string start;
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        if (emb.vocab.contains(*it)) {
            start = *it;
            break;
        }
    }
    if (start.empty())
        throw DataError("generate_beam: first line has no in-vocabulary word: " + first_line);

    BeamPoem poem;
    poem.line2 = beam_line(start, cfg.line_budgets[0], emb, sim, ngram, lex, cfg);
    std::vector<std::string> line2_words = split_ws(poem.line2.line);
    std::string seed3 = line2_words.empty() ? start : line2_words.back();
    poem.line3 = beam_line(seed3, cfg.line_budgets[1], emb, sim, ngram, lex, cfg);

    poem.haiku.source = Source::beam;
    poem.haiku.lines = {first_line, poem.line2.line, poem.line3.line};
    return poem;
}

}  // namespace hkg
