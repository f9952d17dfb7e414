#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hkg/corpus.hpp"
#include "hkg/embedding.hpp"
#include "hkg/ngram.hpp"

namespace hkg {

inline constexpr std::size_t kSimBuckets = 1024;

struct SimExample {
    std::vector<std::string> prefix;
    double target = 0.0;

    bool operator==(const SimExample& other) const = default;
};

struct SimTracePoint {
    std::int64_t iteration = 0;
    double mean_abs_error = 0.0;

    bool operator==(const SimTracePoint& other) const = default;
};

// Linear regressor over featurize(prefix); predicts the similarity of the
// next word to the prefix's last word.
struct LinearSimilarityModel {
    std::size_t buckets = kSimBuckets;
    std::vector<double> weights;
    std::vector<SimTracePoint> trace;

    void save(const std::filesystem::path& path) const;
    static LinearSimilarityModel load(const std::filesystem::path& path);

    bool operator==(const LinearSimilarityModel& other) const = default;
};

// Feature layout: [prefix word count, unigram cost of last word, mean bigram
// cost over consecutive prefix pairs, last bigram cost, B one-hot-by-hash
// buckets for the last word, bias]. Dimension = buckets + 5.
std::vector<double> featurize(const std::vector<std::string>& prefix, const NGramModel& ngram,
                              std::size_t buckets = kSimBuckets);

std::vector<SimExample> build_examples(const std::vector<Haiku>& corpus, const EmbeddingModel& emb,
                                       std::size_t* skipped_lines = nullptr);

LinearSimilarityModel train_sim(const std::vector<SimExample>& train,
                                const std::vector<SimExample>& validation,
                                const NGramModel& ngram, double learning_rate,
                                std::int64_t iterations, std::uint64_t seed);

double predict_similarity(const LinearSimilarityModel& m, const std::vector<std::string>& prefix,
                          const NGramModel& ngram);

// Squared loss 0.5 * (w . phi - target)^2 and its weight gradient, exposed
// for gradient checking.
double sim_loss(const std::vector<double>& weights, const std::vector<double>& phi, double target);
std::vector<double> sim_grad(const std::vector<double>& weights, const std::vector<double>& phi,
                             double target);

}  // namespace hkg
