#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hkg/corpus.hpp"

namespace hkg {

struct SgnsConfig {
    std::size_t dim = 32;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 0;
};

// Skip-gram word vectors. input_vectors are the word representations used for
// similarity queries; output_vectors are the context-side parameters.
struct EmbeddingModel {
    std::size_t dim = 0;
    Vocabulary vocab;
    std::vector<std::vector<double>> input_vectors;
    std::vector<std::vector<double>> output_vectors;
    std::vector<double> epoch_loss;

    // Cosine of the input vectors. Throws ModelError on OOV words.
    double similarity(const std::string& a, const std::string& b) const;

    // Top-k words by similarity to w, excluding w itself. Descending
    // similarity, ties broken lexicographically. Length min(k, V-1).
    std::vector<std::pair<std::string, double>> k_most_similar(const std::string& w,
                                                               std::size_t k) const;

    void save(const std::filesystem::path& path) const;
    static EmbeddingModel load(const std::filesystem::path& path);

    bool operator==(const EmbeddingModel& other) const = default;
};

EmbeddingModel train_sgns(const std::vector<Haiku>& corpus, const SgnsConfig& cfg);

// Loss of one training event: -ln s(u_ctx . v_ctr) - sum_neg ln s(-u_neg . v_ctr)
// where s is the logistic function. Exposed for gradient checking.
double sgns_pair_loss(const EmbeddingModel& m, std::size_t center, std::size_t context,
                      const std::vector<std::size_t>& negatives);

struct SgnsGradient {
    std::vector<double> center;                          // d loss / d input_vectors[center]
    std::map<std::size_t, std::vector<double>> output;   // d loss / d output_vectors[id]
};

SgnsGradient sgns_pair_grad(const EmbeddingModel& m, std::size_t center, std::size_t context,
                            const std::vector<std::size_t>& negatives);

}  // namespace hkg
