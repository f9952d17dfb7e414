#include "hkg/simpredictor.hpp"

#include <algorithm>
#include <cmath>

#include "hkg/rng.hpp"
#include "hkg/textio.hpp"

namespace hkg {

namespace {

std::size_t bucket_of(const std::string& word, std::size_t buckets) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : word) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h % buckets);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double mean_abs_error(const LinearSimilarityModel& m, const std::vector<SimExample>& examples,
                      const NGramModel& ngram) {
    if (examples.empty()) return 0.0;
    double total = 0.0;
    for (const SimExample& ex : examples)
        total += std::abs(dot(m.weights, featurize(ex.prefix, ngram, m.buckets)) - ex.target);
    return total / static_cast<double>(examples.size());
}

}  // namespace

std::vector<double> featurize(const std::vector<std::string>& prefix, const NGramModel& ngram,
                              std::size_t buckets) {
    if (prefix.empty()) throw DataError("featurize: empty prefix");
    std::vector<double> phi(buckets + 5, 0.0);
    phi[0] = static_cast<double>(prefix.size());
    phi[1] = ngram.unigram_cost(prefix.back());
    if (prefix.size() >= 2) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < prefix.size(); ++i)
            total += ngram.bigram_cost(prefix[i], prefix[i + 1]);
        phi[2] = total / static_cast<double>(prefix.size() - 1);
        phi[3] = ngram.bigram_cost(prefix[prefix.size() - 2], prefix.back());
    }
    phi[4 + bucket_of(prefix.back(), buckets)] = 1.0;
    phi[buckets + 4] = 1.0;
    return phi;
}

std::vector<SimExample> build_examples(const std::vector<Haiku>& corpus, const EmbeddingModel& emb,
                                       std::size_t* skipped_lines) {
    std::vector<SimExample> examples;
    std::size_t skipped = 0;
    for (const Haiku& h : corpus) {
        for (const std::string& line : h.lines) {
            std::vector<std::string> words;
            for (const std::string& tok : split_ws(line))
                if (emb.vocab.contains(tok)) words.push_back(tok);
            if (words.size() < 2) {
                ++skipped;
                continue;
            }
            for (std::size_t p = 2; p <= words.size(); ++p) {
                SimExample ex;
                ex.prefix.assign(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(p - 1));
                ex.target = emb.similarity(words[p - 2], words[p - 1]);
                examples.push_back(std::move(ex));
            }
        }
    }
    if (skipped_lines) *skipped_lines = skipped;
    return examples;
}

LinearSimilarityModel train_sim(const std::vector<SimExample>& train,
                                const std::vector<SimExample>& validation,
                                const NGramModel& ngram, double learning_rate,
                                std::int64_t iterations, std::uint64_t seed) {
    if (train.empty()) throw DataError("train_sim: empty training set");
    if (learning_rate <= 0.0) throw DataError("train_sim: learning_rate must be positive");
    if (iterations < 0) throw DataError("train_sim: negative iteration count");

    LinearSimilarityModel m;
    m.weights.assign(kSimBuckets + 5, 0.0);
    m.trace.push_back({0, mean_abs_error(m, validation, ngram)});

    Rng rng(derive_seed(seed, "sim-sgd"));
    for (std::int64_t it = 1; it <= iterations; ++it) {
        const SimExample& ex = train[rng.below(train.size())];
        std::vector<double> phi = featurize(ex.prefix, ngram, m.buckets);
        double err = dot(m.weights, phi) - ex.target;
        for (std::size_t i = 0; i < m.weights.size(); ++i)
            m.weights[i] -= learning_rate * err * phi[i];
        if (it % 10 == 0) m.trace.push_back({it, mean_abs_error(m, validation, ngram)});
    }
    return m;
}

double predict_similarity(const LinearSimilarityModel& m, const std::vector<std::string>& prefix,
                          const NGramModel& ngram) {
    if (prefix.empty()) throw DataError("predict_similarity: empty prefix");
    double y = dot(m.weights, featurize(prefix, ngram, m.buckets));
    return std::clamp(y, -1.0, 1.0);
}

double sim_loss(const std::vector<double>& weights, const std::vector<double>& phi, double target) {
    double err = dot(weights, phi) - target;
    return 0.5 * err * err;
}

std::vector<double> sim_grad(const std::vector<double>& weights, const std::vector<double>& phi,
                             double target) {
    double err = dot(weights, phi) - target;
    std::vector<double> g(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) g[i] = err * phi[i];
    return g;
}

void LinearSimilarityModel::save(const std::filesystem::path& path) const {
    std::string out = "HKG-SIM 1\n";
    out += "buckets " + std::to_string(buckets) + "\n";
    out += "weights " + std::to_string(weights.size()) + "\n";
    for (double w : weights) out += format_double(w) + "\n";
    out += "trace " + std::to_string(trace.size()) + "\n";
    for (const SimTracePoint& p : trace)
        out += std::to_string(p.iteration) + " " + format_double(p.mean_abs_error) + "\n";
    write_file(path, out);
}

LinearSimilarityModel LinearSimilarityModel::load(const std::filesystem::path& path) {
    std::vector<std::string> lines = split_lines(read_file(path));
    std::size_t at = 0;
    auto next_line = [&]() -> const std::string& {
        if (at >= lines.size())
            throw ModelError("truncated similarity model: " + path.string());
        return lines[at++];
    };
    auto expect = [&](const std::string& tag) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2 || fields[0] != tag)
            throw ModelError("bad similarity model field, wanted '" + tag + "': " + path.string());
        return fields[1];
    };

    if (next_line() != "HKG-SIM 1")
        throw ModelError("not an HKG-SIM 1 file: " + path.string());

    LinearSimilarityModel m;
    m.buckets = static_cast<std::size_t>(parse_int(expect("buckets")));
    std::int64_t d = parse_int(expect("weights"));
    m.weights.reserve(static_cast<std::size_t>(d));
    for (std::int64_t i = 0; i < d; ++i) m.weights.push_back(parse_double(next_line()));
    std::int64_t n = parse_int(expect("trace"));
    for (std::int64_t i = 0; i < n; ++i) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2) throw ModelError("bad trace row: " + path.string());
        m.trace.push_back({parse_int(fields[0]), parse_double(fields[1])});
    }
    return m;
}

}  // namespace hkg
