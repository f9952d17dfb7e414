#include "hkg/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "hkg/rng.hpp"
#include "hkg/textio.hpp"

namespace hkg {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ln(1 + exp(x)) without overflow; -ln s(x) == softplus(-x).
double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Draws vocab ids with probability proportional to count^0.75.
class NoiseTable {
public:
    explicit NoiseTable(const Vocabulary& vocab) {
        cumulative_.reserve(vocab.size());
        double running = 0.0;
        for (std::size_t id = 0; id < vocab.size(); ++id) {
            running += std::pow(static_cast<double>(vocab.count(id)), 0.75);
            cumulative_.push_back(running);
        }
    }

    std::size_t draw(Rng& rng) const {
        double x = rng.uniform01() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        if (it == cumulative_.end()) --it;
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

double EmbeddingModel::similarity(const std::string& a, const std::string& b) const {
    std::int64_t ia = vocab.id_of(a);
    std::int64_t ib = vocab.id_of(b);
    if (ia < 0) throw ModelError("oov: " + a);
    if (ib < 0) throw ModelError("oov: " + b);
    const auto& va = input_vectors[static_cast<std::size_t>(ia)];
    const auto& vb = input_vectors[static_cast<std::size_t>(ib)];
    double na = norm(va);
    double nb = norm(vb);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(va, vb) / (na * nb);
}

std::vector<std::pair<std::string, double>> EmbeddingModel::k_most_similar(
    const std::string& w, std::size_t k) const {
    if (k < 1) throw DataError("k_most_similar: k must be at least 1");
    if (!vocab.contains(w)) throw ModelError("oov: " + w);
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(vocab.size());
    for (const std::string& other : vocab.words()) {
        if (other == w) continue;
        ranked.emplace_back(other, similarity(w, other));
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

EmbeddingModel train_sgns(const std::vector<Haiku>& corpus, const SgnsConfig& cfg) {
    if (cfg.dim < 2) throw DataError("embedding dim must be at least 2");
    if (cfg.window < 1 || cfg.negatives < 1 || cfg.learning_rate <= 0.0)
        throw DataError("window, negatives, and learning_rate must be positive");

    EmbeddingModel m;
    m.dim = cfg.dim;
    m.vocab = Vocabulary(corpus);
    if (m.vocab.size() < 2) throw DataError("skip-gram needs a vocabulary of at least 2 words");

    std::size_t v = m.vocab.size();
    m.input_vectors.assign(v, std::vector<double>(cfg.dim, 0.0));
    m.output_vectors.assign(v, std::vector<double>(cfg.dim, 0.0));

    Rng init_rng(derive_seed(cfg.seed, "sgns-init"));
    double half = 0.5 / static_cast<double>(cfg.dim);
    for (auto& row : m.input_vectors)
        for (double& x : row) x = init_rng.uniform(-half, half);

    std::vector<std::vector<std::size_t>> streams;
    streams.reserve(corpus.size());
    for (const Haiku& h : corpus) {
        std::vector<std::size_t> stream;
        for (const std::string& line : h.lines)
            for (const std::string& tok : split_ws(line))
                stream.push_back(static_cast<std::size_t>(m.vocab.id_of(tok)));
        if (stream.size() >= 2) streams.push_back(std::move(stream));
    }

    NoiseTable noise(m.vocab);
    Rng rng(derive_seed(cfg.seed, "sgns-noise"));
    std::vector<double> neu1e(cfg.dim);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = 0.0;
        std::size_t pairs = 0;
        for (const auto& stream : streams) {
            for (std::size_t t = 0; t < stream.size(); ++t) {
                std::size_t lo = t >= cfg.window ? t - cfg.window : 0;
                std::size_t hi = std::min(stream.size() - 1, t + cfg.window);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == t) continue;
                    std::size_t center = stream[t];
                    std::size_t context = stream[c];
                    auto& vc = m.input_vectors[center];
                    std::fill(neu1e.begin(), neu1e.end(), 0.0);
                    for (std::size_t n = 0; n <= cfg.negatives; ++n) {
                        std::size_t target;
                        double label;
                        if (n == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            do {
                                target = noise.draw(rng);
                            } while (target == context);
                            label = 0.0;
                        }
                        auto& u = m.output_vectors[target];
                        double d = dot(u, vc);
                        loss += label == 1.0 ? softplus(-d) : softplus(d);
                        double g = (label - sigmoid(d)) * cfg.learning_rate;
                        for (std::size_t i = 0; i < cfg.dim; ++i) {
                            neu1e[i] += g * u[i];
                            u[i] += g * vc[i];
                        }
                    }
                    for (std::size_t i = 0; i < cfg.dim; ++i) vc[i] += neu1e[i];
                    ++pairs;
                }
            }
        }
        m.epoch_loss.push_back(pairs > 0 ? loss / static_cast<double>(pairs) : 0.0);
    }
    return m;
}

double sgns_pair_loss(const EmbeddingModel& m, std::size_t center, std::size_t context,
                      const std::vector<std::size_t>& negatives) {
    const auto& vc = m.input_vectors[center];
    double loss = softplus(-dot(m.output_vectors[context], vc));
    for (std::size_t neg : negatives) loss += softplus(dot(m.output_vectors[neg], vc));
    return loss;
}

SgnsGradient sgns_pair_grad(const EmbeddingModel& m, std::size_t center, std::size_t context,
                            const std::vector<std::size_t>& negatives) {
    const auto& vc = m.input_vectors[center];
    SgnsGradient grad;
    grad.center.assign(m.dim, 0.0);

    auto accumulate = [&](std::size_t id, double label) {
        const auto& u = m.output_vectors[id];
        double coeff = sigmoid(dot(u, vc)) - label;
        auto [it, inserted] = grad.output.try_emplace(id, std::vector<double>(m.dim, 0.0));
        for (std::size_t i = 0; i < m.dim; ++i) {
            grad.center[i] += coeff * u[i];
            it->second[i] += coeff * vc[i];
        }
    };
    accumulate(context, 1.0);
    for (std::size_t neg : negatives) accumulate(neg, 0.0);
    return grad;
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
    std::string out = "HKG-EMB 1\n";
    out += "dim " + std::to_string(dim) + "\n";
    out += "vocab " + std::to_string(vocab.size()) + "\n";
    for (std::size_t id = 0; id < vocab.size(); ++id)
        out += vocab.word(id) + " " + std::to_string(vocab.count(id)) + "\n";
    auto write_matrix = [&](const char* name, const std::vector<std::vector<double>>& rows) {
        out += name;
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += " ";
                out += format_double(row[i]);
            }
            out += "\n";
        }
    };
    write_matrix("input", input_vectors);
    write_matrix("output", output_vectors);
    out += "epoch_loss " + std::to_string(epoch_loss.size()) + "\n";
    for (double x : epoch_loss) out += format_double(x) + "\n";
    write_file(path, out);
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
    std::vector<std::string> lines = split_lines(read_file(path));
    std::size_t at = 0;
    auto next_line = [&]() -> const std::string& {
        if (at >= lines.size()) throw ModelError("truncated embedding model: " + path.string());
        return lines[at++];
    };
    auto expect = [&](const std::string& tag) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2 || fields[0] != tag)
            throw ModelError("bad embedding field, wanted '" + tag + "': " + path.string());
        return fields[1];
    };

    if (next_line() != "HKG-EMB 1")
        throw ModelError("not an HKG-EMB 1 file: " + path.string());

    EmbeddingModel m;
    m.dim = static_cast<std::size_t>(parse_int(expect("dim")));
    std::int64_t v = parse_int(expect("vocab"));
    for (std::int64_t i = 0; i < v; ++i) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2) throw ModelError("bad vocab row: " + path.string());
        m.vocab.add(fields[0], parse_int(fields[1]));
    }
    auto read_matrix = [&](const char* name) {
        if (next_line() != name)
            throw ModelError(std::string("missing '") + name + "' block: " + path.string());
        std::vector<std::vector<double>> rows;
        rows.reserve(static_cast<std::size_t>(v));
        for (std::int64_t i = 0; i < v; ++i) {
            auto fields = split_ws(next_line());
            if (fields.size() != m.dim) throw ModelError("bad vector row: " + path.string());
            std::vector<double> row(m.dim);
            for (std::size_t j = 0; j < m.dim; ++j) row[j] = parse_double(fields[j]);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    m.input_vectors = read_matrix("input");
    m.output_vectors = read_matrix("output");
    std::int64_t n = parse_int(expect("epoch_loss"));
    for (std::int64_t i = 0; i < n; ++i) m.epoch_loss.push_back(parse_double(next_line()));
    return m;
}

}  // namespace hkg
