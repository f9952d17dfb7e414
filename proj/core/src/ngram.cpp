#include "hkg/ngram.hpp"

#include <cmath>

#include "hkg/textio.hpp"

namespace hkg {

NGramModel NGramModel::train(const std::vector<Haiku>& corpus, double alpha) {
    if (corpus.empty()) throw DataError("cannot train n-gram model on an empty corpus");
    if (alpha <= 0.0) throw DataError("smoothing alpha must be positive");

    NGramModel m;
    m.alpha_ = alpha;
    m.vocab_ = Vocabulary(corpus);
    for (std::size_t id = 0; id < m.vocab_.size(); ++id)
        m.total_tokens_ += m.vocab_.count(id);

    for (const Haiku& h : corpus) {
        std::vector<std::int64_t> stream;
        for (const std::string& line : h.lines) {
            bool first_in_line = true;
            for (const std::string& tok : split_ws(line)) {
                std::int64_t id = m.vocab_.id_of(tok);
                if (first_in_line) {
                    ++m.bigram_counts_[{kStartId, id}];
                    ++m.context_totals_[kStartId];
                    first_in_line = false;
                }
                stream.push_back(id);
            }
        }
        for (std::size_t i = 0; i + 1 < stream.size(); ++i) {
            ++m.bigram_counts_[{stream[i], stream[i + 1]}];
            ++m.context_totals_[stream[i]];
        }
    }
    return m;
}

std::int64_t NGramModel::context_total(std::int64_t prev_id) const {
    auto it = context_totals_.find(prev_id);
    return it == context_totals_.end() ? 0 : it->second;
}

double NGramModel::unigram_cost(const std::string& word) const {
    std::int64_t id = vocab_.id_of(word);
    double count = id >= 0 ? static_cast<double>(vocab_.count(static_cast<std::size_t>(id))) : 0.0;
    double denom = static_cast<double>(total_tokens_) +
                   alpha_ * static_cast<double>(vocab_.size() + 1);
    return -std::log((count + alpha_) / denom);
}

double NGramModel::bigram_cost(const std::string& prev, const std::string& next) const {
    std::int64_t prev_id = prev == kLineStart ? kStartId : vocab_.id_of(prev);
    std::int64_t next_id = vocab_.id_of(next);
    double count = 0.0;
    if (next_id >= 0) {
        auto it = bigram_counts_.find({prev_id, next_id});
        if (it != bigram_counts_.end()) count = static_cast<double>(it->second);
    }
    double denom = static_cast<double>(context_total(prev_id)) +
                   alpha_ * static_cast<double>(vocab_.size() + 1);
    return -std::log((count + alpha_) / denom);
}

std::string NGramModel::argmin_next(const std::string& prev,
                                    const std::set<std::string>& banned) const {
    const std::string* best = nullptr;
    double best_cost = 0.0;
    for (const std::string& w : vocab_.words()) {
        if (banned.count(w)) continue;
        double c = bigram_cost(prev, w);
        if (!best || c < best_cost) {  // vocab is sorted, so first win = lexicographic tie-break
            best = &w;
            best_cost = c;
        }
    }
    if (!best) throw ModelError("argmin_next: every vocabulary word is banned");
    return *best;
}

std::string NGramModel::argmin_unigram(const std::set<std::string>& banned) const {
    const std::string* best = nullptr;
    double best_cost = 0.0;
    for (const std::string& w : vocab_.words()) {
        if (banned.count(w)) continue;
        double c = unigram_cost(w);
        if (!best || c < best_cost) {
            best = &w;
            best_cost = c;
        }
    }
    if (!best) throw ModelError("argmin_unigram: every vocabulary word is banned");
    return *best;
}

void NGramModel::save(const std::filesystem::path& path) const {
    std::string out = "HKG-NGRAM 1\n";
    out += "alpha " + format_double(alpha_) + "\n";
    out += "total_tokens " + std::to_string(total_tokens_) + "\n";
    out += "vocab " + std::to_string(vocab_.size()) + "\n";
    for (std::size_t id = 0; id < vocab_.size(); ++id)
        out += vocab_.word(id) + " " + std::to_string(vocab_.count(id)) + "\n";
    out += "bigrams " + std::to_string(bigram_counts_.size()) + "\n";
    for (const auto& [pair, count] : bigram_counts_)
        out += std::to_string(pair.first) + " " + std::to_string(pair.second) + " " +
               std::to_string(count) + "\n";
    write_file(path, out);
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
    std::vector<std::string> lines = split_lines(read_file(path));
    std::size_t at = 0;
    auto next_line = [&]() -> const std::string& {
        if (at >= lines.size()) throw ModelError("truncated n-gram model: " + path.string());
        return lines[at++];
    };
    auto expect = [&](const std::string& tag) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2 || fields[0] != tag)
            throw ModelError("bad n-gram model field, wanted '" + tag + "': " + path.string());
        return fields[1];
    };

    if (next_line() != "HKG-NGRAM 1")
        throw ModelError("not an HKG-NGRAM 1 file: " + path.string());

    NGramModel m;
    m.alpha_ = parse_double(expect("alpha"));
    m.total_tokens_ = parse_int(expect("total_tokens"));
    std::int64_t v = parse_int(expect("vocab"));
    for (std::int64_t i = 0; i < v; ++i) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2) throw ModelError("bad vocab row: " + path.string());
        m.vocab_.add(fields[0], parse_int(fields[1]));
    }
    std::int64_t b = parse_int(expect("bigrams"));
    for (std::int64_t i = 0; i < b; ++i) {
        auto fields = split_ws(next_line());
        if (fields.size() != 3) throw ModelError("bad bigram row: " + path.string());
        std::int64_t prev = parse_int(fields[0]);
        std::int64_t next = parse_int(fields[1]);
        std::int64_t count = parse_int(fields[2]);
        m.bigram_counts_[{prev, next}] = count;
        m.context_totals_[prev] += count;
    }
    return m;
}

}  // namespace hkg
