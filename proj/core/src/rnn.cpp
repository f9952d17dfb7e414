#include "hkg/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "hkg/textio.hpp"

namespace hkg {

namespace {

constexpr double kInitRange = 0.08;

std::vector<std::string> utf8_chars(const std::string& s) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < s.size();) {
        unsigned char b = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if ((b & 0xE0) == 0xC0) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0) len = 4;
        if (i + len > s.size()) len = 1;
        out.push_back(s.substr(i, len));
        i += len;
    }
    return out;
}

std::uint32_t utf8_to_codepoint(const std::string& c) {
    if (c.empty()) return 0;
    unsigned char b0 = static_cast<unsigned char>(c[0]);
    if (b0 < 0x80 || c.size() == 1) return b0;
    std::uint32_t cp = 0;
    std::size_t cont = c.size() - 1;
    if (cont == 1) cp = b0 & 0x1F;
    else if (cont == 2) cp = b0 & 0x0F;
    else cp = b0 & 0x07;
    for (std::size_t i = 1; i < c.size(); ++i)
        cp = (cp << 6) | (static_cast<unsigned char>(c[i]) & 0x3F);
    return cp;
}

std::string codepoint_to_utf8(std::uint32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

Eigen::VectorXd sigmoid_v(const Eigen::VectorXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::VectorXd input_vec(const LSTMNet& net, std::size_t sym) {
    if (sym >= net.vocab.size()) sym = SymbolTable::kUnk;
    if (net.level == RnnLevel::chars) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.vocab.size()));
        x[static_cast<Eigen::Index>(sym)] = 1.0;
        return x;
    }
    return net.embed.row(static_cast<Eigen::Index>(sym)).transpose();
}

struct StepCache {
    std::size_t sym = 0;
    Eigen::VectorXd z, i, f, o, g, c, tanh_c, h;
};

void step_into(const LSTMNet& net, std::size_t sym, const Eigen::VectorXd& h_prev,
               const Eigen::VectorXd& c_prev, StepCache& s) {
    Eigen::Index in = static_cast<Eigen::Index>(net.input_dim());
    Eigen::Index hs = static_cast<Eigen::Index>(net.hidden_size);
    s.sym = sym;
    s.z.resize(in + hs);
    s.z.head(in) = input_vec(net, sym);
    s.z.tail(hs) = h_prev;
    s.i = sigmoid_v(net.w_input * s.z + net.b_input);
    s.f = sigmoid_v(net.w_forget * s.z + net.b_forget);
    s.o = sigmoid_v(net.w_output * s.z + net.b_output);
    s.g = ((net.w_cand * s.z + net.b_cand).array().tanh()).matrix();
    s.c = (s.f.array() * c_prev.array() + s.i.array() * s.g.array()).matrix();
    s.tanh_c = (s.c.array().tanh()).matrix();
    s.h = (s.o.array() * s.tanh_c.array()).matrix();
}

std::vector<StepCache> run_lstm(const LSTMNet& net, const std::vector<std::size_t>& window) {
    Eigen::Index hs = static_cast<Eigen::Index>(net.hidden_size);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hs);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(hs);
    std::vector<StepCache> caches(window.size());
    for (std::size_t t = 0; t < window.size(); ++t) {
        step_into(net, window[t], h, c, caches[t]);
        h = caches[t].h;
        c = caches[t].c;
    }
    return caches;
}

Eigen::VectorXd dropout_mask(std::size_t n, double rate, Rng& rng) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    if (rate <= 0.0) return mask;
    double keep = 1.0 - rate;
    for (Eigen::Index i = 0; i < mask.size(); ++i)
        mask[i] = rng.uniform01() < keep ? 1.0 / keep : 0.0;
    return mask;
}

struct Grads {
    Eigen::MatrixXd embed;
    Eigen::MatrixXd w_input, w_forget, w_output, w_cand;
    Eigen::VectorXd b_input, b_forget, b_output, b_cand;
    Eigen::MatrixXd w_dense;
    Eigen::VectorXd b_dense;

    explicit Grads(const LSTMNet& net) {
        embed = Eigen::MatrixXd::Zero(net.embed.rows(), net.embed.cols());
        w_input = Eigen::MatrixXd::Zero(net.w_input.rows(), net.w_input.cols());
        w_forget = Eigen::MatrixXd::Zero(net.w_forget.rows(), net.w_forget.cols());
        w_output = Eigen::MatrixXd::Zero(net.w_output.rows(), net.w_output.cols());
        w_cand = Eigen::MatrixXd::Zero(net.w_cand.rows(), net.w_cand.cols());
        b_input = Eigen::VectorXd::Zero(net.b_input.size());
        b_forget = Eigen::VectorXd::Zero(net.b_forget.size());
        b_output = Eigen::VectorXd::Zero(net.b_output.size());
        b_cand = Eigen::VectorXd::Zero(net.b_cand.size());
        w_dense = Eigen::MatrixXd::Zero(net.w_dense.rows(), net.w_dense.cols());
        b_dense = Eigen::VectorXd::Zero(net.b_dense.size());
    }
};

template <typename Net, typename F>
void for_each_param(Net& net, F&& f) {
    f(net.embed);
    f(net.w_input);
    f(net.b_input);
    f(net.w_forget);
    f(net.b_forget);
    f(net.w_output);
    f(net.b_output);
    f(net.w_cand);
    f(net.b_cand);
    f(net.w_dense);
    f(net.b_dense);
}

template <typename A, typename B, typename F>
void zip_params(A& a, B& b, F&& f) {
    f(a.embed, b.embed);
    f(a.w_input, b.w_input);
    f(a.b_input, b.b_input);
    f(a.w_forget, b.w_forget);
    f(a.b_forget, b.b_forget);
    f(a.w_output, b.w_output);
    f(a.b_output, b.b_output);
    f(a.w_cand, b.w_cand);
    f(a.b_cand, b.b_cand);
    f(a.w_dense, b.w_dense);
    f(a.b_dense, b.b_dense);
}

// Cross-entropy at the final step, gradients accumulated into g over the
// whole window. `mask` is the (already scaled) dropout mask, ones for eval.
double backward(const LSTMNet& net, const std::vector<StepCache>& caches, std::size_t target,
                const Eigen::VectorXd& mask, Grads& g) {
    Eigen::Index hs = static_cast<Eigen::Index>(net.hidden_size);
    Eigen::Index in = static_cast<Eigen::Index>(net.input_dim());
    Eigen::VectorXd h_final =
        caches.empty() ? Eigen::VectorXd::Zero(hs) : caches.back().h;
    Eigen::VectorXd d = (h_final.array() * mask.array()).matrix();

    Eigen::VectorXd logits = net.w_dense * d + net.b_dense;
    double top = logits.maxCoeff();
    Eigen::VectorXd exps = ((logits.array() - top).exp()).matrix();
    double z = exps.sum();
    double loss = std::log(z) + top - logits[static_cast<Eigen::Index>(target)];

    Eigen::VectorXd dlogits = exps / z;
    dlogits[static_cast<Eigen::Index>(target)] -= 1.0;
    g.w_dense += dlogits * d.transpose();
    g.b_dense += dlogits;

    Eigen::VectorXd dh = ((net.w_dense.transpose() * dlogits).array() * mask.array()).matrix();
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(hs);
    for (std::size_t t = caches.size(); t-- > 0;) {
        const StepCache& s = caches[t];
        Eigen::VectorXd c_prev = t > 0 ? caches[t - 1].c : Eigen::VectorXd::Zero(hs);

        Eigen::VectorXd do_ = (dh.array() * s.tanh_c.array()).matrix();
        dc += (dh.array() * s.o.array() * (1.0 - s.tanh_c.array().square())).matrix();
        Eigen::VectorXd di = (dc.array() * s.g.array()).matrix();
        Eigen::VectorXd dg = (dc.array() * s.i.array()).matrix();
        Eigen::VectorXd df = (dc.array() * c_prev.array()).matrix();
        Eigen::VectorXd dc_prev = (dc.array() * s.f.array()).matrix();

        Eigen::VectorXd dai = (di.array() * s.i.array() * (1.0 - s.i.array())).matrix();
        Eigen::VectorXd daf = (df.array() * s.f.array() * (1.0 - s.f.array())).matrix();
        Eigen::VectorXd dao = (do_.array() * s.o.array() * (1.0 - s.o.array())).matrix();
        Eigen::VectorXd dag = (dg.array() * (1.0 - s.g.array().square())).matrix();

        g.w_input += dai * s.z.transpose();
        g.b_input += dai;
        g.w_forget += daf * s.z.transpose();
        g.b_forget += daf;
        g.w_output += dao * s.z.transpose();
        g.b_output += dao;
        g.w_cand += dag * s.z.transpose();
        g.b_cand += dag;

        Eigen::VectorXd dz = net.w_input.transpose() * dai + net.w_forget.transpose() * daf +
                             net.w_output.transpose() * dao + net.w_cand.transpose() * dag;
        if (net.level == RnnLevel::words) {
            std::size_t sym = s.sym < net.vocab.size() ? s.sym : SymbolTable::kUnk;
            g.embed.row(static_cast<Eigen::Index>(sym)) += dz.head(in).transpose();
        }
        dh = dz.tail(hs);
        dc = dc_prev;
    }
    return loss;
}

double example_loss(const LSTMNet& net, const RnnExample& ex) {
    auto caches = run_lstm(net, ex.window);
    Eigen::VectorXd h = caches.empty()
                            ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.hidden_size))
                            : caches.back().h;
    Eigen::VectorXd logits = net.w_dense * h + net.b_dense;
    double top = logits.maxCoeff();
    double z = ((logits.array() - top).exp()).sum();
    return std::log(z) + top - logits[static_cast<Eigen::Index>(ex.next)];
}

std::string trim_spaces(const std::string& s) {
    std::size_t lo = s.find_first_not_of(' ');
    if (lo == std::string::npos) return "";
    std::size_t hi = s.find_last_not_of(' ');
    return s.substr(lo, hi - lo + 1);
}

}  // namespace

std::string level_name(RnnLevel level) {
    return level == RnnLevel::chars ? "char" : "word";
}

SymbolTable::SymbolTable() : SymbolTable(std::vector<std::string>{}) {}

SymbolTable::SymbolTable(const std::vector<std::string>& content) {
    symbols_ = {"<pad>", "<unk>", "<eol>"};
    std::set<std::string> unique(content.begin(), content.end());
    for (const std::string& s : symbols_) unique.erase(s);
    symbols_.insert(symbols_.end(), unique.begin(), unique.end());
    for (std::size_t id = 0; id < symbols_.size(); ++id) ids_.emplace(symbols_[id], id);
}

std::size_t SymbolTable::id_of(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? kUnk : it->second;
}

SymbolTable build_symbol_table(const std::vector<Haiku>& corpus, RnnLevel level) {
    std::set<std::string> content;
    for (const Haiku& h : corpus) {
        for (const std::string& line : h.lines) {
            if (level == RnnLevel::chars)
                for (const std::string& c : utf8_chars(line)) content.insert(c);
            else
                for (const std::string& w : split_ws(line)) content.insert(w);
        }
    }
    return SymbolTable(std::vector<std::string>(content.begin(), content.end()));
}

std::vector<std::size_t> render_text(const std::string& text, RnnLevel level,
                                     const SymbolTable& vocab) {
    std::vector<std::size_t> out;
    if (level == RnnLevel::chars)
        for (const std::string& c : utf8_chars(text)) out.push_back(vocab.id_of(c));
    else
        for (const std::string& w : split_ws(text)) out.push_back(vocab.id_of(w));
    return out;
}

std::vector<std::size_t> render_haiku(const Haiku& h, RnnLevel level, const SymbolTable& vocab) {
    std::vector<std::size_t> out;
    for (std::size_t li = 0; li < h.lines.size(); ++li) {
        if (li > 0) out.push_back(SymbolTable::kEol);
        std::vector<std::size_t> line = render_text(h.lines[li], level, vocab);
        out.insert(out.end(), line.begin(), line.end());
    }
    return out;
}

std::vector<RnnExample> build_dataset(const std::vector<Haiku>& corpus, RnnLevel level,
                                      std::size_t window, const SymbolTable& vocab) {
    if (window < 1) throw DataError("build_dataset: window must be at least 1");
    std::vector<RnnExample> out;
    for (const Haiku& h : corpus) {
        std::vector<std::size_t> syms = render_haiku(h, level, vocab);
        if (syms.empty()) continue;
        if (syms.size() < window + 1)
            syms.insert(syms.begin(), window + 1 - syms.size(), SymbolTable::kPad);
        for (std::size_t s = 0; s + window < syms.size(); ++s) {
            RnnExample ex;
            ex.window.assign(syms.begin() + static_cast<std::ptrdiff_t>(s),
                             syms.begin() + static_cast<std::ptrdiff_t>(s + window));
            ex.next = syms[s + window];
            out.push_back(std::move(ex));
        }
    }
    return out;
}

LSTMNet init_lstm(RnnLevel level, const SymbolTable& vocab, std::size_t hidden_size,
                  std::size_t window, std::size_t embedding_dim, double dropout_rate,
                  std::uint64_t seed) {
    if (hidden_size < 1 || window < 1)
        throw DataError("init_lstm: hidden_size and window must be positive");
    if (level == RnnLevel::words && embedding_dim < 1)
        throw DataError("init_lstm: word level needs embedding_dim >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw DataError("init_lstm: dropout_rate must lie in [0, 1)");

    LSTMNet net;
    net.level = level;
    net.vocab = vocab;
    net.hidden_size = hidden_size;
    net.window = window;
    net.embedding_dim = level == RnnLevel::words ? embedding_dim : 0;
    net.dropout_rate = dropout_rate;

    Eigen::Index v = static_cast<Eigen::Index>(vocab.size());
    Eigen::Index hs = static_cast<Eigen::Index>(hidden_size);
    Eigen::Index in = static_cast<Eigen::Index>(net.input_dim());

    Rng rng(derive_seed(seed, "rnn-init"));
    auto fill = [&](Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c) {
        m.resize(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = rng.uniform(-kInitRange, kInitRange);
    };

    if (level == RnnLevel::words)
        fill(net.embed, v, static_cast<Eigen::Index>(embedding_dim));
    else
        net.embed.resize(0, 0);
    fill(net.w_input, hs, in + hs);
    fill(net.w_forget, hs, in + hs);
    fill(net.w_output, hs, in + hs);
    fill(net.w_cand, hs, in + hs);
    net.b_input = Eigen::VectorXd::Zero(hs);
    net.b_forget = Eigen::VectorXd::Ones(hs);
    net.b_output = Eigen::VectorXd::Zero(hs);
    net.b_cand = Eigen::VectorXd::Zero(hs);
    fill(net.w_dense, v, hs);
    net.b_dense = Eigen::VectorXd::Zero(v);
    return net;
}

bool same_parameters(const LSTMNet& a, const LSTMNet& b) {
    if (a.level != b.level || !(a.vocab == b.vocab) || a.hidden_size != b.hidden_size ||
        a.window != b.window || a.embedding_dim != b.embedding_dim ||
        a.dropout_rate != b.dropout_rate)
        return false;
    bool same = true;
    auto cmp = [&](const auto& x, const auto& y) {
        if (x.rows() != y.rows() || x.cols() != y.cols()) same = false;
        else if (x.size() > 0 && !(x.array() == y.array()).all()) same = false;
    };
    zip_params(a, b, cmp);
    return same;
}

LstmState lstm_step(const LSTMNet& net, std::size_t symbol, const LstmState& prev) {
    StepCache s;
    step_into(net, symbol, prev.h, prev.c, s);
    return {s.h, s.c};
}

Eigen::VectorXd rnn_hidden(const LSTMNet& net, const std::vector<std::size_t>& window,
                           bool train_mode, std::uint64_t seed) {
    auto caches = run_lstm(net, window);
    Eigen::VectorXd h = caches.empty()
                            ? Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.hidden_size))
                            : caches.back().h;
    if (train_mode && net.dropout_rate > 0.0) {
        Rng rng(seed);
        Eigen::VectorXd mask = dropout_mask(net.hidden_size, net.dropout_rate, rng);
        h = (h.array() * mask.array()).matrix();
    }
    return h;
}

Eigen::VectorXd forward(const LSTMNet& net, const std::vector<std::size_t>& window,
                        bool train_mode, std::uint64_t seed) {
    Eigen::VectorXd h = rnn_hidden(net, window, train_mode, seed);
    Eigen::VectorXd logits = net.w_dense * h + net.b_dense;
    double top = logits.maxCoeff();
    Eigen::VectorXd exps = ((logits.array() - top).exp()).matrix();
    return exps / exps.sum();
}

void train(LSTMNet& net, const std::vector<RnnExample>& data,
           const std::vector<RnnExample>& validation, const TrainConfig& cfg) {
    if (data.empty()) throw DataError("train: empty dataset");
    if (cfg.batch_size < 1) throw DataError("train: batch_size must be at least 1");
    if (cfg.learning_rate <= 0.0 || cfg.clip_norm <= 0.0)
        throw DataError("train: learning_rate and clip_norm must be positive");

    Rng rng(derive_seed(cfg.seed, "rnn-train"));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double total_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t count = std::min(cfg.batch_size, order.size() - start);
            Grads g(net);
            for (std::size_t b = 0; b < count; ++b) {
                const RnnExample& ex = data[order[start + b]];
                auto caches = run_lstm(net, ex.window);
                Eigen::VectorXd mask =
                    net.dropout_rate > 0.0
                        ? dropout_mask(net.hidden_size, net.dropout_rate, rng)
                        : Eigen::VectorXd::Ones(static_cast<Eigen::Index>(net.hidden_size));
                total_loss += backward(net, caches, ex.next, mask, g);
            }
            double inv = 1.0 / static_cast<double>(count);
            double sq = 0.0;
            for_each_param(g, [&](auto& p) {
                p *= inv;
                if (p.size() > 0) sq += p.squaredNorm();
            });
            double gnorm = std::sqrt(sq);
            double step = cfg.learning_rate;
            if (gnorm > cfg.clip_norm) step *= cfg.clip_norm / gnorm;
            zip_params(net, g, [&](auto& p, const auto& gr) { p -= step * gr; });
        }
        double train_loss = total_loss / static_cast<double>(data.size());
        if (!std::isfinite(train_loss))
            throw ModelError("train: loss diverged at epoch " + std::to_string(epoch + 1) +
                             "; try a lower learning_rate");
        double val_loss = validation.empty() ? std::numeric_limits<double>::quiet_NaN()
                                             : rnn_loss(net, validation);
        net.trace.push_back({net.trace.size() + 1, train_loss, val_loss});
    }
}

double rnn_loss(const LSTMNet& net, const std::vector<RnnExample>& examples) {
    if (examples.empty()) return 0.0;
    double total = 0.0;
    for (const RnnExample& ex : examples) total += example_loss(net, ex);
    return total / static_cast<double>(examples.size());
}

std::vector<double> rnn_parameters(const LSTMNet& net) {
    std::vector<double> out;
    for_each_param(net, [&](const auto& p) { out.insert(out.end(), p.data(), p.data() + p.size()); });
    return out;
}

void set_rnn_parameters(LSTMNet& net, const std::vector<double>& params) {
    std::size_t at = 0;
    for_each_param(net, [&](auto& p) {
        if (at + static_cast<std::size_t>(p.size()) > params.size())
            throw ModelError("set_rnn_parameters: parameter vector too short");
        std::copy(params.begin() + static_cast<std::ptrdiff_t>(at),
                  params.begin() + static_cast<std::ptrdiff_t>(at + p.size()), p.data());
        at += static_cast<std::size_t>(p.size());
    });
    if (at != params.size())
        throw ModelError("set_rnn_parameters: parameter vector size mismatch");
}

std::vector<double> rnn_gradient(const LSTMNet& net, const std::vector<RnnExample>& examples) {
    Grads g(net);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(net.hidden_size));
    for (const RnnExample& ex : examples) {
        auto caches = run_lstm(net, ex.window);
        backward(net, caches, ex.next, ones, g);
    }
    double inv = examples.empty() ? 0.0 : 1.0 / static_cast<double>(examples.size());
    std::vector<double> out;
    for_each_param(g, [&](auto& p) {
        p *= inv;
        out.insert(out.end(), p.data(), p.data() + p.size());
    });
    return out;
}

std::size_t gumbel_argmax(const std::vector<double>& probs, double noise_scale, Rng& rng) {
    if (probs.empty()) throw DataError("gumbel_argmax: empty distribution");
    if (noise_scale < 0.0) throw DataError("gumbel_argmax: negative noise_scale");
    std::size_t best = probs.size();
    double best_score = -std::numeric_limits<double>::infinity();
    if (noise_scale == 0.0) {
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > best_score) {
                best_score = probs[i];
                best = i;
            }
        }
        if (best_score <= 0.0) throw ModelError("gumbel_argmax: no probability mass");
        return best;
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        double score = std::log(probs[i]) + noise_scale * rng.gumbel();
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    if (best == probs.size()) throw ModelError("gumbel_argmax: no probability mass");
    return best;
}

std::size_t sample_next(const LSTMNet& net, const std::vector<std::size_t>& window,
                        const SamplerConfig& sampler, Rng& rng,
                        const std::vector<std::size_t>& extra_mask) {
    Eigen::VectorXd p = forward(net, window);
    std::vector<double> probs(p.data(), p.data() + p.size());
    probs[SymbolTable::kPad] = 0.0;
    probs[SymbolTable::kUnk] = 0.0;
    for (std::size_t id : extra_mask)
        if (id < probs.size()) probs[id] = 0.0;
    double z = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (z <= 0.0) throw ModelError("sample_next: every symbol is masked");
    for (double& x : probs) x /= z;
    return gumbel_argmax(probs, sampler.noise_scale, rng);
}

Haiku generate_rnn(const LSTMNet& net, const std::string& first_line,
                   const SamplerConfig& sampler, std::uint64_t seed) {
    if (first_line.empty()) throw DataError("generate_rnn: empty first line");
    if (sampler.max_tokens_per_line < 1)
        throw DataError("generate_rnn: max_tokens_per_line must be at least 1");

    Rng rng(derive_seed(seed, "rnn-sample"));
    std::vector<std::size_t> stream = render_text(first_line, net.level, net.vocab);
    stream.push_back(SymbolTable::kEol);

    auto current_window = [&]() {
        std::vector<std::size_t> win(net.window, SymbolTable::kPad);
        std::size_t n = std::min(stream.size(), net.window);
        std::copy(stream.end() - static_cast<std::ptrdiff_t>(n), stream.end(),
                  win.end() - static_cast<std::ptrdiff_t>(n));
        return win;
    };

    Haiku out;
    out.source = net.level == RnnLevel::chars ? Source::rnn_char : Source::rnn_word;
    out.lines[0] = first_line;

    for (std::size_t li = 1; li <= 2; ++li) {
        std::vector<std::size_t> line_syms;
        bool has_content = false;
        while (true) {
            std::vector<std::size_t> extra;
            if (!has_content) extra.push_back(SymbolTable::kEol);
            std::size_t id = sample_next(net, current_window(), sampler, rng, extra);
            stream.push_back(id);
            if (id == SymbolTable::kEol) break;
            line_syms.push_back(id);
            if (net.vocab.symbol(id) != " ") has_content = true;
            if (line_syms.size() >= sampler.max_tokens_per_line) {
                stream.push_back(SymbolTable::kEol);
                break;
            }
        }
        std::string text;
        for (std::size_t i = 0; i < line_syms.size(); ++i) {
            if (net.level == RnnLevel::words && i > 0) text += " ";
            text += net.vocab.symbol(line_syms[i]);
        }
        out.lines[li] = trim_spaces(text);
    }
    return out;
}

void LSTMNet::save(const std::filesystem::path& path) const {
    std::string out = "HKG-RNN 1\n";
    out += "level " + level_name(level) + "\n";
    out += "hidden_size " + std::to_string(hidden_size) + "\n";
    out += "window " + std::to_string(window) + "\n";
    out += "embedding_dim " + std::to_string(embedding_dim) + "\n";
    out += "dropout_rate " + format_double(dropout_rate) + "\n";
    out += "vocab " + std::to_string(vocab.size() - 3) + "\n";
    for (std::size_t id = 3; id < vocab.size(); ++id) {
        if (level == RnnLevel::chars)
            out += "sym " + std::to_string(utf8_to_codepoint(vocab.symbol(id))) + "\n";
        else
            out += "sym " + vocab.symbol(id) + "\n";
    }
    out += "trace " + std::to_string(trace.size()) + "\n";
    for (const RnnTracePoint& p : trace)
        out += std::to_string(p.epoch) + " " + format_double(p.train_loss) + " " +
               format_double(p.val_loss) + "\n";

    auto write_tensor = [&](const char* name, const Eigen::MatrixXd& m) {
        out += "tensor ";
        out += name;
        out += " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (c) out += " ";
                out += format_double(m(r, c));
            }
            out += "\n";
        }
    };
    write_tensor("embed", embed);
    write_tensor("w_input", w_input);
    write_tensor("b_input", b_input.transpose());
    write_tensor("w_forget", w_forget);
    write_tensor("b_forget", b_forget.transpose());
    write_tensor("w_output", w_output);
    write_tensor("b_output", b_output.transpose());
    write_tensor("w_cand", w_cand);
    write_tensor("b_cand", b_cand.transpose());
    write_tensor("w_dense", w_dense);
    write_tensor("b_dense", b_dense.transpose());
    write_file(path, out);
}

LSTMNet LSTMNet::load(const std::filesystem::path& path) {
    std::vector<std::string> lines = split_lines(read_file(path));
    std::size_t at = 0;
    auto next_line = [&]() -> const std::string& {
        if (at >= lines.size()) throw ModelError("truncated rnn checkpoint: " + path.string());
        return lines[at++];
    };
    auto expect = [&](const std::string& tag) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2 || fields[0] != tag)
            throw ModelError("bad rnn checkpoint field, wanted '" + tag + "': " + path.string());
        return fields[1];
    };

    if (next_line() != "HKG-RNN 1")
        throw ModelError("not an HKG-RNN 1 file: " + path.string());

    LSTMNet net;
    std::string level = expect("level");
    if (level == "char") net.level = RnnLevel::chars;
    else if (level == "word") net.level = RnnLevel::words;
    else throw ModelError("unknown rnn level '" + level + "': " + path.string());
    net.hidden_size = static_cast<std::size_t>(parse_int(expect("hidden_size")));
    net.window = static_cast<std::size_t>(parse_int(expect("window")));
    net.embedding_dim = static_cast<std::size_t>(parse_int(expect("embedding_dim")));
    net.dropout_rate = parse_double(expect("dropout_rate"));

    std::int64_t count = parse_int(expect("vocab"));
    std::vector<std::string> content;
    content.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        auto fields = split_ws(next_line());
        if (fields.size() != 2 || fields[0] != "sym")
            throw ModelError("bad rnn vocab row: " + path.string());
        if (net.level == RnnLevel::chars)
            content.push_back(codepoint_to_utf8(static_cast<std::uint32_t>(parse_int(fields[1]))));
        else
            content.push_back(fields[1]);
    }
    net.vocab = SymbolTable(content);
    if (net.vocab.size() != static_cast<std::size_t>(count) + 3)
        throw ModelError("duplicate rnn vocab symbols: " + path.string());

    std::int64_t points = parse_int(expect("trace"));
    for (std::int64_t i = 0; i < points; ++i) {
        auto fields = split_ws(next_line());
        if (fields.size() != 3) throw ModelError("bad rnn trace row: " + path.string());
        net.trace.push_back({static_cast<std::size_t>(parse_int(fields[0])),
                             parse_double(fields[1]), parse_double(fields[2])});
    }

    auto read_tensor = [&](const char* name) {
        auto header = split_ws(next_line());
        if (header.size() != 4 || header[0] != "tensor" || header[1] != name)
            throw ModelError(std::string("bad tensor header, wanted '") + name +
                             "': " + path.string());
        Eigen::Index rows = parse_int(header[2]);
        Eigen::Index cols = parse_int(header[3]);
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            auto fields = split_ws(next_line());
            if (static_cast<Eigen::Index>(fields.size()) != cols)
                throw ModelError(std::string("bad tensor row in '") + name +
                                 "': " + path.string());
            for (Eigen::Index c = 0; c < cols; ++c)
                m(r, c) = parse_double(fields[static_cast<std::size_t>(c)]);
        }
        return m;
    };
    net.embed = read_tensor("embed");
    net.w_input = read_tensor("w_input");
    net.b_input = read_tensor("b_input").transpose();
    net.w_forget = read_tensor("w_forget");
    net.b_forget = read_tensor("b_forget").transpose();
    net.w_output = read_tensor("w_output");
    net.b_output = read_tensor("b_output").transpose();
    net.w_cand = read_tensor("w_cand");
    net.b_cand = read_tensor("b_cand").transpose();
    net.w_dense = read_tensor("w_dense");
    net.b_dense = read_tensor("b_dense").transpose();
    return net;
}

}  // namespace hkg
