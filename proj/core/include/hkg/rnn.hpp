#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hkg/corpus.hpp"
#include "hkg/rng.hpp"

namespace hkg {

enum class RnnLevel { chars, words };

std::string level_name(RnnLevel level);

// Symbol ids: 0 = pad, 1 = unknown, 2 = end-of-line, then content symbols in
// sorted order. Content symbols are single UTF-8 characters (char level) or
// whole words (word level).
class SymbolTable {
public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;
    static constexpr std::size_t kEol = 2;

    SymbolTable();
    explicit SymbolTable(const std::vector<std::string>& content);

    std::size_t size() const { return symbols_.size(); }
    const std::string& symbol(std::size_t id) const { return symbols_[id]; }
    std::size_t id_of(const std::string& s) const;

    bool operator==(const SymbolTable& other) const = default;

private:
    std::vector<std::string> symbols_;
    std::map<std::string, std::size_t> ids_;
};

SymbolTable build_symbol_table(const std::vector<Haiku>& corpus, RnnLevel level);

// Haiku as a symbol id stream: lines joined by the end-of-line symbol.
std::vector<std::size_t> render_haiku(const Haiku& h, RnnLevel level, const SymbolTable& vocab);
// One line of text as symbol ids (no end-of-line appended).
std::vector<std::size_t> render_text(const std::string& text, RnnLevel level,
                                     const SymbolTable& vocab);

struct RnnExample {
    std::vector<std::size_t> window;
    std::size_t next = 0;

    bool operator==(const RnnExample& other) const = default;
};

// Sliding (window -> next symbol) pairs per haiku; haikus shorter than
// window+1 symbols are left-padded to yield one pair.
std::vector<RnnExample> build_dataset(const std::vector<Haiku>& corpus, RnnLevel level,
                                      std::size_t window, const SymbolTable& vocab);

struct RnnTracePoint {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

// Single LSTM layer over the input window, dropout on the final hidden state
// (training only), then a dense layer and softmax over the vocabulary.
// Char-level input is one-hot; word-level input is a learned embedding row.
struct LSTMNet {
    RnnLevel level = RnnLevel::chars;
    SymbolTable vocab;
    std::size_t hidden_size = 64;
    std::size_t window = 10;
    std::size_t embedding_dim = 0;
    double dropout_rate = 0.2;

    Eigen::MatrixXd embed;
    Eigen::MatrixXd w_input, w_forget, w_output, w_cand;
    Eigen::VectorXd b_input, b_forget, b_output, b_cand;
    Eigen::MatrixXd w_dense;
    Eigen::VectorXd b_dense;

    std::vector<RnnTracePoint> trace;

    std::size_t input_dim() const {
        return level == RnnLevel::chars ? vocab.size() : embedding_dim;
    }

    void save(const std::filesystem::path& path) const;
    static LSTMNet load(const std::filesystem::path& path);
};

bool same_parameters(const LSTMNet& a, const LSTMNet& b);

LSTMNet init_lstm(RnnLevel level, const SymbolTable& vocab, std::size_t hidden_size,
                  std::size_t window, std::size_t embedding_dim, double dropout_rate,
                  std::uint64_t seed);

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

// One recurrence step, exposed for verification against hand arithmetic.
LstmState lstm_step(const LSTMNet& net, std::size_t symbol, const LstmState& prev);

// Final hidden state after the window; train_mode applies inverted dropout
// using a mask drawn from Rng(seed).
Eigen::VectorXd rnn_hidden(const LSTMNet& net, const std::vector<std::size_t>& window,
                           bool train_mode = false, std::uint64_t seed = 0);

// Probability vector over the vocabulary for the symbol after the window.
Eigen::VectorXd forward(const LSTMNet& net, const std::vector<std::size_t>& window,
                        bool train_mode = false, std::uint64_t seed = 0);

struct TrainConfig {
    std::size_t window = 10;
    std::size_t epochs = 25;
    std::size_t batch_size = 32;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    double clip_norm = 5.0;
};

// Mini-batch gradient descent with global-norm clipping; cross-entropy on the
// symbol after each window, backpropagated through the whole window. Appends
// one (epoch, train_loss, val_loss) trace point per epoch; val_loss is NaN
// when `validation` is empty.
void train(LSTMNet& net, const std::vector<RnnExample>& data,
           const std::vector<RnnExample>& validation, const TrainConfig& cfg);

// Mean cross-entropy over examples, no dropout. Exposed with the matching
// analytic gradient for finite-difference checks.
double rnn_loss(const LSTMNet& net, const std::vector<RnnExample>& examples);
std::vector<double> rnn_parameters(const LSTMNet& net);
void set_rnn_parameters(LSTMNet& net, const std::vector<double>& params);
std::vector<double> rnn_gradient(const LSTMNet& net, const std::vector<RnnExample>& examples);

struct SamplerConfig {
    double noise_scale = 0.8;
    std::size_t max_tokens_per_line = 40;
};

// Argmax of ln(p_i) + noise_scale * Gumbel_i. noise_scale 0 is a pure argmax
// and draws nothing from rng; noise_scale 1 samples p exactly.
std::size_t gumbel_argmax(const std::vector<double>& probs, double noise_scale, Rng& rng);

// Next symbol for the window: pad and unknown (plus entries of extra_mask)
// are masked out, the rest renormalized, then noisy-argmax sampled.
std::size_t sample_next(const LSTMNet& net, const std::vector<std::size_t>& window,
                        const SamplerConfig& sampler, Rng& rng,
                        const std::vector<std::size_t>& extra_mask = {});

// Lines 2 and 3 sampled symbol by symbol; a line ends on the end-of-line
// symbol or is force-terminated at max_tokens_per_line symbols.
Haiku generate_rnn(const LSTMNet& net, const std::string& first_line,
                   const SamplerConfig& sampler, std::uint64_t seed);

}  // namespace hkg
