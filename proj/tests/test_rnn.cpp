#include "hkg/rnn.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "hkg/textio.hpp"
#include "test_util.hpp"

using namespace hkg;

namespace {

// pad 0, unk 1, eol 2, then a 3, b 4, c 5.
SymbolTable abc_table() { return SymbolTable({"a", "b", "c"}); }

LSTMNet abc_net(std::size_t hidden, std::size_t window, std::uint64_t seed,
                double dropout = 0.0) {
    return init_lstm(RnnLevel::chars, abc_table(), hidden, window, 0, dropout, seed);
}

double sigmoid_s(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("symbol tables reserve pad, unk and eol") {
    SymbolTable t = abc_table();
    CHECK(t.size() == 6);
    CHECK(t.symbol(SymbolTable::kPad) == "<pad>");
    CHECK(t.symbol(SymbolTable::kUnk) == "<unk>");
    CHECK(t.symbol(SymbolTable::kEol) == "<eol>");
    CHECK(t.symbol(3) == "a");
    CHECK(t.id_of("b") == 4);
    CHECK(t.id_of("zz") == SymbolTable::kUnk);

    SymbolTable dup({"b", "a", "b", "<eol>"});
    CHECK(dup.size() == 5);
    CHECK(dup.symbol(3) == "a");
    CHECK(dup.symbol(4) == "b");
}

TEST_CASE("char tables collect distinct utf-8 characters") {
    SymbolTable t = build_symbol_table({mk_haiku("ab", "cd", "ef")}, RnnLevel::chars);
    CHECK(t.size() == 9);
    CHECK(t.id_of("a") == 3);
    CHECK(t.id_of("f") == 8);

    SymbolTable accents = build_symbol_table({mk_haiku("caf\xC3\xA9", "oui", "non")},
                                             RnnLevel::chars);
    CHECK(accents.id_of("\xC3\xA9") != SymbolTable::kUnk);
}

TEST_CASE("word tables collect distinct words") {
    SymbolTable t = build_symbol_table({mk_haiku("the pond", "the frog", "waits")},
                                       RnnLevel::words);
    CHECK(t.size() == 7);
    CHECK(t.id_of("frog") == 3);
    CHECK(t.id_of("pond") == 4);
    CHECK(t.id_of("the") == 5);
    CHECK(t.id_of("waits") == 6);
}

TEST_CASE("render_haiku joins lines with the eol symbol") {
    SymbolTable t = build_symbol_table({mk_haiku("ab", "cd", "ef")}, RnnLevel::chars);
    std::vector<std::size_t> want{3, 4, 2, 5, 6, 2, 7, 8};
    CHECK(render_haiku(mk_haiku("ab", "cd", "ef"), RnnLevel::chars, t) == want);

    SymbolTable w = build_symbol_table({mk_haiku("the pond", "the frog", "waits")},
                                       RnnLevel::words);
    std::vector<std::size_t> want_w{5, 4, 2, 5, 3, 2, 6};
    CHECK(render_haiku(mk_haiku("the pond", "the frog", "waits"), RnnLevel::words, w) == want_w);
}

TEST_CASE("datasets slide one window at a time") {
    SymbolTable t = build_symbol_table({mk_haiku("ab", "cd", "ef")}, RnnLevel::chars);
    auto data = build_dataset({mk_haiku("ab", "cd", "ef")}, RnnLevel::chars, 2, t);
    REQUIRE(data.size() == 6);
    CHECK(data[0].window == std::vector<std::size_t>{3, 4});
    CHECK(data[0].next == 2);
    CHECK(data[1].window == std::vector<std::size_t>{4, 2});
    CHECK(data[1].next == 5);
    CHECK(data[5].window == std::vector<std::size_t>{2, 7});
    CHECK(data[5].next == 8);
}

TEST_CASE("short haikus are left-padded into a single example") {
    SymbolTable t = build_symbol_table({mk_haiku("a", "b", "c")}, RnnLevel::chars);
    auto data = build_dataset({mk_haiku("a", "b", "c")}, RnnLevel::chars, 10, t);
    REQUIRE(data.size() == 1);
    std::vector<std::size_t> want{0, 0, 0, 0, 0, 0, 3, 2, 4, 2};
    CHECK(data[0].window == want);
    CHECK(data[0].next == 5);
    CHECK_THROWS_AS(build_dataset({mk_haiku("a", "b", "c")}, RnnLevel::chars, 0, t), DataError);
}

TEST_CASE("init_lstm validates and seeds reproducibly") {
    SymbolTable t = abc_table();
    CHECK_THROWS_AS(init_lstm(RnnLevel::chars, t, 0, 5, 0, 0.0, 1), DataError);
    CHECK_THROWS_AS(init_lstm(RnnLevel::chars, t, 4, 0, 0, 0.0, 1), DataError);
    CHECK_THROWS_AS(init_lstm(RnnLevel::words, t, 4, 5, 0, 0.0, 1), DataError);
    CHECK_THROWS_AS(init_lstm(RnnLevel::chars, t, 4, 5, 0, 1.0, 1), DataError);

    LSTMNet a = abc_net(4, 3, 7);
    LSTMNet b = abc_net(4, 3, 7);
    CHECK(same_parameters(a, b));
    LSTMNet c = abc_net(4, 3, 8);
    CHECK_FALSE(same_parameters(a, c));

    // Forget-gate biases start at one, the rest at zero.
    CHECK(a.b_forget.minCoeff() == 1.0);
    CHECK(a.b_input.maxCoeff() == 0.0);
    CHECK(a.w_input.maxCoeff() <= 0.08);
    CHECK(a.w_input.minCoeff() >= -0.08);
}

TEST_CASE("one lstm step matches scalar hand arithmetic") {
    SymbolTable t({"x"});
    LSTMNet net = init_lstm(RnnLevel::chars, t, 1, 2, 0, 0.0, 0);
    std::vector<double> params(rnn_parameters(net).size(), 0.1);
    set_rnn_parameters(net, params);

    LstmState s0{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
    LstmState s1 = lstm_step(net, t.id_of("x"), s0);

    // Every gate sees 0.1 * (one-hot sum) + 0.1 = 0.2.
    double gate = sigmoid_s(0.2);
    double cand = std::tanh(0.2);
    double c1 = gate * cand;
    double h1 = gate * std::tanh(c1);
    CHECK(s1.c[0] == doctest::Approx(c1).epsilon(1e-12));
    CHECK(s1.h[0] == doctest::Approx(h1).epsilon(1e-12));
    CHECK(s1.c[0] == doctest::Approx(0.10852366129008935).epsilon(1e-9));
    CHECK(s1.h[0] == doctest::Approx(0.05943684462278488).epsilon(1e-9));

    LstmState s2 = lstm_step(net, t.id_of("x"), s1);
    double pre2 = 0.2 + 0.1 * h1;
    double gate2 = sigmoid_s(pre2);
    double cand2 = std::tanh(pre2);
    double c2 = gate2 * c1 + gate2 * cand2;
    double h2 = gate2 * std::tanh(c2);
    CHECK(s2.c[0] == doctest::Approx(c2).epsilon(1e-12));
    CHECK(s2.h[0] == doctest::Approx(h2).epsilon(1e-12));
    CHECK(s2.c[0] == doctest::Approx(0.1717889523055769).epsilon(1e-9));
    CHECK(s2.h[0] == doctest::Approx(0.0937872706624229).epsilon(1e-9));
}

TEST_CASE("zeroed parameters give a uniform next-symbol distribution") {
    LSTMNet net = abc_net(4, 3, 1);
    std::vector<double> zeros(rnn_parameters(net).size(), 0.0);
    set_rnn_parameters(net, zeros);
    Eigen::VectorXd p = forward(net, {3, 4, 5});
    REQUIRE(p.size() == 6);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        CHECK(p[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("forward produces a probability vector") {
    LSTMNet net = abc_net(5, 4, 2);
    Eigen::VectorXd p = forward(net, {3, 4, 5, 2});
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        CHECK(p[i] > 0.0);
        sum += p[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parameter vectors round-trip") {
    LSTMNet net = abc_net(4, 3, 3);
    std::vector<double> params = rnn_parameters(net);
    CHECK(params.size() == 4 * (6 + 4) * 4 + 4 * 4 + 6 * 4 + 6);
    LSTMNet other = abc_net(4, 3, 9);
    set_rnn_parameters(other, params);
    CHECK(same_parameters(net, other));
    params.pop_back();
    CHECK_THROWS_AS(set_rnn_parameters(other, params), ModelError);
}

TEST_CASE("the analytic gradient matches central differences, char level") {
    std::vector<Haiku> corpus{mk_haiku("ab", "ca", "bc")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::chars);
    LSTMNet net = init_lstm(RnnLevel::chars, t, 4, 3, 0, 0.0, 5);
    auto data = build_dataset(corpus, RnnLevel::chars, 3, t);
    REQUIRE(data.size() == 5);

    std::vector<double> params = rnn_parameters(net);
    REQUIRE(params.size() <= 500);
    std::vector<double> grad = rnn_gradient(net, data);
    REQUIRE(grad.size() == params.size());

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double> plus = params, minus = params;
        plus[i] += h;
        minus[i] -= h;
        LSTMNet probe = net;
        set_rnn_parameters(probe, plus);
        double up = rnn_loss(probe, data);
        set_rnn_parameters(probe, minus);
        double down = rnn_loss(probe, data);
        double fd = (up - down) / (2 * h);
        double rel = std::abs(grad[i] - fd) / std::max(1e-8, std::abs(grad[i]) + std::abs(fd));
        worst = std::max(worst, rel);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("the analytic gradient matches central differences, word level") {
    std::vector<Haiku> corpus{mk_haiku("aa bb", "bb aa", "aa aa")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::words);
    LSTMNet net = init_lstm(RnnLevel::words, t, 3, 2, 2, 0.0, 6);
    auto data = build_dataset(corpus, RnnLevel::words, 2, t);
    REQUIRE(!data.empty());

    std::vector<double> params = rnn_parameters(net);
    REQUIRE(params.size() <= 500);
    std::vector<double> grad = rnn_gradient(net, data);

    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::vector<double> plus = params, minus = params;
        plus[i] += h;
        minus[i] -= h;
        LSTMNet probe = net;
        set_rnn_parameters(probe, plus);
        double up = rnn_loss(probe, data);
        set_rnn_parameters(probe, minus);
        double down = rnn_loss(probe, data);
        double fd = (up - down) / (2 * h);
        // embedding paths here produce gradients below what central
        // differences can resolve (~1e-10), so floor the denominator
        double rel = std::abs(grad[i] - fd) / std::max(1e-6, std::abs(grad[i]) + std::abs(fd));
        worst = std::max(worst, rel);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("dropout masks the final hidden state with inverted scaling") {
    LSTMNet net = abc_net(8, 3, 4, 0.5);
    std::vector<std::size_t> window{3, 4, 5};
    Eigen::VectorXd h_eval = rnn_hidden(net, window, false);

    const int n = 20000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    bool saw_zero = false;
    for (int s = 0; s < n; ++s) {
        Eigen::VectorXd h = rnn_hidden(net, window, true, static_cast<std::uint64_t>(s));
        for (Eigen::Index i = 0; i < h.size(); ++i) {
            bool dropped = h[i] == 0.0;
            bool doubled = std::abs(h[i] - 2.0 * h_eval[i]) < 1e-12;
            CHECK((dropped || doubled));
            saw_zero |= dropped;
        }
        mean += h;
    }
    mean /= n;
    CHECK(saw_zero);
    for (Eigen::Index i = 0; i < mean.size(); ++i)
        CHECK(std::abs(mean[i] - h_eval[i]) <= 0.05 * std::abs(h_eval[i]) + 1e-4);
}

TEST_CASE("training is deterministic and zero epochs is a no-op") {
    std::vector<Haiku> corpus{mk_haiku("ab", "ca", "bc"), mk_haiku("cb", "ba", "ac")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::chars);
    auto data = build_dataset(corpus, RnnLevel::chars, 3, t);

    LSTMNet frozen = init_lstm(RnnLevel::chars, t, 4, 3, 0, 0.1, 7);
    LSTMNet untouched = frozen;
    train(untouched, data, {}, {.epochs = 0, .seed = 1});
    CHECK(same_parameters(frozen, untouched));
    CHECK(untouched.trace.empty());

    LSTMNet a = frozen, b = frozen;
    train(a, data, data, {.epochs = 3, .batch_size = 4, .learning_rate = 0.2, .seed = 1});
    train(b, data, data, {.epochs = 3, .batch_size = 4, .learning_rate = 0.2, .seed = 1});
    CHECK(same_parameters(a, b));
    CHECK_FALSE(same_parameters(a, frozen));
    REQUIRE(a.trace.size() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(a.trace[e].epoch == e + 1);
        CHECK(a.trace[e].train_loss == b.trace[e].train_loss);
        CHECK(std::isfinite(a.trace[e].val_loss));
    }

    LSTMNet c = frozen;
    train(c, data, data, {.epochs = 3, .batch_size = 4, .learning_rate = 0.2, .seed = 2});
    CHECK_FALSE(same_parameters(a, c));
}

TEST_CASE("training reduces the loss on a tiny corpus") {
    std::vector<Haiku> corpus{mk_haiku("abc", "cab", "bca"), mk_haiku("bac", "acb", "cba")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::chars);
    auto data = build_dataset(corpus, RnnLevel::chars, 4, t);

    LSTMNet net = init_lstm(RnnLevel::chars, t, 16, 4, 0, 0.0, 11);
    train(net, data, {}, {.epochs = 120, .batch_size = 8, .learning_rate = 0.5, .seed = 3});
    REQUIRE(net.trace.size() == 120);
    CHECK(net.trace.back().train_loss < 0.6 * net.trace.front().train_loss);
    CHECK(std::isnan(net.trace.back().val_loss));
}

TEST_CASE("train validates and reports divergence") {
    std::vector<Haiku> corpus{mk_haiku("ab", "ca", "bc")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::chars);
    auto data = build_dataset(corpus, RnnLevel::chars, 3, t);
    LSTMNet net = init_lstm(RnnLevel::chars, t, 4, 3, 0, 0.0, 1);

    CHECK_THROWS_AS(train(net, {}, {}, {.epochs = 1}), DataError);
    CHECK_THROWS_AS(train(net, data, {}, {.epochs = 1, .batch_size = 0}), DataError);
    CHECK_THROWS_AS(train(net, data, {}, {.epochs = 1, .learning_rate = 0.0}), DataError);
    // gradient clipping bounds the step size by lr * clip_norm, so the rate
    // has to overflow that product before the loss can go non-finite
    CHECK_THROWS_AS(
        train(net, data, {}, {.epochs = 4, .batch_size = 2, .learning_rate = 1e308}),
        ModelError);
}

TEST_CASE("gumbel argmax with zero noise is a pure argmax that draws nothing") {
    Rng used(7);
    std::vector<double> probs{0.1, 0.2, 0.6, 0.1};
    CHECK(gumbel_argmax(probs, 0.0, used) == 2);
    Rng fresh(7);
    CHECK(used.next_u64() == fresh.next_u64());

    std::vector<double> zeros{0.0, 0.0};
    Rng rng(1);
    CHECK_THROWS_AS(gumbel_argmax(zeros, 0.0, rng), ModelError);
    CHECK_THROWS_AS(gumbel_argmax(zeros, 1.0, rng), ModelError);
    CHECK_THROWS_AS(gumbel_argmax({}, 0.0, rng), DataError);
    CHECK_THROWS_AS(gumbel_argmax(probs, -0.5, rng), DataError);
}

TEST_CASE("gumbel argmax at scale one samples the distribution") {
    std::vector<double> probs{0.4, 0.3, 0.2, 0.1};
    Rng rng(12345);
    std::vector<std::size_t> counts(4, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) ++counts[gumbel_argmax(probs, 1.0, rng)];
    double tv = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
        tv += std::abs(static_cast<double>(counts[i]) / n - probs[i]);
    CHECK(tv / 2.0 <= 0.01);
}

TEST_CASE("zero-probability symbols are never drawn") {
    std::vector<double> probs{0.5, 0.0, 0.5};
    Rng rng(99);
    for (int i = 0; i < 10000; ++i) CHECK(gumbel_argmax(probs, 1.0, rng) != 1);
}

TEST_CASE("sample_next masks pad, unk and the extra mask") {
    LSTMNet net = abc_net(4, 3, 13);
    std::vector<double> zeros(rnn_parameters(net).size(), 0.0);
    set_rnn_parameters(net, zeros);
    SamplerConfig sampler{.noise_scale = 1.0};
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        std::size_t id = sample_next(net, {3, 4, 5}, sampler, rng);
        CHECK(id >= 2);
        CHECK(id <= 5);
    }
    for (int i = 0; i < 2000; ++i) {
        std::size_t id = sample_next(net, {3, 4, 5}, sampler, rng, {SymbolTable::kEol});
        CHECK(id >= 3);
    }
}

TEST_CASE("generate_rnn keeps the first line and is seed-deterministic") {
    std::vector<Haiku> corpus{mk_haiku("abc", "bca", "cab"), mk_haiku("acb", "bac", "cba")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::chars);
    LSTMNet net = init_lstm(RnnLevel::chars, t, 8, 4, 0, 0.0, 17);

    SamplerConfig sampler{.noise_scale = 0.8, .max_tokens_per_line = 12};
    Haiku one = generate_rnn(net, "abc", sampler, 21);
    Haiku two = generate_rnn(net, "abc", sampler, 21);
    CHECK(one.lines[0] == "abc");
    CHECK(one.source == Source::rnn_char);
    CHECK(one.lines == two.lines);
    CHECK(one.lines[1].size() <= 12);
    CHECK(one.lines[2].size() <= 12);

    Haiku other = generate_rnn(net, "abc", sampler, 22);
    bool same = one.lines == other.lines;
    Haiku third = generate_rnn(net, "abc", sampler, 23);
    CHECK((!same || !(one.lines == third.lines)));

    CHECK_THROWS_AS(generate_rnn(net, "", sampler, 1), DataError);
    CHECK_THROWS_AS(generate_rnn(net, "abc", {.max_tokens_per_line = 0}, 1), DataError);
}

TEST_CASE("word-level generation emits space-joined words") {
    std::vector<Haiku> corpus{mk_haiku("moss pond", "pond moss", "moss moss"),
                              mk_haiku("pond pond", "moss pond", "pond moss")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::words);
    LSTMNet net = init_lstm(RnnLevel::words, t, 6, 3, 4, 0.0, 19);

    SamplerConfig sampler{.noise_scale = 0.7, .max_tokens_per_line = 5};
    Haiku h = generate_rnn(net, "moss pond", sampler, 31);
    CHECK(h.source == Source::rnn_word);
    CHECK(h.lines[0] == "moss pond");
    for (int li : {1, 2}) {
        auto words = split_ws(h.lines[li]);
        CHECK(words.size() <= 5);
        for (const std::string& w : words) CHECK((w == "moss" || w == "pond"));
    }
}

TEST_CASE("rnn checkpoints round-trip, including non-ascii symbols and nan traces") {
    TempDir tmp;
    std::vector<Haiku> corpus{mk_haiku("caf\xC3\xA9", "ab", "ba"), mk_haiku("ba", "ab", "fc")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::chars);
    auto data = build_dataset(corpus, RnnLevel::chars, 3, t);
    LSTMNet net = init_lstm(RnnLevel::chars, t, 4, 3, 0, 0.25, 23);
    train(net, data, {}, {.epochs = 2, .batch_size = 4, .learning_rate = 0.1, .seed = 5});

    net.save(tmp / "m.rnn");
    LSTMNet back = LSTMNet::load(tmp / "m.rnn");
    CHECK(same_parameters(net, back));
    CHECK(back.vocab == net.vocab);
    CHECK(back.dropout_rate == net.dropout_rate);
    REQUIRE(back.trace.size() == net.trace.size());
    for (std::size_t i = 0; i < back.trace.size(); ++i) {
        CHECK(back.trace[i].epoch == net.trace[i].epoch);
        CHECK(back.trace[i].train_loss == net.trace[i].train_loss);
        CHECK(std::isnan(back.trace[i].val_loss));
    }

    back.save(tmp / "m2.rnn");
    CHECK(read_file(tmp / "m.rnn") == read_file(tmp / "m2.rnn"));
}

TEST_CASE("word-level checkpoints round-trip") {
    TempDir tmp;
    std::vector<Haiku> corpus{mk_haiku("moss pond", "pond moss", "moss moss")};
    SymbolTable t = build_symbol_table(corpus, RnnLevel::words);
    LSTMNet net = init_lstm(RnnLevel::words, t, 3, 2, 2, 0.0, 29);
    net.save(tmp / "w.rnn");
    LSTMNet back = LSTMNet::load(tmp / "w.rnn");
    CHECK(same_parameters(net, back));
    CHECK(back.level == RnnLevel::words);
    CHECK(back.embedding_dim == 2);
}

TEST_CASE("rnn load rejects malformed checkpoints") {
    TempDir tmp;
    write_file(tmp / "bad.rnn", "HKG-RNN 2\n");
    CHECK_THROWS_AS(LSTMNet::load(tmp / "bad.rnn"), ModelError);
    write_file(tmp / "lvl.rnn", "HKG-RNN 1\nlevel banana\n");
    CHECK_THROWS_AS(LSTMNet::load(tmp / "lvl.rnn"), ModelError);
    write_file(tmp / "trunc.rnn", "HKG-RNN 1\nlevel char\nhidden_size 4\n");
    CHECK_THROWS_AS(LSTMNet::load(tmp / "trunc.rnn"), ModelError);
}
