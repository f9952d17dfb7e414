#include "hkg/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "hkg/rng.hpp"
#include "hkg/textio.hpp"
#include "test_util.hpp"

using namespace hkg;

namespace {

EmbeddingModel hand_model() {
    EmbeddingModel m;
    m.dim = 2;
    m.vocab.add("a", 1);
    m.vocab.add("b", 1);
    m.vocab.add("c", 1);
    m.vocab.add("d", 1);
    m.input_vectors = {{1.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
    m.output_vectors = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    return m;
}

// A corpus whose haikus each repeat one fixed word pair.
std::vector<Haiku> paired_corpus(int repetitions) {
    const std::vector<std::pair<std::string, std::string>> pairs{
        {"ash", "oak"}, {"rain", "mist"}, {"moon", "star"}, {"frog", "pond"},
    };
    std::vector<Haiku> corpus;
    for (int r = 0; r < repetitions; ++r)
        for (const auto& [a, b] : pairs)
            corpus.push_back(mk_haiku(a + " " + b, a + " " + b, a + " " + b));
    return corpus;
}

}  // namespace

TEST_CASE("similarity is the cosine of the input vectors") {
    EmbeddingModel m = hand_model();
    CHECK(m.similarity("a", "b") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.similarity("a", "c") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.similarity("a", "d") == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(m.similarity("a", "a") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.similarity("b", "a") == m.similarity("a", "b"));
    CHECK_THROWS_AS(m.similarity("a", "zz"), ModelError);
    CHECK_THROWS_AS(m.similarity("zz", "a"), ModelError);
}

TEST_CASE("a zero vector has zero similarity to everything") {
    EmbeddingModel m = hand_model();
    m.input_vectors[0] = {0.0, 0.0};
    CHECK(m.similarity("a", "b") == 0.0);
    CHECK(m.similarity("a", "a") == 0.0);
}

TEST_CASE("k_most_similar ranks by similarity with lexicographic ties") {
    EmbeddingModel m = hand_model();
    auto top = m.k_most_similar("a", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == "b");
    CHECK(top[0].second == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(top[1].first == "c");

    // b and c tie when both parallel a; the earlier word wins.
    m.input_vectors[2] = {3.0, 0.0};
    auto tied = m.k_most_similar("a", 1);
    CHECK(tied[0].first == "b");

    CHECK(m.k_most_similar("a", 50).size() == 3);
    CHECK_THROWS_AS(m.k_most_similar("a", 0), DataError);
    CHECK_THROWS_AS(m.k_most_similar("zz", 3), ModelError);
}

TEST_CASE("k_most_similar agrees with a full sort") {
    EmbeddingModel m = train_sgns(read_corpus(data_path("sample_corpus.txt")),
                                  {.dim = 8, .window = 3, .negatives = 3, .epochs = 2, .seed = 4});
    const std::string probe = "pond";
    std::vector<std::pair<std::string, double>> full;
    for (const std::string& w : m.vocab.words())
        if (w != probe) full.emplace_back(w, m.similarity(probe, w));
    std::sort(full.begin(), full.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    auto top = m.k_most_similar(probe, 7);
    REQUIRE(top.size() == 7);
    for (std::size_t i = 0; i < top.size(); ++i) {
        CHECK(top[i].first == full[i].first);
        CHECK(top[i].second == full[i].second);
    }
}

TEST_CASE("training is deterministic per seed") {
    std::vector<Haiku> corpus = paired_corpus(10);
    SgnsConfig cfg{.dim = 8, .window = 2, .negatives = 2, .epochs = 2, .seed = 9};
    EmbeddingModel a = train_sgns(corpus, cfg);
    EmbeddingModel b = train_sgns(corpus, cfg);
    CHECK(a == b);

    cfg.seed = 10;
    EmbeddingModel c = train_sgns(corpus, cfg);
    CHECK_FALSE(a == c);
}

TEST_CASE("zero epochs leaves the seeded initialization") {
    std::vector<Haiku> corpus = paired_corpus(3);
    SgnsConfig cfg{.dim = 4, .window = 2, .negatives = 2, .epochs = 0, .seed = 1};
    EmbeddingModel m = train_sgns(corpus, cfg);
    CHECK(m.epoch_loss.empty());
    double half = 0.5 / 4.0;
    bool nonzero = false;
    for (const auto& row : m.input_vectors) {
        for (double x : row) {
            CHECK(std::abs(x) <= half);
            nonzero |= x != 0.0;
        }
    }
    CHECK(nonzero);
    for (const auto& row : m.output_vectors)
        for (double x : row) CHECK(x == 0.0);
}

TEST_CASE("paired words grow more similar than random ones") {
    EmbeddingModel m = train_sgns(paired_corpus(60),
                                  {.dim = 12, .window = 2, .negatives = 4, .epochs = 3, .seed = 2});
    CHECK(m.similarity("ash", "oak") > m.similarity("ash", "pond"));
    CHECK(m.similarity("rain", "mist") > m.similarity("rain", "star"));
    CHECK(m.similarity("frog", "pond") > m.similarity("frog", "oak"));
}

TEST_CASE("each epoch records a mean pair loss") {
    EmbeddingModel m = train_sgns(paired_corpus(40),
                                  {.dim = 8, .window = 2, .negatives = 3, .epochs = 5, .seed = 3});
    REQUIRE(m.epoch_loss.size() == 5);
    for (double l : m.epoch_loss) {
        CHECK(std::isfinite(l));
        CHECK(l > 0.0);
    }
    CHECK(m.epoch_loss.back() < m.epoch_loss.front());
}

TEST_CASE("the pair gradient matches finite differences") {
    EmbeddingModel m = hand_model();
    Rng rng(17);
    for (auto& row : m.input_vectors)
        for (double& x : row) x = rng.uniform(-0.8, 0.8);
    for (auto& row : m.output_vectors)
        for (double& x : row) x = rng.uniform(-0.8, 0.8);

    const std::size_t center = 0, context = 2;
    const std::vector<std::size_t> negatives{1, 3, 3};
    SgnsGradient grad = sgns_pair_grad(m, center, context, negatives);

    const double h = 1e-6;
    auto rel_err = [](double g, double fd) {
        return std::abs(g - fd) / std::max(1e-8, std::abs(g) + std::abs(fd));
    };

    for (std::size_t i = 0; i < m.dim; ++i) {
        EmbeddingModel plus = m, minus = m;
        plus.input_vectors[center][i] += h;
        minus.input_vectors[center][i] -= h;
        double fd = (sgns_pair_loss(plus, center, context, negatives) -
                     sgns_pair_loss(minus, center, context, negatives)) /
                    (2 * h);
        CHECK(rel_err(grad.center[i], fd) < 1e-5);
    }
    for (const auto& [id, g] : grad.output) {
        for (std::size_t i = 0; i < m.dim; ++i) {
            EmbeddingModel plus = m, minus = m;
            plus.output_vectors[id][i] += h;
            minus.output_vectors[id][i] -= h;
            double fd = (sgns_pair_loss(plus, center, context, negatives) -
                         sgns_pair_loss(minus, center, context, negatives)) /
                        (2 * h);
            CHECK(rel_err(g[i], fd) < 1e-5);
        }
    }
    // The repeated negative must fold into one accumulated entry.
    CHECK(grad.output.size() == 3);
}

TEST_CASE("training validates its configuration") {
    std::vector<Haiku> corpus = paired_corpus(2);
    CHECK_THROWS_AS(train_sgns(corpus, {.dim = 1}), DataError);
    CHECK_THROWS_AS(train_sgns(corpus, {.dim = 4, .window = 0}), DataError);
    CHECK_THROWS_AS(train_sgns(corpus, {.dim = 4, .negatives = 0}), DataError);
    CHECK_THROWS_AS(train_sgns(corpus, {.dim = 4, .learning_rate = 0.0}), DataError);
    CHECK_THROWS_AS(train_sgns({mk_haiku("same same", "same same", "same same")}, {.dim = 4}),
                    DataError);
}

TEST_CASE("embedding save and load round-trip") {
    TempDir tmp;
    EmbeddingModel m = train_sgns(paired_corpus(5),
                                  {.dim = 6, .window = 2, .negatives = 2, .epochs = 2, .seed = 8});
    m.save(tmp / "m.emb");
    EmbeddingModel back = EmbeddingModel::load(tmp / "m.emb");
    CHECK(back == m);
    CHECK(back.similarity("ash", "oak") == m.similarity("ash", "oak"));

    back.save(tmp / "m2.emb");
    CHECK(read_file(tmp / "m.emb") == read_file(tmp / "m2.emb"));
}

TEST_CASE("embedding load rejects malformed files") {
    TempDir tmp;
    write_file(tmp / "bad.emb", "HKG-EMB 2\n");
    CHECK_THROWS_AS(EmbeddingModel::load(tmp / "bad.emb"), ModelError);
    write_file(tmp / "trunc.emb", "HKG-EMB 1\ndim 4\nvocab 2\na 1\n");
    CHECK_THROWS_AS(EmbeddingModel::load(tmp / "trunc.emb"), ModelError);
}
