#include "hkg/ngram.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "hkg/textio.hpp"
#include "test_util.hpp"

using namespace hkg;

namespace {

// One haiku, lines "a b", "a b", "a c". Stream a,b,a,b,a,c gives, by hand:
//   vocab {a,b,c}, total 6 tokens, counts a:3 b:2 c:1
//   bigrams  a->b:2  a->c:1  b->a:2  <s>->a:3
//   outgoing a:3  b:2  <s>:3
NGramModel toy_model() {
    return NGramModel::train({mk_haiku("a b", "a b", "a c")}, 1.0);
}

}  // namespace

TEST_CASE("training collects counts across lines but not across haikus") {
    NGramModel m = toy_model();
    CHECK(m.total_tokens() == 6);
    CHECK(m.alpha() == 1.0);
    REQUIRE(m.vocab().size() == 3);
    CHECK(m.vocab().count(0) == 3);
    CHECK(m.vocab().count(1) == 2);
    CHECK(m.vocab().count(2) == 1);

    // Haiku one ends with b, haiku two starts with a. If bigrams leaked
    // across haikus, b->a would be seen and cost less than the unseen b->b.
    NGramModel two = NGramModel::train(
        {mk_haiku("x b", "x b", "x b"), mk_haiku("a x", "a x", "a x")}, 1.0);
    CHECK(two.bigram_cost("b", "a") == doctest::Approx(two.bigram_cost("b", "b")).epsilon(1e-12));
}

TEST_CASE("smoothed unigram costs match hand arithmetic") {
    NGramModel m = toy_model();
    // -ln((count + alpha) / (total + alpha * (V + 1))), alpha 1, V 3.
    CHECK(m.unigram_cost("a") == doctest::Approx(-std::log(4.0 / 10.0)).epsilon(1e-12));
    CHECK(m.unigram_cost("b") == doctest::Approx(-std::log(3.0 / 10.0)).epsilon(1e-12));
    CHECK(m.unigram_cost("c") == doctest::Approx(-std::log(2.0 / 10.0)).epsilon(1e-12));
    CHECK(m.unigram_cost("zz") == doctest::Approx(-std::log(1.0 / 10.0)).epsilon(1e-12));
}

TEST_CASE("smoothed bigram costs match hand arithmetic") {
    NGramModel m = toy_model();
    CHECK(m.bigram_cost("a", "b") == doctest::Approx(-std::log(3.0 / 7.0)).epsilon(1e-12));
    CHECK(m.bigram_cost("a", "c") == doctest::Approx(-std::log(2.0 / 7.0)).epsilon(1e-12));
    CHECK(m.bigram_cost("a", "a") == doctest::Approx(-std::log(1.0 / 7.0)).epsilon(1e-12));
    CHECK(m.bigram_cost("b", "a") == doctest::Approx(-std::log(3.0 / 6.0)).epsilon(1e-12));
    CHECK(m.bigram_cost("b", "c") == doctest::Approx(-std::log(1.0 / 6.0)).epsilon(1e-12));
    CHECK(m.bigram_cost(kLineStart, "a") == doctest::Approx(-std::log(4.0 / 7.0)).epsilon(1e-12));
    CHECK(m.bigram_cost(kLineStart, "c") == doctest::Approx(-std::log(1.0 / 7.0)).epsilon(1e-12));
    // c never occurs as a context; every continuation is pure smoothing.
    CHECK(m.bigram_cost("c", "a") == doctest::Approx(-std::log(1.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("conditional probabilities normalize for every context") {
    NGramModel m = NGramModel::train(read_corpus(data_path("sample_corpus.txt")), 0.1);
    std::vector<std::string> contexts{"the", "pond", "wind", kLineStart};
    for (const std::string& prev : contexts) {
        double mass = std::exp(-m.bigram_cost(prev, "zz-not-a-word"));
        for (const std::string& next : m.vocab().words())
            mass += std::exp(-m.bigram_cost(prev, next));
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
    double mass = std::exp(-m.unigram_cost("zz-not-a-word"));
    for (const std::string& w : m.vocab().words()) mass += std::exp(-m.unigram_cost(w));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("argmin_next picks the cheapest continuation") {
    NGramModel m = toy_model();
    CHECK(m.argmin_next("a") == "b");
    CHECK(m.argmin_next("a", {"b"}) == "c");
    CHECK(m.argmin_next("b") == "a");
    CHECK(m.argmin_next(kLineStart) == "a");
    CHECK_THROWS_AS(m.argmin_next("a", {"a", "b", "c"}), ModelError);
}

TEST_CASE("argmin ties break toward the lexicographically smaller word") {
    // Every continuation of x is seen exactly once.
    NGramModel m = NGramModel::train({mk_haiku("x y", "x z", "x w")}, 1.0);
    CHECK(m.argmin_next("x") == "w");
    CHECK(m.argmin_next("x", {"w"}) == "y");
    CHECK(m.argmin_next("x", {"w", "y"}) == "z");
}

TEST_CASE("argmin_unigram prefers frequency then spelling") {
    NGramModel m = toy_model();
    CHECK(m.argmin_unigram() == "a");
    CHECK(m.argmin_unigram({"a"}) == "b");

    NGramModel tied = NGramModel::train({mk_haiku("n m", "m n", "n m")}, 1.0);
    CHECK(tied.argmin_unigram() == "m");
    CHECK_THROWS_AS(tied.argmin_unigram({"m", "n"}), ModelError);
}

TEST_CASE("training validates its inputs") {
    CHECK_THROWS_AS(NGramModel::train({}, 0.1), DataError);
    CHECK_THROWS_AS(NGramModel::train({mk_haiku("a b", "c d", "e f")}, 0.0), DataError);
    CHECK_THROWS_AS(NGramModel::train({mk_haiku("a b", "c d", "e f")}, -1.0), DataError);
}

TEST_CASE("ngram save and load round-trip") {
    TempDir tmp;
    NGramModel m = NGramModel::train(read_corpus(data_path("sample_corpus.txt")), 0.1);
    m.save(tmp / "m.ngram");
    NGramModel back = NGramModel::load(tmp / "m.ngram");
    CHECK(back == m);
    CHECK(back.bigram_cost("the", "pond") == m.bigram_cost("the", "pond"));
    CHECK(back.argmin_next("the") == m.argmin_next("the"));

    // Saving the loaded model reproduces the same bytes.
    back.save(tmp / "m2.ngram");
    CHECK(read_file(tmp / "m.ngram") == read_file(tmp / "m2.ngram"));
}

TEST_CASE("ngram load rejects malformed files") {
    TempDir tmp;
    write_file(tmp / "bad.ngram", "HKG-NOPE 1\n");
    CHECK_THROWS_AS(NGramModel::load(tmp / "bad.ngram"), ModelError);
    write_file(tmp / "trunc.ngram", "HKG-NGRAM 1\nalpha 0.1\ntotal_tokens 6\nvocab 3\na 3\n");
    CHECK_THROWS_AS(NGramModel::load(tmp / "trunc.ngram"), ModelError);
}
