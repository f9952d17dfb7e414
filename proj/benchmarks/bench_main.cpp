#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "hkg/corpus.hpp"
#include "hkg/embedding.hpp"
#include "hkg/generate.hpp"
#include "hkg/ngram.hpp"
#include "hkg/rnn.hpp"
#include "hkg/simpredictor.hpp"
#include "hkg/syllable.hpp"

namespace {

struct Fixture {
    std::vector<hkg::Haiku> corpus;
    hkg::SyllableLexicon lex;
    hkg::NGramModel ngram;
    hkg::EmbeddingModel emb;
    hkg::LinearSimilarityModel sim;
    hkg::LSTMNet net;
    std::vector<std::size_t> window;

    static const Fixture& get() {
        static Fixture f = build();
        return f;
    }

    static Fixture build() {
        Fixture f;
        f.corpus = hkg::read_corpus(BENCH_DATA_DIR "/sample_corpus.txt");
        f.lex = hkg::SyllableLexicon::load(BENCH_DATA_DIR "/syllable_exceptions.txt");
        f.ngram = hkg::NGramModel::train(f.corpus, 0.1);
        f.emb = hkg::train_sgns(f.corpus, {.dim = 16, .window = 3, .negatives = 5,
                                           .epochs = 3, .learning_rate = 0.025, .seed = 1});
        auto examples = hkg::build_examples(f.corpus, f.emb);
        f.sim = hkg::train_sim(examples, {}, f.ngram, 0.01, 300, 2);

        hkg::SymbolTable table = hkg::build_symbol_table(f.corpus, hkg::RnnLevel::chars);
        f.net = hkg::init_lstm(hkg::RnnLevel::chars, table, 64, 10, 0, 0.0, 7);
        auto data = hkg::build_dataset(f.corpus, hkg::RnnLevel::chars, 10, table);
        f.window = data.front().window;
        return f;
    }
};

void BM_CountLine(benchmark::State& state) {
    const Fixture& f = Fixture::get();
    const std::string line = "the quiet pond reflects an autumn moon";
    for (auto _ : state) {
        benchmark::DoNotOptimize(hkg::count_line(line, f.lex));
    }
}
BENCHMARK(BM_CountLine);

void BM_NgramArgminNext(benchmark::State& state) {
    const Fixture& f = Fixture::get();
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.ngram.argmin_next("the"));
    }
}
BENCHMARK(BM_NgramArgminNext);

void BM_SgnsEpoch(benchmark::State& state) {
    const Fixture& f = Fixture::get();
    hkg::SgnsConfig cfg{.dim = 16, .window = 3, .negatives = 5,
                        .epochs = 1, .learning_rate = 0.025, .seed = 1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(hkg::train_sgns(f.corpus, cfg));
    }
}
BENCHMARK(BM_SgnsEpoch)->Unit(benchmark::kMillisecond);

void BM_BeamLine(benchmark::State& state) {
    const Fixture& f = Fixture::get();
    hkg::SearchConfig cfg{.k = 8, .beam_width = 16};
    for (auto _ : state) {
        benchmark::DoNotOptimize(hkg::beam_line("leaves", 7, f.emb, f.sim, f.ngram, f.lex, cfg));
    }
}
BENCHMARK(BM_BeamLine)->Unit(benchmark::kMicrosecond);

void BM_LstmForward(benchmark::State& state) {
    const Fixture& f = Fixture::get();
    for (auto _ : state) {
        benchmark::DoNotOptimize(hkg::forward(f.net, f.window));
    }
}
BENCHMARK(BM_LstmForward)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
