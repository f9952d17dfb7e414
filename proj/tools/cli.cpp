#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hkg/corpus.hpp"
#include "hkg/embedding.hpp"
#include "hkg/generate.hpp"
#include "hkg/ngram.hpp"
#include "hkg/rnn.hpp"
#include "hkg/simpredictor.hpp"
#include "hkg/survey.hpp"
#include "hkg/syllable.hpp"
#include "hkg/textio.hpp"
#include "json.hpp"

namespace hkg {

namespace {

// Every artifact-producing command drops a replayable manifest next to its
// first output: re-dispatching `argv` reproduces the artifacts byte for byte.
void write_manifest(const std::vector<std::string>& argv, std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::map<std::string, std::string>& formats) {
    if (outputs.empty()) return;
    nlohmann::json j;
    j["command"] = argv.empty() ? "" : argv.front();
    j["argv"] = argv;
    j["seed"] = seed;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["format_versions"] = formats;
    write_file(outputs.front() + ".manifest.json", j.dump(2) + "\n");
}

void append_corpus_row(const std::string& path, const Haiku& h) {
    std::string existing;
    if (std::filesystem::exists(path)) existing = read_file(path);
    write_file(path, existing + h.lines[0] + " / " + h.lines[1] + " / " + h.lines[2] + "\n");
}

std::string poem_text(const Haiku& h, std::uint64_t seed, bool meta) {
    std::string out = h.lines[0] + "\n" + h.lines[1] + "\n" + h.lines[2] + "\n";
    if (meta)
        out += std::string("# source=") + source_name(h.source) + " seed=" +
               std::to_string(seed) + "\n";
    return out;
}

struct CleanOpts {
    std::string in, out, skips;
    std::string format = "auto";
};

void run_clean(const CleanOpts& o, const std::vector<std::string>& argv) {
    LoadFormat fmt = LoadFormat::auto_detect;
    if (o.format == "csv") fmt = LoadFormat::csv;
    else if (o.format == "tsv") fmt = LoadFormat::tsv;
    else if (o.format == "lines") fmt = LoadFormat::one_per_line;

    LoadReport report;
    std::vector<RawRecord> records = load_dataset(o.in, fmt, &report);
    std::vector<Haiku> kept;
    std::vector<SkipEntry> skips = report.skips;
    for (const RawRecord& rec : records) {
        CleanResult res = clean_record(rec);
        if (res.haiku) kept.push_back(*res.haiku);
        else skips.push_back({rec.row, reject_name(res.reject)});
    }
    std::sort(skips.begin(), skips.end(),
              [](const SkipEntry& a, const SkipEntry& b) { return a.row < b.row; });

    write_corpus(o.out, kept);
    std::vector<std::string> outputs{o.out};
    if (!o.skips.empty()) {
        write_skip_report(o.skips, skips);
        outputs.push_back(o.skips);
    }
    std::cout << "kept " << kept.size() << " haikus, skipped " << skips.size()
              << " rows, repaired " << report.replaced_bytes << " bytes\n";
    write_manifest(argv, 0, {o.in}, outputs, {{"corpus", "rows 1"}, {"skips", "csv 1"}});
}

struct SplitOpts {
    std::string in, train, test;
    double ratio = 0.9;
    std::uint64_t seed = 0;
};

void run_split(const SplitOpts& o, const std::vector<std::string>& argv) {
    CorpusSplit split = split_corpus(read_corpus(o.in), o.ratio, o.seed);
    write_corpus(o.train, split.train);
    write_corpus(o.test, split.test);
    std::cout << "train " << split.train.size() << ", test " << split.test.size() << "\n";
    write_manifest(argv, o.seed, {o.in}, {o.train, o.test}, {{"corpus", "rows 1"}});
}

struct TrainNgramOpts {
    std::string in, out;
    double alpha = 0.1;
};

void run_train_ngram(const TrainNgramOpts& o, const std::vector<std::string>& argv) {
    NGramModel model = NGramModel::train(read_corpus(o.in), o.alpha);
    model.save(o.out);
    std::cout << "vocab " << model.vocab().size() << ", tokens " << model.total_tokens()
              << "\n";
    write_manifest(argv, 0, {o.in}, {o.out}, {{"ngram", "HKG-NGRAM 1"}});
}

struct TrainEmbedOpts {
    std::string in, out;
    SgnsConfig cfg;
};

void run_train_embed(const TrainEmbedOpts& o, const std::vector<std::string>& argv) {
    EmbeddingModel model = train_sgns(read_corpus(o.in), o.cfg);
    model.save(o.out);
    std::cout << "vocab " << model.vocab.size();
    if (!model.epoch_loss.empty()) std::cout << ", final epoch loss " << model.epoch_loss.back();
    std::cout << "\n";
    write_manifest(argv, o.cfg.seed, {o.in}, {o.out}, {{"embedding", "HKG-EMB 1"}});
}

struct TrainSimOpts {
    std::string in, val, embed, ngram, out;
    double lr = 0.01;
    std::int64_t iterations = 1000;
    std::uint64_t seed = 0;
};

void run_train_sim(const TrainSimOpts& o, const std::vector<std::string>& argv) {
    EmbeddingModel emb = EmbeddingModel::load(o.embed);
    NGramModel ngram = NGramModel::load(o.ngram);
    std::vector<SimExample> train_ex = build_examples(read_corpus(o.in), emb);
    std::vector<SimExample> val_ex = build_examples(read_corpus(o.val), emb);
    LinearSimilarityModel model = train_sim(train_ex, val_ex, ngram, o.lr, o.iterations, o.seed);
    model.save(o.out);
    std::cout << "examples " << train_ex.size() << "/" << val_ex.size();
    if (model.trace.size() >= 2)
        std::cout << ", val mae " << model.trace.front().mean_abs_error << " -> "
                  << model.trace.back().mean_abs_error;
    std::cout << "\n";
    write_manifest(argv, o.seed, {o.in, o.val, o.embed, o.ngram}, {o.out},
                   {{"sim", "HKG-SIM 1"}});
}

struct TrainRnnOpts {
    std::string in, val, out;
    std::string level = "char";
    std::size_t hidden = 64;
    std::size_t window = 0;
    std::size_t embedding_dim = 32;
    double dropout = 0.2;
    std::size_t epochs = 25;
    std::size_t batch = 32;
    double lr = 0.1;
    double clip = 5.0;
    std::uint64_t seed = 0;
};

void run_train_rnn(const TrainRnnOpts& o, const std::vector<std::string>& argv) {
    RnnLevel level = o.level == "word" ? RnnLevel::words : RnnLevel::chars;
    std::size_t window = o.window ? o.window : (level == RnnLevel::chars ? 10 : 6);

    std::vector<Haiku> corpus = read_corpus(o.in);
    SymbolTable vocab = build_symbol_table(corpus, level);
    LSTMNet net = init_lstm(level, vocab, o.hidden, window, o.embedding_dim, o.dropout, o.seed);
    std::vector<RnnExample> data = build_dataset(corpus, level, window, vocab);
    std::vector<RnnExample> val;
    std::vector<std::string> inputs{o.in};
    if (!o.val.empty()) {
        val = build_dataset(read_corpus(o.val), level, window, vocab);
        inputs.push_back(o.val);
    }

    TrainConfig cfg;
    cfg.window = window;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.learning_rate = o.lr;
    cfg.seed = o.seed;
    cfg.clip_norm = o.clip;
    train(net, data, val, cfg);
    net.save(o.out);

    std::cout << "symbols " << vocab.size() << ", examples " << data.size();
    if (!net.trace.empty()) std::cout << ", final train loss " << net.trace.back().train_loss;
    std::cout << "\n";
    write_manifest(argv, o.seed, inputs, {o.out}, {{"rnn", "HKG-RNN 1"}});
}

struct GenOpts {
    std::string method;
    std::string first_line;
    std::string ngram, embed, sim, rnn, lexicon;
    std::string out, append_row;
    std::uint64_t seed = 0;
    std::size_t k = 20;
    std::size_t beam_width = 20;
    std::vector<int> budgets{7, 5};
    bool relaxed = false;
    bool no_meta = false;
    double noise = 0.8;
    std::size_t max_tokens = 40;
};

void run_gen(const GenOpts& o, const std::vector<std::string>& argv) {
    SyllableLexicon lex;
    if (!o.lexicon.empty()) lex = SyllableLexicon::load(o.lexicon);
    std::array<int, 2> budgets{o.budgets[0], o.budgets[1]};

    auto require = [&](const std::string& path, const char* flag) -> const std::string& {
        if (path.empty())
            throw DataError(std::string("gen --method ") + o.method + " needs " + flag);
        return path;
    };

    Haiku haiku;
    std::vector<std::string> inputs;
    if (o.method == "greedy") {
        NGramModel ngram = NGramModel::load(require(o.ngram, "--ngram"));
        inputs = {o.ngram};
        haiku = generate_greedy(o.first_line, ngram, lex, budgets);
    } else if (o.method == "beam") {
        EmbeddingModel emb = EmbeddingModel::load(require(o.embed, "--embed"));
        LinearSimilarityModel sim = LinearSimilarityModel::load(require(o.sim, "--sim"));
        NGramModel ngram = NGramModel::load(require(o.ngram, "--ngram"));
        inputs = {o.embed, o.sim, o.ngram};
        SearchConfig cfg;
        cfg.k = o.k;
        cfg.beam_width = o.beam_width;
        cfg.line_budgets = budgets;
        cfg.strict_budget = !o.relaxed;
        haiku = generate_beam(o.first_line, emb, sim, ngram, lex, cfg).haiku;
    } else {
        LSTMNet net = LSTMNet::load(require(o.rnn, "--rnn"));
        inputs = {o.rnn};
        RnnLevel wanted = o.method == "rnn-word" ? RnnLevel::words : RnnLevel::chars;
        if (net.level != wanted)
            throw ModelError("gen: checkpoint is " + level_name(net.level) + "-level, method " +
                             o.method + " needs " + level_name(wanted));
        SamplerConfig sampler{o.noise, o.max_tokens};
        haiku = generate_rnn(net, o.first_line, sampler, o.seed);
    }

    std::string text = poem_text(haiku, o.seed, !o.no_meta);
    std::cout << text;
    if (!o.out.empty()) {
        write_file(o.out, text);
        write_manifest(argv, o.seed, inputs, {o.out}, {{"poem", "text 1"}});
    }
    if (!o.append_row.empty()) append_corpus_row(o.append_row, haiku);
}

struct OracleOpts {
    std::string in, out;
    std::size_t n = 2;
    std::uint64_t seed = 0;
    bool no_meta = false;
};

void run_oracle(const OracleOpts& o, const std::vector<std::string>& argv) {
    std::vector<Haiku> picked = sample_oracle(read_corpus(o.in), o.n, o.seed);
    for (std::size_t i = 0; i < picked.size(); ++i) {
        if (i) std::cout << "\n";
        std::cout << poem_text(picked[i], o.seed, !o.no_meta);
    }
    if (!o.out.empty()) {
        write_corpus(o.out, picked);
        write_manifest(argv, o.seed, {o.in}, {o.out}, {{"corpus", "rows 1"}});
    }
}

struct SurveyMakeOpts {
    std::vector<std::string> pools;
    std::size_t n = 2;
    std::uint64_t seed = 0;
    std::string sheet, key;
};

void run_survey_make(const SurveyMakeOpts& o, const std::vector<std::string>& argv) {
    std::map<Source, std::vector<Haiku>> pools;
    std::vector<std::string> inputs;
    for (const std::string& spec : o.pools) {
        std::size_t eq = spec.find('=');
        if (eq == std::string::npos)
            throw DataError("survey-make: --pool wants engine=path, got '" + spec + "'");
        auto engine = parse_source(spec.substr(0, eq));
        if (!engine)
            throw DataError("survey-make: unknown engine '" + spec.substr(0, eq) + "'");
        std::string path = spec.substr(eq + 1);
        pools[*engine] = read_corpus(path, *engine);
        inputs.push_back(path);
    }
    auto [sheet, key] = make_survey(pools, o.n, o.seed);
    write_sheet(o.sheet, sheet);
    write_key(o.key, key);
    std::cout << "sheet " << sheet.sheet_id << ": " << sheet.items.size() << " items\n";
    write_manifest(argv, o.seed, inputs, {o.sheet, o.key},
                   {{"sheet", "text 1"}, {"key", "csv 1"}});
}

struct SurveyScoreOpts {
    std::string scores, key, out;
};

void run_survey_score(const SurveyScoreOpts& o, const std::vector<std::string>& argv) {
    std::vector<AggregateRow> rows = aggregate(read_scores(o.scores), read_key(o.key));
    write_report(o.out, rows);
    for (const AggregateRow& r : rows)
        std::cout << source_name(r.engine) << " " << r.question << " mean "
                  << format_double(r.mean) << " n " << r.n << "\n";
    write_manifest(argv, 0, {o.scores, o.key}, {o.out}, {{"report", "csv 1"}});
}

struct CurvesOpts {
    std::string model, out;
};

void run_curves(const CurvesOpts& o, const std::vector<std::string>& argv) {
    std::string content = read_file(o.model);
    std::string csv;
    std::string kind;
    if (content.rfind("HKG-SIM 1\n", 0) == 0) {
        LinearSimilarityModel m = LinearSimilarityModel::load(o.model);
        csv = "iteration,mean_abs_error\n";
        for (const SimTracePoint& p : m.trace)
            csv += std::to_string(p.iteration) + "," + format_double(p.mean_abs_error) + "\n";
        kind = "sim";
    } else if (content.rfind("HKG-RNN 1\n", 0) == 0) {
        LSTMNet net = LSTMNet::load(o.model);
        csv = "epoch,train_loss,val_loss\n";
        for (const RnnTracePoint& p : net.trace)
            csv += std::to_string(p.epoch) + "," + format_double(p.train_loss) + "," +
                   format_double(p.val_loss) + "\n";
        kind = "rnn";
    } else {
        throw ModelError("curves: no trace in " + o.model +
                         " (expected an HKG-SIM or HKG-RNN file)");
    }
    write_file(o.out, csv);
    std::cout << kind << " trace: " << (std::count(csv.begin(), csv.end(), '\n') - 1)
              << " points\n";
    write_manifest(argv, 0, {o.model}, {o.out}, {{"curve", "csv 1"}});
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"haiku generation pipeline"};
    app.name("hkg");
    app.require_subcommand(1);

    auto clean = std::make_shared<CleanOpts>();
    {
        CLI::App* sub = app.add_subcommand("clean", "repair raw rows into a 3-line corpus");
        sub->add_option("--in", clean->in, "raw dataset file")->required();
        sub->add_option("--format", clean->format, "row format")
            ->check(CLI::IsMember({"auto", "csv", "tsv", "lines"}));
        sub->add_option("--out", clean->out, "cleaned corpus file")->required();
        sub->add_option("--skips", clean->skips, "skipped-row report CSV");
        sub->callback([clean, &args]() { run_clean(*clean, args); });
    }

    auto split = std::make_shared<SplitOpts>();
    {
        CLI::App* sub = app.add_subcommand("split", "shuffle a corpus into train/test");
        sub->add_option("--in", split->in, "cleaned corpus")->required();
        sub->add_option("--ratio", split->ratio, "train fraction");
        sub->add_option("--seed", split->seed, "shuffle seed");
        sub->add_option("--train", split->train, "train corpus out")->required();
        sub->add_option("--test", split->test, "test corpus out")->required();
        sub->callback([split, &args]() { run_split(*split, args); });
    }

    auto ngram = std::make_shared<TrainNgramOpts>();
    {
        CLI::App* sub = app.add_subcommand("train-ngram", "count-based bigram cost model");
        sub->add_option("--in", ngram->in, "train corpus")->required();
        sub->add_option("--alpha", ngram->alpha, "additive smoothing");
        sub->add_option("--out", ngram->out, "model file")->required();
        sub->callback([ngram, &args]() { run_train_ngram(*ngram, args); });
    }

    auto embed = std::make_shared<TrainEmbedOpts>();
    {
        CLI::App* sub = app.add_subcommand("train-embed", "skip-gram word vectors");
        sub->add_option("--in", embed->in, "train corpus")->required();
        sub->add_option("--dim", embed->cfg.dim, "vector dimension");
        sub->add_option("--window", embed->cfg.window, "context window");
        sub->add_option("--negatives", embed->cfg.negatives, "negative samples per pair");
        sub->add_option("--epochs", embed->cfg.epochs, "training epochs");
        sub->add_option("--lr", embed->cfg.learning_rate, "learning rate");
        sub->add_option("--seed", embed->cfg.seed, "init and sampling seed");
        sub->add_option("--out", embed->out, "model file")->required();
        sub->callback([embed, &args]() { run_train_embed(*embed, args); });
    }

    auto sim = std::make_shared<TrainSimOpts>();
    {
        CLI::App* sub = app.add_subcommand("train-sim", "next-word similarity regressor");
        sub->add_option("--in", sim->in, "train corpus")->required();
        sub->add_option("--val", sim->val, "validation corpus")->required();
        sub->add_option("--embed", sim->embed, "embedding model")->required();
        sub->add_option("--ngram", sim->ngram, "ngram model")->required();
        sub->add_option("--lr", sim->lr, "learning rate");
        sub->add_option("--iterations", sim->iterations, "SGD iterations");
        sub->add_option("--seed", sim->seed, "example sampling seed");
        sub->add_option("--out", sim->out, "model file")->required();
        sub->callback([sim, &args]() { run_train_sim(*sim, args); });
    }

    auto rnn = std::make_shared<TrainRnnOpts>();
    {
        CLI::App* sub = app.add_subcommand("train-rnn", "char or word LSTM");
        sub->add_option("--in", rnn->in, "train corpus")->required();
        sub->add_option("--val", rnn->val, "validation corpus");
        sub->add_option("--level", rnn->level, "symbol level")
            ->check(CLI::IsMember({"char", "word"}));
        sub->add_option("--hidden", rnn->hidden, "LSTM cells");
        sub->add_option("--window", rnn->window, "input window (default 10 char / 6 word)");
        sub->add_option("--embedding-dim", rnn->embedding_dim, "word embedding size");
        sub->add_option("--dropout", rnn->dropout, "dropout rate");
        sub->add_option("--epochs", rnn->epochs, "training epochs");
        sub->add_option("--batch", rnn->batch, "minibatch size");
        sub->add_option("--lr", rnn->lr, "learning rate");
        sub->add_option("--clip", rnn->clip, "global gradient norm clip");
        sub->add_option("--seed", rnn->seed, "init/shuffle/dropout seed");
        sub->add_option("--out", rnn->out, "checkpoint file")->required();
        sub->callback([rnn, &args]() { run_train_rnn(*rnn, args); });
    }

    auto gen = std::make_shared<GenOpts>();
    {
        CLI::App* sub = app.add_subcommand("gen", "complete a haiku from its first line");
        sub->add_option("--method", gen->method, "engine")
            ->check(CLI::IsMember({"greedy", "beam", "rnn-char", "rnn-word"}))
            ->required();
        sub->add_option("--first-line", gen->first_line, "line 1 of the poem")->required();
        sub->add_option("--ngram", gen->ngram, "ngram model (greedy, beam)");
        sub->add_option("--embed", gen->embed, "embedding model (beam)");
        sub->add_option("--sim", gen->sim, "similarity model (beam)");
        sub->add_option("--rnn", gen->rnn, "rnn checkpoint (rnn-char, rnn-word)");
        sub->add_option("--lexicon", gen->lexicon, "syllable exceptions file");
        sub->add_option("--seed", gen->seed, "sampling seed");
        sub->add_option("--k", gen->k, "beam branching factor");
        sub->add_option("--beam-width", gen->beam_width, "beam width");
        sub->add_option("--budgets", gen->budgets, "syllable budgets for lines 2 and 3")
            ->expected(2);
        sub->add_flag("--relaxed", gen->relaxed, "allow lines over the syllable budget");
        sub->add_flag("--no-meta", gen->no_meta, "omit the trailing source/seed line");
        sub->add_option("--noise", gen->noise, "sampler noise scale (rnn)");
        sub->add_option("--max-tokens", gen->max_tokens, "per-line sampler cap (rnn)");
        sub->add_option("--out", gen->out, "poem file");
        sub->add_option("--append-row", gen->append_row, "append the poem to a pool file");
        sub->callback([gen, &args]() { run_gen(*gen, args); });
    }

    auto oracle = std::make_shared<OracleOpts>();
    {
        CLI::App* sub = app.add_subcommand("oracle", "draw reference poems from a corpus");
        sub->add_option("--in", oracle->in, "corpus to draw from")->required();
        sub->add_option("--n", oracle->n, "poems to draw");
        sub->add_option("--seed", oracle->seed, "draw seed");
        sub->add_option("--out", oracle->out, "pool file (corpus rows)");
        sub->add_flag("--no-meta", oracle->no_meta, "omit source/seed lines on stdout");
        sub->callback([oracle, &args]() { run_oracle(*oracle, args); });
    }

    auto smake = std::make_shared<SurveyMakeOpts>();
    {
        CLI::App* sub = app.add_subcommand("survey-make", "blind sheet + key from poem pools");
        sub->add_option("--pool", smake->pools, "engine=pool-file (repeatable)")->required();
        sub->add_option("--n", smake->n, "poems per engine");
        sub->add_option("--seed", smake->seed, "shuffle seed");
        sub->add_option("--sheet", smake->sheet, "sheet file out")->required();
        sub->add_option("--key", smake->key, "key CSV out")->required();
        sub->callback([smake, &args]() { run_survey_make(*smake, args); });
    }

    auto sscore = std::make_shared<SurveyScoreOpts>();
    {
        CLI::App* sub = app.add_subcommand("survey-score", "aggregate rater scores per engine");
        sub->add_option("--scores", sscore->scores, "scores CSV")->required();
        sub->add_option("--key", sscore->key, "key CSV")->required();
        sub->add_option("--out", sscore->out, "report CSV out")->required();
        sub->callback([sscore, &args]() { run_survey_score(*sscore, args); });
    }

    auto curves = std::make_shared<CurvesOpts>();
    {
        CLI::App* sub = app.add_subcommand("curves", "extract a training trace as CSV");
        sub->add_option("--model", curves->model, "sim model or rnn checkpoint")->required();
        sub->add_option("--out", curves->out, "trace CSV out")->required();
        sub->callback([curves, &args]() { run_curves(*curves, args); });
    }

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("hkg");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace hkg
