#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbniva/checkpoint.hpp"
#include "sbniva/corpus.hpp"
#include "sbniva/evaluator.hpp"
#include "sbniva/keyframes.hpp"
#include "sbniva/synthetic.hpp"
#include "sbniva/trainer.hpp"

namespace sbniva::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_output(const std::string& path) {
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write output file: " + path);
    return out;
}

PreprocessedCorpus load_corpus_artifact(const std::string& path) {
    return load_preprocessed_file(path);
}

std::map<std::string, std::string> load_categories(const std::string& path) {
    std::map<std::string, std::string> cats;
    if (path.empty()) return cats;
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open categories file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ValidationError("categories file line " + std::to_string(line_no) +
                                  ": expected 'video_id<TAB>category'");
        cats[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return cats;
}

// "lo:hi:step" (inclusive endpoints, within 1e-9) or a comma list.
std::vector<double> parse_betas(const std::string& spec) {
    std::vector<double> betas;
    auto parse_one = [](const std::string& s) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ValidationError("bad beta value: '" + s + "'");
        }
    };
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() != 3) throw ValidationError("beta range must be lo:hi:step");
        double lo = parse_one(parts[0]), hi = parse_one(parts[1]), step = parse_one(parts[2]);
        if (step <= 0.0 || hi < lo) throw ValidationError("bad beta range");
        for (int k = 0;; ++k) {
            double v = lo + k * step;
            if (v > hi + 1e-9) break;
            betas.push_back(v);
        }
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) betas.push_back(parse_one(item));
    }
    if (betas.empty()) throw ValidationError("no beta values given");
    return betas;
}

std::string method_name(const TrainConfig& c) {
    std::string name = "sbn";
    if (c.use_iva) name += "-iva";
    if (!c.use_decay) name += "-wt";
    return name;
}

void add_train_flags(CLI::App* cmd, TrainConfig& c) {
    cmd->add_option("--lr", c.lr, "Adam learning rate");
    cmd->add_option("--epochs", c.epochs, "Training epochs");
    cmd->add_option("--batch-size", c.batch_size, "Mini-batch size");
    cmd->add_option("--beta", c.beta, "Time decay rate");
    cmd->add_option("--r", c.r, "Former neighbors per target");
    cmd->add_option("--p", c.p, "Keyframes per video");
    cmd->add_option("--frame-len", c.frame_len, "Keyframe window length (seconds)");
    cmd->add_flag("--no-iva", [&c](std::int64_t) { c.use_iva = false; },
                  "Disable variance attention (plain similarity network)");
    cmd->add_flag("--no-decay", [&c](std::int64_t) { c.use_decay = false; },
                  "Uniform neighbor weights (the -wt ablation)");
    cmd->add_option("--seed", c.seed, "Seed for init, shuffling and the split");
    cmd->add_flag("--fine-tune-embeddings", [&c](std::int64_t) { c.freeze_embeddings = false; },
                  "Update embeddings during training (frozen by default)");
    cmd->add_option("--hidden-dim", c.hidden_dim, "LSTM hidden size per direction");
    cmd->add_option("--patience", c.patience, "Early-stop patience on validation F1");
    cmd->add_option("--threshold", c.threshold, "Spoiler probability threshold");
    cmd->add_flag("--legacy-decay-sign", [&c](std::int64_t) { c.decay_exponent_sign = 1; },
                  "Compatibility mode: neighbor weight grows with the time gap");
    cmd->add_flag("--renormalize-iva", [&c](std::int64_t) { c.renormalize_iva = true; },
                  "Renormalize the variance-attention weighted sum");
    cmd->add_option("--max-tokens", c.max_tokens, "Token truncation limit per comment");
}

struct EmbeddingInputs {
    Vocabulary vocab;
    EmbeddingMatrix matrix;
};

EmbeddingInputs load_embedding_inputs(const std::string& path, const std::string& corpus_hash) {
    auto [vocab, matrix] = load_embeddings_file(path);
    std::string meta_path = path + ".meta.json";
    std::ifstream meta(meta_path);
    if (meta) {
        json j;
        try {
            meta >> j;
        } catch (const json::exception& e) {
            throw ValidationError(meta_path + ": invalid JSON: " + e.what());
        }
        std::string trained_on = j.value("corpus_hash", "");
        if (!corpus_hash.empty() && !trained_on.empty() && trained_on != corpus_hash)
            throw ValidationError(
                "embedding file was trained on a different preprocessed corpus (hash " +
                trained_on + " vs " + corpus_hash + "); stage chain rejected");
    } else {
        std::cerr << "warning: no sidecar " << meta_path << "; skipping corpus hash check\n";
    }
    return {std::move(vocab), std::move(matrix)};
}

Dataset build_dataset_checked(const PreprocessedCorpus& corpus, const Vocabulary& vocab,
                              const TrainConfig& config,
                              const std::map<std::string, std::string>& categories) {
    Dataset data = build_dataset(corpus.videos, vocab,  config,
                                 categories.empty() ? nullptr : &categories);
    for (const auto& vid : data.skipped_videos)
        std::cerr << "warning: video " << vid << " has no keyframes; skipped\n";
    if (data.videos.empty()) throw ValidationError("no usable videos in the corpus");
    return data;
}

std::vector<std::size_t> pick_split(const Dataset& data, const DatasetSplit& split,
                                    const std::string& which) {
    if (which == "train") return split.train;
    if (which == "test") return split.test;
    if (which == "val" || which == "validation") return split.validation;
    if (which == "all") {
        std::vector<std::size_t> all(data.examples.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    throw ValidationError("unknown split '" + which + "' (train|test|val|all)");
}

// -- subcommands -------------------------------------------------------------

struct PreprocessArgs {
    std::string input, slang, out, tokenizer = "whitespace";
    std::size_t min_count = 300;
    double min_density = 0.1;
    bool strict = false;
};

void cmd_preprocess(const PreprocessArgs& a) {
    std::ifstream in(a.input);
    if (!in) throw ValidationError("cannot open corpus: " + a.input);
    SlangMap slang;
    if (!a.slang.empty()) slang = SlangMap::from_file(a.slang);

    ParseOptions opts;
    opts.strict = a.strict;
    if (a.tokenizer == "whitespace")
        opts.tokenizer = whitespace_tokenizer;
    else if (a.tokenizer == "character")
        opts.tokenizer = character_tokenizer;
    else
        throw ValidationError("unknown tokenizer '" + a.tokenizer + "'");

    ParseResult parsed = parse_corpus(in, slang, opts);
    for (const auto& issue : parsed.issues)
        std::cerr << "line " << issue.line_number << ": " << issue.message << " (skipped)\n";

    auto kept = filter_videos(parsed.videos, a.min_count, a.min_density);
    auto out = open_output(a.out);
    save_preprocessed(out, kept);

    std::size_t records = 0;
    for (const auto& v : kept) records += v.records.size();
    std::cout << "parsed " << parsed.videos.size() << " videos, kept " << kept.size() << " ("
              << records << " comments, " << parsed.records_dropped_empty
              << " dropped empty, " << parsed.issues.size() << " bad lines)\n";
}

struct KeyframesArgs {
    std::string input, out;
    std::size_t p = 3;
    double frame_len = 10.0;
};

void cmd_keyframes(const KeyframesArgs& a) {
    auto corpus = load_corpus_artifact(a.input);
    json videos = json::object();
    for (const auto& v : corpus.videos) {
        json windows = json::array();
        for (const auto& kf : extract_keyframes(v, a.p, a.frame_len)) {
            windows.push_back(json{{"start", kf.start},
                                   {"end", kf.end},
                                   {"count", kf.member_indices.size()}});
        }
        videos[v.video_id] = std::move(windows);
    }
    auto out = open_output(a.out);
    out << json{{"schema", "sbniva.keyframes/1"},
                {"corpus_hash", corpus.content_hash},
                {"p", a.p},
                {"frame_len", a.frame_len},
                {"videos", std::move(videos)}}
               .dump(2)
        << "\n";
    std::cout << "keyframes for " << corpus.videos.size() << " videos -> " << a.out << "\n";
}

struct TrainEmbeddingsArgs {
    std::string input, out;
    SkipgramConfig config;
    std::size_t min_freq = 1;
};

void cmd_train_embeddings(const TrainEmbeddingsArgs& a) {
    auto corpus = load_corpus_artifact(a.input);
    Vocabulary vocab = build_vocab(corpus.videos, a.min_freq);
    SkipgramResult result = train_skipgram(corpus.videos, vocab, a.config);
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        std::cout << "epoch " << e << " loss " << result.epoch_loss[e] << "\n";

    auto out = open_output(a.out);
    save_embeddings(out, vocab, result.embeddings);
    auto meta = open_output(a.out + ".meta.json");
    meta << json{{"schema", "sbniva.embeddings-meta/1"},
                 {"corpus_hash", corpus.content_hash},
                 {"dim", a.config.dim},
                 {"window", a.config.window},
                 {"negatives", a.config.negatives},
                 {"epochs", a.config.epochs},
                 {"lr", a.config.lr},
                 {"min_freq", a.min_freq},
                 {"seed", a.config.seed}}
                .dump(2)
         << "\n";
    std::cout << "vocabulary " << vocab.size() << " tokens, dim " << a.config.dim << " -> "
              << a.out << "\n";
}

struct TrainArgs {
    std::string data, embeddings, out, categories;
    TrainConfig config;
};

void cmd_train(const TrainArgs& a) {
    auto corpus = load_corpus_artifact(a.data);
    auto emb = load_embedding_inputs(a.embeddings, corpus.content_hash);
    auto cats = load_categories(a.categories);
    Dataset dataset = build_dataset_checked(corpus, emb.vocab, a.config, cats);
    auto ids = dataset.example_video_ids();
    DatasetSplit split = split_dataset(ids, a.config.seed);

    std::cout << "training " << method_name(a.config) << " on " << split.train.size()
              << " examples (" << split.validation.size() << " validation, " << split.test.size()
              << " test held out)\n";
    Checkpoint ckpt = train(dataset, split, emb.vocab, emb.matrix, a.config, /*verbose=*/true);
    ckpt.corpus_hash = corpus.content_hash;
    save_checkpoint_file(a.out, ckpt);
    if (!ckpt.history.empty()) {
        const auto& h = ckpt.history[ckpt.best_epoch];
        std::cout << "best epoch " << ckpt.best_epoch << " val_f1 " << h.val_f1 << " -> " << a.out
                  << "\n";
    } else {
        std::cout << "saved initialization checkpoint -> " << a.out << "\n";
    }
}

struct SweepArgs {
    std::string data, embeddings, out, betas = "0:0.5:0.05", categories;
    TrainConfig config;
};

void cmd_sweep_beta(const SweepArgs& a) {
    auto corpus = load_corpus_artifact(a.data);
    auto emb = load_embedding_inputs(a.embeddings, corpus.content_hash);
    auto cats = load_categories(a.categories);
    Dataset dataset = build_dataset_checked(corpus, emb.vocab, a.config, cats);
    auto ids = dataset.example_video_ids();
    DatasetSplit split = split_dataset(ids, a.config.seed);

    BetaSweepResult result =
        sweep_beta(dataset, split, emb.vocab, emb.matrix, parse_betas(a.betas), a.config, true);
    auto out = open_output(a.out);
    out << "beta,f1\n";
    for (const auto& pt : result.curve)
        out << format_double(pt.beta) << ',' << format_double(pt.f1) << "\n";
    std::cout << "best beta " << result.best_beta << " -> " << a.out << "\n";
}

struct EvaluateArgs {
    std::string ckpt, data, report, categories, split = "test", format = "csv";
};

void cmd_evaluate(const EvaluateArgs& a) {
    Checkpoint ckpt = load_checkpoint_file(a.ckpt);
    auto corpus = load_corpus_artifact(a.data);
    if (!ckpt.corpus_hash.empty() && ckpt.corpus_hash != corpus.content_hash) {
        if (a.split != "all")
            throw ValidationError(
                "checkpoint was trained on a different corpus; its train/test split does not "
                "apply here (use --split all to score everything)");
        std::cerr << "warning: corpus differs from the one this checkpoint was trained on\n";
    }
    auto cats = load_categories(a.categories);
    Dataset dataset = build_dataset_checked(corpus, ckpt.vocab, ckpt.config, cats);
    auto ids = dataset.example_video_ids();
    DatasetSplit split = split_dataset(ids, ckpt.config.seed);
    auto indices = pick_split(dataset, split, a.split);
    if (indices.empty()) throw ValidationError("selected split is empty");

    AblationRow row;
    row.method = method_name(ckpt.config);
    row.report = evaluate_model(ckpt.params, dataset, indices, ckpt.config);
    std::vector<AblationRow> rows{row};

    auto out = open_output(a.report);
    if (a.format == "csv")
        write_metrics_csv(out, rows);
    else if (a.format == "json")
        write_metrics_json(out, rows);
    else
        throw ValidationError("unknown report format '" + a.format + "'");
    std::cout << row.method << " precision " << row.report.overall.precision() << " recall "
              << row.report.overall.recall() << " f1 " << row.report.overall.f1() << " -> "
              << a.report << "\n";
}

struct KmArgs {
    std::string keywords, data, report, categories, split = "all", format = "csv";
    std::uint64_t seed = 42;
    std::size_t p = 3;
    double frame_len = 10.0;
};

void cmd_km(const KmArgs& a) {
    KeywordList keywords = KeywordList::from_file(a.keywords);
    if (keywords.keywords.empty()) throw ValidationError("keyword list is empty");
    auto corpus = load_corpus_artifact(a.data);
    auto cats = load_categories(a.categories);
    TrainConfig config;
    config.p = a.p;
    config.frame_len = a.frame_len;
    config.seed = a.seed;
    Dataset dataset = build_dataset_checked(corpus, Vocabulary(), config, cats);
    auto ids = dataset.example_video_ids();
    DatasetSplit split = split_dataset(ids, a.seed);
    auto indices = pick_split(dataset, split, a.split);
    if (indices.empty()) throw ValidationError("selected split is empty");

    AblationRow row;
    row.method = "km";
    row.report = evaluate_km(dataset, indices, keywords);
    std::vector<AblationRow> rows{row};
    auto out = open_output(a.report);
    if (a.format == "csv")
        write_metrics_csv(out, rows);
    else if (a.format == "json")
        write_metrics_json(out, rows);
    else
        throw ValidationError("unknown report format '" + a.format + "'");
    std::cout << "km precision " << row.report.overall.precision() << " recall "
              << row.report.overall.recall() << " f1 " << row.report.overall.f1() << " -> "
              << a.report << "\n";
}

struct SynthArgs {
    std::string out;
    SynthConfig config;
};

void cmd_synth(const SynthArgs& a) {
    SynthCorpus corpus = generate_synthetic(a.config);
    fs::create_directories(a.out);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(a.out) / name, std::ios::binary);
        if (!out) throw ValidationError("cannot write " + name + " in " + a.out);
        out << content;
    };
    write("corpus.tsv", corpus.corpus_tsv);
    write("slang.tsv", corpus.slang_tsv);
    write("keywords.txt", corpus.keywords_txt);
    write("categories.tsv", corpus.categories_tsv);
    std::cout << "synthetic corpus (" << a.config.videos << " videos, seed " << a.config.seed
              << ") -> " << a.out << "\n";
}

struct PredictArgs {
    std::string ckpt, data, out;
};

void cmd_predict(const PredictArgs& a) {
    Checkpoint ckpt = load_checkpoint_file(a.ckpt);
    auto corpus = load_corpus_artifact(a.data);
    Dataset dataset = build_dataset_checked(corpus, ckpt.vocab, ckpt.config, {});
    auto scored = score_all_records(ckpt.params, dataset, ckpt.config);

    auto out = open_output(a.out);
    for (const auto& s : scored) {
        const VideoData& video = dataset.videos[s.video];
        json line{{"video_id", video.video_id},
                  {"timestamp", video.times[s.record]},
                  {"probability", s.score.probability},
                  {"g_nsim", s.score.g_nsim},
                  {"g_ksim", s.score.g_ksim},
                  {"iva_weights", s.score.iva_weights},
                  {"decay_weights", s.score.decay_weights},
                  {"word_attention", s.word_attention}};
        if (s.label >= 0) line["label"] = s.label;
        out << line.dump() << "\n";
    }
    std::cout << "scored " << scored.size() << " comments -> " << a.out << "\n";
}

struct DumpAttentionArgs {
    std::string ckpt, data, video, out;
    std::size_t index = 0;
};

void cmd_dump_attention(const DumpAttentionArgs& a) {
    Checkpoint ckpt = load_checkpoint_file(a.ckpt);
    auto corpus = load_corpus_artifact(a.data);
    Dataset dataset = build_dataset_checked(corpus, ckpt.vocab, ckpt.config, {});
    std::size_t video_idx = dataset.videos.size();
    for (std::size_t i = 0; i < dataset.videos.size(); ++i)
        if (dataset.videos[i].video_id == a.video) video_idx = i;
    if (video_idx == dataset.videos.size())
        throw ValidationError("video '" + a.video + "' not found in the corpus");

    AttentionDump dump = export_attention(ckpt, dataset, video_idx, a.index);
    auto out = open_output(a.out);
    write_attention_json(out, dump);
    std::cout << "attention dump for " << a.video << "[" << a.index << "] -> " << a.out << "\n";
}

}  // namespace

int run(std::vector<std::string> args) {
    CLI::App app{"Spoiler detection for time-sync comments: similarity network with variance attention"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Pipeline config file (INI-style, one [section] per subcommand)");
    app.allow_config_extras(CLI::config_extras_mode::error);  // unknown keys rejected

    PreprocessArgs pre;
    auto* cmd_pre = app.add_subcommand("preprocess", "Parse, normalize, filter and pack a TSV corpus");
    cmd_pre->add_option("--input", pre.input, "Raw corpus TSV")->required();
    cmd_pre->add_option("--slang", pre.slang, "Slang rewrite rules (TSV)");
    cmd_pre->add_option("--min-count", pre.min_count, "Minimum comments per video");
    cmd_pre->add_option("--min-density", pre.min_density, "Minimum comments per second");
    cmd_pre->add_option("--tokenizer", pre.tokenizer, "whitespace|character");
    cmd_pre->add_flag("--strict", pre.strict, "Abort on the first malformed line");
    cmd_pre->add_option("--out", pre.out, "Preprocessed corpus (JSON)")->required();
    cmd_pre->callback([&] { cmd_preprocess(pre); });

    KeyframesArgs kf;
    auto* cmd_kf = app.add_subcommand("keyframes", "Export per-video keyframe windows and counts");
    cmd_kf->add_option("--input", kf.input, "Preprocessed corpus")->required();
    cmd_kf->add_option("--p", kf.p, "Keyframes per video");
    cmd_kf->add_option("--frame-len", kf.frame_len, "Window length (seconds)");
    cmd_kf->add_option("--out", kf.out, "Keyframe JSON")->required();
    cmd_kf->callback([&] { cmd_keyframes(kf); });

    TrainEmbeddingsArgs emb;
    auto* cmd_emb = app.add_subcommand("train-embeddings", "Skip-gram pretraining of word vectors");
    cmd_emb->add_option("--input", emb.input, "Preprocessed corpus")->required();
    cmd_emb->add_option("--dim", emb.config.dim, "Vector dimension");
    cmd_emb->add_option("--window", emb.config.window, "Context window");
    cmd_emb->add_option("--neg", emb.config.negatives, "Negative samples per pair");
    cmd_emb->add_option("--epochs", emb.config.epochs, "Passes over the corpus");
    cmd_emb->add_option("--lr", emb.config.lr, "SGD learning rate");
    cmd_emb->add_option("--min-freq", emb.min_freq, "Minimum token frequency");
    cmd_emb->add_option("--seed", emb.config.seed, "RNG seed");
    cmd_emb->add_option("--out", emb.out, "Embedding text file")->required();
    cmd_emb->callback([&] { cmd_train_embeddings(emb); });

    TrainArgs tr;
    auto* cmd_tr = app.add_subcommand("train", "Train the spoiler detector");
    cmd_tr->add_option("--data", tr.data, "Preprocessed corpus")->required();
    cmd_tr->add_option("--embeddings", tr.embeddings, "Pretrained embedding file")->required();
    cmd_tr->add_option("--categories", tr.categories, "Optional video_id<TAB>category file");
    add_train_flags(cmd_tr, tr.config);
    cmd_tr->add_option("--out", tr.out, "Checkpoint path")->required();
    cmd_tr->callback([&] { cmd_train(tr); });

    SweepArgs sw;
    auto* cmd_sw = app.add_subcommand("sweep-beta", "Train once per decay rate and report the F1 curve");
    cmd_sw->add_option("--data", sw.data, "Preprocessed corpus")->required();
    cmd_sw->add_option("--embeddings", sw.embeddings, "Pretrained embedding file")->required();
    cmd_sw->add_option("--betas", sw.betas, "lo:hi:step range or comma list");
    cmd_sw->add_option("--categories", sw.categories, "Optional categories file");
    add_train_flags(cmd_sw, sw.config);
    cmd_sw->add_option("--out", sw.out, "CSV curve (beta,f1)")->required();
    cmd_sw->callback([&] { cmd_sweep_beta(sw); });

    EvaluateArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "Score a checkpoint and report precision/recall/F1");
    cmd_ev->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
    cmd_ev->add_option("--data", ev.data, "Preprocessed corpus")->required();
    cmd_ev->add_option("--split", ev.split, "train|test|val|all (default test)");
    cmd_ev->add_option("--categories", ev.categories, "Optional categories file");
    cmd_ev->add_option("--format", ev.format, "csv|json");
    cmd_ev->add_option("--report", ev.report, "Report path")->required();
    cmd_ev->callback([&] { cmd_evaluate(ev); });

    KmArgs km;
    auto* cmd_km_ = app.add_subcommand("km", "Keyword-matching baseline");
    cmd_km_->add_option("--keywords", km.keywords, "Keyword file (one per line)")->required();
    cmd_km_->add_option("--data", km.data, "Preprocessed corpus")->required();
    cmd_km_->add_option("--split", km.split, "train|test|val|all (default all)");
    cmd_km_->add_option("--seed", km.seed, "Split seed (match the training seed)");
    cmd_km_->add_option("--p", km.p, "Keyframes per video (dataset consistency)");
    cmd_km_->add_option("--frame-len", km.frame_len, "Keyframe window length");
    cmd_km_->add_option("--categories", km.categories, "Optional categories file");
    cmd_km_->add_option("--format", km.format, "csv|json");
    cmd_km_->add_option("--report", km.report, "Report path")->required();
    cmd_km_->callback([&] { cmd_km(km); });

    SynthArgs sy;
    auto* cmd_sy = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    cmd_sy->add_option("--videos", sy.config.videos, "Number of videos");
    cmd_sy->add_option("--comments", sy.config.comments_per_video, "Comments per video");
    cmd_sy->add_option("--duration", sy.config.duration, "Video length (seconds)");
    cmd_sy->add_option("--spoiler-rate", sy.config.spoiler_rate, "Planted spoiler fraction");
    cmd_sy->add_option("--noise", sy.config.noise_rate, "Noise comment fraction");
    cmd_sy->add_option("--segment-len", sy.config.segment_len, "Topic change period (seconds)");
    cmd_sy->add_option("--seed", sy.config.seed, "RNG seed");
    cmd_sy->add_option("--out", sy.out, "Output directory")->required();
    cmd_sy->callback([&] { cmd_synth(sy); });

    PredictArgs pr;
    auto* cmd_pr = app.add_subcommand("predict", "Score every comment; JSON lines output");
    cmd_pr->add_option("--ckpt", pr.ckpt, "Checkpoint")->required();
    cmd_pr->add_option("--data", pr.data, "Preprocessed corpus")->required();
    cmd_pr->add_option("--out", pr.out, "Predictions (JSONL)")->required();
    cmd_pr->callback([&] { cmd_predict(pr); });

    DumpAttentionArgs da;
    auto* cmd_da = app.add_subcommand("dump-attention", "Export word/sentence attention for one comment");
    cmd_da->add_option("--ckpt", da.ckpt, "Checkpoint")->required();
    cmd_da->add_option("--data", da.data, "Preprocessed corpus")->required();
    cmd_da->add_option("--video", da.video, "Video id")->required();
    cmd_da->add_option("--index", da.index, "Record index within the video")->required();
    cmd_da->add_option("--out", da.out, "Attention JSON")->required();
    cmd_da->callback([&] { cmd_dump_attention(da); });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace sbniva::cli
