#include "sbniva/evaluator.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "sbniva/checkpoint.hpp"

namespace sbniva {

using nlohmann::json;

MetricsReport compute_metrics(std::span<const LabeledPrediction> predictions, double threshold) {
    if (predictions.empty()) throw std::invalid_argument("compute_metrics: no predictions");
    MetricsReport report;
    for (const auto& p : predictions) {
        bool positive = p.probability >= threshold;
        ConfusionCounts& cat = report.by_category[p.category.empty() ? "all" : p.category];
        if (positive && p.label == 1) {
            ++report.overall.tp;
            ++cat.tp;
        } else if (positive) {
            ++report.overall.fp;
            ++cat.fp;
        } else if (p.label == 1) {
            ++report.overall.fn;
            ++cat.fn;
        } else {
            ++report.overall.tn;
            ++cat.tn;
        }
    }
    return report;
}

KeywordList KeywordList::from_stream(std::istream& in) {
    KeywordList list;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        list.keywords.push_back(line);
    }
    return list;
}

KeywordList KeywordList::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open keyword file: " + path);
    return from_stream(in);
}

namespace {

std::vector<int> km_over_tokens(const std::vector<std::vector<std::string>>& comments,
                                const KeywordList& keywords) {
    if (keywords.keywords.empty())
        throw std::invalid_argument("km_baseline: empty keyword list");
    std::unordered_set<std::string> set(keywords.keywords.begin(), keywords.keywords.end());
    std::vector<int> out;
    out.reserve(comments.size());
    for (const auto& tokens : comments) {
        int hit = 0;
        for (const auto& t : tokens) {
            if (set.count(t)) {
                hit = 1;
                break;
            }
        }
        out.push_back(hit);
    }
    return out;
}

}  // namespace

std::vector<int> km_baseline(const VideoStream& video, const KeywordList& keywords) {
    std::vector<std::vector<std::string>> comments;
    comments.reserve(video.records.size());
    for (const auto& r : video.records) comments.push_back(r.tokens);
    return km_over_tokens(comments, keywords);
}

std::vector<int> km_baseline(const VideoData& video, const KeywordList& keywords) {
    return km_over_tokens(video.tokens, keywords);
}

MetricsReport evaluate_model(const ModelParams& params, const Dataset& data,
                             std::span<const std::size_t> example_indices,
                             const TrainConfig& config) {
    auto scored = score_examples(params, data, example_indices, config);
    std::vector<LabeledPrediction> preds;
    preds.reserve(scored.size());
    for (const auto& s : scored)
        if (s.label >= 0) preds.push_back({s.score.probability, s.label, s.category});
    return compute_metrics(preds, config.threshold);
}

MetricsReport evaluate_km(const Dataset& data, std::span<const std::size_t> example_indices,
                          const KeywordList& keywords) {
    std::vector<LabeledPrediction> preds;
    preds.reserve(example_indices.size());
    std::vector<std::vector<int>> km_cache(data.videos.size());
    std::vector<bool> cached(data.videos.size(), false);
    for (std::size_t idx : example_indices) {
        const Example& e = data.examples[idx];
        if (!cached[e.video]) {
            km_cache[e.video] = km_baseline(data.videos[e.video], keywords);
            cached[e.video] = true;
        }
        int label = data.videos[e.video].labels[e.record];
        if (label < 0) continue;
        preds.push_back({static_cast<double>(km_cache[e.video][e.record]), label,
                         data.videos[e.video].category});
    }
    return compute_metrics(preds, 0.5);
}

std::vector<AblationRow> run_ablation(const Dataset& data, const DatasetSplit& split,
                                      const Vocabulary& vocab, const EmbeddingMatrix& embeddings,
                                      std::span<const AblationMethod> methods) {
    std::vector<AblationRow> rows;
    for (const auto& method : methods) {
        AblationRow row;
        row.method = method.name;
        try {
            if (method.kind == AblationMethod::kKeywordMatch) {
                row.report = evaluate_km(data, split.test, method.keywords);
            } else if (!method.checkpoint_path.empty()) {
                Checkpoint ck = load_checkpoint_file(method.checkpoint_path);
                row.report = evaluate_model(ck.params, data, split.test, ck.config);
            } else {
                Checkpoint ck = train(data, split, vocab, embeddings, method.config);
                row.report = evaluate_model(ck.params, data, split.test, ck.config);
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

void append_counts_csv(std::ostream& out, const std::string& method, const std::string& category,
                       const ConfusionCounts& c) {
    out << method << ',' << category << ',' << format_double(c.precision()) << ','
        << format_double(c.recall()) << ',' << format_double(c.f1()) << ',' << c.tp << ',' << c.fp
        << ',' << c.fn << ',' << c.tn << '\n';
}

json counts_to_json(const ConfusionCounts& c) {
    return json{{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
                {"tp", c.tp},                 {"fp", c.fp},           {"fn", c.fn},
                {"tn", c.tn}};
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const AblationRow> rows) {
    out << "method,category,precision,recall,f1,tp,fp,fn,tn\n";
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            out << row.method << ",error: " << row.error << ",,,,,,,\n";
            continue;
        }
        append_counts_csv(out, row.method, "overall", row.report.overall);
        for (const auto& [cat, counts] : row.report.by_category)
            append_counts_csv(out, row.method, cat, counts);
    }
}

void write_metrics_json(std::ostream& out, std::span<const AblationRow> rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json jr{{"method", row.method}};
        if (!row.error.empty()) {
            jr["error"] = row.error;
        } else {
            jr["overall"] = counts_to_json(row.report.overall);
            json cats = json::object();
            for (const auto& [cat, counts] : row.report.by_category)
                cats[cat] = counts_to_json(counts);
            jr["by_category"] = std::move(cats);
        }
        arr.push_back(std::move(jr));
    }
    out << json{{"schema", "sbniva.metrics/1"}, {"rows", std::move(arr)}}.dump(2) << "\n";
}

AttentionDump export_attention(const Checkpoint& ckpt, const Dataset& data,
                               std::size_t video_index, std::size_t record_index) {
    if (video_index >= data.videos.size())
        throw std::invalid_argument("export_attention: video index out of range");
    const VideoData& video = data.videos[video_index];
    if (record_index >= video.token_ids.size())
        throw std::invalid_argument("export_attention: record index out of range");
    if (record_index == 0)
        throw std::invalid_argument("export_attention: target has no former neighbors");

    const TrainConfig& config = ckpt.config;
    EncoderConfig ecfg = config.encoder();
    SbnConfig scfg = config.sbn();

    ad::Tape tape;
    ModelBinding binding(tape, ckpt.params, false, false);

    auto neighbor_idx = former_neighbor_indices(record_index, config.r);
    std::vector<EncodeResult> neighbor_enc;
    ScoreGraphInputs in;
    EncodeResult target_enc = encode(video.token_ids[record_index], binding, ecfg);
    in.target = target_enc.sentence;
    in.target_time = video.times[record_index];
    for (std::size_t nb : neighbor_idx) {
        neighbor_enc.push_back(encode(video.token_ids[nb], binding, ecfg));
        in.neighbors.push_back(neighbor_enc.back().sentence);
        in.neighbor_times.push_back(video.times[nb]);
    }
    for (const auto& kf : video.keyframes) {
        std::vector<ad::Value> members;
        for (std::size_t idx : kf.member_indices)
            members.push_back(encode(video.token_ids[idx], binding, ecfg).sentence);
        in.keyframes.push_back(mean_vectors(members));
    }

    ScoreGraph g = build_score_graph(tape, in, scfg);
    SpoilerScore score = score_from_graph(g);

    AttentionDump dump;
    dump.video_id = video.video_id;
    dump.target_index = record_index;
    dump.probability = score.probability;
    dump.g_nsim = score.g_nsim;
    dump.g_ksim = score.g_ksim;
    dump.target = {record_index, video.times[record_index], video.tokens[record_index],
                   target_enc.word_weights.data()};
    for (std::size_t r = 0; r < neighbor_idx.size(); ++r) {
        AttentionDump::NeighborEntry entry;
        entry.comment = {neighbor_idx[r], video.times[neighbor_idx[r]],
                         video.tokens[neighbor_idx[r]], neighbor_enc[r].word_weights.data()};
        entry.nsim = score.neighbor_sims[r];
        entry.decay_weight = score.decay_weights[r];
        entry.iva_weight = score.iva_weights.empty() ? 0.0 : score.iva_weights[r];
        entry.combined_weight = score.iva_weights.empty()
                                    ? score.decay_weights[r]
                                    : score.iva_weights[r] * score.decay_weights[r];
        dump.neighbors.push_back(std::move(entry));
    }
    for (std::size_t p = 0; p < video.keyframes.size(); ++p) {
        dump.keyframes.push_back(
            {video.keyframes[p].start, video.keyframes[p].end, score.keyframe_sims[p]});
    }
    return dump;
}

void write_attention_json(std::ostream& out, const AttentionDump& dump) {
    auto comment_json = [](const AttentionDump::Comment& c) {
        return json{{"record_index", c.record_index},
                    {"timestamp", c.timestamp},
                    {"tokens", c.tokens},
                    {"word_attention", c.word_attention}};
    };
    json neighbors = json::array();
    for (const auto& n : dump.neighbors) {
        neighbors.push_back(json{{"comment", comment_json(n.comment)},
                                 {"nsim", n.nsim},
                                 {"decay_weight", n.decay_weight},
                                 {"iva_weight", n.iva_weight},
                                 {"combined_weight", n.combined_weight}});
    }
    json keyframes = json::array();
    for (const auto& k : dump.keyframes)
        keyframes.push_back(json{{"start", k.start}, {"end", k.end}, {"ksim", k.ksim}});
    json doc{{"schema", "sbniva.attention/1"},
             {"video_id", dump.video_id},
             {"target_index", dump.target_index},
             {"probability", dump.probability},
             {"g_nsim", dump.g_nsim},
             {"g_ksim", dump.g_ksim},
             {"target", comment_json(dump.target)},
             {"neighbors", std::move(neighbors)},
             {"keyframes", std::move(keyframes)}};
    out << doc.dump(2) << "\n";
}

}  // namespace sbniva
