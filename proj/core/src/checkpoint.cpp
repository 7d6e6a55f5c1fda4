#include "sbniva/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace sbniva {

using nlohmann::json;

namespace {

json config_to_json(const TrainConfig& c) {
    return json{{"lr", c.lr},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"beta", c.beta},
                {"r", c.r},
                {"p", c.p},
                {"frame_len", c.frame_len},
                {"use_iva", c.use_iva},
                {"use_decay", c.use_decay},
                {"seed", c.seed},
                {"adam_beta1", c.adam_beta1},
                {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps},
                {"freeze_embeddings", c.freeze_embeddings},
                {"hidden_dim", c.hidden_dim},
                {"patience", c.patience},
                {"threshold", c.threshold},
                {"decay_exponent_sign", c.decay_exponent_sign},
                {"renormalize_iva", c.renormalize_iva},
                {"max_tokens", c.max_tokens}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.lr = j.at("lr").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.beta = j.at("beta").get<double>();
    c.r = j.at("r").get<std::size_t>();
    c.p = j.at("p").get<std::size_t>();
    c.frame_len = j.at("frame_len").get<double>();
    c.use_iva = j.at("use_iva").get<bool>();
    c.use_decay = j.at("use_decay").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.freeze_embeddings = j.at("freeze_embeddings").get<bool>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.threshold = j.at("threshold").get<double>();
    c.decay_exponent_sign = j.at("decay_exponent_sign").get<int>();
    c.renormalize_iva = j.at("renormalize_iva").get<bool>();
    c.max_tokens = j.at("max_tokens").get<std::size_t>();
    return c;
}

json mat_to_json(const Mat& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Mat mat_from_json(const json& j, const std::string& name) {
    Mat m;
    m.rows = j.at("rows").get<std::size_t>();
    m.cols = j.at("cols").get<std::size_t>();
    m.data = j.at("data").get<Vec>();
    if (m.data.size() != m.rows * m.cols)
        throw ValidationError("checkpoint tensor '" + name + "': shape/data mismatch");
    return m;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    json tensors = json::object();
    for_each_model_tensor(const_cast<ModelParams&>(ckpt.params), true,
                          [&](std::string_view name, Mat& m) { tensors[std::string(name)] = mat_to_json(m); });
    json history = json::array();
    for (const auto& h : ckpt.history) {
        history.push_back(json{{"train_loss", h.train_loss},
                               {"val_precision", h.val_precision},
                               {"val_recall", h.val_recall},
                               {"val_f1", h.val_f1}});
    }
    json doc{{"schema", "sbniva.checkpoint/1"},
             {"config", config_to_json(ckpt.config)},
             {"vocab", ckpt.vocab.tokens()},
             {"tensors", std::move(tensors)},
             {"best_epoch", ckpt.best_epoch},
             {"history", std::move(history)},
             {"corpus_hash", ckpt.corpus_hash}};
    out << doc.dump() << "\n";
}

Checkpoint load_checkpoint(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "sbniva.checkpoint/1")
        throw ValidationError("checkpoint: missing or unknown schema");

    Checkpoint ckpt;
    ckpt.config = config_from_json(doc.at("config"));
    ckpt.vocab = Vocabulary(doc.at("vocab").get<std::vector<std::string>>());
    const json& tensors = doc.at("tensors");
    for_each_model_tensor(ckpt.params, true, [&](std::string_view name, Mat& m) {
        std::string key(name);
        if (!tensors.contains(key)) throw ValidationError("checkpoint: missing tensor " + key);
        m = mat_from_json(tensors.at(key), key);
    });
    if (ckpt.params.embedding.weights.rows != ckpt.vocab.size())
        throw ValidationError("checkpoint: embedding rows do not match vocabulary size");
    ckpt.best_epoch = doc.value("best_epoch", std::size_t{0});
    if (doc.contains("history")) {
        for (const auto& h : doc.at("history")) {
            EpochStats s;
            s.train_loss = h.at("train_loss").get<double>();
            s.val_precision = h.at("val_precision").get<double>();
            s.val_recall = h.at("val_recall").get<double>();
            s.val_f1 = h.at("val_f1").get<double>();
            ckpt.history.push_back(s);
        }
    }
    ckpt.corpus_hash = doc.value("corpus_hash", "");
    return ckpt;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write checkpoint: " + path);
    save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);
    return load_checkpoint(in);
}

}  // namespace sbniva
