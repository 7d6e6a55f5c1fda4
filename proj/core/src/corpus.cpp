#include "sbniva/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace sbniva {

namespace {

using nlohmann::json;

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool parse_timestamp(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        std::string inner = s.substr(1, s.size() - 2);
        std::string out;
        out.reserve(inner.size());
        for (std::size_t i = 0; i < inner.size(); ++i) {
            if (inner[i] == '"' && i + 1 < inner.size() && inner[i + 1] == '"') ++i;
            out.push_back(inner[i]);
        }
        return out;
    }
    return s;
}

// Replace runs of ASCII punctuation/symbols with a space. Multi-byte
// characters pass through untouched; segmenting or filtering those is the
// tokenizer's concern.
std::string strip_anomaly_symbols(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_run = false;
    for (unsigned char c : text) {
        if (c < 0x80 && std::ispunct(c)) {
            if (!in_run) out.push_back(' ');
            in_run = true;
        } else {
            out.push_back(static_cast<char>(c));
            in_run = false;
        }
    }
    return out;
}

}  // namespace

SlangMap::SlangMap(std::vector<Rule> rules) : rules_(std::move(rules)) {
    compiled_.reserve(rules_.size());
    for (const auto& r : rules_) {
        try {
            compiled_.emplace_back(r.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw ValidationError("slang rule '" + r.pattern + "': " + e.what());
        }
    }
    // Idempotence guard: a replacement that matches any pattern would keep
    // rewriting on repeated application.
    for (const auto& r : rules_) {
        for (std::size_t i = 0; i < compiled_.size(); ++i) {
            if (std::regex_search(r.replacement, compiled_[i])) {
                throw ValidationError("slang replacement '" + r.replacement +
                                      "' re-matches pattern '" + rules_[i].pattern + "'");
            }
        }
    }
}

SlangMap SlangMap::from_stream(std::istream& in) {
    std::vector<Rule> rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2 || fields[0].empty()) {
            throw ValidationError("slang file line " + std::to_string(line_no) +
                                  ": expected 'pattern<TAB>replacement'");
        }
        rules.push_back({fields[0], fields[1]});
    }
    return SlangMap(std::move(rules));
}

SlangMap SlangMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open slang file: " + path);
    return from_stream(in);
}

std::string SlangMap::apply(const std::string& text) const {
    std::string out = text;
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
        out = std::regex_replace(out, compiled_[i], rules_[i].replacement);
    }
    return out;
}

std::vector<std::string> whitespace_tokenizer(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

std::vector<std::string> character_tokenizer(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if (c >= 0xF0)
            len = 4;
        else if (c >= 0xE0)
            len = 3;
        else if (c >= 0xC0)
            len = 2;
        len = std::min(len, text.size() - i);
        if (len == 1 && std::isspace(c)) {
            ++i;
            continue;
        }
        tokens.push_back(text.substr(i, len));
        i += len;
    }
    return tokens;
}

ParseResult parse_corpus(std::istream& in, const SlangMap& slang, const ParseOptions& opts) {
    ParseResult result;
    std::map<std::string, std::vector<TscRecord>> by_video;

    std::string line;
    std::size_t line_no = 0;
    auto report = [&](const std::string& msg) {
        if (opts.strict)
            throw ValidationError("corpus line " + std::to_string(line_no) + ": " + msg);
        result.issues.push_back({line_no, msg});
    };

    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tabs(line);
        if (fields.size() < 3 || fields.size() > 4) {
            report("expected 3 or 4 tab-separated fields, got " + std::to_string(fields.size()));
            continue;
        }
        if (fields[0].empty()) {
            report("empty video id");
            continue;
        }
        double ts = 0.0;
        if (!parse_timestamp(fields[1], ts)) {
            report("bad timestamp '" + fields[1] + "'");
            continue;
        }
        if (ts < 0.0) {
            report("negative timestamp");
            continue;
        }
        std::optional<int> label;
        if (fields.size() == 4 && !fields[3].empty()) {
            if (fields[3] == "0")
                label = 0;
            else if (fields[3] == "1")
                label = 1;
            else {
                report("label must be 0 or 1, got '" + fields[3] + "'");
                continue;
            }
        }

        TscRecord rec;
        rec.video_id = fields[0];
        rec.timestamp = ts;
        rec.raw_text = unquote(fields[2]);
        rec.label = label;
        std::string normalized = strip_anomaly_symbols(slang.apply(rec.raw_text));
        rec.tokens = opts.tokenizer(normalized);
        if (rec.tokens.empty()) {
            ++result.records_dropped_empty;
            continue;
        }
        by_video[rec.video_id].push_back(std::move(rec));
    }

    result.videos.reserve(by_video.size());
    for (auto& [vid, recs] : by_video) {
        VideoStream vs;
        vs.video_id = vid;
        std::stable_sort(recs.begin(), recs.end(),
                         [](const TscRecord& a, const TscRecord& b) { return a.timestamp < b.timestamp; });
        vs.duration = recs.back().timestamp;
        vs.records = std::move(recs);
        result.videos.push_back(std::move(vs));
    }
    return result;
}

std::vector<VideoStream> filter_videos(const std::vector<VideoStream>& videos,
                                       std::size_t min_count, double min_density) {
    std::vector<VideoStream> kept;
    for (const auto& v : videos) {
        if (v.records.size() >= min_count && v.density() >= min_density) kept.push_back(v);
    }
    return kept;
}

DatasetSplit split_dataset(std::span<const std::string> example_video_ids, std::uint64_t seed) {
    if (example_video_ids.size() < 10)
        throw ValidationError("split_dataset requires at least 10 examples, got " +
                              std::to_string(example_video_ids.size()));

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < example_video_ids.size(); ++i)
        groups[example_video_ids[i]].push_back(i);

    DatasetSplit split;
    for (auto& [vid, idx] : groups) {
        Rng rng(fnv1a64(vid) ^ (seed * 0x9e3779b97f4a7c15ULL));
        for (std::size_t i = idx.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(i) - 1));
            std::swap(idx[i - 1], idx[j]);
        }
        auto n = idx.size();
        auto n_train = static_cast<std::size_t>(std::lround(0.7 * static_cast<double>(n)));
        auto n_test = static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(n)));
        if (n_train + n_test > n) n_test = n - n_train;
        split.train.insert(split.train.end(), idx.begin(), idx.begin() + n_train);
        split.test.insert(split.test.end(), idx.begin() + n_train, idx.begin() + n_train + n_test);
        split.validation.insert(split.validation.end(), idx.begin() + n_train + n_test, idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

namespace {

json videos_to_json(const std::vector<VideoStream>& videos) {
    json arr = json::array();
    for (const auto& v : videos) {
        json recs = json::array();
        for (const auto& r : v.records) {
            json jr{{"t", r.timestamp}, {"raw", r.raw_text}, {"tokens", r.tokens}};
            if (r.label) jr["label"] = *r.label;
            recs.push_back(std::move(jr));
        }
        arr.push_back(json{{"video_id", v.video_id}, {"duration", v.duration}, {"records", std::move(recs)}});
    }
    return arr;
}

}  // namespace

std::string preprocessed_content_hash(const std::vector<VideoStream>& videos) {
    return to_hex(fnv1a64(videos_to_json(videos).dump()));
}

void save_preprocessed(std::ostream& out, const std::vector<VideoStream>& videos) {
    json doc;
    doc["schema"] = "sbniva.corpus/1";
    json arr = videos_to_json(videos);
    doc["content_hash"] = to_hex(fnv1a64(arr.dump()));
    doc["videos"] = std::move(arr);
    out << doc.dump() << "\n";
}

PreprocessedCorpus load_preprocessed(std::istream& in) {
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("preprocessed corpus: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("schema", "") != "sbniva.corpus/1")
        throw ValidationError("preprocessed corpus: missing or unknown schema");

    PreprocessedCorpus out;
    const json& arr = doc.at("videos");
    for (const auto& jv : arr) {
        VideoStream v;
        v.video_id = jv.at("video_id").get<std::string>();
        v.duration = jv.at("duration").get<double>();
        for (const auto& jr : jv.at("records")) {
            TscRecord r;
            r.video_id = v.video_id;
            r.timestamp = jr.at("t").get<double>();
            r.raw_text = jr.value("raw", "");
            r.tokens = jr.at("tokens").get<std::vector<std::string>>();
            if (jr.contains("label")) r.label = jr.at("label").get<int>();
            v.records.push_back(std::move(r));
        }
        out.videos.push_back(std::move(v));
    }
    out.content_hash = doc.value("content_hash", "");
    std::string actual = preprocessed_content_hash(out.videos);
    if (actual != out.content_hash)
        throw ValidationError("preprocessed corpus: content hash mismatch (file corrupt or edited)");
    return out;
}

PreprocessedCorpus load_preprocessed_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open preprocessed corpus: " + path);
    return load_preprocessed(in);
}

void write_corpus_tsv(std::ostream& out, const std::vector<VideoStream>& videos) {
    for (const auto& v : videos) {
        for (const auto& r : v.records) {
            std::string text = r.raw_text;
            for (char& c : text)
                if (c == '\t' || c == '\n') c = ' ';
            std::string quoted = "\"";
            for (char c : text) {
                quoted.push_back(c);
                if (c == '"') quoted.push_back('"');
            }
            quoted.push_back('"');
            out << v.video_id << '\t' << format_double(r.timestamp) << '\t' << quoted;
            if (r.label) out << '\t' << *r.label;
            out << '\n';
        }
    }
}

}  // namespace sbniva
