#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "sbniva/common.hpp"

namespace sbniva {

// One time-sync comment. `tokens` is the post-normalization token list;
// records whose token list is empty after preprocessing are dropped upstream.
struct TscRecord {
    std::string video_id;
    double timestamp = 0.0;  // playback seconds, >= 0
    std::string raw_text;
    std::vector<std::string> tokens;
    std::optional<int> label;  // 1 = spoiler, 0 = not; absent for unlabeled data
};

// All comments of one video, sorted ascending by timestamp.
struct VideoStream {
    std::string video_id;
    double duration = 0.0;  // max observed timestamp unless metadata supplies it
    std::vector<TscRecord> records;

    // Comments per second; 0 for degenerate streams (no records or duration 0).
    double density() const {
        if (records.empty() || duration <= 0.0) return 0.0;
        return static_cast<double>(records.size()) / duration;
    }
};

// Ordered slang rewrite rules applied to raw text before tokenization.
// Construction validates that no replacement re-matches any pattern, which
// keeps application idempotent on its own output.
class SlangMap {
  public:
    struct Rule {
        std::string pattern;
        std::string replacement;
    };

    SlangMap() = default;
    explicit SlangMap(std::vector<Rule> rules);

    static SlangMap from_stream(std::istream& in);
    static SlangMap from_file(const std::string& path);

    std::string apply(const std::string& text) const;
    const std::vector<Rule>& rules() const { return rules_; }

  private:
    std::vector<Rule> rules_;
    std::vector<std::regex> compiled_;
};

using Tokenizer = std::function<std::vector<std::string>(const std::string&)>;

// Splits on ASCII whitespace.
std::vector<std::string> whitespace_tokenizer(const std::string& text);
// One token per UTF-8 code point, whitespace skipped. Fallback for text with
// no segmentation.
std::vector<std::string> character_tokenizer(const std::string& text);

struct ParseIssue {
    std::size_t line_number = 0;
    std::string message;
};

struct ParseOptions {
    Tokenizer tokenizer = whitespace_tokenizer;
    bool strict = false;  // abort on the first malformed line
};

struct ParseResult {
    std::vector<VideoStream> videos;  // sorted by video_id
    std::vector<ParseIssue> issues;   // malformed lines skipped in lenient mode
    std::size_t records_dropped_empty = 0;
};

// Corpus line format (TSV, UTF-8, `#` comment lines ignored):
//   video_id <TAB> timestamp_seconds <TAB> "raw text" <TAB> label
// The label column is optional. Duplicate (video, timestamp, text) rows are
// kept; they are common and meaningful in this data.
ParseResult parse_corpus(std::istream& in, const SlangMap& slang, const ParseOptions& opts = {});

std::vector<VideoStream> filter_videos(const std::vector<VideoStream>& videos,
                                       std::size_t min_count = 300, double min_density = 0.1);

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<std::size_t> validation;
};

// 70/20/10 split over example indices, stratified by video so every video
// contributes to each partition (up to rounding on small videos).
// `example_video_ids[i]` is the video key of example i. Deterministic for a
// fixed seed independent of input grouping order.
DatasetSplit split_dataset(std::span<const std::string> example_video_ids, std::uint64_t seed);

// Preprocessed-corpus artifact (JSON, self-describing with a content hash).
void save_preprocessed(std::ostream& out, const std::vector<VideoStream>& videos);
struct PreprocessedCorpus {
    std::vector<VideoStream> videos;
    std::string content_hash;
};
PreprocessedCorpus load_preprocessed(std::istream& in);
PreprocessedCorpus load_preprocessed_file(const std::string& path);
std::string preprocessed_content_hash(const std::vector<VideoStream>& videos);

// TSV writer matching parse_corpus's input format.
void write_corpus_tsv(std::ostream& out, const std::vector<VideoStream>& videos);

}  // namespace sbniva
