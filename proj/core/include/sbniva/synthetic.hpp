#pragma once

#include <cstdint>
#include <string>

namespace sbniva {

// Seeded generator for a corpus with known structure: lexical topics that
// become embedding clusters after pretraining, a per-video ending topic
// concentrated in dense last-quarter bursts (the future keyframes), planted
// spoilers (pre-burst comments drawn from the ending topic), and noise
// comments from clusters disjoint from every topic. Labels cover only the
// first three quarters of each video; what happens during the ending is not a
// spoiler about it.
struct SynthConfig {
    std::size_t videos = 50;
    std::size_t comments_per_video = 500;
    double duration = 600.0;
    double spoiler_rate = 0.2;  // fraction of labeled comments that are spoilers
    double noise_rate = 0.15;   // fraction of comments drawn from noise clusters
    std::size_t regular_topics = 12;
    std::size_t noise_topics = 6;
    std::size_t words_per_topic = 20;
    std::size_t common_words = 20;  // shared vocabulary blended into ordinary comments
    double common_rate = 0.3;       // per-token probability of a common word
    double noise_topic_leak = 0.12;    // noise tokens drawn from the current scene topic
    double noise_chatter = 0.3;        // probability a noise comment carries a chatter marker
    double spoiler_common_scale = 0.33;  // spoilers are content-dense
    double burst_common_scale = 0.8;     // ending bursts chat like ordinary comments
    // Mid-video preview windows (an on-screen trailer): their comments use
    // ending-topic words but are not spoilers; only neighborhood coherence
    // separates them from real spoilers.
    std::size_t preview_segments = 2;
    double preview_ending_mix = 0.5;   // per-token probability of an ending word
    double preview_glue_mix = 0.3;     // per-token probability of a preview-chat word
    std::size_t ending_words = 15;
    std::size_t keyword_count = 6;        // ending-topic words exported as keywords
    std::size_t distractor_keywords = 10; // regular words added to force KM false alarms
    double segment_len = 45.0;            // regular topic changes at this period
    std::size_t tokens_min = 4;
    std::size_t tokens_max = 8;
    std::size_t bursts = 3;           // dense ending-topic windows per video
    double burst_align = 10.0;        // bursts sit inside one window of this length
    std::size_t burst_comments = 35;  // per burst
    double background_tail_rate = 0.15;  // scattered last-quarter comments
    bool slang_forms = true;  // sprinkle raw slang and symbol runs into noise comments
    std::uint64_t seed = 7;
};

// Everything is returned as file contents in the CLI formats, so both the
// command line path and in-process tests go through the real parsers.
struct SynthCorpus {
    std::string corpus_tsv;
    std::string slang_tsv;
    std::string keywords_txt;
    std::string categories_tsv;
};

SynthCorpus generate_synthetic(const SynthConfig& config);

}  // namespace sbniva
