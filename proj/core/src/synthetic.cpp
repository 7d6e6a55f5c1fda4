#include "sbniva/synthetic.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include "sbniva/common.hpp"
#include "sbniva/corpus.hpp"

namespace sbniva {

namespace {

struct Comment {
    double time = 0.0;
    std::string text;
    int label = -1;  // -1 unlabeled
};

std::string topic_word(const char* prefix, std::size_t topic, std::size_t word) {
    return std::string(prefix) + std::to_string(topic) + "w" + std::to_string(word);
}

class Builder {
  public:
    Builder(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    SynthCorpus run() {
        build_vocabularies();
        std::ostringstream corpus, categories;
        corpus << "# synthetic time-sync comment corpus (seed " << cfg_.seed << ")\n";
        static const char* kCategories[] = {"tv", "movie", "sport"};
        for (std::size_t v = 0; v < cfg_.videos; ++v) {
            std::string vid = "v" + std::to_string(v);
            auto comments = build_video(v);
            std::vector<VideoStream> one(1);
            one[0].video_id = vid;
            for (const auto& c : comments) {
                TscRecord rec;
                rec.video_id = vid;
                rec.timestamp = c.time;
                rec.raw_text = c.text;
                if (c.label >= 0) rec.label = c.label;
                one[0].records.push_back(std::move(rec));
            }
            std::ostringstream chunk;
            write_corpus_tsv(chunk, one);
            corpus << chunk.str();
            categories << vid << '\t' << kCategories[v % 3] << '\n';
        }

        SynthCorpus out;
        out.corpus_tsv = corpus.str();
        out.categories_tsv = categories.str();
        out.slang_tsv =
            "# network slang rewrite rules\n"
            "2(3+)\tLAUGH\n"
            "6{2,}\tWELLPLAYED\n";
        std::ostringstream kw;
        kw << "# spoiler keywords (ending-topic words plus distractors)\n";
        for (const auto& k : keywords_) kw << k << '\n';
        out.keywords_txt = kw.str();
        return out;
    }

  private:
    void build_vocabularies() {
        regular_.resize(cfg_.regular_topics);
        for (std::size_t t = 0; t < cfg_.regular_topics; ++t)
            for (std::size_t w = 0; w < cfg_.words_per_topic; ++w)
                regular_[t].push_back(topic_word("t", t, w));
        noise_.resize(cfg_.noise_topics);
        for (std::size_t t = 0; t < cfg_.noise_topics; ++t)
            for (std::size_t w = 0; w < cfg_.words_per_topic; ++w)
                noise_[t].push_back(topic_word("n", t, w));
        ending_.resize(cfg_.videos);
        for (std::size_t v = 0; v < cfg_.videos; ++v)
            for (std::size_t w = 0; w < cfg_.ending_words; ++w)
                ending_[v].push_back(topic_word("e", v, w));
        for (std::size_t w = 0; w < cfg_.common_words; ++w)
            common_.push_back("c" + std::to_string(w));
        preview_.resize(cfg_.videos);
        for (std::size_t v = 0; v < cfg_.videos; ++v)
            for (std::size_t w = 0; w < cfg_.words_per_topic; ++w)
                preview_[v].push_back(topic_word("p", v, w));

        std::set<std::string> kw;
        for (std::size_t v = 0; v < cfg_.videos; ++v)
            for (std::size_t w = 0; w < std::min(cfg_.keyword_count, cfg_.ending_words); ++w)
                kw.insert(ending_[v][w]);
        // Distractors: the first word of successive regular topics. They show
        // up in ordinary comments, so keyword matching over-triggers.
        for (std::size_t k = 0; k < cfg_.distractor_keywords; ++k)
            kw.insert(regular_[k % cfg_.regular_topics][k / cfg_.regular_topics]);
        keywords_.assign(kw.begin(), kw.end());
    }

    std::size_t rand_index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(rng_, 0, static_cast<std::int64_t>(n) - 1));
    }

    // Ordinary comments blend in common words; spoiler and burst comments are
    // content-dense (few commons) and noise comments are lexically disjoint
    // from everything else.
    std::string sample_text(const std::vector<std::string>& pool,
                            const std::string& must_include = "", double common_rate = -1.0) {
        if (common_rate < 0.0) common_rate = cfg_.common_rate;
        auto count = static_cast<std::size_t>(
            uniform_int(rng_, static_cast<std::int64_t>(cfg_.tokens_min),
                        static_cast<std::int64_t>(cfg_.tokens_max)));
        std::vector<std::string> words;
        for (std::size_t i = 0; i < count; ++i) {
            bool common = !common_.empty() && uniform_real(rng_, 0.0, 1.0) < common_rate;
            const auto& src = common ? common_ : pool;
            words.push_back(src[rand_index(src.size())]);
        }
        if (!must_include.empty()) words[rand_index(words.size())] = must_include;
        std::string text;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) text += ' ';
            text += words[i];
        }
        return text;
    }

    // Off-topic chatter: either one of the dedicated noise clusters or, when
    // several videos exist, banter about a different video's ending. Both stay
    // away from the common vocabulary, but leak a few words of the scene being
    // watched and usually carry a chatter marker, the way live comments do.
    std::string noise_text(std::size_t video, double time) {
        std::string text;
        bool cross = cfg_.videos > 1 && uniform_real(rng_, 0.0, 1.0) < 0.5;
        if (cross) {
            std::size_t other = (video + 1 +
                                 static_cast<std::size_t>(uniform_int(
                                     rng_, 0, static_cast<std::int64_t>(cfg_.videos) - 2))) %
                                cfg_.videos;
            text = sample_text(ending_[other], "", 0.0);
        } else {
            text = sample_text(noise_[rand_index(noise_.size())], "", 0.0);
        }
        if (cfg_.noise_topic_leak > 0.0) {
            const auto& scene = segment_topic(video, time);
            std::istringstream words(text);
            std::string w, rebuilt;
            while (words >> w) {
                if (uniform_real(rng_, 0.0, 1.0) < cfg_.noise_topic_leak)
                    w = scene[rand_index(scene.size())];
                if (!rebuilt.empty()) rebuilt += ' ';
                rebuilt += w;
            }
            text = rebuilt;
        }
        if (uniform_real(rng_, 0.0, 1.0) < cfg_.noise_chatter) {
            double u = uniform_real(rng_, 0.0, 1.0);
            if (!cfg_.slang_forms || u < 0.25)
                text += " hhh";
            else if (u < 0.55)
                text += " 2333333";
            else if (u < 0.85)
                text += " 66666";
            else
                text += " hhh !!!???";
        }
        return text;
    }

    const std::vector<std::string>& segment_topic(std::size_t video, double t) {
        auto seg = static_cast<std::size_t>(t / cfg_.segment_len);
        // Per-video offset so topic boundaries differ across videos.
        return regular_[(seg + video * 5 + video / 3) % cfg_.regular_topics];
    }

    // Comment inside a preview window: ending-topic words glued together by
    // preview chatter. Lexically close to a spoiler; contextually on-topic.
    std::string preview_text(std::size_t v, double time) {
        auto count = static_cast<std::size_t>(
            uniform_int(rng_, static_cast<std::int64_t>(cfg_.tokens_min),
                        static_cast<std::int64_t>(cfg_.tokens_max)));
        std::string text;
        for (std::size_t i = 0; i < count; ++i) {
            double u = uniform_real(rng_, 0.0, 1.0);
            const std::vector<std::string>* src = nullptr;
            if (u < cfg_.preview_ending_mix)
                src = &ending_[v];
            else if (u < cfg_.preview_ending_mix + cfg_.preview_glue_mix)
                src = &preview_[v];
            else if (!common_.empty() && uniform_real(rng_, 0.0, 1.0) < 0.5)
                src = &common_;
            else
                src = &segment_topic(v, time);
            if (!text.empty()) text += ' ';
            text += (*src)[rand_index(src->size())];
        }
        return text;
    }

    std::vector<Comment> build_video(std::size_t v) {
        std::vector<Comment> comments;
        double quarter = 0.75 * cfg_.duration;

        auto n_total = cfg_.comments_per_video;
        auto n_burst = cfg_.bursts * cfg_.burst_comments;
        auto n_tail = static_cast<std::size_t>(static_cast<double>(n_total) * cfg_.background_tail_rate);
        std::size_t n_main = n_total > n_burst + n_tail ? n_total - n_burst - n_tail : n_total / 2;

        // Preview windows sit strictly inside the main region.
        std::vector<std::pair<double, double>> previews;
        for (std::size_t s = 0; s < cfg_.preview_segments; ++s) {
            double start = uniform_real(rng_, 0.1 * quarter, 0.9 * quarter - cfg_.segment_len);
            previews.emplace_back(start, start + cfg_.segment_len);
        }
        auto in_preview = [&](double t) {
            for (const auto& [s, e] : previews)
                if (t >= s && t < e) return true;
            return false;
        };

        // Main region: labeled comments.
        for (std::size_t i = 0; i < n_main; ++i) {
            Comment c;
            c.time = uniform_real(rng_, 0.0, quarter);
            double u = uniform_real(rng_, 0.0, 1.0);
            if (u < cfg_.noise_rate) {
                c.text = noise_text(v, c.time);
                c.label = 0;
            } else if (in_preview(c.time)) {
                c.text = preview_text(v, c.time);
                c.label = 0;
            } else if (uniform_real(rng_, 0.0, 1.0) <
                       cfg_.spoiler_rate / std::max(1.0 - cfg_.noise_rate, 1e-9)) {
                const auto& kws = ending_[v];
                std::size_t kcount = std::min(cfg_.keyword_count, kws.size());
                c.text = sample_text(kws, kws[rand_index(kcount)],
                                     cfg_.common_rate * cfg_.spoiler_common_scale);
                c.label = 1;
            } else {
                c.text = sample_text(segment_topic(v, c.time));
                c.label = 0;
            }
            comments.push_back(std::move(c));
        }

        // Ending bursts: dense, unlabeled, drawn from the ending topic. Each
        // burst sits inside one aligned window so it dominates that window's
        // comment count.
        auto slots = static_cast<std::size_t>((cfg_.duration - quarter) / cfg_.burst_align);
        std::vector<std::size_t> picked;
        while (picked.size() < std::min(cfg_.bursts, slots)) {
            std::size_t s = rand_index(slots);
            if (std::find(picked.begin(), picked.end(), s) == picked.end()) picked.push_back(s);
        }
        for (std::size_t s : picked) {
            double lo = quarter + static_cast<double>(s) * cfg_.burst_align + 0.5;
            double hi = lo + cfg_.burst_align - 1.0;
            for (std::size_t i = 0; i < cfg_.burst_comments; ++i) {
                Comment c;
                c.time = uniform_real(rng_, lo, hi);
                double u = uniform_real(rng_, 0.0, 1.0);
                c.text = u < cfg_.noise_rate
                             ? noise_text(v, c.time)
                             : sample_text(ending_[v], "",
                                           cfg_.common_rate * cfg_.burst_common_scale);
                comments.push_back(std::move(c));
            }
        }

        // Scattered unlabeled tail comments.
        for (std::size_t i = 0; i < n_tail; ++i) {
            Comment c;
            c.time = uniform_real(rng_, quarter, cfg_.duration);
            double u = uniform_real(rng_, 0.0, 1.0);
            if (u < cfg_.noise_rate)
                c.text = noise_text(v, c.time);
            else if (u < cfg_.noise_rate + 0.3)
                c.text = sample_text(ending_[v]);
            else
                c.text = sample_text(segment_topic(v, c.time));
            comments.push_back(std::move(c));
        }

        // Close the stream exactly at the nominal duration so the observed
        // duration (max timestamp) matches the layout the generator assumed.
        Comment last;
        last.time = cfg_.duration;
        last.text = sample_text(ending_[v]);
        comments.push_back(std::move(last));

        std::stable_sort(comments.begin(), comments.end(),
                         [](const Comment& a, const Comment& b) { return a.time < b.time; });
        return comments;
    }

    SynthConfig cfg_;
    Rng rng_;
    std::vector<std::vector<std::string>> regular_, noise_, ending_, preview_;
    std::vector<std::string> common_;
    std::vector<std::string> keywords_;
};

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& config) {
    if (config.videos == 0) throw ValidationError("synth: videos must be > 0");
    if (config.tokens_min == 0 || config.tokens_max < config.tokens_min)
        throw ValidationError("synth: bad token count range");
    if (config.regular_topics == 0 || config.noise_topics == 0)
        throw ValidationError("synth: need at least one regular and one noise topic");
    return Builder(config).run();
}

}  // namespace sbniva
