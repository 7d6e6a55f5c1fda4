#include "sbniva/keyframes.hpp"

#include <algorithm>
#include <stdexcept>

namespace sbniva {

std::vector<Keyframe> extract_keyframes(const VideoStream& video, std::size_t p,
                                        double frame_len) {
    if (video.records.empty()) throw std::invalid_argument("extract_keyframes: empty video");
    if (video.duration <= 0.0) throw std::invalid_argument("extract_keyframes: video duration is 0");
    if (p < 1) throw std::invalid_argument("extract_keyframes: p must be >= 1");
    if (frame_len <= 0.0) throw std::invalid_argument("extract_keyframes: frame_len must be > 0");

    double quarter = 0.75 * video.duration;
    std::vector<Keyframe> windows;
    for (std::size_t k = 0;; ++k) {
        double start = quarter + static_cast<double>(k) * frame_len;
        if (start > video.duration) break;
        windows.push_back({start, quarter + static_cast<double>(k + 1) * frame_len, {}});
    }
    for (std::size_t i = 0; i < video.records.size(); ++i) {
        double t = video.records[i].timestamp;
        if (t < quarter) continue;
        auto slot = static_cast<std::size_t>((t - quarter) / frame_len);
        slot = std::min(slot, windows.size() - 1);
        // Guard against rounding at window edges.
        while (slot > 0 && t < windows[slot].start) --slot;
        while (slot + 1 < windows.size() && t >= windows[slot].end) ++slot;
        if (t >= windows[slot].start && t < windows[slot].end)
            windows[slot].member_indices.push_back(i);
    }

    std::vector<std::size_t> order;
    for (std::size_t w = 0; w < windows.size(); ++w)
        if (!windows[w].member_indices.empty()) order.push_back(w);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return windows[a].member_indices.size() > windows[b].member_indices.size();
    });
    if (order.size() > p) order.resize(p);
    std::sort(order.begin(), order.end());

    std::vector<Keyframe> out;
    out.reserve(order.size());
    for (std::size_t w : order) out.push_back(std::move(windows[w]));
    return out;
}

}  // namespace sbniva
