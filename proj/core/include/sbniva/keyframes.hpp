#pragma once

#include <cstddef>
#include <vector>

#include "sbniva/corpus.hpp"

namespace sbniva {

// A fixed-length window in the last quarter of a video, holding the records
// whose timestamps fall in [start, end).
struct Keyframe {
    double start = 0.0;
    double end = 0.0;
    std::vector<std::size_t> member_indices;  // indices into VideoStream::records
};

// Tiles [0.75 * duration, duration] with consecutive `frame_len` windows and
// returns the p windows holding the most comments, ordered by start time.
// Ties go to the earlier window. Empty windows are never returned; if fewer
// than p windows are non-empty, all non-empty ones are returned.
std::vector<Keyframe> extract_keyframes(const VideoStream& video, std::size_t p,
                                        double frame_len = 10.0);

}  // namespace sbniva
