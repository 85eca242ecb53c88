#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "stvg/common.hpp"
#include "stvg/geometry.hpp"

namespace stvg {

// Closed interval of sampled-frame indices. All temporal quantities count
// frames, never continuous time; seconds only enter through fps_sampled.
struct TemporalSpan {
    int start = 0;
    int end = 0;
    double fps_sampled = 1.0;

    int length() const { return end - start + 1; }
    double midpoint() const { return 0.5 * (start + end); }
    double duration_seconds() const { return length() / fps_sampled; }

    bool contains(const TemporalSpan& other) const {
        return start <= other.start && other.end <= end;
    }

    bool operator==(const TemporalSpan&) const = default;
};

inline int span_intersection_frames(const TemporalSpan& a, const TemporalSpan& b) {
    return std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start) + 1);
}

inline int span_union_frames(const TemporalSpan& a, const TemporalSpan& b) {
    return a.length() + b.length() - span_intersection_frames(a, b);
}

/// Frame-set IoU over two spans sampled at the same rate, inclusive endpoints.
inline double temporal_iou(const TemporalSpan& a, const TemporalSpan& b) {
    if (a.fps_sampled != b.fps_sampled) {
        throw ConfigError("temporal_iou: spans have different fps_sampled");
    }
    return static_cast<double>(span_intersection_frames(a, b)) /
           static_cast<double>(span_union_frames(a, b));
}

// One detected box on one sampled frame.
struct Detection {
    int frame = 0;
    BBox box;
    double confidence = 0.0;
    std::vector<std::string> soft_labels;  // non-empty
    std::vector<double> embedding;         // empty when the detector supplies none

    bool has_embedding() const { return !embedding.empty(); }

    bool operator==(const Detection&) const = default;
};

// Temporally ordered detections for one tracked subject. Frames are strictly
// increasing; the span is derived from the first and last detection.
struct Tubelet {
    std::string id;
    double fps_sampled = 1.0;
    std::vector<Detection> detections;

    TemporalSpan span() const {
        return {detections.front().frame, detections.back().frame, fps_sampled};
    }

    double mean_confidence() const {
        double sum = 0.0;
        for (const Detection& d : detections) {
            sum += d.confidence;
        }
        return sum / static_cast<double>(detections.size());
    }

    bool operator==(const Tubelet&) const = default;
};

// A caption fragment covering a contiguous, order-preserving subset of the
// caption's actions. Indices reference the original action sequence (1-based)
// and may be absent when the extraction did not provide them.
struct SubActionPhrase {
    std::string text;
    std::vector<int> action_indices;

    bool operator==(const SubActionPhrase&) const = default;
};

struct QueryRecord {
    std::string video_id;
    std::string caption;
    std::string subject_phrase;
    std::map<int, std::vector<SubActionPhrase>> sub_actions;  // action count -> phrases
    std::vector<double> query_embedding;

    bool operator==(const QueryRecord&) const = default;
};

// Per-frame target boxes plus the ground-truth span; boxes cover exactly the
// frames of the span.
struct GroundTruthAnnotation {
    std::string video_id;
    TemporalSpan span;
    std::map<int, BBox> boxes;

    bool operator==(const GroundTruthAnnotation&) const = default;
};

}  // namespace stvg
