#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "stvg/types.hpp"

namespace stvg {

struct TrackerParams {
    double iou_min = 0.3;   // minimum box IoU to associate a detection with a track
    int max_gap = 2;        // sampled frames a track may miss before it closes
    int min_track_len = 2;  // minimum detections per emitted tubelet
};

namespace detail {

inline std::string format_track_id(int n) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "t%03d", n);
    return buf;
}

}  // namespace detail

/**
 * Greedy IoU tracker: links per-frame detections into tubelets.
 *
 * Frames are processed in increasing order. Within a frame every
 * (active track, detection) pair with IoU >= iou_min against the track's
 * last box is ranked by descending IoU, ties broken by lower detection
 * list index then lower track id, and accepted greedily. Unmatched
 * detections open new tracks. A track that has missed more than max_gap
 * sampled frames closes before matching; closed tracks shorter than
 * min_track_len are discarded.
 *
 * Output is sorted by (first frame, id) and is byte-stable for identical
 * input.
 */
inline std::vector<Tubelet> link_detections(
    const std::map<int, std::vector<Detection>>& frames,
    const TrackerParams& params,
    double fps_sampled = 1.0) {
    struct Track {
        int id;
        std::vector<Detection> detections;
    };

    std::vector<Track> active;
    std::vector<Track> closed;
    int next_id = 0;

    for (const auto& [frame, detections] : frames) {
        // Close tracks that have been missing for more than max_gap frames.
        for (auto it = active.begin(); it != active.end();) {
            if (frame - it->detections.back().frame - 1 > params.max_gap) {
                closed.push_back(std::move(*it));
                it = active.erase(it);
            } else {
                ++it;
            }
        }

        struct Pair {
            double iou;
            std::size_t det_index;
            std::size_t track_index;
            int track_id;
        };
        std::vector<Pair> pairs;
        for (std::size_t d = 0; d < detections.size(); ++d) {
            for (std::size_t t = 0; t < active.size(); ++t) {
                const double iou = box_iou(active[t].detections.back().box, detections[d].box);
                if (iou >= params.iou_min) {
                    pairs.push_back({iou, d, t, active[t].id});
                }
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            if (a.iou != b.iou) return a.iou > b.iou;
            if (a.det_index != b.det_index) return a.det_index < b.det_index;
            return a.track_id < b.track_id;
        });

        std::vector<bool> det_taken(detections.size(), false);
        std::vector<bool> track_taken(active.size(), false);
        for (const Pair& p : pairs) {
            if (det_taken[p.det_index] || track_taken[p.track_index]) {
                continue;
            }
            det_taken[p.det_index] = true;
            track_taken[p.track_index] = true;
            active[p.track_index].detections.push_back(detections[p.det_index]);
        }
        for (std::size_t d = 0; d < detections.size(); ++d) {
            if (!det_taken[d]) {
                active.push_back({next_id++, {detections[d]}});
            }
        }
    }

    for (Track& t : active) {
        closed.push_back(std::move(t));
    }

    std::vector<Tubelet> tubelets;
    for (const Track& t : closed) {
        if (static_cast<int>(t.detections.size()) < params.min_track_len) {
            continue;
        }
        tubelets.push_back({detail::format_track_id(t.id), fps_sampled, t.detections});
    }
    std::sort(tubelets.begin(), tubelets.end(), [](const Tubelet& a, const Tubelet& b) {
        const int fa = a.detections.front().frame;
        const int fb = b.detections.front().frame;
        if (fa != fb) return fa < fb;
        return a.id < b.id;
    });
    return tubelets;
}

}  // namespace stvg
