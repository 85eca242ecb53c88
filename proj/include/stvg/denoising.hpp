#pragma once

#include <cassert>
#include <map>
#include <string>
#include <vector>

#include "stvg/text.hpp"
#include "stvg/types.hpp"

namespace stvg {

struct SwitchPoint {
    int frame;               // frame of the detection the label switched to
    double iou_across_switch;  // box IoU between the detections on either side
};

struct SwitchedRun {
    int start_frame;
    int end_frame;
    std::string label;
    double duration_seconds;  // (end_frame - start_frame + 1) / fps_sampled
};

struct SwitchReport {
    std::string mode_label;
    double switching_fraction = 0.0;
    std::vector<SwitchPoint> switch_points;
    std::vector<SwitchedRun> switched_runs;
};

namespace detail {

// Most frequent item; ties go to the one occurring earliest in the sequence.
template <typename T>
T mode_with_first_occurrence(const std::vector<T>& items) {
    std::map<T, std::size_t> counts;
    std::map<T, std::size_t> first_index;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (counts.emplace(items[i], 0).second) {
            first_index[items[i]] = i;
        }
        ++counts[items[i]];
    }
    T best = items.front();
    for (const auto& [item, count] : counts) {
        if (count > counts[best] ||
            (count == counts[best] && first_index[item] < first_index[best])) {
            best = item;
        }
    }
    return best;
}

inline std::vector<std::string> detection_labels(const Tubelet& t) {
    std::vector<std::string> labels;
    labels.reserve(t.detections.size());
    for (const Detection& d : t.detections) {
        labels.push_back(normalized_label(d));
    }
    return labels;
}

}  // namespace detail

/// Most frequent normalized per-detection label; ties broken by earliest
/// first occurrence in the tubelet.
inline std::string tubelet_mode_label(const Tubelet& t) {
    return detail::mode_with_first_occurrence(detail::detection_labels(t));
}

inline SwitchReport analyze_switching(const Tubelet& t) {
    const std::vector<std::string> labels = detail::detection_labels(t);
    SwitchReport report;
    report.mode_label = detail::mode_with_first_occurrence(labels);

    std::size_t non_mode = 0;
    for (const std::string& label : labels) {
        if (label != report.mode_label) {
            ++non_mode;
        }
    }
    report.switching_fraction = static_cast<double>(non_mode) / labels.size();

    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] != labels[i - 1]) {
            report.switch_points.push_back(
                {t.detections[i].frame, box_iou(t.detections[i - 1].box, t.detections[i].box)});
        }
    }

    // Maximal consecutive stretches of one non-mode label.
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i] == report.mode_label) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < labels.size() && labels[j + 1] == labels[i]) {
            ++j;
        }
        const int start = t.detections[i].frame;
        const int end = t.detections[j].frame;
        report.switched_runs.push_back(
            {start, end, labels[i], (end - start + 1) / t.fps_sampled});
        i = j + 1;
    }
    return report;
}

/**
 * Switch-Addition denoising: non-mode runs longer than min_duration_s become
 * independent tubelets (ids suffixed "-s1", "-s2", ... in temporal order),
 * shorter non-mode runs are dropped, and the mode-label remainder keeps the
 * parent id. The outputs plus the dropped detections partition the input.
 */
inline std::vector<Tubelet> denoise_switch_addition(const Tubelet& t,
                                                    double min_duration_s = 1.0) {
    const SwitchReport report = analyze_switching(t);

    std::vector<Tubelet> out;
    Tubelet remainder{t.id, t.fps_sampled, {}};
    for (const Detection& d : t.detections) {
        if (normalized_label(d) == report.mode_label) {
            remainder.detections.push_back(d);
        }
    }
    out.push_back(std::move(remainder));

    std::size_t dropped = 0;
    int extracted_index = 0;
    for (const SwitchedRun& run : report.switched_runs) {
        std::vector<Detection> run_detections;
        for (const Detection& d : t.detections) {
            if (d.frame >= run.start_frame && d.frame <= run.end_frame &&
                normalized_label(d) == run.label) {
                run_detections.push_back(d);
            }
        }
        if (run.duration_seconds > min_duration_s) {
            ++extracted_index;
            out.push_back({t.id + "-s" + std::to_string(extracted_index), t.fps_sampled,
                           std::move(run_detections)});
        } else {
            dropped += run_detections.size();
        }
    }

    std::size_t emitted = 0;
    for (const Tubelet& o : out) {
        emitted += o.detections.size();
    }
    assert(emitted + dropped == t.detections.size());
    return out;
}

/// Switch-Dropping denoising: keep only mode-label detections. The result may
/// contain frame gaps and is never empty.
inline Tubelet denoise_switch_dropping(const Tubelet& t) {
    const std::string mode = tubelet_mode_label(t);
    Tubelet out{t.id, t.fps_sampled, {}};
    for (const Detection& d : t.detections) {
        if (normalized_label(d) == mode) {
            out.detections.push_back(d);
        }
    }
    return out;
}

}  // namespace stvg
