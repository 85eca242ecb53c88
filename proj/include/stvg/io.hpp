#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stvg/curriculum.hpp"
#include "stvg/evaluation.hpp"
#include "stvg/grounding.hpp"
#include "stvg/slf.hpp"
#include "stvg/types.hpp"

namespace stvg {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Record types tying core values to their owning video.

struct VideoMeta {
    std::string video_id;
    double fps_sampled = 1.0;
};

struct DetectionRecord {
    std::string video_id;
    Detection detection;
};

struct TubeletRecord {
    std::string video_id;
    Tubelet tubelet;
};

struct TrmSpanRecord {
    std::string video_id;
    TemporalSpan span;
};

struct PredictionRecord {
    std::string video_id;
    Prediction prediction;
};

struct SlfRecord {
    std::string video_id;
    Category subject;
    std::vector<std::string> kept_ids;
    bool empty_warning = false;
};

struct SwitchReportRecord {
    std::string video_id;
    std::string tubelet_id;
    SwitchReport report;
};

struct ShiftInputRecord {
    std::string video_id;
    TrimSide trim_side;
    TemporalSpan full_pred;
    TemporalSpan trimmed_pred;
};

struct UpperBoundRecord {
    std::string video_id;
    std::string tubelet_id;  // empty for the detection-level bound
    double viou = 0.0;
};

// ---------------------------------------------------------------------------
// Line-oriented diagnostics. Reading collects every schema violation with its
// line number and raises them together.

namespace io_detail {

struct LineDiagnostics {
    std::string path;
    std::vector<std::string> messages;

    void add(std::size_t line, const std::string& message) {
        messages.push_back(path + ":" + std::to_string(line) + ": " + message);
    }

    void raise_if_any() const {
        if (messages.empty()) {
            return;
        }
        std::string joined;
        for (const std::string& m : messages) {
            if (!joined.empty()) {
                joined += '\n';
            }
            joined += m;
        }
        throw DataError(joined);
    }
};

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "' for reading");
    }
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    return out;
}

// Parse every non-empty line, handing (line number, parsed json) to fn inside
// a per-record error scope.
template <typename Fn>
void for_each_record(const std::string& path, Fn&& fn) {
    std::ifstream in = open_input(path);
    LineDiagnostics diagnostics{path, {}};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        try {
            fn(lineno, json::parse(line));
        } catch (const json::exception& e) {
            diagnostics.add(lineno, e.what());
        } catch (const DataError& e) {
            diagnostics.add(lineno, e.what());
        }
    }
    diagnostics.raise_if_any();
}

inline const json& require(const json& j, std::string_view key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw DataError("missing field '" + std::string(key) + "'");
    }
    return *it;
}

inline BBox parse_box(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw DataError("box must be a 4-element array [x1, y1, x2, y2]");
    }
    BBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!box.valid()) {
        throw DataError("invalid box coordinates");
    }
    return box;
}

inline json box_to_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

inline Detection parse_detection_fields(const json& j) {
    Detection d;
    d.frame = require(j, "frame").get<int>();
    if (d.frame < 0) {
        throw DataError("frame must be >= 0");
    }
    d.box = parse_box(require(j, "box"));
    d.confidence = require(j, "confidence").get<double>();
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
        throw DataError("confidence must lie in [0, 1]");
    }
    d.soft_labels = require(j, "soft_labels").get<std::vector<std::string>>();
    if (d.soft_labels.empty()) {
        throw DataError("soft_labels must be non-empty");
    }
    if (j.contains("embedding")) {
        d.embedding = j["embedding"].get<std::vector<double>>();
        if (d.embedding.empty()) {
            throw DataError("embedding present but empty");
        }
        for (double v : d.embedding) {
            if (!std::isfinite(v)) {
                throw DataError("embedding has non-finite values");
            }
        }
    }
    return d;
}

inline json detection_fields_to_json(const Detection& d) {
    json j{{"frame", d.frame},
           {"box", box_to_json(d.box)},
           {"confidence", d.confidence},
           {"soft_labels", d.soft_labels}};
    if (d.has_embedding()) {
        j["embedding"] = d.embedding;
    }
    return j;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Videos sidecar: per-video sampled frame rate.

inline std::map<std::string, double> read_video_metas(const std::string& path) {
    std::map<std::string, double> metas;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        const std::string id = io_detail::require(j, "video_id").get<std::string>();
        const double fps = io_detail::require(j, "fps_sampled").get<double>();
        if (fps <= 0.0) {
            throw DataError("fps_sampled must be > 0");
        }
        metas[id] = fps;
    });
    return metas;
}

inline void write_video_metas(const std::string& path, const std::vector<VideoMeta>& metas) {
    std::ofstream out = io_detail::open_output(path);
    for (const VideoMeta& m : metas) {
        out << json{{"video_id", m.video_id}, {"fps_sampled", m.fps_sampled}}.dump() << '\n';
    }
}

inline double fps_for(const std::map<std::string, double>& videos, const std::string& video_id,
                      const std::string& context) {
    const auto it = videos.find(video_id);
    if (it == videos.end()) {
        throw DataError(context + ": video_id '" + video_id + "' not present in the videos sidecar");
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Detections.

inline std::vector<DetectionRecord> read_detections(const std::string& path) {
    std::vector<DetectionRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        DetectionRecord r;
        r.video_id = io_detail::require(j, "video_id").get<std::string>();
        r.detection = io_detail::parse_detection_fields(j);
        records.push_back(std::move(r));
    });
    return records;
}

inline void write_detections(const std::string& path,
                             const std::vector<DetectionRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const DetectionRecord& r : records) {
        json j = io_detail::detection_fields_to_json(r.detection);
        j["video_id"] = r.video_id;
        out << j.dump() << '\n';
    }
}

/// Group detections per video and frame, preserving file order within a
/// frame. Every video_id must appear in the sidecar.
inline std::map<std::string, std::map<int, std::vector<Detection>>> group_detections(
    const std::vector<DetectionRecord>& records,
    const std::map<std::string, double>& videos) {
    std::map<std::string, std::map<int, std::vector<Detection>>> grouped;
    for (const DetectionRecord& r : records) {
        fps_for(videos, r.video_id, "detections");
        grouped[r.video_id][r.detection.frame].push_back(r.detection);
    }
    return grouped;
}

// ---------------------------------------------------------------------------
// Tubelets. fps_sampled lives in the sidecar, not in the record.

inline std::vector<TubeletRecord> read_tubelets(const std::string& path,
                                                const std::map<std::string, double>& videos) {
    std::vector<TubeletRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        TubeletRecord r;
        r.video_id = io_detail::require(j, "video_id").get<std::string>();
        r.tubelet.id = io_detail::require(j, "id").get<std::string>();
        r.tubelet.fps_sampled = fps_for(videos, r.video_id, "tubelets");
        const json& dets = io_detail::require(j, "detections");
        if (!dets.is_array() || dets.empty()) {
            throw DataError("detections must be a non-empty array");
        }
        int previous_frame = -1;
        for (const json& dj : dets) {
            Detection d = io_detail::parse_detection_fields(dj);
            if (d.frame <= previous_frame) {
                throw DataError("tubelet frames must be strictly increasing");
            }
            previous_frame = d.frame;
            r.tubelet.detections.push_back(std::move(d));
        }
        records.push_back(std::move(r));
    });
    return records;
}

inline void write_tubelets(const std::string& path, const std::vector<TubeletRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const TubeletRecord& r : records) {
        json dets = json::array();
        for (const Detection& d : r.tubelet.detections) {
            dets.push_back(io_detail::detection_fields_to_json(d));
        }
        out << json{{"video_id", r.video_id}, {"id", r.tubelet.id}, {"detections", dets}}.dump()
            << '\n';
    }
}

// ---------------------------------------------------------------------------
// Queries. Sub-action phrases accept either a bare string (no indices; the
// contiguity check is skipped with a warning downstream) or
// {"text": ..., "action_indices": [...]}.

inline std::vector<QueryRecord> read_queries(const std::string& path) {
    std::vector<QueryRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        QueryRecord q;
        q.video_id = io_detail::require(j, "video_id").get<std::string>();
        q.caption = io_detail::require(j, "caption").get<std::string>();
        q.subject_phrase = io_detail::require(j, "subject_phrase").get<std::string>();
        if (q.subject_phrase.empty()) {
            throw DataError("subject_phrase must be non-empty");
        }
        if (j.contains("sub_actions")) {
            for (const auto& [key, phrases] : j["sub_actions"].items()) {
                int k = 0;
                try {
                    k = std::stoi(key);
                } catch (const std::exception&) {
                    throw DataError("sub_actions key '" + key + "' is not an integer");
                }
                if (k < 1) {
                    throw DataError("sub_actions keys must be >= 1");
                }
                std::vector<SubActionPhrase>& out = q.sub_actions[k];
                for (const json& pj : phrases) {
                    SubActionPhrase phrase;
                    if (pj.is_string()) {
                        phrase.text = pj.get<std::string>();
                    } else {
                        phrase.text = io_detail::require(pj, "text").get<std::string>();
                        if (pj.contains("action_indices")) {
                            phrase.action_indices = pj["action_indices"].get<std::vector<int>>();
                        }
                    }
                    out.push_back(std::move(phrase));
                }
            }
        }
        if (j.contains("query_embedding")) {
            q.query_embedding = j["query_embedding"].get<std::vector<double>>();
            if (q.query_embedding.empty()) {
                throw DataError("query_embedding present but empty");
            }
        }
        records.push_back(std::move(q));
    });
    return records;
}

inline void write_queries(const std::string& path, const std::vector<QueryRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const QueryRecord& q : records) {
        json sub_actions = json::object();
        for (const auto& [k, phrases] : q.sub_actions) {
            json list = json::array();
            for (const SubActionPhrase& p : phrases) {
                if (p.action_indices.empty()) {
                    list.push_back(p.text);
                } else {
                    list.push_back(json{{"text", p.text}, {"action_indices", p.action_indices}});
                }
            }
            sub_actions[std::to_string(k)] = std::move(list);
        }
        json j{{"video_id", q.video_id},
               {"caption", q.caption},
               {"subject_phrase", q.subject_phrase},
               {"sub_actions", sub_actions}};
        if (!q.query_embedding.empty()) {
            j["query_embedding"] = q.query_embedding;
        }
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Ground-truth annotations.

inline std::vector<GroundTruthAnnotation> read_annotations(
    const std::string& path, const std::map<std::string, double>& videos) {
    std::vector<GroundTruthAnnotation> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        GroundTruthAnnotation a;
        a.video_id = io_detail::require(j, "video_id").get<std::string>();
        const json& span = io_detail::require(j, "span");
        a.span.start = io_detail::require(span, "start").get<int>();
        a.span.end = io_detail::require(span, "end").get<int>();
        a.span.fps_sampled = fps_for(videos, a.video_id, "annotations");
        if (a.span.start > a.span.end) {
            throw DataError("span start must be <= end");
        }
        for (const auto& [key, bj] : io_detail::require(j, "boxes").items()) {
            int frame = 0;
            try {
                frame = std::stoi(key);
            } catch (const std::exception&) {
                throw DataError("boxes key '" + key + "' is not a frame index");
            }
            a.boxes[frame] = io_detail::parse_box(bj);
        }
        for (int frame = a.span.start; frame <= a.span.end; ++frame) {
            if (!a.boxes.count(frame)) {
                throw DataError("boxes must cover every frame of the span (missing " +
                                std::to_string(frame) + ")");
            }
        }
        if (static_cast<int>(a.boxes.size()) != a.span.length()) {
            throw DataError("boxes must cover exactly the frames of the span");
        }
        records.push_back(std::move(a));
    });
    return records;
}

inline void write_annotations(const std::string& path,
                              const std::vector<GroundTruthAnnotation>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const GroundTruthAnnotation& a : records) {
        json boxes = json::object();
        for (const auto& [frame, box] : a.boxes) {
            boxes[std::to_string(frame)] = io_detail::box_to_json(box);
        }
        out << json{{"video_id", a.video_id},
                    {"span", {{"start", a.span.start}, {"end", a.span.end}}},
                    {"boxes", boxes}}
                   .dump()
            << '\n';
    }
}

// ---------------------------------------------------------------------------
// Externally predicted temporal spans.

inline std::vector<TrmSpanRecord> read_trm_spans(const std::string& path,
                                                 const std::map<std::string, double>& videos) {
    std::vector<TrmSpanRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        TrmSpanRecord r;
        r.video_id = io_detail::require(j, "video_id").get<std::string>();
        r.span.start = io_detail::require(j, "start").get<int>();
        r.span.end = io_detail::require(j, "end").get<int>();
        r.span.fps_sampled = fps_for(videos, r.video_id, "trm spans");
        if (r.span.start > r.span.end) {
            throw DataError("span start must be <= end");
        }
        records.push_back(std::move(r));
    });
    return records;
}

inline void write_trm_spans(const std::string& path, const std::vector<TrmSpanRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const TrmSpanRecord& r : records) {
        out << json{{"video_id", r.video_id}, {"start", r.span.start}, {"end", r.span.end}}.dump()
            << '\n';
    }
}

// ---------------------------------------------------------------------------
// Congestion records and stage plans.

inline std::vector<CongestionRecord> read_congestion(const std::string& path) {
    std::vector<CongestionRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        CongestionRecord r;
        r.video_id = io_detail::require(j, "video_id").get<std::string>();
        r.n_tubelets = io_detail::require(j, "n_tubelets").get<int>();
        r.congestion = io_detail::require(j, "congestion").get<double>();
        if (r.n_tubelets < 0 || r.congestion < 0.0 || r.congestion > 1.0) {
            throw DataError("invalid congestion record");
        }
        records.push_back(std::move(r));
    });
    return records;
}

inline void write_congestion(const std::string& path,
                             const std::vector<CongestionRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const CongestionRecord& r : records) {
        out << json{{"video_id", r.video_id},
                    {"n_tubelets", r.n_tubelets},
                    {"congestion", r.congestion}}
                   .dump()
            << '\n';
    }
}

inline void write_stage_plan(const std::string& path, const StagePlan& plan) {
    std::ofstream out = io_detail::open_output(path);
    for (const Stage& s : plan.stages) {
        out << json{{"stage", s.index}, {"member_ids", s.member_ids}}.dump() << '\n';
    }
}

inline StagePlan read_stage_plan(const std::string& path) {
    StagePlan plan;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        Stage s;
        s.index = io_detail::require(j, "stage").get<int>();
        s.member_ids = io_detail::require(j, "member_ids").get<std::vector<std::string>>();
        plan.stages.push_back(std::move(s));
    });
    return plan;
}

// ---------------------------------------------------------------------------
// Predictions.

inline void write_predictions(const std::string& path,
                              const std::vector<PredictionRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const PredictionRecord& r : records) {
        json scores = json::array();
        for (const Selection& s : r.prediction.scores) {
            scores.push_back(json{{"id", s.tubelet_id}, {"score", s.score}});
        }
        out << json{{"video_id", r.video_id},
                    {"tubelet_id", r.prediction.tubelet_id},
                    {"start", r.prediction.span.start},
                    {"end", r.prediction.span.end},
                    {"scores", scores}}
                   .dump()
            << '\n';
    }
}

inline std::vector<PredictionRecord> read_predictions(
    const std::string& path, const std::map<std::string, double>& videos) {
    std::vector<PredictionRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        PredictionRecord r;
        r.video_id = io_detail::require(j, "video_id").get<std::string>();
        r.prediction.tubelet_id = io_detail::require(j, "tubelet_id").get<std::string>();
        r.prediction.span.start = io_detail::require(j, "start").get<int>();
        r.prediction.span.end = io_detail::require(j, "end").get<int>();
        r.prediction.span.fps_sampled = fps_for(videos, r.video_id, "predictions");
        if (j.contains("scores")) {
            for (const json& sj : j["scores"]) {
                r.prediction.scores.push_back({io_detail::require(sj, "id").get<std::string>(),
                                               io_detail::require(sj, "score").get<double>()});
            }
        }
        records.push_back(std::move(r));
    });
    return records;
}

// ---------------------------------------------------------------------------
// SLF results, switch reports, shift records.

inline void write_slf_records(const std::string& path, const std::vector<SlfRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const SlfRecord& r : records) {
        out << json{{"video_id", r.video_id},
                    {"subject_category", to_string(r.subject)},
                    {"kept_ids", r.kept_ids},
                    {"empty_warning", r.empty_warning}}
                   .dump()
            << '\n';
    }
}

inline void write_switch_reports(const std::string& path,
                                 const std::vector<SwitchReportRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const SwitchReportRecord& r : records) {
        json points = json::array();
        for (const SwitchPoint& p : r.report.switch_points) {
            points.push_back(json{{"frame", p.frame}, {"iou", p.iou_across_switch}});
        }
        json runs = json::array();
        for (const SwitchedRun& run : r.report.switched_runs) {
            runs.push_back(json{{"start", run.start_frame},
                                {"end", run.end_frame},
                                {"label", run.label},
                                {"duration_seconds", run.duration_seconds}});
        }
        out << json{{"video_id", r.video_id},
                    {"tubelet_id", r.tubelet_id},
                    {"mode_label", r.report.mode_label},
                    {"switching_fraction", r.report.switching_fraction},
                    {"switch_points", points},
                    {"switched_runs", runs}}
                   .dump()
            << '\n';
    }
}

inline std::vector<ShiftInputRecord> read_shift_records(const std::string& path) {
    std::vector<ShiftInputRecord> records;
    io_detail::for_each_record(path, [&](std::size_t, const json& j) {
        ShiftInputRecord r;
        r.video_id = io_detail::require(j, "video_id").get<std::string>();
        r.trim_side = trim_side_from_string(io_detail::require(j, "trim_side").get<std::string>());
        const json& full = io_detail::require(j, "full");
        const json& trimmed = io_detail::require(j, "trimmed");
        r.full_pred = {io_detail::require(full, "start").get<int>(),
                       io_detail::require(full, "end").get<int>(), 1.0};
        r.trimmed_pred = {io_detail::require(trimmed, "start").get<int>(),
                          io_detail::require(trimmed, "end").get<int>(), 1.0};
        records.push_back(std::move(r));
    });
    return records;
}

inline void write_upper_bounds(const std::string& path,
                               const std::vector<UpperBoundRecord>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const UpperBoundRecord& r : records) {
        json j{{"video_id", r.video_id}, {"viou", r.viou}};
        if (!r.tubelet_id.empty()) {
            j["tubelet_id"] = r.tubelet_id;
        }
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Evaluation outputs.

inline void write_eval_samples(const std::string& path,
                               const std::vector<SampleEval>& records) {
    std::ofstream out = io_detail::open_output(path);
    for (const SampleEval& r : records) {
        out << json{{"video_id", r.video_id}, {"tiou", r.tiou}, {"viou", r.viou}}.dump() << '\n';
    }
}

inline json eval_result_to_json(const EvalResult& result) {
    return json{{"m_tiou", result.m_tiou},
                {"m_viou", result.m_viou},
                {"viou_at", {{"0.1", result.viou_at_01},
                             {"0.3", result.viou_at_03},
                             {"0.5", result.viou_at_05}}},
                {"n_samples", result.n_samples}};
}

inline void write_eval_json(const std::string& path, const EvalResult& result) {
    std::ofstream out = io_detail::open_output(path);
    out << eval_result_to_json(result).dump(2) << '\n';
}

inline std::string eval_result_table(const EvalResult& result) {
    char buf[64];
    std::ostringstream out;
    const auto row = [&](const char* name, double value) {
        std::snprintf(buf, sizeof(buf), "%-10s %8.4f\n", name, value);
        out << buf;
    };
    out << "metric        value\n";
    row("m_tIoU", result.m_tiou);
    row("m_vIoU", result.m_viou);
    row("vIoU@0.1", result.viou_at_01);
    row("vIoU@0.3", result.viou_at_03);
    row("vIoU@0.5", result.viou_at_05);
    std::snprintf(buf, sizeof(buf), "%-10s %8zu\n", "samples", result.n_samples);
    out << buf;
    return out.str();
}

inline void write_eval_table(const std::string& path, const EvalResult& result) {
    std::ofstream out = io_detail::open_output(path);
    out << eval_result_table(result);
}

// ---------------------------------------------------------------------------
// Category lexicon overrides: a JSON object {token: "male"|"female"|"neutral"}.

inline CategoryLexicon read_lexicon(const std::string& path) {
    std::ifstream in = io_detail::open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    CategoryLexicon lex;
    for (const auto& [token, category] : j.items()) {
        lex.tokens[token] = category_from_string(category.get<std::string>());
    }
    return lex;
}

}  // namespace stvg
