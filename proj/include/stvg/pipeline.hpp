#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "stvg/io.hpp"
#include "stvg/tracking.hpp"

namespace stvg {

enum class DenoiseStrategy { drop, add, none };

inline const char* to_string(DenoiseStrategy s) {
    switch (s) {
        case DenoiseStrategy::drop: return "drop";
        case DenoiseStrategy::add: return "add";
        default: return "none";
    }
}

inline DenoiseStrategy denoise_strategy_from_string(const std::string& s) {
    if (s == "drop") return DenoiseStrategy::drop;
    if (s == "add") return DenoiseStrategy::add;
    if (s == "none") return DenoiseStrategy::none;
    throw ConfigError("unknown denoise strategy '" + s + "'");
}

struct SlfParams {
    bool enabled = true;
    bool at_inference = false;
    double variability_min = 0.3;
    std::string lexicon_path;  // empty keeps the built-in lexicon
};

struct DenoiseParams {
    DenoiseStrategy strategy = DenoiseStrategy::drop;
    double min_run_duration_s = 1.0;  // switch-addition extraction threshold
};

struct CgsParams {
    int n_stages = 5;
    double delta = 0.2;
    StageDirection direction = StageDirection::high_to_low;
    bool cumulative = true;
    bool post_slf = true;  // congestion computed on SLF-filtered tubelets
};

struct SatclParams {
    int n_stages = 4;
    bool cumulative = true;
};

struct PipelineConfig {
    int detection_stride = 5;        // original-video frames between samples
    double confidence_floor = 0.4;   // detections below this are dropped
    TrackerParams tracker;
    DenoiseParams denoise;
    SlfParams slf;
    CgsParams cgs;
    SatclParams satcl;
    InferenceParams inference;
    ScorerKind scorer = ScorerKind::mean_confidence;
    int workers = 1;
};

namespace pipeline_detail {

inline void check_known_keys(const json& j, const std::set<std::string>& known,
                             const std::string& scope) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw ConfigError("unknown config key '" + scope + key + "'");
        }
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j[key].template get<T>();
    }
}

}  // namespace pipeline_detail

inline PipelineConfig config_from_json(const json& j) {
    using pipeline_detail::check_known_keys;
    using pipeline_detail::maybe;

    PipelineConfig c;
    check_known_keys(j, {"detection_stride", "confidence_floor", "tracker", "denoise", "slf",
                         "cgs", "satcl", "inference", "scorer", "workers"},
                     "");
    maybe(j, "detection_stride", c.detection_stride);
    maybe(j, "confidence_floor", c.confidence_floor);
    if (j.contains("tracker")) {
        const json& t = j["tracker"];
        check_known_keys(t, {"iou_min", "max_gap", "min_track_len"}, "tracker.");
        maybe(t, "iou_min", c.tracker.iou_min);
        maybe(t, "max_gap", c.tracker.max_gap);
        maybe(t, "min_track_len", c.tracker.min_track_len);
    }
    if (j.contains("denoise")) {
        const json& d = j["denoise"];
        check_known_keys(d, {"strategy", "min_run_duration_s"}, "denoise.");
        if (d.contains("strategy")) {
            c.denoise.strategy = denoise_strategy_from_string(d["strategy"].get<std::string>());
        }
        maybe(d, "min_run_duration_s", c.denoise.min_run_duration_s);
    }
    if (j.contains("slf")) {
        const json& s = j["slf"];
        check_known_keys(s, {"enabled", "at_inference", "variability_min", "lexicon"}, "slf.");
        maybe(s, "enabled", c.slf.enabled);
        maybe(s, "at_inference", c.slf.at_inference);
        maybe(s, "variability_min", c.slf.variability_min);
        maybe(s, "lexicon", c.slf.lexicon_path);
    }
    if (j.contains("cgs")) {
        const json& g = j["cgs"];
        check_known_keys(g, {"n_stages", "delta", "direction", "cumulative", "post_slf"}, "cgs.");
        maybe(g, "n_stages", c.cgs.n_stages);
        maybe(g, "delta", c.cgs.delta);
        if (g.contains("direction")) {
            c.cgs.direction = stage_direction_from_string(g["direction"].get<std::string>());
        }
        maybe(g, "cumulative", c.cgs.cumulative);
        maybe(g, "post_slf", c.cgs.post_slf);
    }
    if (j.contains("satcl")) {
        const json& s = j["satcl"];
        check_known_keys(s, {"n_stages", "cumulative"}, "satcl.");
        maybe(s, "n_stages", c.satcl.n_stages);
        maybe(s, "cumulative", c.satcl.cumulative);
    }
    if (j.contains("inference")) {
        const json& i = j["inference"];
        check_known_keys(i, {"t_filt", "mode", "fill_stride"}, "inference.");
        maybe(i, "t_filt", c.inference.t_filt);
        if (i.contains("mode")) {
            c.inference.mode = trim_mode_from_string(i["mode"].get<std::string>());
        }
        maybe(i, "fill_stride", c.inference.fill_stride);
    }
    if (j.contains("scorer")) {
        c.scorer = scorer_from_string(j["scorer"].get<std::string>());
    }
    maybe(j, "workers", c.workers);

    if (c.detection_stride < 1 || c.confidence_floor < 0.0 || c.confidence_floor > 1.0 ||
        c.tracker.iou_min <= 0.0 || c.tracker.iou_min > 1.0 || c.tracker.max_gap < 0 ||
        c.tracker.min_track_len < 1 || c.denoise.min_run_duration_s <= 0.0 ||
        c.inference.t_filt < 0.0 || c.inference.t_filt > 1.0 || c.inference.fill_stride < 1 ||
        c.workers < 1) {
        throw ConfigError("configuration value out of range");
    }
    return c;
}

inline PipelineConfig read_config(const std::string& path) {
    std::ifstream in = io_detail::open_input(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

inline json config_to_json(const PipelineConfig& c) {
    return json{
        {"detection_stride", c.detection_stride},
        {"confidence_floor", c.confidence_floor},
        {"tracker",
         {{"iou_min", c.tracker.iou_min},
          {"max_gap", c.tracker.max_gap},
          {"min_track_len", c.tracker.min_track_len}}},
        {"denoise",
         {{"strategy", to_string(c.denoise.strategy)},
          {"min_run_duration_s", c.denoise.min_run_duration_s}}},
        {"slf",
         {{"enabled", c.slf.enabled},
          {"at_inference", c.slf.at_inference},
          {"variability_min", c.slf.variability_min},
          {"lexicon", c.slf.lexicon_path}}},
        {"cgs",
         {{"n_stages", c.cgs.n_stages},
          {"delta", c.cgs.delta},
          {"direction", to_string(c.cgs.direction)},
          {"cumulative", c.cgs.cumulative},
          {"post_slf", c.cgs.post_slf}}},
        {"satcl", {{"n_stages", c.satcl.n_stages}, {"cumulative", c.satcl.cumulative}}},
        {"inference",
         {{"t_filt", c.inference.t_filt},
          {"mode", to_string(c.inference.mode)},
          {"fill_stride", c.inference.fill_stride}}},
        {"scorer", to_string(c.scorer)},
        {"workers", c.workers}};
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Hash of the semantic configuration. The worker count only affects
/// scheduling, never results, so it is excluded.
inline std::string config_hash(const PipelineConfig& c) {
    json j = config_to_json(c);
    j.erase("workers");
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

/// Run fn(0..n-1) on up to `workers` threads. Work items must write only to
/// their own result slot; the first exception is rethrown after all threads
/// join.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const std::size_t thread_count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t t = 0; t < thread_count; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) {
                    return;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

struct PipelineInputs {
    std::string detections_path;
    std::string queries_path;
    std::string videos_path;
    std::string annotations_path;  // optional
    std::string trm_spans_path;    // optional; absent uses the full-span stub
};

struct PipelineResult {
    bool no_data = false;
    std::map<std::string, std::size_t> record_counts;
    std::vector<std::string> warnings;
    std::string config_hash;
};

/**
 * Full pipeline: track -> denoise -> congestion (+SLF) -> stage plans
 * -> joint inference -> evaluation. Writes JSONL stage outputs plus a
 * manifest into out_dir. Outputs are sorted by stable keys, so results are
 * identical for any worker count.
 */
inline PipelineResult run_pipeline(const PipelineConfig& config, const PipelineInputs& inputs,
                                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto out_path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    PipelineResult result;
    result.config_hash = config_hash(config);

    const std::map<std::string, double> videos = read_video_metas(inputs.videos_path);
    const std::vector<DetectionRecord> detections = read_detections(inputs.detections_path);
    const auto grouped = group_detections(detections, videos);
    std::vector<QueryRecord> queries = read_queries(inputs.queries_path);

    std::vector<GroundTruthAnnotation> annotations;
    if (!inputs.annotations_path.empty()) {
        annotations = read_annotations(inputs.annotations_path, videos);
    }
    std::map<std::string, TemporalSpan> trm_spans;
    if (!inputs.trm_spans_path.empty()) {
        for (const TrmSpanRecord& r : read_trm_spans(inputs.trm_spans_path, videos)) {
            trm_spans[r.video_id] = r.span;
        }
    }
    for (const QueryRecord& q : queries) {
        fps_for(videos, q.video_id, "queries");
    }
    for (const GroundTruthAnnotation& a : annotations) {
        fps_for(videos, a.video_id, "annotations");
    }

    const CategoryLexicon lexicon = config.slf.lexicon_path.empty()
                                        ? CategoryLexicon::defaults()
                                        : read_lexicon(config.slf.lexicon_path);

    // --- Track and denoise, one video at a time. ---
    std::vector<std::string> video_ids;
    for (const auto& [video_id, frames] : grouped) {
        video_ids.push_back(video_id);
    }
    std::vector<std::vector<Tubelet>> tracked(video_ids.size());
    std::vector<std::vector<Tubelet>> denoised(video_ids.size());
    parallel_for(video_ids.size(), config.workers, [&](std::size_t i) {
        const std::string& video_id = video_ids[i];
        std::map<int, std::vector<Detection>> frames;
        for (const auto& [frame, dets] : grouped.at(video_id)) {
            std::vector<Detection> kept;
            for (const Detection& d : dets) {
                if (d.confidence >= config.confidence_floor) {
                    kept.push_back(d);
                }
            }
            if (!kept.empty()) {
                frames.emplace(frame, std::move(kept));
            }
        }
        tracked[i] = link_detections(frames, config.tracker, videos.at(video_id));

        for (const Tubelet& t : tracked[i]) {
            // Denoising targets conflicting-combination tubelets only.
            if (config.denoise.strategy == DenoiseStrategy::none ||
                !has_conflicting_labels(t, lexicon)) {
                denoised[i].push_back(t);
                continue;
            }
            if (config.denoise.strategy == DenoiseStrategy::drop) {
                denoised[i].push_back(denoise_switch_dropping(t));
            } else {
                for (Tubelet& piece :
                     denoise_switch_addition(t, config.denoise.min_run_duration_s)) {
                    if (!piece.detections.empty()) {
                        denoised[i].push_back(std::move(piece));
                    }
                }
            }
        }
        std::sort(denoised[i].begin(), denoised[i].end(), [](const Tubelet& a, const Tubelet& b) {
            const int fa = a.detections.front().frame;
            const int fb = b.detections.front().frame;
            if (fa != fb) return fa < fb;
            return a.id < b.id;
        });
    });

    std::map<std::string, std::vector<Tubelet>> tubelets_by_video;
    std::vector<TubeletRecord> tracked_records;
    std::vector<TubeletRecord> denoised_records;
    for (std::size_t i = 0; i < video_ids.size(); ++i) {
        for (const Tubelet& t : tracked[i]) {
            tracked_records.push_back({video_ids[i], t});
        }
        for (const Tubelet& t : denoised[i]) {
            denoised_records.push_back({video_ids[i], t});
        }
        tubelets_by_video[video_ids[i]] = denoised[i];
    }

    // --- Samples: one per query, id unique via a suffix when a video carries
    // several queries. ---
    std::map<std::string, int> query_count;
    for (const QueryRecord& q : queries) {
        ++query_count[q.video_id];
    }
    struct Sample {
        std::string sample_id;
        const QueryRecord* query;
    };
    std::vector<Sample> samples;
    std::map<std::string, int> seen;
    for (const QueryRecord& q : queries) {
        std::string sample_id = q.video_id;
        if (query_count[q.video_id] > 1) {
            sample_id += "#" + std::to_string(seen[q.video_id]++);
        }
        samples.push_back({std::move(sample_id), &q});
    }
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });

    // --- Congestion per sample (post-SLF when enabled). ---
    std::vector<CongestionRecord> congestion_records;
    for (const Sample& s : samples) {
        const auto it = tubelets_by_video.find(s.query->video_id);
        if (it == tubelets_by_video.end() || it->second.empty()) {
            result.warnings.push_back("sample '" + s.sample_id +
                                      "': no tubelets, skipped in congestion");
            continue;
        }
        std::vector<Tubelet> pool = it->second;
        if (config.slf.enabled && config.cgs.post_slf) {
            std::vector<Tubelet> filtered =
                slf_filter(pool, s.query->subject_phrase, lexicon, config.slf.variability_min);
            if (filtered.empty()) {
                result.warnings.push_back("sample '" + s.sample_id +
                                          "': SLF kept no tubelets, congestion uses all");
            } else {
                pool = std::move(filtered);
            }
        }
        congestion_records.push_back(
            {s.sample_id, static_cast<int>(pool.size()), congestion(pool)});
    }

    // --- Curriculum stages. ---
    StagePlan cgs_plan;
    if (!congestion_records.empty()) {
        cgs_plan = cgs_stage_assignment(congestion_records, config.cgs.n_stages, config.cgs.delta,
                                        config.cgs.direction, config.cgs.cumulative);
    }
    SatclAssignment satcl =
        satcl_stage_assignment(queries, config.satcl.n_stages, config.satcl.cumulative);
    for (const std::string& d : satcl.diagnostics) {
        result.warnings.push_back("satcl: " + d);
    }

    // --- Joint inference per sample. ---
    struct SampleOutput {
        bool ok = false;
        PredictionRecord prediction;
        std::vector<std::string> warnings;
    };
    std::vector<SampleOutput> outputs(samples.size());
    parallel_for(samples.size(), config.workers, [&](std::size_t i) {
        const Sample& s = samples[i];
        SampleOutput& out = outputs[i];
        const auto it = tubelets_by_video.find(s.query->video_id);
        if (it == tubelets_by_video.end() || it->second.empty()) {
            out.warnings.push_back("sample '" + s.sample_id + "': no tubelets, skipped");
            return;
        }
        const std::vector<Tubelet>& pool = it->second;

        TemporalSpan trm_span;
        const auto span_it = trm_spans.find(s.query->video_id);
        if (span_it != trm_spans.end()) {
            trm_span = span_it->second;
        } else {
            // Full-span stub: inference degenerates to pure spatial grounding.
            trm_span = {pool.front().span().start, pool.front().span().end,
                        videos.at(s.query->video_id)};
            for (const Tubelet& t : pool) {
                trm_span.start = std::min(trm_span.start, t.span().start);
                trm_span.end = std::max(trm_span.end, t.span().end);
            }
        }

        std::vector<Tubelet> candidates = select_candidates(pool, trm_span, config.inference);
        if (candidates.empty()) {
            out.warnings.push_back("sample '" + s.sample_id +
                                   "': no candidates, falling back to all tubelets");
            candidates = pool;
        }
        if (config.slf.enabled && config.slf.at_inference) {
            std::vector<Tubelet> filtered = slf_filter(
                candidates, s.query->subject_phrase, lexicon, config.slf.variability_min);
            if (filtered.empty()) {
                out.warnings.push_back("sample '" + s.sample_id +
                                       "': SLF kept no candidates, ignored");
            } else {
                candidates = std::move(filtered);
            }
        }
        out.prediction.video_id = s.sample_id;
        out.prediction.prediction = detail::score_and_select(
            candidates, trm_span, config.scorer, s.query->query_embedding, config.inference);
        out.ok = true;
    });

    std::vector<PredictionRecord> predictions;
    for (SampleOutput& out : outputs) {
        for (std::string& w : out.warnings) {
            result.warnings.push_back(std::move(w));
        }
        if (out.ok) {
            predictions.push_back(std::move(out.prediction));
        }
    }

    // --- Evaluation against ground truth, when provided. ---
    std::vector<SampleEval> eval_samples;
    std::optional<EvalResult> eval;
    if (!annotations.empty()) {
        std::map<std::string, const GroundTruthAnnotation*> gt_by_video;
        for (const GroundTruthAnnotation& a : annotations) {
            gt_by_video[a.video_id] = &a;
        }
        for (const PredictionRecord& p : predictions) {
            const std::string video_id =
                p.video_id.substr(0, p.video_id.find('#'));  // strip sample suffix
            const auto git = gt_by_video.find(video_id);
            if (git == gt_by_video.end()) {
                result.warnings.push_back("sample '" + p.video_id + "': no annotation, skipped");
                continue;
            }
            const Tubelet* predicted = nullptr;
            for (const Tubelet& t : tubelets_by_video.at(video_id)) {
                if (t.id == p.prediction.tubelet_id) {
                    predicted = &t;
                    break;
                }
            }
            if (!predicted) {
                result.warnings.push_back("sample '" + p.video_id + "': predicted tubelet '" +
                                          p.prediction.tubelet_id + "' not found");
                continue;
            }
            const Tubelet dense = interpolate_tubelet(*predicted, 1);
            eval_samples.push_back({p.video_id,
                                    tiou_metric(p.prediction.span, git->second->span),
                                    viou_metric(dense, p.prediction.span, *git->second)});
        }
        if (!eval_samples.empty()) {
            eval = aggregate_eval(eval_samples);
        }
    }

    // --- Write everything. ---
    write_tubelets(out_path("tubelets.jsonl"), tracked_records);
    write_tubelets(out_path("tubelets_denoised.jsonl"), denoised_records);
    write_congestion(out_path("congestion.jsonl"), congestion_records);
    write_stage_plan(out_path("stages_cgs.jsonl"), cgs_plan);
    write_stage_plan(out_path("stages_satcl.jsonl"), satcl.plan);
    write_predictions(out_path("predictions.jsonl"), predictions);
    if (eval) {
        write_eval_samples(out_path("eval_samples.jsonl"), eval_samples);
        write_eval_json(out_path("eval.json"), *eval);
        write_eval_table(out_path("eval.txt"), *eval);
    }

    result.record_counts = {
        {"detections", detections.size()},
        {"videos", videos.size()},
        {"queries", queries.size()},
        {"tubelets", tracked_records.size()},
        {"tubelets_denoised", denoised_records.size()},
        {"congestion", congestion_records.size()},
        {"stages_cgs", cgs_plan.stages.size()},
        {"stages_satcl", satcl.plan.stages.size()},
        {"predictions", predictions.size()},
        {"eval_samples", eval_samples.size()},
    };

    json manifest{{"config_hash", result.config_hash}, {"records", json::object()}};
    for (const auto& [name, count] : result.record_counts) {
        manifest["records"][name] = count;
    }
    std::ofstream manifest_out = io_detail::open_output(out_path("manifest.json"));
    manifest_out << manifest.dump(2) << '\n';

    result.no_data = detections.empty();
    return result;
}

}  // namespace stvg
