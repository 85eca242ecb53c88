// stvg: spatio-temporal grounding pipeline over per-frame detections and
// textual query records. Each pipeline stage is exposed as a subcommand;
// `run` chains them and writes a manifest.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stvg/evaluation.hpp"
#include "stvg/fixture.hpp"
#include "stvg/io.hpp"
#include "stvg/pipeline.hpp"
#include "stvg/tracking.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitConfigError = 2;

stvg::CategoryLexicon load_lexicon(const std::string& path) {
    return path.empty() ? stvg::CategoryLexicon::defaults() : stvg::read_lexicon(path);
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

int resolve_workers(int flag_value, bool flag_given, int config_value) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("STVG_WORKERS")) {
        try {
            const int parsed = std::stoi(env);
            if (parsed >= 1) return parsed;
        } catch (const std::exception&) {
        }
        throw stvg::ConfigError("STVG_WORKERS must be a positive integer");
    }
    return config_value;
}

struct TubeletsByVideo {
    std::map<std::string, double> videos;
    std::map<std::string, std::vector<stvg::Tubelet>> by_video;
};

TubeletsByVideo load_tubelets(const std::string& tubelets_path, const std::string& videos_path) {
    TubeletsByVideo out;
    out.videos = stvg::read_video_metas(videos_path);
    for (auto& record : stvg::read_tubelets(tubelets_path, out.videos)) {
        out.by_video[record.video_id].push_back(std::move(record.tubelet));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal grounding pipeline"};
    app.require_subcommand(1);

    // --- track ---
    auto* track = app.add_subcommand("track", "Link per-frame detections into tubelets");
    std::string track_detections, track_videos, track_out;
    stvg::TrackerParams tracker_params;
    double track_floor = 0.4;
    track->add_option("--detections", track_detections, "Detections JSONL")->required();
    track->add_option("--videos", track_videos, "Videos sidecar JSONL")->required();
    track->add_option("--out", track_out, "Output tubelets JSONL")->required();
    track->add_option("--iou-min", tracker_params.iou_min, "Association IoU floor");
    track->add_option("--max-gap", tracker_params.max_gap, "Frames a track may miss");
    track->add_option("--min-track-len", tracker_params.min_track_len, "Minimum detections");
    track->add_option("--confidence-floor", track_floor, "Drop detections below this");

    // --- denoise ---
    auto* denoise = app.add_subcommand("denoise", "Apply soft-label switch denoising");
    std::string den_tubelets, den_videos, den_out, den_strategy = "drop", den_lexicon,
                                                   den_report;
    double den_min_duration = 1.0;
    denoise->add_option("--tubelets", den_tubelets, "Tubelets JSONL")->required();
    denoise->add_option("--videos", den_videos, "Videos sidecar JSONL")->required();
    denoise->add_option("--out", den_out, "Output tubelets JSONL")->required();
    denoise->add_option("--strategy", den_strategy, "drop, add or none");
    denoise->add_option("--min-run-duration", den_min_duration,
                        "Switch-addition extraction threshold, seconds");
    denoise->add_option("--lexicon", den_lexicon, "Category lexicon JSON");
    denoise->add_option("--switch-report", den_report, "Optional switching report JSONL");

    // --- slf ---
    auto* slf = app.add_subcommand("slf", "Soft-label filtering per query");
    std::string slf_tubelets, slf_videos, slf_queries, slf_out, slf_lexicon;
    double slf_variability = 0.3;
    slf->add_option("--tubelets", slf_tubelets, "Tubelets JSONL")->required();
    slf->add_option("--videos", slf_videos, "Videos sidecar JSONL")->required();
    slf->add_option("--queries", slf_queries, "Queries JSONL")->required();
    slf->add_option("--out", slf_out, "Output SLF records JSONL")->required();
    slf->add_option("--lexicon", slf_lexicon, "Category lexicon JSON");
    slf->add_option("--variability-min", slf_variability, "Always-include switching fraction");

    // --- congestion ---
    auto* cong = app.add_subcommand("congestion", "Average pairwise temporal IoU per video");
    std::string cong_tubelets, cong_videos, cong_out, cong_queries, cong_lexicon;
    bool cong_post_slf = false;
    double cong_variability = 0.3;
    cong->add_option("--tubelets", cong_tubelets, "Tubelets JSONL")->required();
    cong->add_option("--videos", cong_videos, "Videos sidecar JSONL")->required();
    cong->add_option("--out", cong_out, "Output congestion JSONL")->required();
    cong->add_option("--queries", cong_queries, "Queries JSONL (required with --post-slf)");
    cong->add_flag("--post-slf", cong_post_slf, "Filter tubelets with SLF first");
    cong->add_option("--lexicon", cong_lexicon, "Category lexicon JSON");
    cong->add_option("--variability-min", cong_variability, "SLF always-include fraction");

    // --- stage-cgs ---
    auto* stage_cgs = app.add_subcommand("stage-cgs", "Congestion-guided spatial stages");
    std::string cgs_in, cgs_out, cgs_direction = "high_to_low";
    int cgs_stages = 5;
    double cgs_delta = 0.2;
    bool cgs_cumulative = true;
    stage_cgs->add_option("--congestion", cgs_in, "Congestion JSONL")->required();
    stage_cgs->add_option("--out", cgs_out, "Output stage plan JSONL")->required();
    stage_cgs->add_option("--n-stages", cgs_stages, "Stage count");
    stage_cgs->add_option("--delta", cgs_delta, "Per-stage threshold step");
    stage_cgs->add_option("--direction", cgs_direction, "high_to_low or low_to_high");
    stage_cgs->add_flag("--cumulative,!--no-cumulative", cgs_cumulative,
                        "Stages include earlier members");

    // --- stage-satcl ---
    auto* stage_satcl = app.add_subcommand("stage-satcl", "Sub-action temporal stages");
    std::string satcl_in, satcl_out;
    int satcl_stages = 4;
    bool satcl_cumulative = true;
    stage_satcl->add_option("--queries", satcl_in, "Queries JSONL")->required();
    stage_satcl->add_option("--out", satcl_out, "Output stage plan JSONL")->required();
    stage_satcl->add_option("--n-stages", satcl_stages, "Stage count");
    stage_satcl->add_flag("--cumulative,!--no-cumulative", satcl_cumulative,
                          "Stages include earlier members");

    // --- ground ---
    auto* ground_cmd = app.add_subcommand("ground", "Joint spatio-temporal inference");
    std::string g_tubelets, g_videos, g_queries, g_out, g_trm, g_scorer = "mean_confidence",
                                                           g_mode = "filter_and_trim",
                                                           g_lexicon;
    stvg::InferenceParams g_params;
    bool g_slf = false;
    double g_variability = 0.3;
    ground_cmd->add_option("--tubelets", g_tubelets, "Tubelets JSONL")->required();
    ground_cmd->add_option("--videos", g_videos, "Videos sidecar JSONL")->required();
    ground_cmd->add_option("--queries", g_queries, "Queries JSONL")->required();
    ground_cmd->add_option("--out", g_out, "Output predictions JSONL")->required();
    ground_cmd->add_option("--trm-spans", g_trm,
                           "Predicted spans JSONL; absent uses the full-span stub");
    ground_cmd->add_option("--scorer", g_scorer, "mean_confidence or embedding_sim");
    ground_cmd->add_option("--t-filt", g_params.t_filt, "Candidate temporal IoU floor");
    ground_cmd->add_option("--mode", g_mode, "filter_and_trim or filter_only");
    ground_cmd->add_option("--fill-stride", g_params.fill_stride, "Interpolation grid step");
    ground_cmd->add_flag("--slf-at-inference", g_slf, "Apply SLF to the candidates");
    ground_cmd->add_option("--lexicon", g_lexicon, "Category lexicon JSON");
    ground_cmd->add_option("--variability-min", g_variability, "SLF always-include fraction");

    // --- eval ---
    auto* eval_cmd = app.add_subcommand("eval", "Grounding metrics against annotations");
    std::string e_predictions, e_tubelets, e_videos, e_annotations, e_json, e_table, e_samples;
    eval_cmd->add_option("--predictions", e_predictions, "Predictions JSONL")->required();
    eval_cmd->add_option("--tubelets", e_tubelets, "Tubelets JSONL")->required();
    eval_cmd->add_option("--videos", e_videos, "Videos sidecar JSONL")->required();
    eval_cmd->add_option("--annotations", e_annotations, "Annotations JSONL")->required();
    eval_cmd->add_option("--out-json", e_json, "Corpus metrics JSON")->required();
    eval_cmd->add_option("--out-table", e_table, "Aligned text table");
    eval_cmd->add_option("--per-sample", e_samples, "Per-sample metrics JSONL");

    // --- upper-bound ---
    auto* ub = app.add_subcommand("upper-bound", "Detection or tubelet oracle bounds");
    std::string ub_kind = "tubelet", ub_detections, ub_tubelets, ub_videos, ub_annotations,
                ub_out;
    ub->add_option("--kind", ub_kind, "detection or tubelet");
    ub->add_option("--detections", ub_detections, "Detections JSONL (kind=detection)");
    ub->add_option("--tubelets", ub_tubelets, "Tubelets JSONL (kind=tubelet)");
    ub->add_option("--videos", ub_videos, "Videos sidecar JSONL")->required();
    ub->add_option("--annotations", ub_annotations, "Annotations JSONL")->required();
    ub->add_option("--out", ub_out, "Output JSONL")->required();

    // --- shift-analysis ---
    auto* shift = app.add_subcommand("shift-analysis", "Trimmed-query midpoint shifts");
    std::string sh_records, sh_out, sh_per_record;
    double sh_eps = 0.5;
    shift->add_option("--records", sh_records, "Shift records JSONL")->required();
    shift->add_option("--out", sh_out, "Report JSON")->required();
    shift->add_option("--per-record", sh_per_record, "Classified records JSONL");
    shift->add_option("--eps-frames", sh_eps, "Midpoint equality tolerance, frames");

    // --- fixture ---
    auto* fixture = app.add_subcommand("fixture", "Generate a synthetic corpus");
    std::string fx_out;
    stvg::FixtureSpec fx_spec;
    std::vector<std::string> fx_kinds;
    fixture->add_option("--out-dir", fx_out, "Output directory")->required();
    fixture->add_option("--videos-count", fx_spec.n_videos, "Number of videos");
    fixture->add_option("--actors", fx_spec.actors_per_video, "Actors per video");
    fixture->add_option("--noise", fx_spec.label_noise_rate, "Label noise rate");
    fixture->add_option("--seed", fx_spec.seed, "Random seed");
    fixture->add_option("--frames", fx_spec.n_frames, "Sampled frames per video");
    fixture->add_option("--fps", fx_spec.fps_sampled, "Sampled frames per second");
    fixture->add_option("--kinds", fx_kinds, "Trajectory kinds (stationary linear crossing)");

    // --- run ---
    auto* run = app.add_subcommand("run", "Full pipeline with a manifest");
    std::string r_config, r_detections, r_queries, r_videos, r_annotations, r_trm, r_out;
    int r_workers = 1;
    run->add_option("--config", r_config, "Pipeline config JSON");
    run->add_option("--detections", r_detections, "Detections JSONL")->required();
    run->add_option("--queries", r_queries, "Queries JSONL")->required();
    run->add_option("--videos", r_videos, "Videos sidecar JSONL")->required();
    run->add_option("--annotations", r_annotations, "Annotations JSONL");
    run->add_option("--trm-spans", r_trm, "Predicted spans JSONL");
    run->add_option("--out-dir", r_out, "Output directory")->required();
    auto* workers_opt = run->add_option("--workers", r_workers, "Worker pool size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*track) {
            const auto videos = stvg::read_video_metas(track_videos);
            const auto grouped =
                stvg::group_detections(stvg::read_detections(track_detections), videos);
            std::vector<stvg::TubeletRecord> records;
            for (const auto& [video_id, all_frames] : grouped) {
                std::map<int, std::vector<stvg::Detection>> frames;
                for (const auto& [frame, dets] : all_frames) {
                    std::vector<stvg::Detection> kept;
                    for (const auto& d : dets) {
                        if (d.confidence >= track_floor) kept.push_back(d);
                    }
                    if (!kept.empty()) frames.emplace(frame, std::move(kept));
                }
                for (auto& t :
                     stvg::link_detections(frames, tracker_params, videos.at(video_id))) {
                    records.push_back({video_id, std::move(t)});
                }
            }
            stvg::write_tubelets(track_out, records);
            std::cout << "wrote " << records.size() << " tubelets to " << track_out << '\n';
        } else if (*denoise) {
            const auto strategy = stvg::denoise_strategy_from_string(den_strategy);
            const auto lexicon = load_lexicon(den_lexicon);
            const auto loaded = load_tubelets(den_tubelets, den_videos);
            std::vector<stvg::TubeletRecord> out;
            std::vector<stvg::SwitchReportRecord> reports;
            for (const auto& [video_id, tubelets] : loaded.by_video) {
                for (const auto& t : tubelets) {
                    if (!den_report.empty()) {
                        reports.push_back({video_id, t.id, stvg::analyze_switching(t)});
                    }
                    if (strategy == stvg::DenoiseStrategy::none ||
                        !stvg::has_conflicting_labels(t, lexicon)) {
                        out.push_back({video_id, t});
                    } else if (strategy == stvg::DenoiseStrategy::drop) {
                        out.push_back({video_id, stvg::denoise_switch_dropping(t)});
                    } else {
                        for (auto& piece : stvg::denoise_switch_addition(t, den_min_duration)) {
                            if (!piece.detections.empty()) {
                                out.push_back({video_id, std::move(piece)});
                            }
                        }
                    }
                }
            }
            stvg::write_tubelets(den_out, out);
            if (!den_report.empty()) {
                stvg::write_switch_reports(den_report, reports);
            }
            std::cout << "wrote " << out.size() << " tubelets to " << den_out << '\n';
        } else if (*slf) {
            const auto lexicon = load_lexicon(slf_lexicon);
            const auto loaded = load_tubelets(slf_tubelets, slf_videos);
            std::vector<stvg::SlfRecord> records;
            for (const auto& q : stvg::read_queries(slf_queries)) {
                const auto it = loaded.by_video.find(q.video_id);
                const std::vector<stvg::Tubelet> pool =
                    it == loaded.by_video.end() ? std::vector<stvg::Tubelet>{} : it->second;
                const auto kept =
                    stvg::slf_filter(pool, q.subject_phrase, lexicon, slf_variability);
                stvg::SlfRecord record;
                record.video_id = q.video_id;
                record.subject = stvg::subject_category(q.subject_phrase, lexicon);
                for (const auto& t : kept) record.kept_ids.push_back(t.id);
                record.empty_warning = kept.empty();
                if (record.empty_warning) {
                    warn("slf kept no tubelets for video '" + q.video_id + "'");
                }
                records.push_back(std::move(record));
            }
            stvg::write_slf_records(slf_out, records);
        } else if (*cong) {
            const auto loaded = load_tubelets(cong_tubelets, cong_videos);
            const auto lexicon = load_lexicon(cong_lexicon);
            std::map<std::string, const stvg::QueryRecord*> query_by_video;
            std::vector<stvg::QueryRecord> queries;
            if (cong_post_slf) {
                if (cong_queries.empty()) {
                    throw stvg::ConfigError("--post-slf requires --queries");
                }
                queries = stvg::read_queries(cong_queries);
                for (const auto& q : queries) query_by_video[q.video_id] = &q;
            }
            std::vector<stvg::CongestionRecord> records;
            for (const auto& [video_id, tubelets] : loaded.by_video) {
                std::vector<stvg::Tubelet> pool = tubelets;
                if (cong_post_slf) {
                    const auto qit = query_by_video.find(video_id);
                    if (qit != query_by_video.end()) {
                        auto filtered = stvg::slf_filter(pool, qit->second->subject_phrase,
                                                         lexicon, cong_variability);
                        if (!filtered.empty()) pool = std::move(filtered);
                    }
                }
                if (pool.empty()) {
                    warn("video '" + video_id + "' has no tubelets, skipped");
                    continue;
                }
                records.push_back(
                    {video_id, static_cast<int>(pool.size()), stvg::congestion(pool)});
            }
            stvg::write_congestion(cong_out, records);
        } else if (*stage_cgs) {
            const auto plan = stvg::cgs_stage_assignment(
                stvg::read_congestion(cgs_in), cgs_stages, cgs_delta,
                stvg::stage_direction_from_string(cgs_direction), cgs_cumulative);
            stvg::write_stage_plan(cgs_out, plan);
        } else if (*stage_satcl) {
            const auto assignment = stvg::satcl_stage_assignment(
                stvg::read_queries(satcl_in), satcl_stages, satcl_cumulative);
            for (const auto& d : assignment.diagnostics) {
                warn("satcl: " + d);
            }
            stvg::write_stage_plan(satcl_out, assignment.plan);
        } else if (*ground_cmd) {
            g_params.mode = stvg::trim_mode_from_string(g_mode);
            const auto scorer = stvg::scorer_from_string(g_scorer);
            const auto lexicon = load_lexicon(g_lexicon);
            const auto loaded = load_tubelets(g_tubelets, g_videos);
            std::map<std::string, stvg::TemporalSpan> trm_spans;
            if (!g_trm.empty()) {
                for (const auto& r : stvg::read_trm_spans(g_trm, loaded.videos)) {
                    trm_spans[r.video_id] = r.span;
                }
            }
            std::vector<stvg::PredictionRecord> predictions;
            for (const auto& q : stvg::read_queries(g_queries)) {
                const auto it = loaded.by_video.find(q.video_id);
                if (it == loaded.by_video.end() || it->second.empty()) {
                    warn("video '" + q.video_id + "' has no tubelets, skipped");
                    continue;
                }
                const auto& pool = it->second;
                stvg::TemporalSpan trm_span;
                const auto sit = trm_spans.find(q.video_id);
                if (sit != trm_spans.end()) {
                    trm_span = sit->second;
                } else {
                    trm_span = pool.front().span();
                    for (const auto& t : pool) {
                        trm_span.start = std::min(trm_span.start, t.span().start);
                        trm_span.end = std::max(trm_span.end, t.span().end);
                    }
                }
                auto candidates = stvg::select_candidates(pool, trm_span, g_params);
                if (candidates.empty()) {
                    warn("video '" + q.video_id + "': no candidates, using all tubelets");
                    candidates = pool;
                }
                if (g_slf) {
                    auto filtered = stvg::slf_filter(candidates, q.subject_phrase, lexicon,
                                                     g_variability);
                    if (filtered.empty()) {
                        warn("video '" + q.video_id + "': slf kept no candidates, ignored");
                    } else {
                        candidates = std::move(filtered);
                    }
                }
                predictions.push_back(
                    {q.video_id, stvg::detail::score_and_select(candidates, trm_span, scorer,
                                                                q.query_embedding, g_params)});
            }
            stvg::write_predictions(g_out, predictions);
            std::cout << "wrote " << predictions.size() << " predictions to " << g_out << '\n';
        } else if (*eval_cmd) {
            const auto loaded = load_tubelets(e_tubelets, e_videos);
            const auto annotations = stvg::read_annotations(e_annotations, loaded.videos);
            std::map<std::string, const stvg::GroundTruthAnnotation*> gt_by_video;
            for (const auto& a : annotations) gt_by_video[a.video_id] = &a;
            std::vector<stvg::SampleEval> samples;
            for (const auto& p : stvg::read_predictions(e_predictions, loaded.videos)) {
                const auto git = gt_by_video.find(p.video_id);
                if (git == gt_by_video.end()) {
                    warn("prediction for '" + p.video_id + "' has no annotation, skipped");
                    continue;
                }
                const stvg::Tubelet* predicted = nullptr;
                for (const auto& t : loaded.by_video.at(p.video_id)) {
                    if (t.id == p.prediction.tubelet_id) predicted = &t;
                }
                if (!predicted) {
                    throw stvg::DataError("prediction references unknown tubelet '" +
                                          p.prediction.tubelet_id + "'");
                }
                std::size_t missing = 0;
                const auto dense = stvg::interpolate_tubelet(*predicted, 1);
                const double viou =
                    stvg::viou_metric(dense, p.prediction.span, *git->second, &missing);
                if (missing > 0) {
                    warn("prediction for '" + p.video_id + "' is missing " +
                         std::to_string(missing) + " boxes inside the overlap");
                }
                samples.push_back({p.video_id,
                                   stvg::tiou_metric(p.prediction.span, git->second->span),
                                   viou});
            }
            const auto result = stvg::aggregate_eval(samples);
            stvg::write_eval_json(e_json, result);
            if (!e_table.empty()) stvg::write_eval_table(e_table, result);
            if (!e_samples.empty()) stvg::write_eval_samples(e_samples, samples);
            std::cout << stvg::eval_result_table(result);
        } else if (*ub) {
            std::vector<stvg::UpperBoundRecord> records;
            double total = 0.0;
            if (ub_kind == "detection") {
                if (ub_detections.empty()) {
                    throw stvg::ConfigError("--kind detection requires --detections");
                }
                const auto videos = stvg::read_video_metas(ub_videos);
                const auto grouped =
                    stvg::group_detections(stvg::read_detections(ub_detections), videos);
                for (const auto& gt : stvg::read_annotations(ub_annotations, videos)) {
                    const auto it = grouped.find(gt.video_id);
                    const double viou =
                        it == grouped.end()
                            ? 0.0
                            : stvg::upper_bound_detection(gt, it->second);
                    records.push_back({gt.video_id, "", viou});
                    total += viou;
                }
            } else if (ub_kind == "tubelet") {
                if (ub_tubelets.empty()) {
                    throw stvg::ConfigError("--kind tubelet requires --tubelets");
                }
                const auto loaded = load_tubelets(ub_tubelets, ub_videos);
                for (const auto& gt : stvg::read_annotations(ub_annotations, loaded.videos)) {
                    const auto it = loaded.by_video.find(gt.video_id);
                    if (it == loaded.by_video.end() || it->second.empty()) {
                        warn("video '" + gt.video_id + "' has no tubelets, skipped");
                        continue;
                    }
                    const auto bound = stvg::upper_bound_tubelet(gt, it->second);
                    records.push_back({gt.video_id, bound.tubelet_id, bound.viou});
                    total += bound.viou;
                }
            } else {
                throw stvg::ConfigError("--kind must be detection or tubelet");
            }
            stvg::write_upper_bounds(ub_out, records);
            if (!records.empty()) {
                std::cout << "mean upper-bound vIoU over " << records.size() << " samples: "
                          << total / static_cast<double>(records.size()) << '\n';
            }
        } else if (*shift) {
            std::vector<stvg::ShiftRecord> classified;
            std::vector<stvg::json> lines;
            for (const auto& r : stvg::read_shift_records(sh_records)) {
                const auto record =
                    stvg::shift_classify(r.full_pred, r.trimmed_pred, r.trim_side, sh_eps);
                classified.push_back(record);
                lines.push_back({{"video_id", r.video_id},
                                 {"trim_side", stvg::to_string(record.trim_side)},
                                 {"shift", stvg::to_string(record.shift)}});
            }
            const auto report = stvg::shift_report(classified);
            const auto side_json = [](const stvg::ShiftSideStats& s) {
                return stvg::json{{"total", s.total},
                                  {"incorrect", s.incorrect},
                                  {"incorrect_pct", s.incorrect_pct()},
                                  {"wrong_direction", s.wrong_direction},
                                  {"wrong_direction_pct", s.wrong_direction_pct()},
                                  {"none", s.none}};
            };
            std::ofstream out(sh_out);
            out << stvg::json{{"start_trim", side_json(report.start_trim)},
                              {"end_trim", side_json(report.end_trim)}}
                       .dump(2)
                << '\n';
            if (!sh_per_record.empty()) {
                std::ofstream per(sh_per_record);
                for (const auto& line : lines) per << line.dump() << '\n';
            }
            std::cout << "start-trim incorrect: " << report.start_trim.incorrect_pct()
                      << "%, end-trim incorrect: " << report.end_trim.incorrect_pct() << "%\n";
        } else if (*fixture) {
            if (!fx_kinds.empty()) fx_spec.trajectory_kinds = fx_kinds;
            stvg::write_fixture(stvg::generate_fixture(fx_spec), fx_out);
            std::cout << "wrote fixture to " << fx_out << '\n';
        } else if (*run) {
            stvg::PipelineConfig config;
            if (!r_config.empty()) config = stvg::read_config(r_config);
            config.workers = resolve_workers(r_workers, workers_opt->count() > 0, config.workers);
            stvg::PipelineInputs inputs;
            inputs.detections_path = r_detections;
            inputs.queries_path = r_queries;
            inputs.videos_path = r_videos;
            inputs.annotations_path = r_annotations;
            inputs.trm_spans_path = r_trm;
            const auto result = stvg::run_pipeline(config, inputs, r_out);
            for (const auto& w : result.warnings) warn(w);
            std::cout << "config hash " << result.config_hash << '\n';
            for (const auto& [name, count] : result.record_counts) {
                std::cout << "  " << name << ": " << count << '\n';
            }
            if (result.no_data) {
                std::cerr << "error: no detection records in input\n";
                return kExitDataError;
            }
        }
    } catch (const stvg::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const stvg::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitOk;
}
