#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "stvg/evaluation.hpp"
#include "stvg/fixture.hpp"
#include "stvg/pipeline.hpp"
#include "test_util.hpp"

using stvg::FixtureSpec;
using stvg::PipelineConfig;
using stvg::PipelineInputs;
using stvg::run_pipeline;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

PipelineInputs fixture_inputs(const testutil::TempDir& dir) {
    PipelineInputs inputs;
    inputs.detections_path = dir.file("detections.jsonl");
    inputs.queries_path = dir.file("queries.jsonl");
    inputs.videos_path = dir.file("videos.jsonl");
    inputs.annotations_path = dir.file("annotations.jsonl");
    inputs.trm_spans_path = dir.file("trm_spans.jsonl");
    return inputs;
}

const std::vector<const char*> kOutputs = {
    "manifest.json",       "tubelets.jsonl",   "tubelets_denoised.jsonl",
    "congestion.jsonl",    "stages_cgs.jsonl", "stages_satcl.jsonl",
    "predictions.jsonl",   "eval_samples.jsonl", "eval.json", "eval.txt"};

}  // namespace

TEST_CASE("pipeline outputs are identical for any worker count") {
    testutil::TempDir data("pipe_data");
    FixtureSpec spec;
    spec.n_videos = 6;
    spec.actors_per_video = 3;
    spec.label_noise_rate = 0.25;
    spec.seed = 77;
    stvg::write_fixture(stvg::generate_fixture(spec), data.path.string());

    PipelineConfig config;
    config.scorer = stvg::ScorerKind::embedding_sim;
    config.slf.at_inference = true;

    testutil::TempDir serial_out("pipe_w1");
    testutil::TempDir parallel_out("pipe_w8");
    config.workers = 1;
    const auto serial = run_pipeline(config, fixture_inputs(data), serial_out.path.string());
    config.workers = 8;
    const auto parallel = run_pipeline(config, fixture_inputs(data), parallel_out.path.string());

    CHECK(serial.config_hash == parallel.config_hash);
    for (const char* name : kOutputs) {
        CHECK(slurp(serial_out.file(name)) == slurp(parallel_out.file(name)));
        CHECK_FALSE(slurp(serial_out.file(name)).empty());
    }
}

TEST_CASE("empty detections produce empty outputs and the no-data flag") {
    testutil::TempDir data("pipe_empty");
    stvg::write_fixture(stvg::generate_fixture({}), data.path.string());
    {
        std::ofstream out(data.file("detections.jsonl"));  // truncate
    }
    testutil::TempDir out_dir("pipe_empty_out");
    PipelineInputs inputs = fixture_inputs(data);
    inputs.annotations_path.clear();
    inputs.trm_spans_path.clear();
    const auto result = run_pipeline({}, inputs, out_dir.path.string());
    CHECK(result.no_data);
    CHECK(result.record_counts.at("tubelets") == 0);
    CHECK(result.record_counts.at("predictions") == 0);
    CHECK(slurp(out_dir.file("tubelets.jsonl")).empty());
    CHECK(slurp(out_dir.file("predictions.jsonl")).empty());
}

TEST_CASE("a missing trm-span file falls back to the full-span stub") {
    testutil::TempDir data("pipe_stub");
    FixtureSpec spec;
    spec.n_videos = 2;
    spec.seed = 5;
    stvg::write_fixture(stvg::generate_fixture(spec), data.path.string());
    PipelineInputs inputs = fixture_inputs(data);
    inputs.trm_spans_path.clear();
    testutil::TempDir out_dir("pipe_stub_out");
    PipelineConfig config;
    config.scorer = stvg::ScorerKind::embedding_sim;
    const auto result = run_pipeline(config, inputs, out_dir.path.string());
    CHECK(result.record_counts.at("predictions") == 2);
}

TEST_CASE("pipeline predictions never exceed the tubelet upper bound") {
    testutil::TempDir data("pipe_bound");
    FixtureSpec spec;
    spec.n_videos = 5;
    spec.actors_per_video = 3;
    spec.label_noise_rate = 0.2;
    spec.seed = 31;
    stvg::write_fixture(stvg::generate_fixture(spec), data.path.string());

    PipelineConfig config;
    config.scorer = stvg::ScorerKind::embedding_sim;
    testutil::TempDir out_dir("pipe_bound_out");
    run_pipeline(config, fixture_inputs(data), out_dir.path.string());

    const auto videos = stvg::read_video_metas(data.file("videos.jsonl"));
    const auto annotations = stvg::read_annotations(data.file("annotations.jsonl"), videos);
    const auto tubelets = stvg::read_tubelets(out_dir.file("tubelets_denoised.jsonl"), videos);
    const auto predictions = stvg::read_predictions(out_dir.file("predictions.jsonl"), videos);
    const auto trm = stvg::read_trm_spans(data.file("trm_spans.jsonl"), videos);

    for (const auto& gt : annotations) {
        const stvg::TemporalSpan* trm_span = nullptr;
        for (const auto& r : trm) {
            if (r.video_id == gt.video_id) trm_span = &r.span;
        }
        REQUIRE(trm_span != nullptr);

        // Upper bound over the processed candidates the pipeline can emit.
        std::vector<stvg::Tubelet> processed;
        for (const auto& r : tubelets) {
            if (r.video_id != gt.video_id) continue;
            stvg::Tubelet t = stvg::interpolate_tubelet(r.tubelet, 1);
            if (stvg::span_intersection_frames(t.span(), *trm_span) > 0) {
                t = stvg::trim_tubelet(t, *trm_span, stvg::TrimMode::filter_and_trim);
            }
            processed.push_back(std::move(t));
        }
        REQUIRE_FALSE(processed.empty());
        const auto bound = stvg::upper_bound_tubelet(gt, processed);

        for (const auto& p : predictions) {
            if (p.video_id != gt.video_id) continue;
            const stvg::Tubelet* chosen = nullptr;
            for (const auto& t : processed) {
                if (t.id == p.prediction.tubelet_id) chosen = &t;
            }
            REQUIRE(chosen != nullptr);
            CHECK(stvg::viou_metric(*chosen, p.prediction.span, gt) <= bound.viou + 1e-12);
        }
    }
}
