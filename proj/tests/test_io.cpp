#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>

#include "stvg/io.hpp"
#include "stvg/pipeline.hpp"
#include "test_util.hpp"

using stvg::Detection;
using stvg::DetectionRecord;
using stvg::GroundTruthAnnotation;
using stvg::QueryRecord;
using stvg::TubeletRecord;

namespace {

Detection random_detection(std::mt19937_64& rng, int frame) {
    Detection d;
    d.frame = frame;
    const double x = static_cast<double>(rng() % 500);
    const double y = static_cast<double>(rng() % 300);
    d.box = {x, y, x + 1 + static_cast<double>(rng() % 200), y + 1 + static_cast<double>(rng() % 200)};
    d.confidence = static_cast<double>(rng() % 1001) / 1000.0;
    d.soft_labels = {rng() % 2 == 0 ? "man" : "person woman"};
    if (rng() % 2 == 0) {
        d.embedding = {static_cast<double>(rng() % 100) / 50.0 - 1.0,
                       static_cast<double>(rng() % 100) / 50.0 - 1.0};
    }
    return d;
}

}  // namespace

TEST_CASE("detection records round-trip through JSONL") {
    testutil::TempDir dir("io_det");
    std::mt19937_64 rng(101);
    std::vector<DetectionRecord> records;
    for (int i = 0; i < 50; ++i) {
        records.push_back({"v" + std::to_string(i % 3), random_detection(rng, i)});
    }
    const std::string path = dir.file("detections.jsonl");
    stvg::write_detections(path, records);
    const auto loaded = stvg::read_detections(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].video_id == records[i].video_id);
        CHECK(loaded[i].detection == records[i].detection);
    }
}

TEST_CASE("tubelet records round-trip and take fps from the sidecar") {
    testutil::TempDir dir("io_tub");
    std::mt19937_64 rng(103);
    std::vector<TubeletRecord> records;
    for (int i = 0; i < 10; ++i) {
        stvg::Tubelet t{"t" + std::to_string(i), 5.0, {}};
        int frame = static_cast<int>(rng() % 5);
        for (int j = 0; j < 4; ++j) {
            t.detections.push_back(random_detection(rng, frame));
            frame += 1 + static_cast<int>(rng() % 3);
        }
        records.push_back({"v1", std::move(t)});
    }
    stvg::write_video_metas(dir.file("videos.jsonl"), {{"v1", 5.0}});
    const auto videos = stvg::read_video_metas(dir.file("videos.jsonl"));
    stvg::write_tubelets(dir.file("tubelets.jsonl"), records);
    const auto loaded = stvg::read_tubelets(dir.file("tubelets.jsonl"), videos);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].tubelet == records[i].tubelet);
    }
}

TEST_CASE("query records round-trip including bare-string phrases") {
    testutil::TempDir dir("io_q");
    QueryRecord q;
    q.video_id = "v1";
    q.caption = "The man walks, then waves";
    q.subject_phrase = "The man";
    q.sub_actions[1] = {{"The man walks", {1}}, {"The man waves", {2}}};
    q.sub_actions[2] = {{"The man walks, then waves", {1, 2}}};
    q.query_embedding = {0.25, -0.5};

    QueryRecord bare;  // phrases without indices serialize as plain strings
    bare.video_id = "v2";
    bare.caption = "The woman sits";
    bare.subject_phrase = "The woman";
    bare.sub_actions[1] = {{"The woman sits", {}}};

    stvg::write_queries(dir.file("queries.jsonl"), {q, bare});
    const auto loaded = stvg::read_queries(dir.file("queries.jsonl"));
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == q);
    CHECK(loaded[1] == bare);

    std::ifstream in(dir.file("queries.jsonl"));
    std::string first_line;
    std::getline(in, first_line);
    std::string second_line;
    std::getline(in, second_line);
    CHECK(second_line.find("\"The woman sits\"") != std::string::npos);
}

TEST_CASE("annotations must cover their span exactly") {
    testutil::TempDir dir("io_ann");
    stvg::write_video_metas(dir.file("videos.jsonl"), {{"v1", 1.0}});
    const auto videos = stvg::read_video_metas(dir.file("videos.jsonl"));

    GroundTruthAnnotation gt;
    gt.video_id = "v1";
    gt.span = {3, 6, 1.0};
    for (int f = 3; f <= 6; ++f) {
        gt.boxes[f] = {0, 0, 10, 10};
    }
    stvg::write_annotations(dir.file("ok.jsonl"), {gt});
    const auto loaded = stvg::read_annotations(dir.file("ok.jsonl"), videos);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0] == gt);

    {
        std::ofstream out(dir.file("gap.jsonl"));
        out << R"({"video_id":"v1","span":{"start":0,"end":2},"boxes":{"0":[0,0,1,1],"2":[0,0,1,1]}})"
            << '\n';
    }
    CHECK_THROWS_AS(stvg::read_annotations(dir.file("gap.jsonl"), videos), stvg::DataError);

    {
        std::ofstream out(dir.file("extra.jsonl"));
        out << R"({"video_id":"v1","span":{"start":0,"end":0},"boxes":{"0":[0,0,1,1],"5":[0,0,1,1]}})"
            << '\n';
    }
    CHECK_THROWS_AS(stvg::read_annotations(dir.file("extra.jsonl"), videos), stvg::DataError);
}

TEST_CASE("schema violations carry line numbers, one per record") {
    testutil::TempDir dir("io_diag");
    {
        std::ofstream out(dir.file("bad.jsonl"));
        out << R"({"video_id":"v1","frame":0,"box":[0,0,10,10],"confidence":0.5,"soft_labels":["a"]})" << '\n';
        out << R"({"video_id":"v1","frame":1,"box":[10,10,0,0],"confidence":0.5,"soft_labels":["a"]})" << '\n';
        out << "not json" << '\n';
        out << R"({"video_id":"v1","frame":3,"box":[0,0,10,10],"confidence":1.5,"soft_labels":["a"]})" << '\n';
    }
    try {
        stvg::read_detections(dir.file("bad.jsonl"));
        FAIL("expected DataError");
    } catch (const stvg::DataError& e) {
        const std::string message = e.what();
        CHECK(message.find(":2:") != std::string::npos);
        CHECK(message.find(":3:") != std::string::npos);
        CHECK(message.find(":4:") != std::string::npos);
        CHECK(message.find(":1:") == std::string::npos);
    }
}

TEST_CASE("cross-file id mismatches are fatal and name the id") {
    testutil::TempDir dir("io_mismatch");
    stvg::write_video_metas(dir.file("videos.jsonl"), {{"known", 1.0}});
    const auto videos = stvg::read_video_metas(dir.file("videos.jsonl"));
    std::mt19937_64 rng(107);
    stvg::write_detections(dir.file("detections.jsonl"),
                           {{"unknown", random_detection(rng, 0)}});
    const auto dets = stvg::read_detections(dir.file("detections.jsonl"));
    try {
        stvg::group_detections(dets, videos);
        FAIL("expected DataError");
    } catch (const stvg::DataError& e) {
        CHECK(std::string(e.what()).find("unknown") != std::string::npos);
    }
}

TEST_CASE("config parsing fills defaults and rejects unknown keys") {
    const stvg::PipelineConfig defaults = stvg::config_from_json(stvg::json::object());
    CHECK(defaults.detection_stride == 5);
    CHECK(defaults.confidence_floor == 0.4);
    CHECK(defaults.tracker.iou_min == 0.3);
    CHECK(defaults.tracker.max_gap == 2);
    CHECK(defaults.tracker.min_track_len == 2);
    CHECK(defaults.slf.variability_min == 0.3);
    CHECK(defaults.cgs.n_stages == 5);
    CHECK(defaults.cgs.delta == 0.2);
    CHECK(defaults.satcl.n_stages == 4);
    CHECK(defaults.inference.t_filt == 0.2);
    CHECK(defaults.workers == 1);

    CHECK_THROWS_AS(stvg::config_from_json({{"tracker", {{"iou_minimum", 0.5}}}}),
                    stvg::ConfigError);
    CHECK_THROWS_AS(stvg::config_from_json({{"confidence_floor", 1.5}}), stvg::ConfigError);
    CHECK_THROWS_AS(stvg::config_from_json({{"scorer", "maximum"}}), stvg::ConfigError);
}

TEST_CASE("config hash tracks every semantic parameter and ignores workers") {
    const stvg::PipelineConfig base = stvg::config_from_json(stvg::json::object());
    const std::string base_hash = stvg::config_hash(base);
    CHECK(base_hash == stvg::config_hash(base));

    stvg::PipelineConfig changed = base;
    changed.workers = 8;
    CHECK(stvg::config_hash(changed) == base_hash);

    const auto differs = [&](auto mutate) {
        stvg::PipelineConfig c = base;
        mutate(c);
        return stvg::config_hash(c) != base_hash;
    };
    CHECK(differs([](auto& c) { c.detection_stride = 4; }));
    CHECK(differs([](auto& c) { c.confidence_floor = 0.5; }));
    CHECK(differs([](auto& c) { c.tracker.iou_min = 0.4; }));
    CHECK(differs([](auto& c) { c.tracker.max_gap = 3; }));
    CHECK(differs([](auto& c) { c.denoise.strategy = stvg::DenoiseStrategy::add; }));
    CHECK(differs([](auto& c) { c.slf.enabled = false; }));
    CHECK(differs([](auto& c) { c.slf.variability_min = 0.4; }));
    CHECK(differs([](auto& c) { c.cgs.delta = 0.25; }));
    CHECK(differs([](auto& c) { c.satcl.n_stages = 5; }));
    CHECK(differs([](auto& c) { c.inference.t_filt = 0.3; }));
    CHECK(differs([](auto& c) { c.scorer = stvg::ScorerKind::embedding_sim; }));
}

TEST_CASE("lexicon files override the defaults") {
    testutil::TempDir dir("io_lex");
    {
        std::ofstream out(dir.file("lexicon.json"));
        out << R"({"gentleman":"male","senorita":"female","robot":"neutral"})";
    }
    const auto lex = stvg::read_lexicon(dir.file("lexicon.json"));
    CHECK(lex.lookup("gentleman") == stvg::Category::male);
    CHECK(lex.lookup("senorita") == stvg::Category::female);
    CHECK(lex.lookup("robot") == stvg::Category::neutral);
    CHECK(lex.lookup("man") == stvg::Category::neutral);  // overrides replace the defaults

    {
        std::ofstream out(dir.file("bad.json"));
        out << R"({"x":"other"})";
    }
    CHECK_THROWS_AS(stvg::read_lexicon(dir.file("bad.json")), stvg::ConfigError);
}

TEST_CASE("stage plans and congestion records round-trip") {
    testutil::TempDir dir("io_stage");
    stvg::StagePlan plan;
    plan.stages = {{1, {"a"}}, {2, {"a", "b"}}};
    stvg::write_stage_plan(dir.file("plan.jsonl"), plan);
    const auto loaded = stvg::read_stage_plan(dir.file("plan.jsonl"));
    REQUIRE(loaded.stages.size() == 2);
    CHECK(loaded.stages[1].member_ids == std::vector<std::string>{"a", "b"});

    std::vector<stvg::CongestionRecord> records = {{"a", 3, 0.75}, {"b", 1, 1.0}};
    stvg::write_congestion(dir.file("congestion.jsonl"), records);
    const auto congestion = stvg::read_congestion(dir.file("congestion.jsonl"));
    REQUIRE(congestion.size() == 2);
    CHECK(congestion[0].video_id == "a");
    CHECK(congestion[0].congestion == 0.75);
    CHECK(congestion[1].n_tubelets == 1);
}
