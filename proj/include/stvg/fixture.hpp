#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stvg/io.hpp"

namespace stvg {

// Seed-deterministic synthetic corpus: detection streams with known actors,
// matching queries, ground truth and ideal temporal spans.
struct FixtureSpec {
    int n_videos = 3;
    int actors_per_video = 2;
    std::vector<std::string> trajectory_kinds = {"stationary", "linear", "crossing"};
    double label_noise_rate = 0.0;  // per-detection chance of a conflicting label
    std::uint64_t seed = 1;
    int n_frames = 12;
    double fps_sampled = 5.0;
};

struct FixtureData {
    std::vector<VideoMeta> videos;
    std::vector<DetectionRecord> detections;
    std::vector<QueryRecord> queries;
    std::vector<GroundTruthAnnotation> annotations;
    std::vector<TrmSpanRecord> trm_spans;
};

namespace fixture_detail {

// std::mt19937_64 output is fully specified by the standard; the standard
// distributions are not. Scaling raw engine bits keeps files identical
// across platforms.
inline double unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

struct ActorProfile {
    const char* label;
    const char* subject;
    std::vector<double> embedding;
};

inline const std::vector<ActorProfile>& profiles() {
    static const std::vector<ActorProfile> p = {
        {"man", "The man in the grey coat", {1.0, 0.0, 0.0, 0.0}},
        {"woman", "The woman in red clothes", {0.0, 1.0, 0.0, 0.0}},
        {"person", "The person near the door", {0.0, 0.0, 1.0, 0.0}},
        {"boy", "The boy with the blue cap", {0.0, 0.0, 0.0, 1.0}},
        {"girl", "The girl in the white dress", {0.6, 0.8, 0.0, 0.0}},
    };
    return p;
}

}  // namespace fixture_detail

inline FixtureData generate_fixture(const FixtureSpec& spec) {
    using namespace fixture_detail;
    if (spec.n_videos < 1 || spec.actors_per_video < 1 || spec.n_frames < 2 ||
        spec.fps_sampled <= 0.0 || spec.trajectory_kinds.empty() ||
        spec.label_noise_rate < 0.0 || spec.label_noise_rate > 1.0) {
        throw ConfigError("generate_fixture: invalid spec");
    }

    constexpr double kBoxW = 120.0;
    constexpr double kBoxH = 160.0;
    constexpr double kCanvasW = 1280.0;

    std::mt19937_64 rng(spec.seed);
    FixtureData data;

    const std::vector<const char*> action_texts = {"walks forward", "waves the hand",
                                                   "sits down"};

    for (int v = 0; v < spec.n_videos; ++v) {
        char vid[16];
        std::snprintf(vid, sizeof(vid), "fv%04d", v + 1);
        const std::string video_id = vid;
        data.videos.push_back({video_id, spec.fps_sampled});

        const std::string& kind = spec.trajectory_kinds[v % spec.trajectory_kinds.size()];

        // Per-actor motion: lane, start x and per-frame step.
        struct Actor {
            double x0;
            double y0;
            double dx;
            const ActorProfile* profile;
        };
        std::vector<Actor> actors;
        for (int a = 0; a < spec.actors_per_video; ++a) {
            const ActorProfile& profile = profiles()[a % profiles().size()];
            Actor actor{0.0, 0.0, 0.0, &profile};
            if (kind == "crossing") {
                // Pairs share a lane and walk toward each other.
                actor.y0 = 60.0 + 200.0 * (a / 2);
                const double travel = 24.0 * (spec.n_frames - 1);
                if (a % 2 == 0) {
                    actor.x0 = 40.0;
                    actor.dx = 24.0;
                } else {
                    actor.x0 = std::min(40.0 + travel, kCanvasW - kBoxW - 40.0);
                    actor.dx = -24.0;
                }
            } else if (kind == "linear") {
                actor.y0 = 60.0 + 180.0 * a;
                actor.x0 = 60.0 + 30.0 * a;
                actor.dx = 18.0;
            } else {  // stationary
                actor.y0 = 60.0 + 180.0 * a;
                actor.x0 = 80.0 + 280.0 * a;
                actor.dx = 0.0;
            }
            actors.push_back(actor);
        }

        std::vector<std::vector<BBox>> actor_boxes(actors.size());
        for (int frame = 0; frame < spec.n_frames; ++frame) {
            for (std::size_t a = 0; a < actors.size(); ++a) {
                const Actor& actor = actors[a];
                const double jitter = kind == "stationary" ? (unit(rng) - 0.5) * 6.0 : 0.0;
                const double x = actor.x0 + actor.dx * frame + jitter;
                BBox box{round3(x), round3(actor.y0), round3(x + kBoxW),
                         round3(actor.y0 + kBoxH)};
                actor_boxes[a].push_back(box);

                Detection d;
                d.frame = frame;
                d.box = box;
                d.confidence = round3(0.55 + 0.4 * unit(rng));
                std::string label = actor.profile->label;
                if (unit(rng) < spec.label_noise_rate) {
                    label = (label == "man") ? "woman" : "man";
                }
                d.soft_labels = {label};
                d.embedding = actor.profile->embedding;
                data.detections.push_back({video_id, std::move(d)});
            }
        }

        // Target actor 0: query, ground truth and the ideal temporal span.
        const ActorProfile& target = *actors[0].profile;
        QueryRecord q;
        q.video_id = video_id;
        q.subject_phrase = target.subject;
        q.caption = std::string(target.subject) + " " + action_texts[0] + ", then " +
                    action_texts[1] + " and " + action_texts[2];
        for (int count = 1; count <= static_cast<int>(action_texts.size()); ++count) {
            for (int first = 0; first + count <= static_cast<int>(action_texts.size()); ++first) {
                SubActionPhrase phrase;
                phrase.text = std::string(target.subject);
                for (int i = 0; i < count; ++i) {
                    phrase.text += (i == 0 ? " " : ", then ");
                    phrase.text += action_texts[first + i];
                    phrase.action_indices.push_back(first + i + 1);
                }
                q.sub_actions[count].push_back(std::move(phrase));
            }
        }
        q.query_embedding = target.embedding;
        data.queries.push_back(std::move(q));

        GroundTruthAnnotation gt;
        gt.video_id = video_id;
        const int gt_start = spec.n_frames / 4;
        const int gt_end = std::max(gt_start, (3 * spec.n_frames) / 4 - 1);
        gt.span = {gt_start, gt_end, spec.fps_sampled};
        for (int frame = gt_start; frame <= gt_end; ++frame) {
            gt.boxes[frame] = actor_boxes[0][frame];
        }
        data.annotations.push_back(std::move(gt));
        data.trm_spans.push_back({video_id, {gt_start, gt_end, spec.fps_sampled}});
    }
    return data;
}

inline void write_fixture(const FixtureData& data, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    write_video_metas(path("videos.jsonl"), data.videos);
    write_detections(path("detections.jsonl"), data.detections);
    write_queries(path("queries.jsonl"), data.queries);
    write_annotations(path("annotations.jsonl"), data.annotations);
    write_trm_spans(path("trm_spans.jsonl"), data.trm_spans);
}

}  // namespace stvg
