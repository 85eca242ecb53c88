#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "stvg/types.hpp"

namespace stvg {

enum class ScorerKind { mean_confidence, embedding_sim };

inline const char* to_string(ScorerKind s) {
    return s == ScorerKind::mean_confidence ? "mean_confidence" : "embedding_sim";
}

inline ScorerKind scorer_from_string(const std::string& s) {
    if (s == "mean_confidence") return ScorerKind::mean_confidence;
    if (s == "embedding_sim") return ScorerKind::embedding_sim;
    throw ConfigError("unknown scorer '" + s + "'");
}

enum class TrimMode { filter_and_trim, filter_only };

inline const char* to_string(TrimMode m) {
    return m == TrimMode::filter_and_trim ? "filter_and_trim" : "filter_only";
}

inline TrimMode trim_mode_from_string(const std::string& s) {
    if (s == "filter_and_trim") return TrimMode::filter_and_trim;
    if (s == "filter_only") return TrimMode::filter_only;
    throw ConfigError("unknown trim mode '" + s + "'");
}

struct InferenceParams {
    double t_filt = 0.2;                       // temporal IoU floor for partial overlaps
    TrimMode mode = TrimMode::filter_and_trim;
    int fill_stride = 1;                       // interpolation grid step
};

/// Cosine similarity; a zero-norm operand scores 0.
inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DataError("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Mean per-detection cosine similarity against the query feature.
inline double sim_avg(const std::vector<std::vector<double>>& tubelet_embeddings,
                      const std::vector<double>& query_embedding) {
    if (tubelet_embeddings.empty()) {
        throw DataError("sim_avg: empty embedding list");
    }
    double sum = 0.0;
    for (const std::vector<double>& e : tubelet_embeddings) {
        sum += cosine_similarity(e, query_embedding);
    }
    return sum / static_cast<double>(tubelet_embeddings.size());
}

/// InfoNCE over precomputed similarities:
/// -log(exp(s+/tau) / (exp(s+/tau) + sum_neg exp(s-/tau))), evaluated in
/// log-sum-exp form. No negatives gives exactly 0.
inline double contrastive_loss_from_sims(double positive,
                                         const std::vector<double>& negatives,
                                         double temperature) {
    if (temperature <= 0.0) {
        throw ConfigError("contrastive loss: temperature must be > 0");
    }
    const double z_pos = positive / temperature;
    double z_max = z_pos;
    for (double s : negatives) {
        z_max = std::max(z_max, s / temperature);
    }
    double sum = std::exp(z_pos - z_max);
    for (double s : negatives) {
        sum += std::exp(s / temperature - z_max);
    }
    return (z_max + std::log(sum)) - z_pos;
}

// One training sample for the spatial contrastive loss: the positive tubelet's
// per-frame features, any same-sample negative tubelets, and the query feature.
struct ContrastiveSample {
    std::vector<std::vector<double>> positive;
    std::vector<std::vector<std::vector<double>>> negatives;
    std::vector<double> query;
};

struct ContrastiveBatch {
    std::vector<ContrastiveSample> samples;
    double temperature = 0.1;
};

/**
 * Spatial contrastive loss, mean over samples. For sample i the negatives are
 * its own negative tubelets plus every tubelet (positive and negative) of the
 * other samples in the batch, all scored by sim_avg against sample i's query.
 */
inline double spatial_contrastive_loss(const ContrastiveBatch& batch) {
    if (batch.samples.empty()) {
        throw DataError("spatial_contrastive_loss: empty batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < batch.samples.size(); ++i) {
        const ContrastiveSample& sample = batch.samples[i];
        const double positive = sim_avg(sample.positive, sample.query);
        std::vector<double> negatives;
        for (const auto& neg : sample.negatives) {
            negatives.push_back(sim_avg(neg, sample.query));
        }
        for (std::size_t j = 0; j < batch.samples.size(); ++j) {
            if (j == i) continue;
            negatives.push_back(sim_avg(batch.samples[j].positive, sample.query));
            for (const auto& neg : batch.samples[j].negatives) {
                negatives.push_back(sim_avg(neg, sample.query));
            }
        }
        total += contrastive_loss_from_sims(positive, negatives, batch.temperature);
    }
    return total / static_cast<double>(batch.samples.size());
}

/// Reconstruction negative log-likelihood over externally supplied per-word
/// probabilities, clamped below at 1e-12.
inline double reconstruction_nll(const std::vector<double>& word_probs) {
    if (word_probs.empty()) {
        throw DataError("reconstruction_nll: empty probability list");
    }
    double loss = 0.0;
    for (double p : word_probs) {
        loss -= std::log(std::max(p, 1e-12));
    }
    return loss;
}

struct Selection {
    std::string tubelet_id;
    double score;
};

namespace detail {

// Argmax with the tie rule shared by every selection in the pipeline:
// higher score, then earlier first frame, then lexicographically smaller id.
inline std::size_t best_candidate_index(const std::vector<const Tubelet*>& candidates,
                                        const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double s = scores[i];
        const double sb = scores[best];
        if (s > sb) {
            best = i;
            continue;
        }
        if (s < sb) {
            continue;
        }
        const int f = candidates[i]->detections.front().frame;
        const int fb = candidates[best]->detections.front().frame;
        if (f < fb || (f == fb && candidates[i]->id < candidates[best]->id)) {
            best = i;
        }
    }
    return best;
}

}  // namespace detail

/// Confidence-only baseline: the tubelet with the highest mean detection
/// confidence; ties go to the earlier first frame, then the smaller id.
inline Selection select_by_mean_confidence(const std::vector<Tubelet>& tubelets) {
    if (tubelets.empty()) {
        throw DataError("select_by_mean_confidence: no tubelets");
    }
    std::vector<const Tubelet*> candidates;
    std::vector<double> scores;
    for (const Tubelet& t : tubelets) {
        candidates.push_back(&t);
        scores.push_back(t.mean_confidence());
    }
    const std::size_t best = detail::best_candidate_index(candidates, scores);
    return {candidates[best]->id, scores[best]};
}

/// Keep tubelets that fully contain the predicted span, are fully contained
/// in it, or overlap it with temporal IoU >= t_filt. Order is preserved.
inline std::vector<Tubelet> select_candidates(const std::vector<Tubelet>& tubelets,
                                              const TemporalSpan& trm_span,
                                              const InferenceParams& params) {
    std::vector<Tubelet> out;
    for (const Tubelet& t : tubelets) {
        const TemporalSpan span = t.span();
        bool keep = span.contains(trm_span) || trm_span.contains(span);
        if (!keep && span_intersection_frames(span, trm_span) > 0) {
            keep = temporal_iou(span, trm_span) >= params.t_filt;
        }
        if (keep) {
            out.push_back(t);
        }
    }
    return out;
}

/**
 * Nearest-neighbor interpolation: every frame of the tubelet's span on the
 * fill_stride grid receives a copy of the temporally nearest detection
 * (ties to the earlier frame). Existing detections are kept as-is, so the
 * operation is idempotent.
 */
inline Tubelet interpolate_tubelet(const Tubelet& t, int fill_stride = 1) {
    if (fill_stride < 1) {
        throw ConfigError("interpolate_tubelet: fill_stride must be >= 1");
    }
    std::map<int, Detection> by_frame;
    for (const Detection& d : t.detections) {
        by_frame.emplace(d.frame, d);
    }
    const TemporalSpan span = t.span();
    for (int frame = span.start; frame <= span.end; frame += fill_stride) {
        if (by_frame.count(frame)) {
            continue;
        }
        const Detection* nearest = nullptr;
        int best_distance = 0;
        for (const Detection& d : t.detections) {
            const int distance = std::abs(d.frame - frame);
            if (nearest == nullptr || distance < best_distance) {
                nearest = &d;
                best_distance = distance;
            }
        }
        Detection filled = *nearest;
        filled.frame = frame;
        by_frame.emplace(frame, std::move(filled));
    }
    Tubelet out{t.id, t.fps_sampled, {}};
    out.detections.reserve(by_frame.size());
    for (auto& [frame, d] : by_frame) {
        out.detections.push_back(std::move(d));
    }
    return out;
}

/// Restrict detections to the overlap with the predicted span
/// (filter_and_trim) or pass the tubelet through (filter_only).
inline Tubelet trim_tubelet(const Tubelet& t, const TemporalSpan& trm_span, TrimMode mode) {
    if (mode == TrimMode::filter_only) {
        return t;
    }
    const TemporalSpan span = t.span();
    const int lo = std::max(span.start, trm_span.start);
    const int hi = std::min(span.end, trm_span.end);
    Tubelet out{t.id, t.fps_sampled, {}};
    for (const Detection& d : t.detections) {
        if (d.frame >= lo && d.frame <= hi) {
            out.detections.push_back(d);
        }
    }
    if (out.detections.empty()) {
        throw DataError("trim_tubelet: tubelet '" + t.id +
                        "' has no detections inside the predicted span");
    }
    return out;
}

struct Prediction {
    std::string tubelet_id;
    TemporalSpan span;
    std::vector<Selection> scores;  // every scored candidate, pipeline order
};

namespace detail {

inline double score_tubelet(const Tubelet& t, ScorerKind scorer,
                            const std::vector<double>& query_embedding) {
    if (scorer == ScorerKind::mean_confidence) {
        return t.mean_confidence();
    }
    if (query_embedding.empty()) {
        throw ConfigError("embedding_sim scorer requires a query embedding");
    }
    std::vector<std::vector<double>> embeddings;
    embeddings.reserve(t.detections.size());
    for (const Detection& d : t.detections) {
        if (!d.has_embedding()) {
            throw ConfigError("embedding_sim scorer requires per-detection embeddings "
                              "(tubelet '" + t.id + "')");
        }
        embeddings.push_back(d.embedding);
    }
    return sim_avg(embeddings, query_embedding);
}

// Interpolate, trim, score and argmax a candidate set. Candidates that do not
// overlap the predicted span (possible only on the fallback path) are left
// untrimmed.
inline Prediction score_and_select(const std::vector<Tubelet>& candidates,
                                   const TemporalSpan& trm_span,
                                   ScorerKind scorer,
                                   const std::vector<double>& query_embedding,
                                   const InferenceParams& params) {
    std::vector<Tubelet> processed;
    processed.reserve(candidates.size());
    for (const Tubelet& c : candidates) {
        Tubelet t = interpolate_tubelet(c, params.fill_stride);
        if (params.mode == TrimMode::filter_and_trim &&
            span_intersection_frames(t.span(), trm_span) > 0) {
            t = trim_tubelet(t, trm_span, TrimMode::filter_and_trim);
        }
        processed.push_back(std::move(t));
    }

    std::vector<const Tubelet*> pointers;
    std::vector<double> scores;
    Prediction prediction;
    for (const Tubelet& t : processed) {
        const double score = score_tubelet(t, scorer, query_embedding);
        pointers.push_back(&t);
        scores.push_back(score);
        prediction.scores.push_back({t.id, score});
    }
    const std::size_t best = best_candidate_index(pointers, scores);
    prediction.tubelet_id = processed[best].id;
    prediction.span = processed[best].span();
    return prediction;
}

}  // namespace detail

/**
 * Joint spatio-temporal inference for one query: select candidates against
 * the predicted temporal span, interpolate them to dense frames, trim when
 * the mode asks for it, score with the chosen scorer and pick the argmax
 * under the shared tie rule. An empty candidate selection falls back to the
 * full tubelet list.
 */
inline Prediction ground(const QueryRecord& query,
                         const std::vector<Tubelet>& tubelets,
                         const TemporalSpan& trm_span,
                         ScorerKind scorer,
                         const InferenceParams& params) {
    std::vector<Tubelet> candidates = select_candidates(tubelets, trm_span, params);
    if (candidates.empty()) {
        candidates = tubelets;
    }
    if (candidates.empty()) {
        throw DataError("ground: no tubelets available for video '" + query.video_id + "'");
    }
    return detail::score_and_select(candidates, trm_span, scorer, query.query_embedding,
                                    params);
}

}  // namespace stvg
