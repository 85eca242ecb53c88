#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "stvg/types.hpp"

namespace stvg {

enum class StageDirection { high_to_low, low_to_high };

inline const char* to_string(StageDirection d) {
    return d == StageDirection::high_to_low ? "high_to_low" : "low_to_high";
}

inline StageDirection stage_direction_from_string(const std::string& s) {
    if (s == "high_to_low") return StageDirection::high_to_low;
    if (s == "low_to_high") return StageDirection::low_to_high;
    throw ConfigError("unknown stage direction '" + s + "'");
}

struct Stage {
    int index = 0;  // 1-based
    std::vector<std::string> member_ids;
};

struct StagePlan {
    std::vector<Stage> stages;
    bool cumulative = true;
    StageDirection direction = StageDirection::high_to_low;
};

/// Members added at each stage: set differences for a cumulative plan, the
/// stage sizes themselves otherwise.
inline std::vector<int> stage_additional_counts(const StagePlan& plan) {
    std::vector<int> counts;
    int previous = 0;
    for (const Stage& s : plan.stages) {
        const int size = static_cast<int>(s.member_ids.size());
        counts.push_back(plan.cumulative ? size - previous : size);
        previous = size;
    }
    return counts;
}

struct CongestionRecord {
    std::string video_id;  // sample id; equals the video id for single-query videos
    int n_tubelets = 0;
    double congestion = 0.0;
};

/// Mean pairwise temporal IoU over a video's tubelets. A single tubelet is
/// the maximally simple case and scores 1.0; an empty list is invalid.
inline double congestion(const std::vector<Tubelet>& tubelets) {
    if (tubelets.empty()) {
        throw DataError("congestion: no tubelets");
    }
    const std::size_t n = tubelets.size();
    if (n == 1) {
        return 1.0;
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += temporal_iou(tubelets[i].span(), tubelets[j].span());
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

/**
 * Congestion-guided stage assignment. For high_to_low, stage k keeps every
 * sample with congestion >= 1 - k*delta; the final stage threshold is clamped
 * to 0 so it always covers the full corpus. low_to_high mirrors with
 * congestion <= k*delta and a final threshold of 1. Boundary samples land in
 * the earlier stage (inclusive thresholds). Non-cumulative plans carry the
 * per-stage set differences instead of the nested sets.
 */
inline StagePlan cgs_stage_assignment(const std::vector<CongestionRecord>& records,
                                      int n_stages = 5,
                                      double delta = 0.2,
                                      StageDirection direction = StageDirection::high_to_low,
                                      bool cumulative = true) {
    if (n_stages < 1 || delta <= 0.0 || n_stages * delta > 1.0 + 1e-9) {
        throw ConfigError("cgs_stage_assignment: require n_stages >= 1, delta > 0, "
                          "n_stages * delta <= 1");
    }

    StagePlan plan;
    plan.cumulative = cumulative;
    plan.direction = direction;

    std::vector<std::vector<std::string>> nested(n_stages);
    for (int k = 1; k <= n_stages; ++k) {
        const bool final_stage = (k == n_stages);
        for (const CongestionRecord& r : records) {
            bool in_stage;
            if (direction == StageDirection::high_to_low) {
                const double threshold = final_stage ? 0.0 : 1.0 - k * delta;
                in_stage = r.congestion >= threshold;
            } else {
                const double threshold = final_stage ? 1.0 : k * delta;
                in_stage = r.congestion <= threshold;
            }
            if (in_stage) {
                nested[k - 1].push_back(r.video_id);
            }
        }
    }

    for (int k = 1; k <= n_stages; ++k) {
        Stage stage{k, {}};
        if (cumulative || k == 1) {
            stage.member_ids = nested[k - 1];
        } else {
            const std::set<std::string> previous(nested[k - 2].begin(), nested[k - 2].end());
            for (const std::string& id : nested[k - 1]) {
                if (!previous.count(id)) {
                    stage.member_ids.push_back(id);
                }
            }
        }
        plan.stages.push_back(std::move(stage));
    }
    return plan;
}

struct SubactionValidation {
    bool ok = true;
    bool indices_missing = false;  // contiguity check skipped for some phrases
    std::vector<std::string> violations;
};

/// A phrase under key k must carry exactly k action indices, strictly
/// increasing and contiguous. Phrases without indices are accepted with the
/// indices_missing flag set. Keys must run 1..K without holes.
inline SubactionValidation validate_subactions(const QueryRecord& q) {
    SubactionValidation result;
    if (q.sub_actions.empty()) {
        result.ok = false;
        result.violations.push_back("no sub_actions present");
        return result;
    }
    int expected_key = 1;
    for (const auto& [k, phrases] : q.sub_actions) {
        if (k != expected_key) {
            result.violations.push_back("sub_actions keys are not consecutive from 1 (found " +
                                        std::to_string(k) + ", expected " +
                                        std::to_string(expected_key) + ")");
        }
        expected_key = k + 1;
        for (std::size_t p = 0; p < phrases.size(); ++p) {
            const SubActionPhrase& phrase = phrases[p];
            const std::string where =
                "key " + std::to_string(k) + " phrase " + std::to_string(p);
            if (phrase.action_indices.empty()) {
                result.indices_missing = true;
                continue;
            }
            if (static_cast<int>(phrase.action_indices.size()) != k) {
                result.violations.push_back(where + ": index count " +
                                            std::to_string(phrase.action_indices.size()) +
                                            " does not match key " + std::to_string(k));
                continue;
            }
            bool increasing = true;
            for (std::size_t i = 1; i < phrase.action_indices.size(); ++i) {
                if (phrase.action_indices[i] <= phrase.action_indices[i - 1]) {
                    increasing = false;
                }
            }
            if (!increasing) {
                result.violations.push_back(where + ": indices not strictly increasing");
                continue;
            }
            const int lo = phrase.action_indices.front();
            const int hi = phrase.action_indices.back();
            if (hi - lo + 1 != static_cast<int>(phrase.action_indices.size())) {
                result.violations.push_back(where + ": indices not contiguous");
            }
        }
    }
    result.ok = result.violations.empty();
    return result;
}

struct SatclAssignment {
    StagePlan plan;
    std::vector<std::string> diagnostics;  // one line per rejected query
};

/**
 * Sub-action temporal stage assignment. Stage k holds every phrase with
 * action count <= k (cumulative) or exactly k; phrases with more actions
 * than n_stages fold into the final stage. Member ids are
 * "<video_id>:<count>:<position>" and each stage is ordered by
 * (video_id, count, position). Queries failing validation are rejected with
 * a diagnostic and excluded from the plan.
 */
inline SatclAssignment satcl_stage_assignment(const std::vector<QueryRecord>& queries,
                                              int n_stages = 4,
                                              bool cumulative = true) {
    if (n_stages < 1) {
        throw ConfigError("satcl_stage_assignment: n_stages must be >= 1");
    }

    SatclAssignment result;
    result.plan.cumulative = cumulative;
    result.plan.direction = StageDirection::low_to_high;

    struct Entry {
        std::string video_id;
        int count;
        int position;
    };
    std::vector<Entry> entries;
    for (const QueryRecord& q : queries) {
        const SubactionValidation validation = validate_subactions(q);
        if (!validation.ok) {
            std::string line = q.video_id + ": rejected";
            for (const std::string& v : validation.violations) {
                line += "; " + v;
            }
            result.diagnostics.push_back(std::move(line));
            continue;
        }
        if (validation.indices_missing) {
            result.diagnostics.push_back(q.video_id +
                                         ": action_indices absent, contiguity check skipped");
        }
        for (const auto& [k, phrases] : q.sub_actions) {
            for (std::size_t p = 0; p < phrases.size(); ++p) {
                entries.push_back({q.video_id, k, static_cast<int>(p)});
            }
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.video_id != b.video_id) return a.video_id < b.video_id;
        if (a.count != b.count) return a.count < b.count;
        return a.position < b.position;
    });

    for (int k = 1; k <= n_stages; ++k) {
        Stage stage{k, {}};
        const bool final_stage = (k == n_stages);
        for (const Entry& e : entries) {
            const bool in_stage = cumulative ? (e.count <= k || (final_stage && e.count > n_stages))
                                             : (e.count == k || (final_stage && e.count > n_stages));
            if (in_stage) {
                stage.member_ids.push_back(e.video_id + ":" + std::to_string(e.count) + ":" +
                                           std::to_string(e.position));
            }
        }
        result.plan.stages.push_back(std::move(stage));
    }
    return result;
}

}  // namespace stvg
