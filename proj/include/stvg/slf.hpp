#pragma once

#include <map>
#include <string>
#include <vector>

#include "stvg/denoising.hpp"
#include "stvg/text.hpp"
#include "stvg/types.hpp"

namespace stvg {

enum class Category { male, female, neutral };

inline const char* to_string(Category c) {
    switch (c) {
        case Category::male: return "male";
        case Category::female: return "female";
        default: return "neutral";
    }
}

inline Category category_from_string(const std::string& s) {
    if (s == "male") return Category::male;
    if (s == "female") return Category::female;
    if (s == "neutral") return Category::neutral;
    throw ConfigError("unknown category '" + s + "'");
}

// Token -> category map; unknown tokens are neutral.
struct CategoryLexicon {
    std::map<std::string, Category> tokens;

    Category lookup(const std::string& token) const {
        const auto it = tokens.find(token);
        return it == tokens.end() ? Category::neutral : it->second;
    }

    static CategoryLexicon defaults() {
        CategoryLexicon lex;
        lex.tokens = {
            {"man", Category::male},    {"boy", Category::male},
            {"woman", Category::female}, {"girl", Category::female},
            {"lady", Category::female},  {"person", Category::neutral},
            {"child", Category::neutral}, {"kid", Category::neutral},
        };
        return lex;
    }
};

/// Category of a raw label phrase: the single non-neutral token category when
/// exactly one is present, neutral when none or when both genders appear.
inline Category normalize_label(const std::string& raw, const CategoryLexicon& lex) {
    bool has_male = false;
    bool has_female = false;
    for (const std::string& token : tokenize(raw)) {
        switch (lex.lookup(token)) {
            case Category::male: has_male = true; break;
            case Category::female: has_female = true; break;
            default: break;
        }
    }
    if (has_male && !has_female) return Category::male;
    if (has_female && !has_male) return Category::female;
    return Category::neutral;
}

inline Category detection_category(const Detection& d, const CategoryLexicon& lex) {
    return normalize_label(normalized_label(d), lex);
}

/// Mode over normalized per-detection categories, same tie rule as
/// tubelet_mode_label.
inline Category tubelet_type(const Tubelet& t, const CategoryLexicon& lex) {
    std::vector<Category> categories;
    categories.reserve(t.detections.size());
    for (const Detection& d : t.detections) {
        categories.push_back(detection_category(d, lex));
    }
    return detail::mode_with_first_occurrence(categories);
}

inline Category subject_category(const std::string& subject_phrase,
                                 const CategoryLexicon& lex) {
    return normalize_label(subject_phrase, lex);
}

/// True when detections of both specific categories (male and female) appear,
/// the "conflicting combination" population the denoising strategies target.
inline bool has_conflicting_labels(const Tubelet& t, const CategoryLexicon& lex) {
    bool has_male = false;
    bool has_female = false;
    for (const Detection& d : t.detections) {
        switch (detection_category(d, lex)) {
            case Category::male: has_male = true; break;
            case Category::female: has_female = true; break;
            default: break;
        }
    }
    return has_male && has_female;
}

/**
 * Soft-Label Filtering: a neutral subject keeps every tubelet; a specific
 * subject keeps tubelets whose type matches, neutral-type tubelets, and any
 * tubelet whose soft-label switching fraction reaches variability_min.
 * Order is preserved; an empty result is legal.
 */
inline std::vector<Tubelet> slf_filter(const std::vector<Tubelet>& tubelets,
                                       const std::string& subject_phrase,
                                       const CategoryLexicon& lex,
                                       double variability_min = 0.3) {
    const Category subject = subject_category(subject_phrase, lex);
    if (subject == Category::neutral) {
        return tubelets;
    }
    std::vector<Tubelet> out;
    for (const Tubelet& t : tubelets) {
        const Category type = tubelet_type(t, lex);
        if (type == subject || type == Category::neutral ||
            analyze_switching(t).switching_fraction >= variability_min) {
            out.push_back(t);
        }
    }
    return out;
}

}  // namespace stvg
