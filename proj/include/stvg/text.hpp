#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "stvg/types.hpp"

namespace stvg {

/// Lowercase alphanumeric tokens; punctuation acts as a separator.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(current);
    }
    return tokens;
}

/// Canonical per-detection label: all soft-label tokens joined by one space.
inline std::string normalized_label(const Detection& d) {
    std::string out;
    for (const std::string& raw : d.soft_labels) {
        for (const std::string& token : tokenize(raw)) {
            if (!out.empty()) {
                out += ' ';
            }
            out += token;
        }
    }
    return out;
}

}  // namespace stvg
