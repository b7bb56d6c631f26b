// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace imcvit {

enum class PatternKind { Strided, Continuous, Pyramid, Explicit };

std::string to_string(PatternKind kind);

/// Set of encoder indices (0-based) whose attention block is replaced by a
/// transformation block fed from an earlier encoder's attention output.
struct ReusePattern {
    PatternKind kind = PatternKind::Explicit;
    int sl = 0;      ///< stride length (Strided, Pyramid)
    int n_cont = 0;  ///< continuous run length (Pyramid)
    int start = 0;   ///< first reusing encoder
    std::vector<int> reuse_set;  ///< sorted, unique

    int n_reuse() const { return static_cast<int>(reuse_set.size()); }
    bool reuses(int encoder) const;

    /// e.g. "strided-sl2-s1[1;3;5]"; "baseline" for an empty explicit set.
    std::string label() const;

    static ReusePattern none() { return {}; }
    static ReusePattern explicit_set(std::vector<int> indices);

    friend bool operator==(const ReusePattern&, const ReusePattern&) = default;
};

/// Throws Error unless the pattern is structurally valid for `n_encoders`:
/// encoder 0 never reuses, indices in range, sorted/unique, and the
/// reuse_set matches the generating rule of its kind.
void validate(const ReusePattern& pattern, int n_encoders);

/// "1;3;5" (empty string for an empty set).
std::string format_indices(const std::vector<int>& indices);

/// Parses "1;3;5", "1,3,5" or "1 3 5".
std::vector<int> parse_indices(const std::string& text);

}  // namespace imcvit
