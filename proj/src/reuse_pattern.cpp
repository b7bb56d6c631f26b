// SPDX-License-Identifier: Apache-2.0
#include "imcvit/reuse_pattern.hpp"

#include <algorithm>
#include <sstream>

#include "imcvit/error.hpp"
#include "imcvit/reuse_opt.hpp"

namespace imcvit {

std::string to_string(PatternKind kind) {
    switch (kind) {
        case PatternKind::Strided: return "strided";
        case PatternKind::Continuous: return "continuous";
        case PatternKind::Pyramid: return "pyramid";
        case PatternKind::Explicit: return "explicit";
    }
    return "unknown";
}

bool ReusePattern::reuses(int encoder) const {
    return std::binary_search(reuse_set.begin(), reuse_set.end(), encoder);
}

std::string ReusePattern::label() const {
    std::ostringstream os;
    switch (kind) {
        case PatternKind::Strided: os << "strided-sl" << sl << "-s" << start; break;
        case PatternKind::Continuous: os << "continuous-s" << start; break;
        case PatternKind::Pyramid: os << "pyramid-sl" << sl << "-c" << n_cont << "-s" << start; break;
        case PatternKind::Explicit:
            if (reuse_set.empty()) return "baseline";
            os << "explicit";
            break;
    }
    os << '[' << format_indices(reuse_set) << ']';
    return os.str();
}

ReusePattern ReusePattern::explicit_set(std::vector<int> indices) {
    std::sort(indices.begin(), indices.end());
    ReusePattern p;
    p.kind = PatternKind::Explicit;
    p.start = indices.empty() ? 0 : indices.front();
    p.reuse_set = std::move(indices);
    return p;
}

void validate(const ReusePattern& p, int n_encoders) {
    const auto& s = p.reuse_set;
    require(std::is_sorted(s.begin(), s.end()), "reuse set must be sorted");
    require(std::adjacent_find(s.begin(), s.end()) == s.end(), "reuse set has duplicate indices");
    for (int idx : s) {
        require(idx != 0, "encoder 0 cannot reuse attention: no preceding attention exists");
        require(idx > 0 && idx < n_encoders,
                "reuse index " + std::to_string(idx) + " out of range for " +
                    std::to_string(n_encoders) + " encoders");
    }
    if (p.kind == PatternKind::Explicit || s.empty()) return;

    require(p.start == s.front(), "pattern start does not match first reusing encoder");
    std::optional<ReusePattern> regenerated;
    switch (p.kind) {
        case PatternKind::Strided: regenerated = gen_strided(n_encoders, p.n_reuse(), p.sl, p.start); break;
        case PatternKind::Continuous: regenerated = gen_continuous(n_encoders, p.n_reuse(), p.start); break;
        case PatternKind::Pyramid:
            regenerated = gen_pyramid(n_encoders, p.n_reuse(), p.sl, p.n_cont, p.start);
            break;
        case PatternKind::Explicit: break;
    }
    require(regenerated && regenerated->reuse_set == s,
            "reuse set does not follow the " + to_string(p.kind) + " rule");
}

std::string format_indices(const std::vector<int>& indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(indices[i]);
    }
    return out;
}

std::vector<int> parse_indices(const std::string& text) {
    std::string cleaned = text;
    std::replace_if(cleaned.begin(), cleaned.end(),
                    [](char c) { return c == ';' || c == ',' || c == '\t'; }, ' ');
    std::istringstream is(cleaned);
    std::vector<int> out;
    std::string tok;
    while (is >> tok) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw Error("bad encoder index '" + tok + "'");
        }
        require(used == tok.size(), "bad encoder index '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace imcvit
