// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "imcvit/cost_model.hpp"
#include "imcvit/reuse_pattern.hpp"
#include "imcvit/workload.hpp"

namespace imcvit {

struct ReuseSearch {
    bool feasible = false;
    int n_reuse = 0;              ///< meaningful only when feasible
    double achieved_delay_ms = 0.0;
    double target_delay_ms = 0.0;
    double baseline_delay_ms = 0.0;
};

/// Smallest r in [0, n_encoders-1] whose delay meets the target. When even
/// maximal reuse misses the target the result is marked infeasible and
/// carries the maximal-reuse delay.
ReuseSearch find_optimal_n_reuse(const ModelConfig& cfg, const HardwareConfig& hw,
                                 double target_delay_ms);

std::optional<ReusePattern> gen_strided(int n_encoders, int n_reuse, int sl, int start);
std::optional<ReusePattern> gen_continuous(int n_encoders, int n_reuse, int start);
/// Strided prefix, `n_cont` consecutive encoders, strided suffix. The
/// prefix takes floor((n_reuse - n_cont) / 2) of the strided encoders.
std::optional<ReusePattern> gen_pyramid(int n_encoders, int n_reuse, int sl, int n_cont,
                                        int start);

/// Every distinct strided/continuous/pyramid pattern with `n_reuse`
/// reusing encoders, sorted by reuse set.
std::vector<ReusePattern> enumerate_patterns(int n_encoders, int n_reuse);

/// Patterns restricted to the requested families.
std::vector<ReusePattern> enumerate_patterns(int n_encoders, int n_reuse,
                                             const std::vector<PatternKind>& families);

/// Source encoder for each reusing encoder: nearest preceding non-reuser.
std::vector<int> reuse_sources(const ReusePattern& pattern, int n_encoders);

/// Linear centered kernel alignment of two t x d activation matrices.
/// Zero-variance input yields 0; `diagnostic` receives the reason.
double cka_score(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                 std::string* diagnostic = nullptr);

/// Lower is better.
using PatternScorer = std::function<double(const ReusePattern&)>;

struct ScoredPattern {
    ReusePattern pattern;
    double score = 0.0;
};

/// Scores every candidate (concurrently when `parallel`) in input order.
std::vector<ScoredPattern> score_patterns(const std::vector<ReusePattern>& candidates,
                                          const PatternScorer& scorer, bool parallel = true);

/// Argmin of the scorer; ties go to the lexicographically smallest reuse set.
ReusePattern select_best(const std::vector<ReusePattern>& candidates, const PatternScorer& scorer);
ReusePattern select_best(const std::vector<ScoredPattern>& scored);

/// Mean (1 - CKA) between each reusing encoder's attention output and the
/// output of the encoder it reuses, from one activation matrix per encoder.
PatternScorer cka_proxy_scorer(std::vector<Eigen::MatrixXd> attention_outputs);

/// Scores read from a text file: one "<indices>,<score>" line per pattern,
/// indices separated by ';' or spaces, '#' comments. Unknown patterns throw.
PatternScorer external_scorer(const std::string& path);

/// Per-encoder t x d activations whose adjacent-encoder correlation grows
/// linearly from `rho_shallow` to `rho_deep` with depth.
std::vector<Eigen::MatrixXd> synthetic_attention_outputs(int n_encoders, int t, int d,
                                                         unsigned long long seed,
                                                         double rho_shallow = 0.5,
                                                         double rho_deep = 0.95);

}  // namespace imcvit
