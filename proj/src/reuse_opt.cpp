// SPDX-License-Identifier: Apache-2.0
#include "imcvit/reuse_opt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <random>
#include <thread>

#include "imcvit/error.hpp"

namespace imcvit {

ReuseSearch find_optimal_n_reuse(const ModelConfig& cfg, const HardwareConfig& hw,
                                 double target_delay_ms) {
    require(target_delay_ms > 0.0 && std::isfinite(target_delay_ms),
            "target delay must be a positive number of milliseconds");
    ReuseSearch s;
    s.target_delay_ms = target_delay_ms;
    s.baseline_delay_ms = model_cost_for_reuse(cfg, hw, 0).delay_ms;
    const int r_max = std::max(0, cfg.n_encoders - 1);
    for (int r = 0; r <= r_max; ++r) {
        const double delay = r == 0 ? s.baseline_delay_ms : model_cost_for_reuse(cfg, hw, r).delay_ms;
        s.n_reuse = r;
        s.achieved_delay_ms = delay;
        if (delay <= target_delay_ms) {
            s.feasible = true;
            return s;
        }
    }
    return s;
}

std::optional<ReusePattern> gen_strided(int n_encoders, int n_reuse, int sl, int start) {
    if (sl < 2 || start < 1 || n_reuse < 1) return std::nullopt;
    if (start + static_cast<long long>(n_reuse - 1) * sl >= n_encoders) return std::nullopt;
    ReusePattern p;
    p.kind = PatternKind::Strided;
    p.sl = sl;
    p.start = start;
    for (int i = 0; i < n_reuse; ++i) p.reuse_set.push_back(start + i * sl);
    return p;
}

std::optional<ReusePattern> gen_continuous(int n_encoders, int n_reuse, int start) {
    if (start < 1 || n_reuse < 1 || start + n_reuse - 1 >= n_encoders) return std::nullopt;
    ReusePattern p;
    p.kind = PatternKind::Continuous;
    p.start = start;
    for (int i = 0; i < n_reuse; ++i) p.reuse_set.push_back(start + i);
    return p;
}

std::optional<ReusePattern> gen_pyramid(int n_encoders, int n_reuse, int sl, int n_cont,
                                        int start) {
    if (sl < 2 || start < 1 || n_reuse < 1 || n_cont < 0 || n_cont > n_reuse) return std::nullopt;
    const int prefix = (n_reuse - n_cont) / 2;
    ReusePattern p;
    p.kind = PatternKind::Pyramid;
    p.sl = sl;
    p.n_cont = n_cont;
    p.start = start;
    auto in_middle = [&](int i) { return i >= prefix && i < prefix + n_cont; };
    long long idx = start;
    for (int i = 0; i < n_reuse; ++i) {
        if (i > 0) idx += (in_middle(i - 1) && in_middle(i)) ? 1 : sl;
        if (idx >= n_encoders) return std::nullopt;
        p.reuse_set.push_back(static_cast<int>(idx));
    }
    return p;
}

std::vector<ReusePattern> enumerate_patterns(int n_encoders, int n_reuse) {
    return enumerate_patterns(n_encoders, n_reuse,
                              {PatternKind::Strided, PatternKind::Continuous, PatternKind::Pyramid});
}

std::vector<ReusePattern> enumerate_patterns(int n_encoders, int n_reuse,
                                             const std::vector<PatternKind>& families) {
    require(n_reuse >= 1 && n_reuse < n_encoders, "enumerate_patterns needs 1 <= n_reuse < n_encoders");
    auto wants = [&](PatternKind k) {
        return std::find(families.begin(), families.end(), k) != families.end();
    };
    // First generator to produce a set wins; families are visited in a fixed order.
    std::map<std::vector<int>, ReusePattern> unique;
    auto keep = [&](std::optional<ReusePattern> p) {
        if (p) unique.emplace(p->reuse_set, std::move(*p));
    };
    for (int start = 1; start < n_encoders; ++start) {
        if (wants(PatternKind::Strided))
            for (int sl = 2; sl < n_encoders; ++sl) keep(gen_strided(n_encoders, n_reuse, sl, start));
        if (wants(PatternKind::Continuous)) keep(gen_continuous(n_encoders, n_reuse, start));
    }
    if (wants(PatternKind::Pyramid)) {
        for (int start = 1; start < n_encoders; ++start)
            for (int sl = 2; sl < n_encoders; ++sl)
                for (int c = 0; c <= n_reuse; ++c) keep(gen_pyramid(n_encoders, n_reuse, sl, c, start));
    }
    std::vector<ReusePattern> out;
    out.reserve(unique.size());
    for (auto& [set, p] : unique) out.push_back(std::move(p));
    return out;
}

std::vector<int> reuse_sources(const ReusePattern& pattern, int n_encoders) {
    validate(pattern, n_encoders);
    std::vector<int> sources;
    int last = 0;
    for (int i = 0; i < n_encoders; ++i) {
        if (pattern.reuses(i))
            sources.push_back(last);
        else
            last = i;
    }
    return sources;
}

double cka_score(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::string* diagnostic) {
    require(a.rows() == b.rows() && a.cols() == b.cols(),
            "cka_score needs equal shapes, got " + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()));
    require(a.size() > 0, "cka_score needs non-empty inputs");
    const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
    const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
    auto degenerate = [](const Eigen::MatrixXd& raw, const Eigen::MatrixXd& centered) {
        return centered.norm() <= 1e-12 * std::max(1.0, raw.norm());
    };
    if (degenerate(a, ac) || degenerate(b, bc)) {
        if (diagnostic) *diagnostic = "zero-variance input; CKA defined as 0";
        return 0.0;
    }
    const double xy = (bc.transpose() * ac).squaredNorm();
    const double xx = (ac.transpose() * ac).squaredNorm();
    const double yy = (bc.transpose() * bc).squaredNorm();
    if (diagnostic) diagnostic->clear();
    return std::clamp(xy / std::sqrt(xx * yy), 0.0, 1.0);
}

std::vector<ScoredPattern> score_patterns(const std::vector<ReusePattern>& candidates,
                                          const PatternScorer& scorer, bool parallel) {
    std::vector<ScoredPattern> out(candidates.size());
    auto score_one = [&](std::size_t i) { out[i] = {candidates[i], scorer(candidates[i])}; };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads = parallel ? std::min<std::size_t>(hw, candidates.size()) : 1;
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i) score_one(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n_threads);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < candidates.size(); i = next++) score_one(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

ReusePattern select_best(const std::vector<ScoredPattern>& scored) {
    require(!scored.empty(), "select_best needs at least one candidate");
    const ScoredPattern* best = nullptr;
    for (const auto& s : scored) {
        require(!std::isnan(s.score), "scorer returned NaN for pattern " + s.pattern.label());
        if (!best || s.score < best->score ||
            (s.score == best->score && s.pattern.reuse_set < best->pattern.reuse_set))
            best = &s;
    }
    return best->pattern;
}

ReusePattern select_best(const std::vector<ReusePattern>& candidates, const PatternScorer& scorer) {
    require(!candidates.empty(), "select_best needs at least one candidate");
    return select_best(score_patterns(candidates, scorer));
}

PatternScorer cka_proxy_scorer(std::vector<Eigen::MatrixXd> attention_outputs) {
    return [outs = std::move(attention_outputs)](const ReusePattern& p) {
        const int n = static_cast<int>(outs.size());
        const auto sources = reuse_sources(p, n);
        if (sources.empty()) return 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < sources.size(); ++i)
            sum += 1.0 - cka_score(outs[static_cast<std::size_t>(p.reuse_set[i])],
                                   outs[static_cast<std::size_t>(sources[i])]);
        return sum / static_cast<double>(sources.size());
    };
}

PatternScorer external_scorer(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open scorer file '" + path + "'");
    std::map<std::vector<int>, double> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.rfind(',');
        const std::string where = path + ":" + std::to_string(line_no);
        require(comma != std::string::npos, where + ": expected '<indices>,<score>'");
        auto set = parse_indices(line.substr(0, comma));
        std::sort(set.begin(), set.end());
        double score = 0.0;
        try {
            score = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw Error(where + ": bad score");
        }
        table[set] = score;
    }
    return [table = std::move(table)](const ReusePattern& p) {
        auto it = table.find(p.reuse_set);
        require(it != table.end(), "external scorer has no score for pattern [" +
                                       format_indices(p.reuse_set) + "]");
        return it->second;
    };
}

std::vector<Eigen::MatrixXd> synthetic_attention_outputs(int n_encoders, int t, int d,
                                                         unsigned long long seed,
                                                         double rho_shallow, double rho_deep) {
    require(n_encoders >= 1 && t >= 1 && d >= 1, "synthetic activations need positive sizes");
    require(rho_shallow >= 0 && rho_shallow <= 1 && rho_deep >= 0 && rho_deep <= 1,
            "correlations must be in [0, 1]");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto noise = [&] {
        Eigen::MatrixXd m(t, d);
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = normal(rng);
        return m;
    };
    std::vector<Eigen::MatrixXd> out;
    out.push_back(noise());
    for (int i = 1; i < n_encoders; ++i) {
        const double frac = n_encoders > 2 ? double(i - 1) / (n_encoders - 2) : 0.0;
        const double rho = rho_shallow + (rho_deep - rho_shallow) * frac;
        out.push_back(rho * out.back() + std::sqrt(1.0 - rho * rho) * noise());
    }
    return out;
}

}  // namespace imcvit
