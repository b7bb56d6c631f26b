#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "imcvit/config.hpp"
#include "imcvit/error.hpp"
#include "imcvit/reuse_opt.hpp"

using namespace imcvit;
using V = std::vector<int>;

namespace {

HardwareConfig calibrated() {
    return calibrated_hardware(DeviceAssignment::uniform(DeviceParams::fefet()));
}

// Every k-subset of {1..n-1}.
std::set<V> all_subsets(int n, int k) {
    std::set<V> out;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        V v;
        for (int i = 0; i < n - 1; ++i)
            if (mask & (1u << i)) v.push_back(i + 1);
        out.insert(v);
    }
    return out;
}

long long choose(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

Eigen::MatrixXd random_matrix(int r, int c, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
}

}  // namespace

TEST_CASE("strided patterns") {
    CHECK(gen_strided(9, 4, 2, 1)->reuse_set == V{1, 3, 5, 7});
    CHECK(gen_strided(9, 4, 2, 2)->reuse_set == V{2, 4, 6, 8});
    CHECK_FALSE(gen_strided(9, 4, 3, 1));
    CHECK_FALSE(gen_strided(9, 4, 2, 0));
    CHECK_FALSE(gen_strided(9, 2, 1, 1));
    CHECK(gen_strided(9, 1, 20, 8)->reuse_set == V{8});
}

TEST_CASE("continuous patterns") {
    CHECK(gen_continuous(9, 4, 1)->reuse_set == V{1, 2, 3, 4});
    CHECK(gen_continuous(9, 4, 5)->reuse_set == V{5, 6, 7, 8});
    CHECK_FALSE(gen_continuous(9, 4, 6));
    CHECK_FALSE(gen_continuous(9, 4, 0));
}

TEST_CASE("pyramid patterns") {
    CHECK(gen_pyramid(9, 4, 2, 2, 1)->reuse_set == V{1, 3, 4, 6});
    CHECK(gen_pyramid(9, 4, 2, 4, 1)->reuse_set == gen_continuous(9, 4, 1)->reuse_set);
    CHECK(gen_pyramid(9, 4, 2, 0, 1)->reuse_set == gen_strided(9, 4, 2, 1)->reuse_set);
    CHECK(gen_pyramid(12, 5, 2, 3, 1)->reuse_set == V{1, 3, 4, 5, 7});
    CHECK_FALSE(gen_pyramid(9, 4, 2, 5, 1));
    CHECK_FALSE(gen_pyramid(6, 4, 2, 2, 1));
}

TEST_CASE("generated patterns validate and carry their rule") {
    for (const auto& p : enumerate_patterns(12, 5)) {
        CHECK_NOTHROW(validate(p, 12));
        CHECK(p.n_reuse() == 5);
        CHECK_FALSE(p.reuses(0));
    }
    auto p = *gen_strided(12, 3, 3, 2);
    CHECK(p.label() == "strided-sl3-s2[2;5;8]");
    p.reuse_set = {2, 5, 9};
    CHECK_THROWS_AS(validate(p, 12), Error);
}

TEST_CASE("enumeration is a deduplicated subset of all patterns") {
    for (int n = 2; n <= 12; ++n) {
        for (int k = 1; k <= std::min(6, n - 1); ++k) {
            const auto pats = enumerate_patterns(n, k);
            const auto all = all_subsets(n, k);
            std::set<V> seen;
            for (const auto& p : pats) {
                CHECK(all.count(p.reuse_set) == 1);
                CHECK(seen.insert(p.reuse_set).second);
            }
            CHECK(static_cast<long long>(pats.size()) <= choose(n - 1, k));
            if (k >= 3 && k <= n - 3) {
                CAPTURE(n);
                CAPTURE(k);
                CHECK(static_cast<long long>(pats.size()) < choose(n - 1, k));
            }
        }
    }
    CHECK(enumerate_patterns(12, 5).size() < 462u);
}

TEST_CASE("maximal reuse leaves one continuous pattern") {
    for (int n = 2; n <= 12; ++n) {
        const auto pats = enumerate_patterns(n, n - 1);
        REQUIRE(pats.size() == 1);
        CHECK(pats[0].kind == PatternKind::Continuous);
    }
}

TEST_CASE("family restriction") {
    const auto s = enumerate_patterns(12, 3, {PatternKind::Strided});
    for (const auto& p : s) CHECK(p.kind == PatternKind::Strided);
    CHECK(enumerate_patterns(12, 3, {PatternKind::Continuous}).size() == 9);
    CHECK_THROWS_AS(enumerate_patterns(12, 12), Error);
}

TEST_CASE("reuse sources") {
    CHECK(reuse_sources(ReusePattern::explicit_set({1, 3}), 4) == V{0, 2});
    CHECK(reuse_sources(ReusePattern::explicit_set({1, 2}), 4) == V{0, 0});
}

TEST_CASE("optimal n_reuse on the calibrated DeiT-S") {
    const auto c = preset_model("deit_s");
    const auto hw = calibrated();
    CHECK(find_optimal_n_reuse(c, hw, 9).n_reuse == 3);
    CHECK(find_optimal_n_reuse(c, hw, 7).n_reuse == 5);
    CHECK(find_optimal_n_reuse(c, hw, 6).n_reuse == 7);
    const auto s = find_optimal_n_reuse(c, hw, 4);
    CHECK(s.feasible);
    CHECK(s.n_reuse == 9);
    CHECK(s.achieved_delay_ms == doctest::Approx(3.54).epsilon(0.05));
    CHECK(find_optimal_n_reuse(c, hw, 11).n_reuse == 0);
    const auto inf = find_optimal_n_reuse(c, hw, 0.5);
    CHECK_FALSE(inf.feasible);
    CHECK(inf.n_reuse == 11);
    CHECK(inf.achieved_delay_ms > 0.5);
    CHECK_THROWS_AS(find_optimal_n_reuse(c, hw, 0.0), Error);
}

TEST_CASE("reuse search minimality over a grid of targets") {
    const auto c = preset_model("lvvit_s");
    const auto hw = calibrated();
    for (double t = 2.0; t <= 16.0; t += 0.25) {
        const auto s = find_optimal_n_reuse(c, hw, t);
        if (!s.feasible) continue;
        CHECK(s.achieved_delay_ms <= t);
        if (s.n_reuse > 0) CHECK(model_cost_for_reuse(c, hw, s.n_reuse - 1).delay_ms > t);
    }
}

TEST_CASE("CKA properties") {
    const auto x = random_matrix(50, 20, 1);
    const auto y = random_matrix(50, 20, 2);
    CHECK(cka_score(x, x) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cka_score(x, y) == doctest::Approx(cka_score(y, x)).epsilon(1e-12));
    const double xy = cka_score(x, y);
    CHECK(xy >= 0.0);
    CHECK(xy <= 1.0);
    CHECK(xy < 0.5);

    // invariance to orthogonal transforms and isotropic scaling
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(20, 20, 3));
    const Eigen::MatrixXd q = qr.householderQ();
    CHECK(cka_score(x * q * 3.5, y) == doctest::Approx(xy).epsilon(1e-9));
    CHECK(cka_score(x, x * q) == doctest::Approx(1.0).epsilon(1e-9));

    std::string why;
    CHECK(cka_score(Eigen::MatrixXd::Constant(50, 20, 2.0), y, &why) == 0.0);
    CHECK_FALSE(why.empty());
    CHECK_THROWS_AS(cka_score(x, random_matrix(49, 20, 4)), Error);
}

TEST_CASE("CKA is small for unrelated data") {
    double mean = 0;
    for (unsigned s = 0; s < 20; ++s) mean += cka_score(random_matrix(400, 8, s), random_matrix(400, 8, 100 + s));
    CHECK(mean / 20 < 0.1);
}

TEST_CASE("select_best") {
    const auto pats = enumerate_patterns(9, 4);
    CHECK(select_best({pats[3]}, [](const ReusePattern&) { return 7.0; }) == pats[3]);
    const auto tie = select_best(pats, [](const ReusePattern&) { return 0.0; });
    for (const auto& p : pats) CHECK_FALSE(p.reuse_set < tie.reuse_set);
    const auto last = select_best(pats, [](const ReusePattern& p) { return -p.reuse_set.back(); });
    CHECK(last.reuse_set.back() == 8);
    CHECK_THROWS_AS(select_best(std::vector<ReusePattern>{}, [](const ReusePattern&) { return 0.0; }),
                    Error);

    auto serial = score_patterns(pats, [](const ReusePattern& p) { return p.reuse_set[1] * 0.5; }, false);
    auto parallel = score_patterns(pats, [](const ReusePattern& p) { return p.reuse_set[1] * 0.5; }, true);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].pattern == parallel[i].pattern);
        CHECK(serial[i].score == parallel[i].score);
    }
}

TEST_CASE("synthetic activations decay with distance") {
    const auto acts = synthetic_attention_outputs(12, 64, 32, 5);
    double near = 0, far = 0;
    int nn = 0, nf = 0;
    for (int i = 0; i < 12; ++i) {
        for (int j = i + 1; j < 12; ++j) {
            const double c = cka_score(acts[i], acts[j]);
            if (j - i == 1) {
                near += c;
                ++nn;
            } else if (j - i >= 4) {
                far += c;
                ++nf;
            }
        }
    }
    CHECK(near / nn > far / nf);
}

TEST_CASE("CKA proxy prefers later starts and larger strides") {
    auto scorer = cka_proxy_scorer(synthetic_attention_outputs(12, 64, 32, 11));
    CHECK(scorer(*gen_strided(12, 3, 2, 5)) < scorer(*gen_strided(12, 3, 2, 1)));
    CHECK(scorer(*gen_strided(12, 3, 4, 1)) < scorer(*gen_strided(12, 3, 2, 1)));
    CHECK(scorer(ReusePattern::none()) == 0.0);
}

TEST_CASE("external scorer file") {
    const auto path = (std::filesystem::temp_directory_path() / "imcvit_scores.txt").string();
    {
        std::ofstream os(path);
        os << "# loss per pattern\n1;2,0.75\n3 5, 0.25\n\n";
    }
    auto scorer = external_scorer(path);
    CHECK(scorer(ReusePattern::explicit_set({1, 2})) == 0.75);
    CHECK(scorer(ReusePattern::explicit_set({3, 5})) == 0.25);
    CHECK_THROWS_AS(scorer(ReusePattern::explicit_set({4})), Error);
    {
        std::ofstream os(path);
        os << "1;2\n";
    }
    CHECK_THROWS_AS(external_scorer(path), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(external_scorer(path), Error);
}

TEST_CASE("index parsing") {
    CHECK(parse_indices("1;3;5") == V{1, 3, 5});
    CHECK(parse_indices("1,3 5") == V{1, 3, 5});
    CHECK(parse_indices("") == V{});
    CHECK(format_indices({1, 3}) == "1;3");
    CHECK_THROWS_AS(parse_indices("1;x"), Error);
}
