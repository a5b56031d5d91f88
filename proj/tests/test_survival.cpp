#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "niwalk/stats.hpp"
#include "niwalk/survival.hpp"
#include "niwalk/walks.hpp"

using namespace niwalk;

namespace {

// Exhaustive oracle: enumerates all 6^(2n) ordered step-code sequences for a
// pair of walks and counts those with S1(0,n] and S2(0,n] disjoint. Built
// from the definition alone, independent of TupleTracker.
struct EnumerationOracle {
    static std::vector<std::vector<Vec3>> all_paths(int n) {
        std::vector<std::vector<Vec3>> paths;
        std::vector<int> codes(n, 0);
        for (;;) {
            std::vector<Vec3> sites;
            Vec3 p = Vec3::Zero();
            for (int i = 0; i < n; ++i) {
                p += LatticeWalker::direction(codes[i]);
                sites.push_back(p);
            }
            paths.push_back(std::move(sites));
            int i = n - 1;
            while (i >= 0 && codes[i] == 5) codes[i--] = 0;
            if (i < 0) break;
            ++codes[i];
        }
        return paths;
    }

    static bool disjoint(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
        for (const auto& x : a)
            for (const auto& y : b)
                if (x == y) return false;
        return true;
    }

    /// Returns (surviving pairs, total pairs) for exact survival through n.
    static std::pair<std::uint64_t, std::uint64_t> survival_count(int n) {
        auto paths = all_paths(n);
        std::uint64_t alive = 0;
        for (const auto& a : paths)
            for (const auto& b : paths) alive += disjoint(a, b);
        return {alive, static_cast<std::uint64_t>(paths.size()) * paths.size()};
    }
};

TupleExperimentConfig small_config(std::uint64_t pairs, std::uint64_t steps,
                                   std::vector<std::uint64_t> cps) {
    TupleExperimentConfig c;
    c.pairs = pairs;
    c.max_steps = steps;
    c.checkpoints = std::move(cps);
    c.threads = 2;
    return c;
}

}  // namespace

TEST_CASE("forced step sequences pin the intersection convention") {
    SUBCASE("simultaneous arrival at the same site counts at that step") {
        TupleTracker t(1, 1);
        // both step +x at t=1
        t.advance([](std::uint32_t) { return 1; }, 5);
        REQUIRE(t.first_intersection_step().has_value());
        CHECK(*t.first_intersection_step() == 1);
    }
    SUBCASE("delayed cross-visit counts at the later time") {
        TupleTracker t(1, 1);
        // walk a: +x, +y, +y ; walk b: -x, +x (back to origin), +x
        int a_codes[] = {1, 3, 3};
        int b_codes[] = {0, 1, 1};
        // advance one step at a time so the step index is visible to the lambda
        int step = 0;
        t.advance([&](std::uint32_t w) { return w == 0 ? a_codes[step] : b_codes[step]; }, 1);
        CHECK(!t.first_intersection_step());
        step = 1;
        t.advance([&](std::uint32_t w) { return w == 0 ? a_codes[step] : b_codes[step]; }, 2);
        // b sits on the origin at t=2; the time-0 origin site never counts
        CHECK(!t.first_intersection_step());
        step = 2;
        t.advance([&](std::uint32_t w) { return w == 0 ? a_codes[step] : b_codes[step]; }, 3);
        REQUIRE(t.first_intersection_step().has_value());
        CHECK(*t.first_intersection_step() == 3);
    }
    SUBCASE("a later mutual return to the origin site does count") {
        TupleTracker t(1, 1);
        // walk a: +x then -x, walk b: +y then -y; at t=2 both revisit the
        // origin site, which belongs to S(0,2] for each of them
        int a_codes[] = {1, 0};
        int b_codes[] = {3, 2};
        int step = 0;
        t.advance([&](std::uint32_t w) { return w == 0 ? a_codes[step] : b_codes[step]; }, 1);
        CHECK(!t.first_intersection_step());
        step = 1;
        t.advance([&](std::uint32_t w) { return w == 0 ? a_codes[step] : b_codes[step]; }, 2);
        REQUIRE(t.first_intersection_step().has_value());
        CHECK(*t.first_intersection_step() == 2);
    }
}

TEST_CASE("advance_pair argument validation") {
    TupleTracker t(1, 1);
    t.advance([](std::uint32_t) { return 1; }, 1);
    CHECK_THROWS_AS(t.advance([](std::uint32_t) { return 1; }, 1), std::invalid_argument);
}

TEST_CASE("coordinate range overflow aborts the pair") {
    TupleTracker t(1, 1);
    // walk a marches +x, walk b marches -x; they never meet but leave range
    CHECK_THROWS_AS(
        t.advance([](std::uint32_t w) { return w == 0 ? 1 : 0; }, std::uint64_t{1} << 21),
        coordinate_overflow_error);
}

TEST_CASE("one-step survival is exactly 5/6 by enumeration") {
    auto [alive, total] = EnumerationOracle::survival_count(1);
    CHECK(total == 36);
    CHECK(alive == 30);
}

TEST_CASE("simulator matches the exhaustive oracle for n = 1,2,3") {
    auto cfg = small_config(200000, 3, {1, 2, 3});
    auto out = run_survival_experiment(cfg, 2024);
    REQUIRE(out.complete);
    for (int n = 1; n <= 3; ++n) {
        auto [alive, total] = EnumerationOracle::survival_count(n);
        double exact = static_cast<double>(alive) / static_cast<double>(total);
        double sim = out.table.fraction(static_cast<std::size_t>(n - 1));
        double sigma = stats::binomial_sigma(exact, static_cast<double>(cfg.pairs));
        INFO("n=", n, " exact=", exact, " sim=", sim);
        CHECK(std::fabs(sim - exact) <= 3 * sigma);
    }
}

TEST_CASE("M(n) is nonincreasing") {
    auto out = run_survival_experiment(small_config(20000, 200, {1, 5, 10, 50, 100, 200}), 7);
    REQUIRE(out.complete);
    for (std::size_t i = 1; i < out.table.counts.size(); ++i)
        CHECK(out.table.counts[i] <= out.table.counts[i - 1]);
    CHECK(out.table.counts[0] <= out.table.total_pairs);
}

TEST_CASE("estimator identities against published counts") {
    SurvivalTable t;
    t.total_pairs = 1'000'000;
    t.max_steps = 100'000;
    t.h_lag = 10'000;
    t.checkpoints = {10'000, 20'000, 30'000, 40'000, 50'000,
                     60'000, 70'000, 80'000, 90'000, 100'000};
    t.counts = {74'629, 61'151, 54'262, 49'981, 46'914,
                44'455, 42'515, 40'962, 39'623, 38'493};

    auto k1 = k_estimator(t, 10'000);
    REQUIRE(k1.has_value());
    CHECK(std::fabs(k1->value - 0.2818) < 5e-5);
    CHECK(k1->se > 0.0);

    auto k10 = k_estimator(t, 100'000);
    REQUIRE(k10.has_value());
    CHECK(std::fabs(k10->value - 0.2829) < 5e-5);

    auto h1 = h_estimator(t, 10'000, 10'000);
    REQUIRE(h1.has_value());
    CHECK(std::fabs(h1->value - 0.2874) < 5e-5);

    auto h9 = h_estimator(t, 90'000, 10'000);
    REQUIRE(h9.has_value());
    CHECK(std::fabs(h9->value - 0.2746) < 5e-5);
}

TEST_CASE("estimator edge cases") {
    SurvivalTable t;
    t.total_pairs = 1000;
    t.max_steps = 100;
    t.checkpoints = {10, 20};
    t.counts = {1000, 0};

    auto k = k_estimator(t, 10);
    REQUIRE(k.has_value());
    CHECK(k->value == doctest::Approx(0.0));  // no deaths
    CHECK(!k_estimator(t, 20).has_value());   // M(n) = 0: undefined
    CHECK_THROWS_AS((void)k_estimator(t, 15), std::invalid_argument);

    SurvivalTable t2 = t;
    t2.counts = {500, 500};
    auto h = h_estimator(t2, 10, 10);
    REQUIRE(h.has_value());
    CHECK(h->value == doctest::Approx(0.0));  // no deaths in the window
    CHECK(!h_estimator(t2, 20, 10).has_value());
}

TEST_CASE("runs are deterministic across repetition and thread counts") {
    auto cfg = small_config(30000, 100, {10, 50, 100});
    auto a = run_survival_experiment(cfg, 99);
    cfg.threads = 1;
    auto b = run_survival_experiment(cfg, 99);
    cfg.threads = 4;
    auto c = run_survival_experiment(cfg, 99);
    REQUIRE(a.complete);
    REQUIRE(b.complete);
    REQUIRE(c.complete);
    CHECK(a.table == b.table);
    CHECK(a.table == c.table);
}

TEST_CASE("tuple (1,1) equals the pair experiment exactly") {
    auto cfg = small_config(20000, 100, {10, 100});
    auto pair = run_survival_experiment(cfg, 314);
    auto cfg2 = cfg;
    cfg2.group_m = 1;
    cfg2.group_n = 1;
    auto tup = run_tuple_experiment(cfg2, 314);
    REQUIRE(pair.complete);
    REQUIRE(tup.complete);
    CHECK(pair.table == tup.table);
}

TEST_CASE("one-step tuple survival (2,1) matches 216-case enumeration") {
    // group 1 = {a1, a2}, group 2 = {b}; survive iff b's first site differs
    // from both of group 1's first sites: 150/216 = 25/36.
    std::uint64_t alive = 0;
    for (int ca1 = 0; ca1 < 6; ++ca1)
        for (int ca2 = 0; ca2 < 6; ++ca2)
            for (int cb = 0; cb < 6; ++cb)
                alive += (cb != ca1 && cb != ca2);
    CHECK(alive == 150);

    auto cfg = small_config(100000, 1, {1});
    cfg.group_m = 2;
    cfg.group_n = 1;
    auto out = run_tuple_experiment(cfg, 11);
    REQUIRE(out.complete);
    double exact = 150.0 / 216.0;
    double sim = out.table.fraction(0);
    CHECK(std::fabs(sim - exact) <= 3 * stats::binomial_sigma(exact, 100000));
}

TEST_CASE("(1,2) and (2,1) are statistically indistinguishable") {
    auto cfg = small_config(20000, 1000, {1000});
    cfg.group_m = 2;
    cfg.group_n = 1;
    auto g21 = run_tuple_experiment(cfg, 555);
    cfg.group_m = 1;
    cfg.group_n = 2;
    auto g12 = run_tuple_experiment(cfg, 556);
    REQUIRE(g21.complete);
    REQUIRE(g12.complete);
    double z = stats::two_proportion_z(g21.table.counts[0], cfg.pairs,
                                       g12.table.counts[0], cfg.pairs);
    // two-sample z-test, p > 0.01 means |z| below 2.576
    CHECK(std::fabs(z) < 2.576);
}

TEST_CASE("interrupted runs resume to identical tables") {
    auto cfg = small_config(10000, 500, {100, 200, 300, 400, 500});
    auto full = run_survival_experiment(cfg, 77);
    REQUIRE(full.complete);

    for (std::uint64_t stop_at : {5120u, 3000u, 9999u}) {
        RunControl ctl;
        ctl.stop_after_pairs = stop_at;
        auto part = run_survival_experiment(cfg, 77, ctl);
        REQUIRE(!part.complete);
        CHECK(part.progress.cursor >= stop_at);
        auto resumed = run_survival_experiment(cfg, 77, {}, &part.progress);
        REQUIRE(resumed.complete);
        CHECK(resumed.table == full.table);
    }
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(run_survival_experiment(small_config(0, 10, {5}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_survival_experiment(small_config(10, 10, {}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_survival_experiment(small_config(10, 10, {11}), 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_survival_experiment(small_config(10, 10, {5, 3}), 1),
                    std::invalid_argument);
}
