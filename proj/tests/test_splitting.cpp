#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "niwalk/splitting.hpp"
#include "niwalk/stats.hpp"

using namespace niwalk;

namespace {

StartConfig small_start(double r0 = 8.0) {
    StartConfig cfg;
    cfg.base_radius = r0;
    cfg.min_base_radius = r0;
    return cfg;
}

}  // namespace

TEST_CASE("ensemble evolution is deterministic") {
    auto run = [&] {
        ParticleEnsemble ens(build_initial_pair(small_start()), 64, 31337, 5);
        ens.evolve();
        ens.evolve();
        std::vector<std::uint8_t> blob;
        for (const auto& p : ens.particles()) {
            auto bytes = serialize_pair(p);
            blob.insert(blob.end(), bytes.begin(), bytes.end());
        }
        return std::make_tuple(std::vector<double>(ens.p_hats().begin(), ens.p_hats().end()),
                               ens.resampling_log(), blob);
    };
    CHECK(run() == run());
}

TEST_CASE("ensemble bookkeeping") {
    ParticleEnsemble ens(build_initial_pair(small_start()), 128, 2222, 0);
    CHECK(ens.shell() == 0);
    CHECK(ens.q_hat() == doctest::Approx(1.0));  // empty product
    ens.evolve();
    CHECK(ens.shell() == 1);
    CHECK(ens.particles().size() == 128);
    REQUIRE(ens.p_hats().size() == 1);
    CHECK(ens.p_hats()[0] > 0.0);
    CHECK(ens.p_hats()[0] <= 1.0);
    CHECK(ens.q_hat() == doctest::Approx(ens.p_hats()[0]));
    CHECK(ens.ess_history()[0] == doctest::Approx(ens.p_hats()[0] * 128));
    for (const auto& p : ens.particles()) {
        CHECK(p.alive);
        CHECK(p.shell == 1);
    }
}

TEST_CASE("total extinction raises with the shell index") {
    // a single hugging particle dies at shell one for some seed; scan a few
    auto shells = ShellConfig(8.0, 8.0);
    StartConfig cfg = small_start();
    bool seen = false;
    for (std::uint64_t seed = 0; seed < 256 && !seen; ++seed) {
        ParticleEnsemble ens(build_initial_pair(cfg), 1, seed, 0);
        try {
            ens.evolve();
        } catch (const extinction_error& e) {
            CHECK(e.shell == 1);
            seen = true;
        }
    }
    CHECK(seen);
}

TEST_CASE("first-shell survival fraction matches direct Monte Carlo") {
    auto direct = direct_pathspace_survival(small_start(), 1, 20000, 99, 2);
    double q1 = static_cast<double>(direct.alive_after[0]) / 20000.0;

    ParticleEnsemble ens(build_initial_pair(small_start()), 2000, 4242, 1);
    ens.evolve();
    double p1 = ens.p_hats()[0];

    double joint = std::sqrt(stats::binomial_sigma(q1, 20000) * stats::binomial_sigma(q1, 20000) +
                             stats::binomial_sigma(q1, 2000) * stats::binomial_sigma(q1, 2000));
    CHECK(std::fabs(p1 - q1) <= 3 * joint);
}

TEST_CASE("estimate_q") {
    SUBCASE("shell zero is the empty product") {
        std::vector<std::vector<double>> phats{{0.5}, {0.25}};
        auto q0 = estimate_q(phats, 0);
        CHECK(q0.value == doctest::Approx(1.0));
    }
    SUBCASE("per-replicate products and spread") {
        std::vector<std::vector<double>> phats{{0.5, 0.4}, {0.25, 0.8}};
        auto q2 = estimate_q(phats, 2);
        CHECK(q2.per_replicate[0] == doctest::Approx(0.2));
        CHECK(q2.per_replicate[1] == doctest::Approx(0.2));
        CHECK(q2.value == doctest::Approx(0.2));
        CHECK(q2.se == doctest::Approx(0.0));
    }
    SUBCASE("replicates must reach the shell") {
        std::vector<std::vector<double>> phats{{0.5}};
        CHECK_THROWS_AS(estimate_q(phats, 2), std::invalid_argument);
    }
}

TEST_CASE("estimate_xi recovers a synthetic exponent exactly") {
    std::vector<std::vector<double>> phats(3, std::vector<double>(8, std::exp(-0.57)));
    auto xi = estimate_xi(phats, 2, 8);
    CHECK(xi.value == doctest::Approx(0.57).epsilon(1e-12));
    CHECK(xi.se == doctest::Approx(0.0));
    CHECK_THROWS_AS(estimate_xi(phats, 2, 4), std::invalid_argument);  // window < 3
}

TEST_CASE("q_ratio_convergence") {
    SUBCASE("geometric q-hats give identically zero increments") {
        std::vector<std::vector<double>> phats(4, std::vector<double>(6, 0.6));
        auto seq = q_ratio_convergence(phats);
        for (double inc : seq.increments) CHECK(inc == doctest::Approx(0.0));
        // Q-hat display consistency: Q_{n+1}/Q_n = e^xi_ref * ratio
        for (std::size_t j = 1; j < seq.q_display.size(); ++j) {
            double lhs = seq.q_display[j] / seq.q_display[j - 1];
            double rhs = std::exp(seq.xi_ref) * seq.ratios[j];
            CHECK(lhs == doctest::Approx(rhs));
        }
    }
    SUBCASE("decaying transient gives a negative Cauchy trend") {
        std::vector<double> p;
        for (int j = 0; j < 8; ++j) p.push_back(0.565 - 0.2 * std::exp(-0.8 * j));
        std::vector<std::vector<double>> phats{p, p};
        auto seq = q_ratio_convergence(phats);
        CHECK(seq.cauchy_trend.rho < 0.0);
        CHECK(seq.cauchy_trend.p_neg < 0.05);
    }
    SUBCASE("ragged replicates are rejected") {
        std::vector<std::vector<double>> phats{{0.5, 0.5}, {0.5}};
        CHECK_THROWS_AS(q_ratio_convergence(phats), std::invalid_argument);
    }
}

TEST_CASE("splitting q2 agrees with direct rejection Monte Carlo") {
    ReplicateOptions opts;
    auto results = run_splitting_replicates(small_start(), 400, 2, opts, 1212, 8, 2);
    auto phats = extract_phats(results);
    auto q2 = estimate_q(phats, 2);

    auto direct = direct_pathspace_survival(small_start(), 2, 20000, 88, 2);
    double q2_direct = static_cast<double>(direct.alive_after[1]) / 20000.0;
    double joint = std::sqrt(q2.se * q2.se +
                             std::pow(stats::binomial_sigma(q2_direct, 20000), 2));
    CHECK(std::fabs(q2.value - q2_direct) <= 3 * joint);
}

TEST_CASE("rho1 table shape and sanity") {
    ReplicateOptions opts;
    opts.eval_sep = true;
    auto results = run_splitting_replicates(small_start(), 200, 3, opts, 3434, 5, 2);
    auto rows = estimate_rho1(results);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.alive > 0);
        CHECK(row.sep <= row.alive);
        CHECK(row.freq >= 0.0);
        CHECK(row.freq <= 1.0);
    }
    ReplicateOptions no_sep;
    auto bare = run_splitting_replicates(small_start(), 50, 1, no_sep, 1, 2, 1);
    CHECK_THROWS_AS(estimate_rho1(bare), std::invalid_argument);
}

TEST_CASE("functionals") {
    auto pair = build_initial_pair(small_start(32.0));
    CHECK(evaluate_functional(pair, MixingFunctional::endpoint_angle) ==
          doctest::Approx(std::numbers::pi));
    CHECK(evaluate_functional(pair, MixingFunctional::sep_indicator) == doctest::Approx(1.0));
    CHECK(evaluate_functional(pair, MixingFunctional::halfspace_fraction) ==
          doctest::Approx(1.0));
}

TEST_CASE("identical replicate runs give KS distance zero") {
    ReplicateOptions opts;
    opts.eval_functional = true;
    opts.functional = MixingFunctional::endpoint_angle;
    auto a = run_splitting_replicate(small_start(), 100, 2, opts, 777, 3);
    auto b = run_splitting_replicate(small_start(), 100, 2, opts, 777, 3);
    CHECK(stats::ks_statistic(a.shells[1].functional, b.shells[1].functional) ==
          doctest::Approx(0.0));
}

TEST_CASE("mixing diagnostic on identical configurations sits at the noise floor") {
    auto diag = mixing_distance(small_start(), small_start(), 1, 3,
                                MixingFunctional::endpoint_angle, 400, 6, 4321, 2);
    REQUIRE(diag.shells.size() == 3);
    for (double d : diag.distance) {
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
    // same law on both sides: distances stay around the two-sample noise floor
    CHECK(diag.distance.back() < 3.0 * diag.final_critical);
}

TEST_CASE("cone exponent: full space is zero, narrower cones are steeper") {
    ConeSpec full(Vec3d{1, 0, 0}, std::numbers::pi);
    auto a_full = estimate_cone_exponent(full, 3, 100, 4, 606, 2);
    CHECK(a_full.alpha == doctest::Approx(0.0));
    CHECK(a_full.ci.contains(0.0));

    ConeSpec half(Vec3d{1, 0, 0}, std::numbers::pi / 2);
    ConeSpec third(Vec3d{1, 0, 0}, std::numbers::pi / 3);
    auto a_half = estimate_cone_exponent(half, 3, 300, 4, 607, 2);
    auto a_third = estimate_cone_exponent(third, 3, 300, 4, 608, 2);
    CHECK(a_half.alpha > 0.0);
    CHECK(a_half.ci.lo > 0.0);
    CHECK(a_third.alpha > a_half.alpha);
}
