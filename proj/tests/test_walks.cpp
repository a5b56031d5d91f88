#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "niwalk/stats.hpp"
#include "niwalk/walks.hpp"

using namespace niwalk;

TEST_CASE("lattice walk hits radius 1 in exactly one step") {
    for (std::uint64_t trial = 0; trial < 32; ++trial) {
        RandomStream s({11, trial});
        auto r = run_until_radius(LatticeWalker{}, s, 1.0, 100);
        CHECK(r.hit);
        CHECK(r.state.steps == 1);
        CHECK(r.state.pos.squaredNorm() == 1);
    }
}

TEST_CASE("lattice walk reaches radius 10 with probability one") {
    std::uint64_t hits = 0;
    for (std::uint64_t trial = 0; trial < 10000; ++trial) {
        RandomStream s({12, trial});
        auto r = run_until_radius(LatticeWalker{}, s, 10.0, 1'000'000);
        hits += r.hit;
        if (r.hit) CHECK(static_cast<double>(r.state.pos.squaredNorm()) >= 100.0);
    }
    CHECK(hits == 10000);
}

TEST_CASE("run_until_radius never stops strictly inside with hit=true") {
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        RandomStream s({13, trial});
        auto r = run_until_radius(LatticeWalker{}, s, 7.3, 100000);
        if (r.hit) CHECK(norm_of(r.state.pos) >= 7.3);
    }
}

TEST_CASE("run_until_radius rejects bad arguments") {
    RandomStream s({14, 0});
    LatticeWalker w;
    w.pos = Vec3{5, 0, 0};
    CHECK_THROWS_AS(run_until_radius(w, s, 4.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(run_until_radius(LatticeWalker{}, s, 2.0, 0), std::invalid_argument);
}

TEST_CASE("gaussian hitting time matches the optional-stopping identity") {
    // E|B_T|^2 = 3 sigma^2 E[steps]; from the origin to radius 1 this gives
    // E[steps] ~= 1/(3 sigma^2).
    const double sigma = 0.01;
    const std::uint64_t trials = 10000;
    double total_steps = 0.0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        RandomStream s({15, trial});
        GaussianWalker w;
        w.sigma = sigma;
        auto r = run_until_radius(w, s, 1.0, 10'000'000);
        REQUIRE(r.hit);
        total_steps += static_cast<double>(r.state.steps);
    }
    double mean_steps = total_steps / trials;
    double expected = 1.0 / (3.0 * sigma * sigma);
    CHECK(std::fabs(mean_steps - expected) / expected < 0.05);
}

TEST_CASE("martingale: lattice coordinates have zero empirical drift") {
    const std::uint64_t trials = 4000, steps = 1000;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        RandomStream s({16, trial});
        LatticeWalker w;
        for (std::uint64_t i = 0; i < steps; ++i) w.step(s);
        sum += w.pos.cast<double>();
    }
    // per-coordinate variance per step is 1/3
    double sigma = std::sqrt(static_cast<double>(steps) / 3.0 / trials);
    for (int c = 0; c < 3; ++c) CHECK(std::fabs(sum[c] / trials) <= 3 * sigma);
}

TEST_CASE("gambler's ruin success probability is 1/n") {
    const std::uint64_t trials = 100000;
    std::uint64_t stream_counter = 0;
    for (std::int64_t n : {2, 4, 8, 16}) {
        std::uint64_t wins = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            RandomStream s({17, stream_counter++});
            wins += gamblers_ruin_trial(1, n, s);
        }
        double p = 1.0 / static_cast<double>(n);
        double phat = static_cast<double>(wins) / trials;
        CHECK(std::fabs(phat - p) <= 3 * stats::binomial_sigma(p, trials));
    }
}

TEST_CASE("gambler's ruin argument validation") {
    RandomStream s({17, 999});
    CHECK_THROWS_AS(gamblers_ruin_trial(0, 4, s), std::invalid_argument);
    CHECK_THROWS_AS(gamblers_ruin_trial(3, 3, s), std::invalid_argument);
}

TEST_CASE("sphere hitting: k=0 is certain") {
    RandomStream s({18, 0});
    CHECK(ball_hitting_trial(0.0, s));
}

TEST_CASE("sphere hitting probability e^-k") {
    const std::uint64_t trials = 10000;
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        RandomStream s({19, t});
        hits += ball_hitting_trial(1.0, s);
    }
    double phat = static_cast<double>(hits) / trials;
    CHECK(std::fabs(phat - std::exp(-1.0)) < 0.02);
}

TEST_CASE("sphere hitting argument validation") {
    RandomStream s({19, 999999});
    CHECK_THROWS_AS(ball_hitting_trial(-0.5, s), std::invalid_argument);
    CHECK_THROWS_AS(ball_hitting_trial(1.0, s, 10.0), std::invalid_argument);
}

TEST_CASE("full-space cone never kills") {
    for (std::uint64_t t = 0; t < 10; ++t) {
        RandomStream s({20, t});
        ConeSpec cone(Vec3d{1, 0, 0}, std::numbers::pi);
        CHECK(cone_survival_trial(cone, 1, s));
    }
}

TEST_CASE("cone specification validation") {
    CHECK_THROWS_AS(ConeSpec(Vec3d{1, 0, 0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ConeSpec(Vec3d{1, 0, 0}, 3.5), std::invalid_argument);
    CHECK_THROWS_AS(ConeSpec(Vec3d{0, 0, 0}, 1.0), std::invalid_argument);
    ConeSpec half(Vec3d{0, 0, 1}, std::numbers::pi / 2);
    CHECK(half.contains(Vec3d{0.1, 0.1, 1.0}));
    CHECK(!half.contains(Vec3d{0.0, 0.0, -1.0}));
}

TEST_CASE("narrower cones kill more") {
    const std::uint64_t trials = 4000;
    auto survival = [&](double half_angle, std::uint64_t salt) {
        ConeSpec cone(Vec3d{1, 0, 0}, half_angle);
        std::uint64_t alive = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            RandomStream s({21, salt * trials + t});
            alive += cone_survival_trial(cone, 1, s);
        }
        return static_cast<double>(alive) / trials;
    };
    double wide = survival(std::numbers::pi / 2, 0);
    double narrow = survival(std::numbers::pi / 4, 1);
    CHECK(wide > narrow);
    CHECK(narrow > 0.0);
}
