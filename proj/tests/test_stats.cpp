#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "niwalk/stats.hpp"

using namespace niwalk;

TEST_CASE("student t cdf matches reference values") {
    // reference values from scipy.stats.t.cdf
    CHECK(stats::student_t_cdf(2.0, 5) == doctest::Approx(0.9490302605850709).epsilon(1e-9));
    CHECK(stats::student_t_cdf(-1.5, 3) == doctest::Approx(0.11529193262241141).epsilon(1e-9));
    CHECK(stats::student_t_cdf(0.7, 18) == doctest::Approx(0.7535619645694508).epsilon(1e-9));
}

TEST_CASE("student t quantile inverts the cdf") {
    CHECK(stats::student_t_quantile(0.975, 19) == doctest::Approx(2.093024054408263).epsilon(1e-6));
    double q = stats::student_t_quantile(0.31, 7);
    CHECK(stats::student_t_cdf(q, 7) == doctest::Approx(0.31).epsilon(1e-9));
}

TEST_CASE("normal cdf") {
    CHECK(stats::normal_cdf(1.2) == doctest::Approx(0.8849303297782918).epsilon(1e-12));
    CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
}

TEST_CASE("wilson interval") {
    auto iv = stats::wilson_interval(8, 10, 1.959963984540054);
    // reference: statsmodels proportion_confint(8, 10, method='wilson')
    CHECK(iv.lo == doctest::Approx(0.49016247153664183).epsilon(1e-9));
    CHECK(iv.hi == doctest::Approx(0.9433178485456247).epsilon(1e-9));
    auto zero = stats::wilson_interval(0, 50, 1.96);
    CHECK(zero.lo == doctest::Approx(0.0));
    CHECK(zero.hi > 0.0);
}

TEST_CASE("two-sample KS statistic") {
    std::vector<double> a{0.1, 0.4, 0.7, 1.1, 2.0, 2.5};
    std::vector<double> b{0.3, 0.5, 0.9, 1.0, 1.6};
    CHECK(stats::ks_statistic(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(stats::ks_statistic(a, a) == doctest::Approx(0.0));
}

TEST_CASE("KS critical value") {
    // c(0.01) = 1.6276...; equal samples of 2000
    double crit = stats::ks_critical(2000, 2000, 0.01);
    CHECK(crit == doctest::Approx(1.62762 * std::sqrt(2.0 / 2000.0)).epsilon(1e-4));
}

TEST_CASE("linear fit slope, error, and one-sided p") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y{10.2, 7.1, 5.3, 4.9, 3.2, 2.8};
    auto f = stats::linear_fit(x, y);
    // reference: scipy.stats.linregress
    CHECK(f.slope == doctest::Approx(-1.402857142857143).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(10.493333333333332).epsilon(1e-12));
    CHECK(f.se_slope == doctest::Approx(0.21207109576711247).epsilon(1e-9));
    CHECK(f.p_neg_slope == doctest::Approx(0.0013538296748504945).epsilon(1e-6));
}

TEST_CASE("spearman exact permutation p-values") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y{10.2, 7.1, 5.3, 4.9, 3.2, 2.8};
    auto s = stats::spearman_negative(x, y);
    CHECK(s.rho == doctest::Approx(-1.0));
    CHECK(s.p_neg == doctest::Approx(1.0 / 720.0).epsilon(1e-12));

    std::vector<double> y2{10.2, 7.1, 8.0, 4.9, 3.2, 3.5};
    auto s2 = stats::spearman_negative(x, y2);
    CHECK(s2.rho == doctest::Approx(-0.8857142857142858).epsilon(1e-12));
    CHECK(s2.p_neg == doctest::Approx(12.0 / 720.0).epsilon(1e-12));
}

TEST_CASE("two proportion z") {
    CHECK(stats::two_proportion_z(50, 100, 50, 100) == doctest::Approx(0.0));
    CHECK(stats::two_proportion_z(60, 100, 40, 100) > 2.0);
}

TEST_CASE("mean and stddev") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(stats::mean(v) == doctest::Approx(2.5));
    CHECK(stats::stddev(v) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
    CHECK_THROWS_AS((void)stats::mean(std::vector<double>{}), std::invalid_argument);
}
