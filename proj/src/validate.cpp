#include "niwalk/validate.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "niwalk/parallel.hpp"
#include "niwalk/stats.hpp"
#include "niwalk/walks.hpp"

namespace niwalk {

namespace {

/// Parallel trial counter: fn(stream) -> bool, one derived stream per trial.
template <class Fn>
std::uint64_t count_successes(std::uint64_t trials, std::uint64_t master_seed,
                              std::uint64_t id_base, unsigned threads, Fn&& fn) {
    std::atomic<std::uint64_t> successes{0};
    constexpr std::uint64_t kChunk = 512;
    std::uint64_t chunks = (trials + kChunk - 1) / kChunk;
    parallel_for_index(0, chunks, threads, [&](std::uint64_t chunk) {
        std::uint64_t local = 0;
        std::uint64_t lo = chunk * kChunk, hi = std::min(trials, lo + kChunk);
        for (std::uint64_t t = lo; t < hi; ++t) {
            RandomStream s({master_seed, stream_id::validation(id_base + t)});
            local += fn(s) ? 1 : 0;
        }
        successes.fetch_add(local);
    });
    return successes.load();
}

}  // namespace

ValidationReport run_validation(const ValidateParams& params, std::uint64_t master_seed,
                                unsigned threads) {
    ValidationReport report;
    std::uint64_t id = 0;

    // gambler's ruin: success probability exactly 1/n (Z^3 walk, exact planes)
    for (std::int64_t n : {2, 4, 8, 16}) {
        std::uint64_t trials = params.gambler_trials;
        std::uint64_t wins = count_successes(trials, master_seed, id, threads,
                                             [&](RandomStream& s) {
                                                 return gamblers_ruin_trial(1, n, s);
                                             });
        id += trials;
        double p = 1.0 / static_cast<double>(n);
        double tol = 3 * stats::binomial_sigma(p, static_cast<double>(trials));
        ValidationCheck c;
        c.name = "gamblers_ruin_1_over_" + std::to_string(n);
        c.observed = static_cast<double>(wins) / static_cast<double>(trials);
        c.expected = p;
        c.tolerance = tol;
        c.pass = std::fabs(c.observed - c.expected) <= tol;
        c.detail = std::to_string(trials) + " trials, 3-sigma binomial";
        report.checks.push_back(std::move(c));
    }

    // sphere hitting: P{reach radius e^-k before escape} = e^-k
    for (double k : {1.0, 2.0}) {
        std::uint64_t trials = params.ball_trials;
        std::uint64_t hits = count_successes(trials, master_seed, id, threads,
                                             [&](RandomStream& s) {
                                                 return ball_hitting_trial(k, s);
                                             });
        id += trials;
        ValidationCheck c;
        c.name = "sphere_hitting_e_minus_" + std::to_string(static_cast<int>(k));
        c.observed = static_cast<double>(hits) / static_cast<double>(trials);
        c.expected = std::exp(-k);
        c.tolerance = 0.01;
        c.pass = std::fabs(c.observed - c.expected) <= c.tolerance;
        c.detail = std::to_string(trials) + " adaptive-step Gaussian trials";
        report.checks.push_back(std::move(c));
    }

    // step-direction uniformity and chi-square
    {
        RandomStream s({master_seed, stream_id::validation(id++)});
        std::uint64_t freq[6] = {};
        for (std::uint64_t i = 0; i < params.step6_draws; ++i) ++freq[s.step6()];
        double p = 1.0 / 6.0;
        double sigma = stats::binomial_sigma(p, static_cast<double>(params.step6_draws));
        double worst = 0.0, chi2 = 0.0;
        double expect = static_cast<double>(params.step6_draws) / 6.0;
        for (auto f : freq) {
            worst = std::max(worst, std::fabs(static_cast<double>(f) / params.step6_draws - p));
            double d = static_cast<double>(f) - expect;
            chi2 += d * d / expect;
        }
        ValidationCheck c;
        c.name = "step6_uniformity";
        c.observed = worst;
        c.expected = 0.0;
        c.tolerance = 3 * sigma;
        c.pass = worst <= c.tolerance;
        c.detail = "max |freq - 1/6| over 6 bins";
        report.checks.push_back(c);
        ValidationCheck x;
        x.name = "step6_chi_square";
        x.observed = chi2;
        x.expected = 5.0;
        x.tolerance = 20.515;  // 0.999 quantile, 5 dof: p > 0.001
        x.pass = chi2 < x.tolerance;
        x.detail = "chi-square over 6 bins";
        report.checks.push_back(x);
    }

    // Gaussian increment moments
    {
        RandomStream s({master_seed, stream_id::validation(id++)});
        constexpr std::uint64_t kDraws = 1'000'000;
        double sum[3] = {}, sumsq[3] = {};
        for (std::uint64_t i = 0; i < kDraws; ++i) {
            auto g = s.gaussian3(1.0);
            for (int c = 0; c < 3; ++c) {
                sum[c] += g[c];
                sumsq[c] += g[c] * g[c];
            }
        }
        double worst_mean = 0.0, worst_var = 0.0;
        for (int c = 0; c < 3; ++c) {
            double m = sum[c] / kDraws;
            worst_mean = std::max(worst_mean, std::fabs(m));
            worst_var = std::max(worst_var, std::fabs(sumsq[c] / kDraws - m * m - 1.0));
        }
        report.checks.push_back({"gaussian_mean", worst_mean, 0.0, 0.004,
                                 worst_mean <= 0.004, "1e6 draws, per component"});
        report.checks.push_back({"gaussian_variance", worst_var, 0.0, 0.005,
                                 worst_var <= 0.005, "1e6 draws, per component"});
    }

    // optional-stopping identity: E[steps to radius 1] = 1/(3 sigma^2)
    {
        const double sigma = 0.01;
        const std::uint64_t trials = 10'000;
        std::atomic<std::uint64_t> total_steps{0};
        parallel_for_index(0, trials, threads, [&](std::uint64_t t) {
            RandomStream s({master_seed, stream_id::validation(id + t)});
            GaussianWalker w;
            w.sigma = sigma;
            auto r = run_until_radius(w, s, 1.0, 100'000'000);
            total_steps.fetch_add(r.state.steps);
        });
        id += trials;
        double mean_steps = static_cast<double>(total_steps.load()) / trials;
        double expected = 1.0 / (3.0 * sigma * sigma);
        ValidationCheck c;
        c.name = "mean_hitting_steps_identity";
        c.observed = mean_steps;
        c.expected = expected;
        c.tolerance = 0.05 * expected;
        c.pass = std::fabs(mean_steps - expected) <= c.tolerance;
        c.detail = "E|B_T|^2 = 3 sigma^2 E[steps], 5% relative";
        report.checks.push_back(std::move(c));
    }

    // coordinate martingale of the lattice walk
    {
        const std::uint64_t trials = 4000, steps = 1000;
        double sum[3] = {};
        for (std::uint64_t t = 0; t < trials; ++t) {
            RandomStream s({master_seed, stream_id::validation(id + t)});
            LatticeWalker w;
            for (std::uint64_t i = 0; i < steps; ++i) w.step(s);
            for (int c = 0; c < 3; ++c) sum[c] += static_cast<double>(w.pos[c]);
        }
        id += trials;
        double worst = 0.0;
        for (int c = 0; c < 3; ++c) worst = std::max(worst, std::fabs(sum[c] / trials));
        double tol = 3 * std::sqrt(static_cast<double>(steps) / 3.0 / trials);
        report.checks.push_back({"lattice_martingale", worst, 0.0, tol, worst <= tol,
                                 "per-coordinate drift after 1000 steps"});
    }

    // cone survival: exponential decay shape for the half-space cone and
    // monotonicity in the opening angle
    {
        auto survival = [&](double half_angle, int n, std::uint64_t trials) {
            ConeSpec cone(Vec3d{1, 0, 0}, half_angle);
            std::uint64_t alive = count_successes(trials, master_seed, id, threads,
                                                  [&](RandomStream& s) {
                                                      return cone_survival_trial(cone, n, s);
                                                  });
            id += trials;
            return static_cast<double>(alive) / static_cast<double>(trials);
        };
        std::vector<double> ns{1, 2, 3}, logp;
        for (int n : {1, 2, 3})
            logp.push_back(std::log(std::max(survival(std::numbers::pi / 2, n,
                                                      params.cone_trials),
                                             1e-9)));
        auto fit = stats::linear_fit(ns, logp);
        report.checks.push_back({"cone_halfspace_log_linearity", fit.r2, 1.0, 0.05,
                                 fit.r2 >= 0.95, "R^2 of log-survival vs n, n in {1,2,3}"});
        double p_half_2 = std::exp(logp[1]);
        double p_quarter_2 = survival(std::numbers::pi / 4, 2, params.cone_trials);
        report.checks.push_back({"cone_angle_monotonicity", p_quarter_2, p_half_2, 0.0,
                                 p_quarter_2 < p_half_2,
                                 "narrower cone survives less (n = 2)"});
        double p_full = survival(std::numbers::pi, 1, 64);
        report.checks.push_back({"cone_full_space", p_full, 1.0, 0.0, p_full == 1.0,
                                 "half-angle pi never kills"});
    }

    return report;
}

std::string validation_report_json(const ValidationReport& report,
                                   const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["format"] = "niwalk-validate";
    j["version"] = 1;
    j["config"] = nlohmann::ordered_json::parse(config_to_json(config));
    j["all_pass"] = report.all_pass();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        arr.push_back({{"name", c.name},
                       {"observed", c.observed},
                       {"expected", c.expected},
                       {"tolerance", c.tolerance},
                       {"pass", c.pass},
                       {"detail", c.detail}});
    }
    j["checks"] = std::move(arr);
    return j.dump(2);
}

}  // namespace niwalk
