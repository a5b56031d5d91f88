#include "niwalk/runner.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "niwalk/stats.hpp"

namespace niwalk {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

ordered_json config_json(const ExperimentConfig& c) {
    return ordered_json::parse(config_to_json(c));
}

ordered_json interval_json(const stats::Interval& iv) {
    return ordered_json{{"lo", iv.lo}, {"hi", iv.hi}};
}

RunReport run_validate(const ExperimentConfig& config) {
    auto report = run_validation(config.validate, config.seed, config.threads);
    RunReport out;
    out.checks_pass = report.all_pass();
    out.artifacts.push_back({"validate.json", validation_report_json(report, config)});
    for (const auto& c : report.checks) {
        std::ostringstream line;
        line << (c.pass ? "pass  " : "FAIL  ") << c.name << ": observed " << fmt(c.observed)
             << " expected " << fmt(c.expected) << " tol " << fmt(c.tolerance);
        out.summary_lines.push_back(line.str());
    }
    return out;
}

RunReport run_survival_like(const ExperimentConfig& config, const RunControl& control,
                            const ExperimentProgress* resume_from) {
    TupleExperimentConfig tc;
    tc.group_m = config.survival.group_m;
    tc.group_n = config.survival.group_n;
    tc.pairs = config.survival.pairs;
    tc.max_steps = config.survival.max_steps;
    tc.checkpoints = config.survival.checkpoints;
    tc.h_lag = config.survival.h_lag;
    tc.threads = config.threads;
    auto outcome = run_tuple_experiment(tc, config.seed, control, resume_from);

    RunReport out;
    out.complete = outcome.complete;
    std::string stem = to_string(config.kind);
    if (outcome.complete) {
        out.artifacts.push_back({stem + ".csv", survival_csv(outcome.table, config)});
        for (std::size_t i = 0; i < outcome.table.checkpoints.size(); ++i) {
            std::uint64_t n = outcome.table.checkpoints[i];
            std::ostringstream line;
            line << "n=" << n << " M(n)=" << outcome.table.counts[i];
            if (auto k = k_estimator(outcome.table, n))
                line << " k=" << fmt(k->value) << " (se " << fmt(k->se) << ")";
            if (auto h = h_estimator(outcome.table, n, outcome.table.h_lag))
                line << " h=" << fmt(h->value);
            out.summary_lines.push_back(line.str());
        }
    }
    if (!outcome.complete)
        out.artifacts.push_back(
            {stem + ".checkpoint.json", checkpoint_to_json(config, outcome.progress)});
    return out;
}

RunReport run_pathspace(const ExperimentConfig& config) {
    const auto& p = config.pathspace;
    auto run = direct_pathspace_survival(p.start, p.shells, p.trials, config.seed,
                                         config.threads, p.eval_sep);
    ordered_json j;
    j["format"] = "niwalk-pathspace";
    j["version"] = 1;
    j["config"] = config_json(config);
    j["trials"] = run.trials;
    j["alive_after"] = run.alive_after;
    auto q = ordered_json::array();
    for (std::size_t i = 0; i < run.alive_after.size(); ++i) {
        double frac = static_cast<double>(run.alive_after[i]) / static_cast<double>(run.trials);
        auto iv = stats::wilson_interval(run.alive_after[i], run.trials);
        q.push_back({{"shell", i + 1},
                     {"q_hat", frac},
                     {"wilson_lo", iv.lo},
                     {"wilson_hi", iv.hi}});
    }
    j["q"] = std::move(q);
    if (p.eval_sep) {
        auto sep = ordered_json::array();
        for (std::size_t i = 0; i < run.sep_counts.size(); ++i) {
            double denom = std::max<std::uint64_t>(run.alive_after[i], 1);
            sep.push_back({{"shell", i + 1},
                           {"sep_count", run.sep_counts[i]},
                           {"freq_given_alive",
                            static_cast<double>(run.sep_counts[i]) / denom}});
        }
        j["sep"] = std::move(sep);
    }
    RunReport out;
    out.artifacts.push_back({"pathspace.json", j.dump(2)});
    for (std::size_t i = 0; i < run.alive_after.size(); ++i) {
        std::ostringstream line;
        line << "shell " << (i + 1) << ": q_hat = "
             << fmt(static_cast<double>(run.alive_after[i]) / static_cast<double>(run.trials));
        out.summary_lines.push_back(line.str());
    }
    return out;
}

RunReport run_splitting_experiment(const ExperimentConfig& config) {
    const auto& p = config.splitting;
    ReplicateOptions opts;
    opts.eval_sep = p.eval_sep;
    opts.sep_relaxed_scale = p.sep_relaxed_scale;
    auto results = run_splitting_replicates(p.start, p.particles, p.shells, opts, config.seed,
                                            p.replicates, config.threads);
    auto phats = extract_phats(results);

    ordered_json j;
    j["format"] = "niwalk-splitting";
    j["version"] = 1;
    j["config"] = config_json(config);
    j["p_hats_per_replicate"] = phats;

    auto qarr = ordered_json::array();
    for (int n = 1; n <= p.shells; ++n) {
        auto q = estimate_q(phats, n);
        qarr.push_back({{"shell", n},
                        {"q_hat", q.value},
                        {"se", q.se},
                        {"ci", interval_json(q.ci)}});
    }
    j["q"] = std::move(qarr);

    int hi = p.xi_window_hi > 0 ? p.xi_window_hi : p.shells;
    RunReport out;
    if (hi - p.xi_window_lo >= 3 && hi <= p.shells) {
        auto xi = estimate_xi(phats, p.xi_window_lo, hi);
        j["xi"] = {{"n0", xi.n0},
                   {"n1", xi.n1},
                   {"value", xi.value},
                   {"se", xi.se},
                   {"ci", interval_json(xi.ci)}};
        std::ostringstream line;
        line << "xi over (" << xi.n0 << ", " << xi.n1 << "]: " << fmt(xi.value) << " +- "
             << fmt(xi.se);
        out.summary_lines.push_back(line.str());
    }

    auto seq = q_ratio_convergence(phats, p.xi_ref);
    j["ratio_sequence"] = {{"xi_ref", seq.xi_ref},
                           {"shells", seq.shells},
                           {"ratios", seq.ratios},
                           {"ratio_se", seq.ratio_se},
                           {"q_hats", seq.q_hats},
                           {"q_display", seq.q_display},
                           {"increments", seq.increments}};
    if (seq.increments.size() >= 3)
        j["ratio_sequence"]["cauchy_trend"] = {{"rho", seq.cauchy_trend.rho},
                                               {"p_neg", seq.cauchy_trend.p_neg}};

    if (p.eval_sep) {
        auto rows = estimate_rho1(results);
        auto arr = ordered_json::array();
        for (const auto& r : rows) {
            arr.push_back({{"shell", r.shell},
                           {"alive", r.alive},
                           {"sep", r.sep},
                           {"freq", r.freq},
                           {"se", r.se},
                           {"ci", interval_json(r.ci)},
                           {"sep_relaxed", r.sep_relaxed},
                           {"freq_relaxed", r.freq_relaxed},
                           {"ci_relaxed", interval_json(r.ci_relaxed)},
                           {"relaxed_scale", p.sep_relaxed_scale}});
        }
        j["rho1"] = std::move(arr);
    }

    out.artifacts.push_back({"splitting.json", j.dump(2)});
    return out;
}

RunReport run_mixing_experiment(const ExperimentConfig& config) {
    const auto& p = config.mixing;
    auto diag = mixing_distance(p.start_a, p.start_b, p.n_min, p.n_max, p.functional,
                                p.particles, p.replicates, config.seed, config.threads);
    ordered_json j;
    j["format"] = "niwalk-mixing";
    j["version"] = 1;
    j["config"] = config_json(config);
    j["shells"] = diag.shells;
    j["distance"] = diag.distance;
    j["distance_se"] = diag.distance_se;
    j["beta_hat"] = diag.beta_hat;
    j["slope"] = diag.fit.slope;
    j["slope_p_negative"] = diag.fit.p_neg_slope;
    j["final_critical_1pct"] = diag.final_critical;
    j["saturated"] = diag.saturated;
    j["pass"] = diag.pass;
    RunReport out;
    out.checks_pass = diag.pass;
    std::ostringstream line;
    line << (diag.pass ? "pass" : "FAIL") << "  mixing decay: slope " << fmt(diag.fit.slope)
         << " (p " << fmt(diag.fit.p_neg_slope) << "), D_final " << fmt(diag.distance.back())
         << " vs crit " << fmt(diag.final_critical) << (diag.saturated ? " [saturated]" : "");
    out.summary_lines.push_back(line.str());
    out.artifacts.push_back({"mixing.json", j.dump(2)});
    return out;
}

RunReport run_cone_experiment(const ExperimentConfig& config) {
    const auto& p = config.cone;
    ConeSpec cone(Vec3d{p.axis_x, p.axis_y, p.axis_z}, p.half_angle);
    auto est = estimate_cone_exponent(cone, p.shells, p.particles, p.replicates, config.seed,
                                      config.threads, p.burn_in, p.step_eps);
    ordered_json j;
    j["format"] = "niwalk-cone";
    j["version"] = 1;
    j["config"] = config_json(config);
    j["alpha"] = est.alpha;
    j["se"] = est.se;
    j["ci"] = interval_json(est.ci);
    j["per_replicate"] = est.per_replicate;
    j["mean_log_survival"] = est.mean_log_survival;
    RunReport out;
    std::ostringstream line;
    line << "alpha = " << fmt(est.alpha) << " +- " << fmt(est.se);
    out.summary_lines.push_back(line.str());
    out.artifacts.push_back({"cone.json", j.dump(2)});
    return out;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const RunControl& control,
                         const ExperimentProgress* resume_from) {
    switch (config.kind) {
        case ExperimentKind::validate: return run_validate(config);
        case ExperimentKind::survival:
        case ExperimentKind::tuple: return run_survival_like(config, control, resume_from);
        case ExperimentKind::pathspace: return run_pathspace(config);
        case ExperimentKind::splitting: return run_splitting_experiment(config);
        case ExperimentKind::mixing: return run_mixing_experiment(config);
        case ExperimentKind::cone: return run_cone_experiment(config);
    }
    throw std::invalid_argument("run_experiment: unknown kind");
}

namespace {

std::vector<Artifact> report_survival(const std::string& text, std::ostringstream& out) {
    auto art = parse_survival_csv(text);
    const auto& t = art.table;
    out << "survival experiment: M = " << t.total_pairs << ", seed = " << t.master_seed;
    if (t.group_m != 1 || t.group_n != 1)
        out << ", groups (" << t.group_m << "," << t.group_n << ")";
    out << "\n\n";
    out << "       n        M(n)      k(n)      h(n)\n";
    std::ostringstream kdat, hdat;
    for (std::size_t i = 0; i < t.checkpoints.size(); ++i) {
        std::uint64_t n = t.checkpoints[i];
        out.width(8);
        out << n;
        out.width(12);
        out << t.counts[i];
        auto k = k_estimator(t, n);
        auto h = h_estimator(t, n, t.h_lag);
        char buf[32];
        if (k) {
            std::snprintf(buf, sizeof(buf), "%10.4f", k->value);
            out << buf;
            kdat << n << ' ' << fmt(k->value) << '\n';
        } else {
            out << "        --";
        }
        if (h) {
            std::snprintf(buf, sizeof(buf), "%10.4f", h->value);
            out << buf;
            hdat << n << ' ' << fmt(h->value) << '\n';
        } else {
            out << "        --";
        }
        out << '\n';
    }
    std::vector<Artifact> files;
    files.push_back({"plot_k_vs_n.dat", kdat.str()});
    if (!hdat.str().empty()) files.push_back({"plot_h_vs_n.dat", hdat.str()});
    return files;
}

std::vector<Artifact> report_json_artifact(const std::string& text, std::ostringstream& out) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("report: not a niwalk artifact: ") + e.what());
    }
    std::string format = j.value("format", "");
    std::vector<Artifact> files;
    if (format == "niwalk-mixing") {
        auto shells = j.at("shells").get<std::vector<int>>();
        auto d = j.at("distance").get<std::vector<double>>();
        if (shells.empty()) throw data_error("report: mixing artifact without shells");
        out << "mixing diagnostic (KS distance per shell)\n";
        std::ostringstream dat;
        for (std::size_t i = 0; i < shells.size(); ++i) {
            out << "  n = " << shells[i] << ": D = " << fmt(d.at(i)) << "\n";
            dat << shells[i] << ' ' << fmt(d.at(i)) << '\n';
        }
        out << "slope " << fmt(j.at("slope").get<double>()) << ", p "
            << fmt(j.at("slope_p_negative").get<double>()) << ", pass "
            << (j.at("pass").get<bool>() ? "yes" : "no") << "\n";
        files.push_back({"plot_D_vs_n.dat", dat.str()});
    } else if (format == "niwalk-splitting") {
        out << "splitting estimates\n";
        std::ostringstream dat;
        for (const auto& q : j.at("q")) {
            out << "  shell " << q.at("shell").get<int>() << ": q_hat = "
                << fmt(q.at("q_hat").get<double>()) << " +- " << fmt(q.at("se").get<double>())
                << "\n";
            dat << q.at("shell").get<int>() << ' ' << fmt(q.at("q_hat").get<double>()) << '\n';
        }
        if (j.contains("xi"))
            out << "  xi = " << fmt(j.at("xi").at("value").get<double>()) << " +- "
                << fmt(j.at("xi").at("se").get<double>()) << "\n";
        if (j.contains("rho1")) {
            out << "  SEP | alive per shell:\n";
            for (const auto& r : j.at("rho1"))
                out << "    shell " << r.at("shell").get<int>() << ": "
                    << fmt(r.at("freq").get<double>()) << " (relaxed "
                    << fmt(r.at("freq_relaxed").get<double>()) << ")\n";
        }
        files.push_back({"plot_q_vs_n.dat", dat.str()});
    } else if (format == "niwalk-pathspace") {
        out << "direct path-space survival\n";
        std::ostringstream dat;
        for (const auto& q : j.at("q")) {
            out << "  shell " << q.at("shell").get<int>() << ": q_hat = "
                << fmt(q.at("q_hat").get<double>()) << "\n";
            dat << q.at("shell").get<int>() << ' ' << fmt(q.at("q_hat").get<double>()) << '\n';
        }
        files.push_back({"plot_q_vs_n.dat", dat.str()});
    } else if (format == "niwalk-cone") {
        out << "cone exponent: alpha = " << fmt(j.at("alpha").get<double>()) << " +- "
            << fmt(j.at("se").get<double>()) << "\n";
        std::ostringstream dat;
        auto mls = j.at("mean_log_survival").get<std::vector<double>>();
        for (std::size_t i = 0; i < mls.size(); ++i)
            dat << (i + 1) << ' ' << fmt(mls[i]) << '\n';
        files.push_back({"plot_log_survival_vs_n.dat", dat.str()});
    } else if (format == "niwalk-validate") {
        out << "validation checks\n";
        for (const auto& c : j.at("checks"))
            out << "  " << (c.at("pass").get<bool>() ? "pass" : "FAIL") << "  "
                << c.at("name").get<std::string>() << "\n";
    } else {
        throw data_error("report: unrecognized artifact format '" + format + "'");
    }
    return files;
}

}  // namespace

std::vector<Artifact> render_report(const std::string& artifact_text, std::string& out) {
    std::ostringstream ss;
    std::vector<Artifact> files;
    if (artifact_text.rfind("# niwalk-survival v1", 0) == 0)
        files = report_survival(artifact_text, ss);
    else
        files = report_json_artifact(artifact_text, ss);
    out = ss.str();
    return files;
}

}  // namespace niwalk
