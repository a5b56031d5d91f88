#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "niwalk/runner.hpp"

namespace fs = std::filesystem;
using namespace niwalk;

namespace {

volatile std::sig_atomic_t g_interrupted = 0;
void handle_sigint(int) { g_interrupted = 1; }

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
    cmd->add_option("--seed", f.seed, "master seed (recorded in every artifact)");
    cmd->add_option("--threads", f.threads, "worker count, 0 = hardware");
    cmd->add_option("--out", f.out_dir, "output directory");
}

ExperimentConfig load_config(const CommonFlags& f, ExperimentKind kind) {
    ExperimentConfig c;
    if (!f.config_path.empty()) {
        c = config_from_json(read_text_file(f.config_path));
        if (c.kind != kind)
            throw data_error(std::string("config file is for '") + to_string(c.kind) +
                             "', not '" + to_string(kind) + "'");
    }
    c.kind = kind;
    if (f.seed) c.seed = *f.seed;
    if (f.threads) c.threads = *f.threads;
    if (f.out_dir) c.out_dir = *f.out_dir;
    return c;
}

int write_artifacts(const ExperimentConfig& config, const RunReport& report) {
    for (const auto& a : report.artifacts) {
        auto path = fs::path(config.out_dir) / a.filename;
        write_text_file(path, a.content);
        std::cout << "wrote " << path.string() << "\n";
    }
    for (const auto& line : report.summary_lines) std::cout << line << "\n";
    if (!report.complete) {
        std::cout << "run incomplete; resume with: niwalk resume <checkpoint>\n";
        return 3;
    }
    return report.checks_pass ? 0 : 1;
}

/// Shared by `survival`, `tuple`, and `resume`: runs with periodic checkpoint
/// writes and a SIGINT-triggered clean stop.
int run_survival_like_cli(ExperimentConfig config, std::uint64_t stop_after_pairs,
                          const ExperimentProgress* resume_from) {
    std::signal(SIGINT, handle_sigint);
    auto checkpoint_path = fs::path(config.out_dir) /
                           (std::string(to_string(config.kind)) + ".checkpoint.json");
    auto last_write = std::chrono::steady_clock::now();
    RunControl control;
    control.stop_after_pairs = stop_after_pairs;
    control.on_progress = [&](const ExperimentProgress& p) {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_write).count();
        if (elapsed >= config.survival.checkpoint_every_seconds) {
            write_text_file(checkpoint_path, checkpoint_to_json(config, p));
            last_write = now;
        }
        return g_interrupted == 0;
    };
    auto report = run_experiment(config, control, resume_from);
    if (report.complete) {
        std::error_code ec;
        fs::remove(checkpoint_path, ec);  // stale cadence checkpoint
    }
    return write_artifacts(config, report);
}

MixingFunctional functional_from_flag(const std::string& name) {
    if (name == "endpoint-angle") return MixingFunctional::endpoint_angle;
    if (name == "sep-indicator") return MixingFunctional::sep_indicator;
    if (name == "halfspace-fraction") return MixingFunctional::halfspace_fraction;
    throw data_error("--functional must be endpoint-angle, sep-indicator, or "
                     "halfspace-fraction");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"niwalk: non-intersecting 3D random walk experiments"};
    app.require_subcommand(1);

    CommonFlags vf;
    auto* validate = app.add_subcommand("validate", "exact-law oracles for the walk steppers");
    add_common(validate, vf);
    std::optional<std::uint64_t> gambler_trials, ball_trials;
    validate->add_option("--gambler-trials", gambler_trials);
    validate->add_option("--ball-trials", ball_trials);

    CommonFlags sf, tf;
    std::optional<std::uint64_t> pairs, steps, h_lag, stop_after;
    std::optional<double> checkpoint_every;
    std::optional<std::vector<std::uint64_t>> checkpoints;
    std::optional<std::uint32_t> group_m, group_n;
    auto add_survival_flags = [&](CLI::App* cmd, CommonFlags& f) {
        add_common(cmd, f);
        cmd->add_option("--pairs", pairs, "number of pairs M");
        cmd->add_option("--steps", steps, "maximum walk length");
        cmd->add_option("--checkpoints", checkpoints, "survival checkpoints n")
            ->delimiter(',');
        cmd->add_option("--h-lag", h_lag, "lag m of the h(n) estimator");
        cmd->add_option("--checkpoint-every", checkpoint_every,
                        "checkpoint write interval, seconds");
        cmd->add_option("--stop-after-pairs", stop_after,
                        "stop cleanly after this many pairs (budgeted runs, testing)");
    };
    auto* survival = app.add_subcommand("survival", "pair non-intersection experiment");
    add_survival_flags(survival, sf);
    auto* tuple = app.add_subcommand("tuple", "(m,n) group non-intersection experiment");
    add_survival_flags(tuple, tf);
    tuple->add_option("--m", group_m, "walks in group 1");
    tuple->add_option("--n", group_n, "walks in group 2");

    CommonFlags pf;
    auto* pathspace = app.add_subcommand("pathspace",
                                         "direct Monte Carlo on the shell chain");
    add_common(pathspace, pf);
    std::optional<std::uint64_t> trials;
    std::optional<int> shells;
    std::optional<double> base_radius, min_base_radius, gap;
    std::optional<std::string> start_kind, dump_pair;
    bool eval_sep = false;
    auto add_start_flags = [&](CLI::App* cmd) {
        cmd->add_option("--base-radius", base_radius, "R0, lattice units of the unit ball");
        cmd->add_option("--min-base-radius", min_base_radius, "configured minimum for R0");
        cmd->add_option("--start", start_kind, "diametric | endpoints");
        cmd->add_option("--gap", gap, "angular gap (radians) for endpoint starts");
        cmd->add_option("--shells", shells, "shells to extend");
    };
    add_start_flags(pathspace);
    pathspace->add_option("--trials", trials, "independent pairs");
    pathspace->add_flag("--eval-sep", eval_sep, "evaluate SEP on survivors");
    pathspace->add_option("--dump-pair", dump_pair,
                          "also write one extended pair (binary + JSON) to this path stem");

    CommonFlags spf;
    auto* splitting = app.add_subcommand("splitting", "multilevel splitting estimators");
    add_common(splitting, spf);
    add_start_flags(splitting);
    std::optional<std::uint32_t> particles, replicates;
    std::optional<int> xi_lo, xi_hi;
    bool split_eval_sep = false;
    splitting->add_option("--particles", particles, "ensemble size P");
    splitting->add_option("--replicates", replicates, "independent replicates R");
    splitting->add_option("--xi-window-lo", xi_lo);
    splitting->add_option("--xi-window-hi", xi_hi);
    splitting->add_flag("--eval-sep", split_eval_sep);

    CommonFlags mf;
    auto* mixing = app.add_subcommand("mixing", "coupling/mixing diagnostic");
    add_common(mixing, mf);
    std::optional<int> n_min, n_max;
    std::optional<std::string> functional;
    std::optional<double> mix_base_radius, gap_b;
    mixing->add_option("--particles", particles);
    mixing->add_option("--replicates", replicates);
    mixing->add_option("--n-min", n_min);
    mixing->add_option("--n-max", n_max);
    mixing->add_option("--functional", functional,
                       "endpoint-angle | sep-indicator | halfspace-fraction");
    mixing->add_option("--base-radius", mix_base_radius);
    mixing->add_option("--gap-b", gap_b,
                       "ensemble B starts from an endpoint pair with this angular gap");

    CommonFlags cf;
    auto* cone = app.add_subcommand("cone", "cone exit exponent via splitting");
    add_common(cone, cf);
    std::optional<double> half_angle;
    std::optional<int> cone_shells, burn_in;
    cone->add_option("--half-angle", half_angle, "cone half-angle, radians");
    cone->add_option("--shells", cone_shells);
    cone->add_option("--particles", particles);
    cone->add_option("--replicates", replicates);
    cone->add_option("--burn-in", burn_in);

    auto* report_cmd = app.add_subcommand("report", "render an artifact as a table + plot data");
    std::string artifact_path, report_out;
    report_cmd->add_option("artifact", artifact_path, "artifact file")->required();
    report_cmd->add_option("--out", report_out, "directory for plot-data files");

    auto* resume_cmd = app.add_subcommand("resume", "continue an interrupted run");
    std::string resume_path;
    resume_cmd->add_option("checkpoint", resume_path, "checkpoint file")->required();
    std::optional<std::uint64_t> resume_stop_after;
    resume_cmd->add_option("--stop-after-pairs", resume_stop_after);
    std::optional<unsigned> resume_threads;
    resume_cmd->add_option("--threads", resume_threads);
    std::string resume_out;
    resume_cmd->add_option("--out", resume_out, "output directory (default: alongside the checkpoint)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            auto c = load_config(vf, ExperimentKind::validate);
            if (gambler_trials) c.validate.gambler_trials = *gambler_trials;
            if (ball_trials) c.validate.ball_trials = *ball_trials;
            return write_artifacts(c, run_experiment(c));
        }
        if (survival->parsed() || tuple->parsed()) {
            bool is_tuple = tuple->parsed();
            auto c = load_config(is_tuple ? tf : sf,
                                 is_tuple ? ExperimentKind::tuple : ExperimentKind::survival);
            if (pairs) c.survival.pairs = *pairs;
            if (steps) c.survival.max_steps = *steps;
            if (checkpoints) c.survival.checkpoints = *checkpoints;
            if (h_lag) c.survival.h_lag = *h_lag;
            if (checkpoint_every) c.survival.checkpoint_every_seconds = *checkpoint_every;
            if (group_m) c.survival.group_m = *group_m;
            if (group_n) c.survival.group_n = *group_n;
            if (c.survival.checkpoints.empty() && c.survival.max_steps >= 10)
                for (std::uint64_t n = c.survival.max_steps / 10; n <= c.survival.max_steps;
                     n += c.survival.max_steps / 10)
                    c.survival.checkpoints.push_back(n);
            return run_survival_like_cli(c, stop_after.value_or(0), nullptr);
        }
        auto apply_start = [&](StartConfig& s) {
            if (base_radius) s.base_radius = *base_radius;
            if (min_base_radius) s.min_base_radius = *min_base_radius;
            if (start_kind) {
                if (*start_kind == "diametric")
                    s.kind = InitialKind::diametric_lines;
                else if (*start_kind == "endpoints")
                    s.kind = InitialKind::given_endpoints;
                else
                    throw data_error("--start must be diametric or endpoints");
            }
            if (gap) s.angular_gap = *gap;
        };
        if (pathspace->parsed()) {
            auto c = load_config(pf, ExperimentKind::pathspace);
            apply_start(c.pathspace.start);
            if (shells) c.pathspace.shells = *shells;
            if (trials) c.pathspace.trials = *trials;
            if (eval_sep) c.pathspace.eval_sep = true;
            auto report = run_experiment(c);
            if (dump_pair) {
                auto pair = build_initial_pair(c.pathspace.start);
                RandomStream sa({c.seed, stream_id::pathspace_trial(0, 0)});
                RandomStream sb({c.seed, stream_id::pathspace_trial(0, 1)});
                for (int s = 0; s < c.pathspace.shells && pair.alive; ++s)
                    pair = extend_one_shell(pair, sa, sb);
                auto bytes = serialize_pair(pair);
                write_text_file(*dump_pair + ".json", pair_to_json(pair));
                std::ofstream bin(*dump_pair + ".bin", std::ios::binary);
                bin.write(reinterpret_cast<const char*>(bytes.data()),
                          static_cast<std::streamsize>(bytes.size()));
                std::cout << "wrote " << *dump_pair << ".json and .bin\n";
            }
            return write_artifacts(c, report);
        }
        if (splitting->parsed()) {
            auto c = load_config(spf, ExperimentKind::splitting);
            apply_start(c.splitting.start);
            if (shells) c.splitting.shells = *shells;
            if (particles) c.splitting.particles = *particles;
            if (replicates) c.splitting.replicates = *replicates;
            if (xi_lo) c.splitting.xi_window_lo = *xi_lo;
            if (xi_hi) c.splitting.xi_window_hi = *xi_hi;
            if (split_eval_sep) c.splitting.eval_sep = true;
            return write_artifacts(c, run_experiment(c));
        }
        if (mixing->parsed()) {
            auto c = load_config(mf, ExperimentKind::mixing);
            if (mix_base_radius) {
                c.mixing.start_a.base_radius = *mix_base_radius;
                c.mixing.start_a.min_base_radius = *mix_base_radius;
                c.mixing.start_b.base_radius = *mix_base_radius;
                c.mixing.start_b.min_base_radius = *mix_base_radius;
            }
            if (gap_b) {
                c.mixing.start_b.kind = InitialKind::given_endpoints;
                c.mixing.start_b.angular_gap = *gap_b;
            }
            if (n_min) c.mixing.n_min = *n_min;
            if (n_max) c.mixing.n_max = *n_max;
            if (particles) c.mixing.particles = *particles;
            if (replicates) c.mixing.replicates = *replicates;
            if (functional) c.mixing.functional = functional_from_flag(*functional);
            return write_artifacts(c, run_experiment(c));
        }
        if (cone->parsed()) {
            auto c = load_config(cf, ExperimentKind::cone);
            if (half_angle) c.cone.half_angle = *half_angle;
            if (cone_shells) c.cone.shells = *cone_shells;
            if (particles) c.cone.particles = *particles;
            if (replicates) c.cone.replicates = *replicates;
            if (burn_in) c.cone.burn_in = *burn_in;
            return write_artifacts(c, run_experiment(c));
        }
        if (report_cmd->parsed()) {
            auto text = read_text_file(artifact_path);
            std::string rendered;
            auto files = render_report(text, rendered);
            std::cout << rendered;
            fs::path dir = report_out.empty() ? fs::path(artifact_path).parent_path()
                                              : fs::path(report_out);
            for (const auto& f : files) {
                auto path = dir / f.filename;
                write_text_file(path, f.content);
                std::cout << "wrote " << path.string() << "\n";
            }
            return 0;
        }
        if (resume_cmd->parsed()) {
            auto file = checkpoint_from_json(read_text_file(resume_path));
            if (resume_threads) file.config.threads = *resume_threads;
            auto parent = fs::path(resume_path).parent_path();
            file.config.out_dir = resume_out.empty()
                                      ? (parent.empty() ? "." : parent.string())
                                      : resume_out;
            return run_survival_like_cli(file.config, resume_stop_after.value_or(0),
                                         &file.progress);
        }
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
