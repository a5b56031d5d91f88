#include "niwalk/splitting.hpp"

#include <algorithm>
#include <cmath>

#include "niwalk/parallel.hpp"
#include "niwalk/walks.hpp"

namespace niwalk {

namespace {

stats::Interval t_interval(std::span<const double> per_replicate) {
    double m = stats::mean(per_replicate);
    if (per_replicate.size() < 2) return {m, m};
    double se = stats::stddev(per_replicate) / std::sqrt(static_cast<double>(per_replicate.size()));
    double t = stats::student_t_quantile(0.975, static_cast<double>(per_replicate.size() - 1));
    return {m - t * se, m + t * se};
}

double replicate_se(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    return stats::stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

ParticleEnsemble::ParticleEnsemble(CurvePair initial, std::uint32_t target_size,
                                   std::uint64_t master_seed, std::uint32_t rep_id)
    : target_size_(target_size), master_seed_(master_seed), rep_id_(rep_id),
      shell_(initial.shell) {
    if (target_size == 0)
        throw std::invalid_argument("ParticleEnsemble: target size must be positive");
    if (!initial.alive)
        throw invalid_state_error("ParticleEnsemble: initial pair must be alive");
    particles_.assign(target_size, initial);
}

double ParticleEnsemble::q_hat() const {
    double q = 1.0;
    for (double p : p_hats_) q *= p;
    return q;
}

void ParticleEnsemble::evolve(
    const std::function<void(std::span<const CurvePair>)>& survivor_hook) {
    if (particles_.empty())
        throw invalid_state_error("ParticleEnsemble: empty ensemble");
    const int next_shell = shell_ + 1;
    const auto shell_tag = static_cast<std::uint64_t>(next_shell);
    std::vector<CurvePair> survivors;
    survivors.reserve(particles_.size());
    for (std::uint32_t slot = 0; slot < particles_.size(); ++slot) {
        RandomStream sa({master_seed_, stream_id::extension(rep_id_, shell_tag, slot, 0)});
        RandomStream sb({master_seed_, stream_id::extension(rep_id_, shell_tag, slot, 1)});
        CurvePair next = extend_one_shell(particles_[slot], sa, sb);
        if (next.alive) survivors.push_back(std::move(next));
    }
    double p_hat = static_cast<double>(survivors.size()) /
                   static_cast<double>(particles_.size());
    if (survivors.empty())
        throw extinction_error(next_shell, "ensemble extinct at shell " +
                                               std::to_string(next_shell));
    p_hats_.push_back(p_hat);
    ess_.push_back(static_cast<double>(survivors.size()));
    shell_ = next_shell;
    if (survivor_hook) survivor_hook(survivors);

    RandomStream rs({master_seed_, stream_id::resample(rep_id_, shell_tag)});
    std::vector<std::uint32_t> parents(target_size_);
    std::vector<CurvePair> next_gen;
    next_gen.reserve(target_size_);
    for (std::uint32_t i = 0; i < target_size_; ++i) {
        auto idx = static_cast<std::uint32_t>(rs.uniform01() *
                                              static_cast<double>(survivors.size()));
        if (idx >= survivors.size()) idx = static_cast<std::uint32_t>(survivors.size() - 1);
        parents[i] = idx;
        next_gen.push_back(survivors[idx]);
    }
    parents_.push_back(std::move(parents));
    particles_ = std::move(next_gen);
}

double evaluate_functional(const CurvePair& pair, MixingFunctional f) {
    switch (f) {
        case MixingFunctional::endpoint_angle: {
            Vec3d ea = pair.a.endpoint().cast<double>().normalized();
            Vec3d eb = pair.b.endpoint().cast<double>().normalized();
            return std::acos(std::clamp(ea.dot(eb), -1.0, 1.0));
        }
        case MixingFunctional::sep_indicator:
            return sep_test(pair) ? 1.0 : 0.0;
        case MixingFunctional::halfspace_fraction: {
            auto tail = pi_k(pair, pair.shell / 2);
            std::uint64_t na = 0, nb = 0, pos_a = 0, neg_b = 0;
            tail.for_each_a([&](std::uint64_t, const Vec3& p) {
                ++na;
                if (p.x() > 0) ++pos_a;
            });
            tail.for_each_b([&](std::uint64_t, const Vec3& p) {
                ++nb;
                if (p.x() < 0) ++neg_b;
            });
            double fa = na ? static_cast<double>(pos_a) / static_cast<double>(na) : 0.0;
            double fb = nb ? static_cast<double>(neg_b) / static_cast<double>(nb) : 0.0;
            return 0.5 * (fa + fb);
        }
    }
    throw std::invalid_argument("evaluate_functional: unknown functional");
}

ReplicateResult run_splitting_replicate(const StartConfig& start, std::uint32_t particles,
                                        int n_shells, const ReplicateOptions& options,
                                        std::uint64_t master_seed, std::uint32_t rep_id) {
    if (n_shells < 1)
        throw std::invalid_argument("run_splitting_replicate: need n_shells >= 1");
    ParticleEnsemble ens(build_initial_pair(start), particles, master_seed, rep_id);

    ReplicateResult result;
    result.shells.reserve(static_cast<std::size_t>(n_shells));
    for (int shell = 1; shell <= n_shells; ++shell) {
        ShellRecord rec;
        rec.attempted = static_cast<std::uint32_t>(ens.particles().size());
        bool want_functional =
            options.eval_functional &&
            (options.functional_shells.empty() ||
             std::find(options.functional_shells.begin(), options.functional_shells.end(),
                       shell) != options.functional_shells.end());
        ens.evolve([&](std::span<const CurvePair> survivors) {
            if (options.eval_sep) {
                rec.sep_evaluated = true;
                for (const auto& s : survivors) {
                    rec.sep_count += sep_test(s);
                    rec.sep_relaxed_count += sep_test(s, options.sep_relaxed_scale);
                }
            }
            if (want_functional) {
                rec.functional.reserve(survivors.size());
                for (const auto& s : survivors)
                    rec.functional.push_back(evaluate_functional(s, options.functional));
            }
        });
        rec.p_hat = ens.p_hats().back();
        rec.survivors = static_cast<std::uint32_t>(ens.ess_history().back());
        rec.ess = ens.ess_history().back();
        result.shells.push_back(std::move(rec));
    }
    return result;
}

std::vector<ReplicateResult> run_splitting_replicates(
    const StartConfig& start, std::uint32_t particles, int n_shells,
    const ReplicateOptions& options, std::uint64_t master_seed, std::uint32_t replicates,
    unsigned threads, std::uint32_t rep_id_offset) {
    std::vector<ReplicateResult> results(replicates);
    parallel_for_index(0, replicates, threads, [&](std::uint64_t r) {
        results[r] = run_splitting_replicate(start, particles, n_shells, options, master_seed,
                                             static_cast<std::uint32_t>(r) + rep_id_offset);
    });
    return results;
}

std::vector<std::vector<double>> extract_phats(std::span<const ReplicateResult> results) {
    std::vector<std::vector<double>> out;
    out.reserve(results.size());
    for (const auto& r : results) {
        std::vector<double> p;
        p.reserve(r.shells.size());
        for (const auto& s : r.shells) p.push_back(s.p_hat);
        out.push_back(std::move(p));
    }
    return out;
}

QEstimate estimate_q(std::span<const std::vector<double>> phats, int n) {
    if (n < 0) throw std::invalid_argument("estimate_q: n must be >= 0");
    QEstimate est;
    est.shell = n;
    if (n == 0) {
        est.value = 1.0;
        est.ci = {1.0, 1.0};
        return est;
    }
    if (phats.empty()) throw std::invalid_argument("estimate_q: no replicates");
    for (const auto& p : phats) {
        if (static_cast<int>(p.size()) < n)
            throw std::invalid_argument("estimate_q: replicates do not reach shell n");
        double q = 1.0;
        for (int j = 0; j < n; ++j) q *= p[static_cast<std::size_t>(j)];
        est.per_replicate.push_back(q);
    }
    est.value = stats::mean(est.per_replicate);
    est.se = replicate_se(est.per_replicate);
    est.ci = t_interval(est.per_replicate);
    return est;
}

XiEstimate estimate_xi(std::span<const std::vector<double>> phats, int n0, int n1) {
    if (n0 < 0 || n1 - n0 < 3)
        throw std::invalid_argument("estimate_xi: window must satisfy n1 - n0 >= 3");
    XiEstimate est;
    est.n0 = n0;
    est.n1 = n1;
    for (const auto& p : phats) {
        if (static_cast<int>(p.size()) < n1)
            throw std::invalid_argument("estimate_xi: replicates do not reach n1");
        double acc = 0.0;
        for (int j = n0; j < n1; ++j) acc += -std::log(p[static_cast<std::size_t>(j)]);
        est.per_replicate.push_back(acc / static_cast<double>(n1 - n0));
    }
    est.value = stats::mean(est.per_replicate);
    est.se = replicate_se(est.per_replicate);
    est.ci = t_interval(est.per_replicate);
    return est;
}

QSequence q_ratio_convergence(std::span<const std::vector<double>> phats, double xi_ref) {
    if (phats.empty()) throw std::invalid_argument("q_ratio_convergence: no replicates");
    std::size_t n_shells = phats.front().size();
    for (const auto& p : phats)
        if (p.size() != n_shells)
            throw std::invalid_argument("q_ratio_convergence: ragged replicates");
    QSequence seq;
    seq.xi_ref = xi_ref;
    double q_mean_prod = 1.0;
    for (std::size_t j = 0; j < n_shells; ++j) {
        std::vector<double> col;
        col.reserve(phats.size());
        for (const auto& p : phats) col.push_back(p[j]);
        seq.shells.push_back(static_cast<int>(j));
        seq.ratios.push_back(stats::mean(col));
        seq.ratio_se.push_back(replicate_se(col));
        q_mean_prod *= seq.ratios.back();
        seq.q_hats.push_back(q_mean_prod);
        seq.q_display.push_back(std::exp(xi_ref * static_cast<double>(j + 1)) * q_mean_prod);
    }
    for (std::size_t j = 0; j + 1 < seq.ratios.size(); ++j)
        seq.increments.push_back(std::fabs(seq.ratios[j + 1] - seq.ratios[j]));
    if (seq.increments.size() >= 3) {
        std::vector<double> idx(seq.increments.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
        seq.cauchy_trend = stats::spearman_negative(idx, seq.increments);
    }
    return seq;
}

std::vector<Rho1Row> estimate_rho1(std::span<const ReplicateResult> results) {
    if (results.empty()) throw std::invalid_argument("estimate_rho1: no replicates");
    std::size_t n_shells = results.front().shells.size();
    std::vector<Rho1Row> rows;
    for (std::size_t j = 0; j < n_shells; ++j) {
        Rho1Row row;
        row.shell = static_cast<int>(j + 1);
        std::vector<double> freqs, relaxed;
        for (const auto& r : results) {
            const auto& s = r.shells[j];
            if (!s.sep_evaluated)
                throw std::invalid_argument("estimate_rho1: SEP was not evaluated");
            row.alive += s.survivors;
            row.sep += s.sep_count;
            row.sep_relaxed += s.sep_relaxed_count;
            freqs.push_back(static_cast<double>(s.sep_count) /
                            static_cast<double>(s.survivors));
            relaxed.push_back(static_cast<double>(s.sep_relaxed_count) /
                              static_cast<double>(s.survivors));
        }
        row.freq = stats::mean(freqs);
        row.se = replicate_se(freqs);
        row.ci = t_interval(freqs);
        row.freq_relaxed = stats::mean(relaxed);
        row.ci_relaxed = t_interval(relaxed);
        rows.push_back(std::move(row));
    }
    return rows;
}

MixingDiagnostic mixing_distance(const StartConfig& start_a, const StartConfig& start_b,
                                 int n_min, int n_max, MixingFunctional f,
                                 std::uint32_t particles, std::uint32_t replicates,
                                 std::uint64_t master_seed, unsigned threads) {
    if (n_min < 1 || n_max < n_min + 2)
        throw std::invalid_argument("mixing_distance: need at least three shells");
    ReplicateOptions opts;
    opts.eval_functional = true;
    opts.functional = f;
    for (int n = n_min; n <= n_max; ++n) opts.functional_shells.push_back(n);

    std::vector<ReplicateResult> runs_a(replicates), runs_b(replicates);
    parallel_for_index(0, 2 * static_cast<std::uint64_t>(replicates), threads,
                       [&](std::uint64_t i) {
                           auto r = static_cast<std::uint32_t>(i / 2);
                           unsigned ensemble = i % 2;
                           auto rep_tag = static_cast<std::uint32_t>(
                               stream_id::mixing_rep(r, ensemble));
                           const StartConfig& cfg = ensemble == 0 ? start_a : start_b;
                           auto res = run_splitting_replicate(cfg, particles, n_max, opts,
                                                              master_seed, rep_tag);
                           (ensemble == 0 ? runs_a : runs_b)[r] = std::move(res);
                       });

    MixingDiagnostic diag;
    diag.functional = f;
    std::vector<double> log_d, shell_x;
    for (int n = n_min; n <= n_max; ++n) {
        std::vector<double> ks_per_rep;
        for (std::uint32_t r = 0; r < replicates; ++r) {
            const auto& sa = runs_a[r].shells[static_cast<std::size_t>(n - 1)].functional;
            const auto& sb = runs_b[r].shells[static_cast<std::size_t>(n - 1)].functional;
            ks_per_rep.push_back(stats::ks_statistic(sa, sb));
        }
        diag.shells.push_back(n);
        diag.distance.push_back(stats::mean(ks_per_rep));
        diag.distance_se.push_back(replicate_se(ks_per_rep));
    }
    diag.final_critical = stats::ks_critical(particles, particles, 0.01);
    diag.saturated = std::all_of(diag.distance.begin(), diag.distance.end(),
                                 [&](double d) { return d < diag.final_critical; });
    for (std::size_t i = 0; i < diag.distance.size(); ++i) {
        shell_x.push_back(static_cast<double>(diag.shells[i]));
        log_d.push_back(std::log(std::max(diag.distance[i], 1e-12)));
    }
    diag.fit = stats::linear_fit(shell_x, log_d);
    diag.beta_hat = -diag.fit.slope;
    bool decays = diag.fit.slope < 0.0 && diag.fit.p_neg_slope < 0.05;
    bool small_end = diag.distance.back() < diag.final_critical;
    diag.pass = (decays && small_end) || diag.saturated;
    return diag;
}

ConeExponentEstimate estimate_cone_exponent(const ConeSpec& cone, int n_shells,
                                            std::uint32_t particles, std::uint32_t replicates,
                                            std::uint64_t master_seed, unsigned threads,
                                            int burn_in, double eps) {
    if (n_shells <= burn_in)
        throw std::invalid_argument("estimate_cone_exponent: need shells beyond burn-in");
    if (particles == 0 || replicates == 0)
        throw std::invalid_argument("estimate_cone_exponent: need particles and replicates");

    std::vector<std::vector<double>> phats(replicates);
    parallel_for_index(0, replicates, threads, [&](std::uint64_t rep) {
        std::vector<Vec3d> pos(particles, cone.axis());
        std::vector<double> p_seq;
        auto rep_tag = static_cast<std::uint32_t>(rep) | (1u << 15);
        for (int shell = 1; shell <= n_shells; ++shell) {
            double target = std::exp(static_cast<double>(shell));
            double t2 = target * target;
            std::vector<Vec3d> survivors;
            survivors.reserve(pos.size());
            for (std::uint32_t slot = 0; slot < pos.size(); ++slot) {
                RandomStream s({master_seed,
                                stream_id::cone(rep_tag, static_cast<std::uint64_t>(shell), slot)});
                Vec3d p = pos[slot];
                bool alive = true;
                for (;;) {
                    double r = p.norm();
                    double d = cone.boundary_distance(p);
                    double sigma = eps * std::max(std::min(r, 2.0 * d), 0.02 * r);
                    p += s.gaussian3(sigma);
                    if (!cone.contains(p)) {
                        alive = false;
                        break;
                    }
                    if (p.squaredNorm() >= t2) break;
                }
                if (alive) survivors.push_back(p);
            }
            if (survivors.empty())
                throw extinction_error(shell, "cone ensemble extinct at shell " +
                                                  std::to_string(shell));
            p_seq.push_back(static_cast<double>(survivors.size()) /
                            static_cast<double>(pos.size()));
            RandomStream rs({master_seed,
                             stream_id::resample(rep_tag, static_cast<std::uint64_t>(shell))});
            std::vector<Vec3d> next(particles);
            for (std::uint32_t i = 0; i < particles; ++i) {
                auto idx = static_cast<std::size_t>(rs.uniform01() *
                                                    static_cast<double>(survivors.size()));
                if (idx >= survivors.size()) idx = survivors.size() - 1;
                next[i] = survivors[idx];
            }
            pos = std::move(next);
        }
        phats[rep] = std::move(p_seq);
    });

    ConeExponentEstimate est;
    for (const auto& p : phats) {
        double acc = 0.0;
        for (int j = burn_in; j < n_shells; ++j) acc += -std::log(p[static_cast<std::size_t>(j)]);
        est.per_replicate.push_back(acc / static_cast<double>(n_shells - burn_in));
    }
    est.alpha = stats::mean(est.per_replicate);
    est.se = replicate_se(est.per_replicate);
    est.ci = t_interval(est.per_replicate);
    est.mean_log_survival.assign(static_cast<std::size_t>(n_shells), 0.0);
    for (const auto& p : phats)
        for (int j = 0; j < n_shells; ++j)
            est.mean_log_survival[static_cast<std::size_t>(j)] +=
                std::log(p[static_cast<std::size_t>(j)]) / static_cast<double>(replicates);
    return est;
}

}  // namespace niwalk
