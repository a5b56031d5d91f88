#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "niwalk/curve.hpp"
#include "niwalk/geometry.hpp"
#include "niwalk/stats.hpp"

namespace niwalk {

enum class MixingFunctional { endpoint_angle, sep_indicator, halfspace_fraction };

/// Population of alive curve pairs at a common shell, evolved by
/// extend-kill-resample. One ensemble estimates q_n as the product of its
/// per-shell survival fractions.
class ParticleEnsemble {
public:
    ParticleEnsemble(CurvePair initial, std::uint32_t target_size,
                     std::uint64_t master_seed, std::uint32_t rep_id);

    const std::vector<CurvePair>& particles() const { return particles_; }
    int shell() const { return shell_; }
    std::uint32_t target_size() const { return target_size_; }
    std::span<const double> p_hats() const { return p_hats_; }
    std::span<const double> ess_history() const { return ess_; }
    const std::vector<std::vector<std::uint32_t>>& resampling_log() const { return parents_; }

    /// Running estimate of q_n for the initial configuration.
    double q_hat() const;

    /// Extends every particle one shell, removes the dead, records the
    /// survival fraction, and multinomially resamples back to the target
    /// size. Survivors are visited in slot order, so the result does not
    /// depend on scheduling. The hook, if given, sees the survivors before
    /// resampling: they are the empirical conditioned law at the new shell.
    /// Throws extinction_error if nothing survives.
    void evolve(const std::function<void(std::span<const CurvePair>)>& survivor_hook = {});

private:
    std::vector<CurvePair> particles_;
    std::uint32_t target_size_;
    std::uint64_t master_seed_;
    std::uint32_t rep_id_;
    int shell_;
    std::vector<double> p_hats_;
    std::vector<double> ess_;
    std::vector<std::vector<std::uint32_t>> parents_;
};

struct ShellRecord {
    std::uint32_t attempted = 0;
    std::uint32_t survivors = 0;
    double p_hat = 0.0;
    double ess = 0.0;
    std::uint32_t sep_count = 0;          // canonical-margin SEP survivors
    std::uint32_t sep_relaxed_count = 0;  // survivors passing the relaxed margins
    bool sep_evaluated = false;
    std::vector<double> functional;  // per-survivor samples (if requested)
};

struct ReplicateOptions {
    bool eval_sep = false;
    /// Margin-exponent scale for the supplementary relaxed SEP count.
    double sep_relaxed_scale = 4.0;
    bool eval_functional = false;
    MixingFunctional functional = MixingFunctional::endpoint_angle;
    /// Shells at which functional samples are collected; empty = all.
    std::vector<int> functional_shells;
};

struct ReplicateResult {
    std::vector<ShellRecord> shells;  // entry j describes shell j+1
};

/// Evaluates the functional on the surviving pair, truncated at depth
/// floor(shell/2) where the functional depends on the tail.
double evaluate_functional(const CurvePair& pair, MixingFunctional f);

/// One independent splitting replicate: evolves an ensemble through n_shells
/// shells, evaluating SEP and functionals on survivors before resampling.
ReplicateResult run_splitting_replicate(const StartConfig& start, std::uint32_t particles,
                                        int n_shells, const ReplicateOptions& options,
                                        std::uint64_t master_seed, std::uint32_t rep_id);

/// R independent replicates, parallel over replicates.
std::vector<ReplicateResult> run_splitting_replicates(const StartConfig& start,
                                                      std::uint32_t particles, int n_shells,
                                                      const ReplicateOptions& options,
                                                      std::uint64_t master_seed,
                                                      std::uint32_t replicates,
                                                      unsigned threads,
                                                      std::uint32_t rep_id_offset = 0);

/// Per-replicate survival fraction sequences (p_hat_1, ..., p_hat_n).
std::vector<std::vector<double>> extract_phats(std::span<const ReplicateResult> results);

struct QEstimate {
    int shell = 0;
    double value = 1.0;
    double se = 0.0;
    stats::Interval ci;  // t interval over replicates
    std::vector<double> per_replicate;
};

/// q_hat_n = product of the per-shell fractions through shell n; unbiased at
/// the replicate level, so the spread of per-replicate products gives the CI.
QEstimate estimate_q(std::span<const std::vector<double>> phats, int n);

struct XiEstimate {
    int n0 = 0, n1 = 0;
    double value = 0.0;
    double se = 0.0;
    stats::Interval ci;
    std::vector<double> per_replicate;
};

/// xi_hat = mean of -log(q_{j+1}/q_j) over the window (n0, n1]; the ratios
/// are exactly the per-shell survival fractions. Requires n1 - n0 >= 3.
XiEstimate estimate_xi(std::span<const std::vector<double>> phats, int n0, int n1);

struct QSequence {
    double xi_ref = 0.57;
    std::vector<int> shells;        // ratio r_n = q_{n+1}/q_n for each listed n
    std::vector<double> ratios;     // replicate means
    std::vector<double> ratio_se;
    std::vector<double> q_hats;     // running mean products
    std::vector<double> q_display;  // e^{n xi_ref} q_hat_n for presentation
    std::vector<double> increments; // |r_{n+1} - r_n|
    stats::Spearman cauchy_trend;   // increments vs n, negative = converging
};

/// Successive-ratio convergence diagnostic: the increments of r_n should
/// trend downward as the chain forgets its initial configuration.
QSequence q_ratio_convergence(std::span<const std::vector<double>> phats,
                              double xi_ref = 0.57);

struct Rho1Row {
    int shell = 0;
    std::uint64_t alive = 0;
    std::uint64_t sep = 0;
    std::uint64_t sep_relaxed = 0;
    double freq = 0.0;  // replicate-mean conditional SEP frequency
    double se = 0.0;
    stats::Interval ci;
    double freq_relaxed = 0.0;
    stats::Interval ci_relaxed;
};

/// Conditional SEP frequency among survivors, per shell; replicate-level CI
/// because resampling correlates particles within an ensemble.
std::vector<Rho1Row> estimate_rho1(std::span<const ReplicateResult> results);

struct MixingDiagnostic {
    MixingFunctional functional = MixingFunctional::endpoint_angle;
    std::vector<int> shells;
    std::vector<double> distance;     // mean per-replicate two-sample KS
    std::vector<double> distance_se;
    double beta_hat = 0.0;            // decay rate: -slope of log D vs n
    stats::LinearFit fit;
    double final_critical = 0.0;      // per-replicate KS 1% critical value
    bool saturated = false;           // all D at the two-sample noise floor
    bool pass = false;
};

/// Distributional distance between the conditioned ensembles of two initial
/// configurations, per shell, with a decay-rate fit. PASS requires a
/// significantly negative slope and a final distance below the 1% critical
/// value (or saturation at the noise floor throughout).
MixingDiagnostic mixing_distance(const StartConfig& start_a, const StartConfig& start_b,
                                 int n_min, int n_max, MixingFunctional f,
                                 std::uint32_t particles, std::uint32_t replicates,
                                 std::uint64_t master_seed, unsigned threads);

struct ConeExponentEstimate {
    double alpha = 0.0;
    double se = 0.0;
    stats::Interval ci;
    std::vector<double> per_replicate;
    std::vector<double> mean_log_survival;  // per shell
};

/// Splitting estimator of the cone exit exponent: position-only particles,
/// killed on leaving the cone, resampled at each shell radius e^j.
ConeExponentEstimate estimate_cone_exponent(const ConeSpec& cone, int n_shells,
                                            std::uint32_t particles, std::uint32_t replicates,
                                            std::uint64_t master_seed, unsigned threads,
                                            int burn_in = 1, double eps = 0.02);

}  // namespace niwalk
