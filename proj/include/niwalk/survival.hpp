#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "niwalk/errors.hpp"
#include "niwalk/geometry.hpp"
#include "niwalk/rng.hpp"
#include "niwalk/site_set.hpp"

namespace niwalk {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Checkpointed survivor counts of the pair/tuple experiment: M(n) pairs
/// alive past step n, with the log-ratio exponent estimators.
struct SurvivalTable {
    std::uint64_t master_seed = 0;
    std::uint32_t group_m = 1;
    std::uint32_t group_n = 1;
    std::uint64_t total_pairs = 0;  // M
    std::uint64_t max_steps = 0;
    std::uint64_t h_lag = 10000;
    std::vector<std::uint64_t> checkpoints;  // sorted n values
    std::vector<std::uint64_t> counts;       // M(n) per checkpoint

    std::optional<std::size_t> index_of(std::uint64_t n) const {
        for (std::size_t i = 0; i < checkpoints.size(); ++i)
            if (checkpoints[i] == n) return i;
        return std::nullopt;
    }

    double fraction(std::size_t i) const {
        return static_cast<double>(counts[i]) / static_cast<double>(total_pairs);
    }

    friend bool operator==(const SurvivalTable&, const SurvivalTable&) = default;
};

/// k(n) = (log M - log M(n)) / log n, with a delta-method standard error from
/// the binomial variance of M(n). Empty if M(n) = 0 (undefined estimator).
inline std::optional<Estimate> k_estimator(const SurvivalTable& t, std::uint64_t n) {
    auto idx = t.index_of(n);
    if (!idx) throw std::invalid_argument("k_estimator: n is not a checkpoint");
    if (n < 2) throw std::invalid_argument("k_estimator: n must be >= 2");
    std::uint64_t mn = t.counts[*idx];
    if (mn == 0) return std::nullopt;
    double M = static_cast<double>(t.total_pairs);
    double logn = std::log(static_cast<double>(n));
    double p = static_cast<double>(mn) / M;
    Estimate e;
    e.value = (std::log(M) - std::log(static_cast<double>(mn))) / logn;
    e.se = std::sqrt((1.0 - p) / (M * p)) / logn;
    return e;
}

/// h(n) = (log M(n) - log M(n+m)) / (log(n+m) - log n); the inner count is
/// conditionally binomial given M(n), which gives the delta-method error.
inline std::optional<Estimate> h_estimator(const SurvivalTable& t, std::uint64_t n,
                                           std::uint64_t m_lag) {
    auto i0 = t.index_of(n);
    auto i1 = t.index_of(n + m_lag);
    if (!i0 || !i1) return std::nullopt;
    std::uint64_t m0 = t.counts[*i0], m1 = t.counts[*i1];
    if (m0 == 0 || m1 == 0) return std::nullopt;
    double denom = std::log(static_cast<double>(n + m_lag)) -
                   std::log(static_cast<double>(n));
    double p2 = static_cast<double>(m1) / static_cast<double>(m0);
    Estimate e;
    e.value = (std::log(static_cast<double>(m0)) - std::log(static_cast<double>(m1))) / denom;
    e.se = std::sqrt((1.0 - p2) / (static_cast<double>(m0) * p2)) / denom;
    return e;
}

/// Incremental state of one tuple of walks: group 1 holds walkers [0, m),
/// group 2 holds [m, m+n). Intersection is between the group site unions over
/// the step interval (0, t]; the time-0 origin site is not inserted, but a
/// later return to the origin site is.
class TupleTracker {
public:
    TupleTracker(std::uint32_t m, std::uint32_t n) : m_(m), n_(n) {
        if (m == 0 || n == 0)
            throw std::invalid_argument("TupleTracker: group sizes must be >= 1");
        positions_.assign(m + n, Vec3::Zero());
        new_keys_.assign(m + n, 0);
    }

    std::uint32_t group_m() const { return m_; }
    std::uint32_t group_n() const { return n_; }
    std::uint64_t steps() const { return t_; }
    const Vec3& position(std::size_t walker) const { return positions_[walker]; }
    std::optional<std::uint64_t> first_intersection_step() const { return death_; }
    const SiteSet& visited_group1() const { return set1_; }
    const SiteSet& visited_group2() const { return set2_; }

    /// Advances all walkers to target_step or to the first intersection,
    /// whichever comes first. dir(walker_index) -> direction code 0..5 is
    /// called once per walker per step, in walker order.
    template <class DirFn>
    void advance(DirFn&& dir, std::uint64_t target_step) {
        if (target_step <= t_)
            throw std::invalid_argument("advance: target_step must exceed current step");
        if (death_) return;
        const std::uint32_t k = m_ + n_;
        while (t_ < target_step) {
            ++t_;
            for (std::uint32_t i = 0; i < k; ++i) {
                int code = dir(i);
                positions_[i][code >> 1] += (code & 1) ? 1 : -1;
                if (!site_in_range(positions_[i]))
                    throw coordinate_overflow_error(
                        "tuple walker left the packable coordinate range");
                new_keys_[i] = pack_site(positions_[i]);
            }
            bool hit = false;
            // same-step collisions across groups, then cross-membership
            for (std::uint32_t i = 0; i < m_ && !hit; ++i)
                for (std::uint32_t j = m_; j < k; ++j)
                    if (new_keys_[i] == new_keys_[j]) { hit = true; break; }
            if (!hit)
                for (std::uint32_t i = 0; i < m_; ++i)
                    if (set2_.contains(new_keys_[i])) { hit = true; break; }
            if (!hit)
                for (std::uint32_t j = m_; j < k; ++j)
                    if (set1_.contains(new_keys_[j])) { hit = true; break; }
            for (std::uint32_t i = 0; i < m_; ++i) set1_.insert(new_keys_[i]);
            for (std::uint32_t j = m_; j < k; ++j) set2_.insert(new_keys_[j]);
            if (hit) {
                death_ = t_;
                return;
            }
        }
    }

    void reset() {
        for (auto& p : positions_) p.setZero();
        t_ = 0;
        death_.reset();
        set1_.clear();
        set2_.clear();
    }

private:
    std::uint32_t m_, n_;
    std::vector<Vec3> positions_;
    std::vector<std::uint64_t> new_keys_;
    SiteSet set1_, set2_;
    std::uint64_t t_ = 0;
    std::optional<std::uint64_t> death_;
};

/// The pair experiment is the (1,1) tuple; walker 0 is walk a, walker 1 is b.
using PairTracker = TupleTracker;

/// Advances a pair with per-walker streams (walker i uses streams[i]).
inline void advance_pair(PairTracker& tracker, std::vector<RandomStream>& streams,
                         std::uint64_t target_step) {
    tracker.advance([&](std::uint32_t i) { return streams[i].step6(); }, target_step);
}

struct TupleExperimentConfig {
    std::uint32_t group_m = 1;
    std::uint32_t group_n = 1;
    std::uint64_t pairs = 0;  // M
    std::uint64_t max_steps = 0;
    std::vector<std::uint64_t> checkpoints;
    std::uint64_t h_lag = 10000;
    unsigned threads = 0;  // 0 = hardware
};

/// Completed prefix of a (possibly interrupted) experiment. Resuming from
/// this state and finishing yields counts identical to an uninterrupted run.
struct ExperimentProgress {
    std::uint64_t cursor = 0;  // pairs with indices < cursor are committed
    std::vector<std::uint64_t> committed_counts;
};

struct RunControl {
    /// Stop (with a clean progress snapshot) once at least this many pairs are
    /// committed. 0 = run to completion.
    std::uint64_t stop_after_pairs = 0;
    /// Invoked with committed progress as chunks merge (survival/tuple only);
    /// used for periodic checkpointing and cancellation (return false to stop).
    std::function<bool(const ExperimentProgress&)> on_progress;
};

struct RunOutcome {
    bool complete = false;
    SurvivalTable table;         // valid when complete
    ExperimentProgress progress; // always valid
};

/// First intersection step of pair `pair_index` under `master_seed`, or
/// max_steps + 1 if it survives. Pure function of its arguments.
std::uint64_t tuple_death_step(std::uint64_t master_seed, std::uint64_t pair_index,
                               std::uint32_t m, std::uint32_t n,
                               std::uint64_t max_steps, TupleTracker& workspace);

RunOutcome run_tuple_experiment(const TupleExperimentConfig& config,
                                std::uint64_t master_seed,
                                const RunControl& control = {},
                                const ExperimentProgress* resume_from = nullptr);

/// The plain pair experiment; identical to run_tuple_experiment with
/// group sizes (1,1).
RunOutcome run_survival_experiment(const TupleExperimentConfig& config,
                                   std::uint64_t master_seed,
                                   const RunControl& control = {},
                                   const ExperimentProgress* resume_from = nullptr);

}  // namespace niwalk
