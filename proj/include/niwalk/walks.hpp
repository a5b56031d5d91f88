#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>

#include "niwalk/geometry.hpp"
#include "niwalk/rng.hpp"

namespace niwalk {

/// Simple random walk on Z^3. Direction codes 0..5 map to -x,+x,-y,+y,-z,+z
/// (axis = code/2, sign = code%2 ? + : -); this mapping is frozen because
/// replay fixtures depend on it.
struct LatticeWalker {
    Vec3 pos = Vec3::Zero();
    std::uint64_t steps = 0;

    static Vec3 direction(int code) {
        Vec3 d = Vec3::Zero();
        d[code >> 1] = (code & 1) ? 1 : -1;
        return d;
    }

    void step(RandomStream& stream) {
        int code = stream.step6();
        pos[code >> 1] += (code & 1) ? 1 : -1;
        ++steps;
    }
};

/// Gaussian-increment walk in R^3 with per-component standard deviation
/// sigma; a discretely observed Brownian motion (each step is B(t+sigma^2)
/// minus B(t)).
struct GaussianWalker {
    Vec3d pos = Vec3d::Zero();
    std::uint64_t steps = 0;
    double sigma = 1.0;

    void step(RandomStream& stream) {
        pos += stream.gaussian3(sigma);
        ++steps;
    }
};

template <class Walker>
struct HitResult {
    Walker state;
    bool hit = false;
};

inline double walker_radius(const LatticeWalker& w) { return norm_of(w.pos); }
inline double walker_radius(const GaussianWalker& w) { return w.pos.norm(); }

/// Advances until |position| >= radius (hit) or step_cap is exhausted (not an
/// error). The returned state is the first one at or beyond the radius.
template <class Walker>
HitResult<Walker> run_until_radius(Walker state, RandomStream& stream,
                                   double radius, std::uint64_t step_cap) {
    if (!(radius > walker_radius(state)))
        throw std::invalid_argument("run_until_radius: radius must exceed |position|");
    if (step_cap == 0)
        throw std::invalid_argument("run_until_radius: step_cap must be positive");
    double r2 = radius * radius;
    for (std::uint64_t i = 0; i < step_cap; ++i) {
        state.step(stream);
        double q;
        if constexpr (std::is_same_v<Walker, LatticeWalker>)
            q = static_cast<double>(state.pos.squaredNorm());
        else
            q = state.pos.squaredNorm();
        if (q >= r2) return {state, true};
    }
    return {state, false};
}

/// Walker starts at (start_x, 0, 0); absorbing planes x=0 and x=n. Returns
/// true iff x=n is reached first. On the lattice both planes are hit exactly,
/// so for start_x=1 the success probability is exactly 1/n.
inline bool gamblers_ruin_trial(std::int64_t start_x, std::int64_t n,
                                RandomStream& stream) {
    if (start_x < 1 || n <= start_x)
        throw std::invalid_argument("gamblers_ruin_trial: need 1 <= start_x < n");
    std::int64_t x = start_x;
    for (;;) {
        int code = stream.step6();
        if (code < 2) {
            x += (code & 1) ? 1 : -1;
            if (x == 0) return false;
            if (x == n) return true;
        }
    }
}

namespace detail {

/// Uniform point on the unit sphere (normalized Gaussian triple).
inline Vec3d uniform_sphere_point(RandomStream& stream) {
    for (;;) {
        Vec3d g = stream.gaussian3(1.0);
        double n = g.norm();
        if (n > 1e-12) return g / n;
    }
}

}  // namespace detail

inline constexpr double kDefaultEscapeRadius = 148.4131591025766;  // e^5

/// Starts uniformly on the unit sphere and asks whether the walk enters the
/// ball of radius e^-k before leaving escape_radius. Steps are Gaussian with
/// position-adaptive sigma: the embedded path is an exact Brownian motion
/// observed at adapted times, so the only bias is discrete monitoring near
/// the target sphere, kept below ~1e-3 by shrinking steps there.
inline bool ball_hitting_trial(double k, RandomStream& stream,
                               double escape_radius = kDefaultEscapeRadius,
                               double eps = 0.02) {
    if (k < 0.0) throw std::invalid_argument("ball_hitting_trial: k must be >= 0");
    if (!(escape_radius >= kDefaultEscapeRadius - 1e-9))
        throw std::invalid_argument("ball_hitting_trial: escape_radius must be >= e^5");
    double a = std::exp(-k);
    Vec3d pos = detail::uniform_sphere_point(stream);
    if (pos.norm() <= a) return true;  // k = 0: already on the target sphere
    double esc2 = escape_radius * escape_radius;
    double a2 = a * a;
    for (;;) {
        double r = pos.norm();
        double sigma = eps * std::max(r - a, 0.05 * a);
        pos += stream.gaussian3(sigma);
        double q = pos.squaredNorm();
        if (q <= a2) return true;
        if (q >= esc2) return false;
    }
}

/// Starts on the cone axis at radius 1; true iff the walk stays inside the
/// cone until first reaching radius e^n. Gaussian backend with steps scaled
/// to min(radius, boundary distance) so exits are resolved finely.
inline bool cone_survival_trial(const ConeSpec& cone, int n, RandomStream& stream,
                                double eps = 0.02) {
    if (n < 1) throw std::invalid_argument("cone_survival_trial: n must be >= 1");
    double target = std::exp(static_cast<double>(n));
    double t2 = target * target;
    Vec3d pos = cone.axis();
    for (;;) {
        double r = pos.norm();
        double d = cone.boundary_distance(pos);
        double sigma = eps * std::max(std::min(r, 2.0 * d), 0.02 * r);
        pos += stream.gaussian3(sigma);
        if (!cone.contains(pos)) return false;
        if (pos.squaredNorm() >= t2) return true;
    }
}

}  // namespace niwalk
