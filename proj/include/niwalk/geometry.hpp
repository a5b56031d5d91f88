#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

namespace niwalk {

/// Lattice sites use 64-bit coordinates so squared norms never overflow
/// within the packable range.
using Vec3 = Eigen::Matrix<std::int64_t, 3, 1>;
using Vec3d = Eigen::Vector3d;

/// Coordinates must satisfy |c| < 2^20 so a site packs into 63 bits.
inline constexpr std::int64_t kCoordLimit = std::int64_t{1} << 20;

inline bool site_in_range(const Vec3& p) {
    return p.cwiseAbs().maxCoeff() < kCoordLimit;
}

/// Packs a lattice site into a nonzero 64-bit key (21 bits per biased
/// coordinate). Zero is reserved as the empty-slot sentinel of SiteSet; the
/// range check above excludes the one coordinate triple that would map to it.
inline std::uint64_t pack_site(const Vec3& p) {
    auto b = [](std::int64_t c) {
        return static_cast<std::uint64_t>(c + kCoordLimit);
    };
    return b(p.x()) | (b(p.y()) << 21) | (b(p.z()) << 42);
}

inline double norm_of(const Vec3& p) {
    return std::sqrt(static_cast<double>(p.squaredNorm()));
}

/// Concentric shells of ratio e: shell n has radius base_radius * e^n.
class ShellConfig {
public:
    static constexpr double kDefaultMinBaseRadius = 32.0;

    explicit ShellConfig(double base_radius,
                         double min_base_radius = kDefaultMinBaseRadius)
        : base_radius_(base_radius), min_base_radius_(min_base_radius) {
        if (!(base_radius >= min_base_radius) || !(base_radius > 0.0))
            throw std::invalid_argument(
                "ShellConfig: base_radius must be >= configured minimum");
    }

    double base_radius() const { return base_radius_; }
    double min_base_radius() const { return min_base_radius_; }

    double radius(int shell) const {
        return base_radius_ * std::exp(static_cast<double>(shell));
    }

private:
    double base_radius_;
    double min_base_radius_;
};

/// Solid cone about an axis through the origin. half_angle in (0, pi];
/// pi means all of space.
class ConeSpec {
public:
    ConeSpec(const Vec3d& axis, double half_angle)
        : axis_(axis.normalized()), half_angle_(half_angle) {
        if (!(axis.norm() > 0.0))
            throw std::invalid_argument("ConeSpec: zero axis");
        if (!(half_angle > 0.0) || half_angle > std::numbers::pi)
            throw std::invalid_argument("ConeSpec: half-angle must be in (0, pi]");
        cos_half_ = std::cos(half_angle_);
    }

    const Vec3d& axis() const { return axis_; }
    double half_angle() const { return half_angle_; }

    bool contains(const Vec3d& p) const {
        double n = p.norm();
        if (n == 0.0) return true;
        return p.dot(axis_) >= cos_half_ * n;
    }

    /// Distance from an interior point to the cone boundary, clamped for
    /// reentrant cones; used to scale adaptive steps.
    double boundary_distance(const Vec3d& p) const {
        double n = p.norm();
        if (n == 0.0) return 0.0;
        double c = std::clamp(p.dot(axis_) / n, -1.0, 1.0);
        double phi = std::acos(c);
        double gap = half_angle_ - phi;
        if (gap <= 0.0) return 0.0;
        return n * std::sin(std::min(gap, std::numbers::pi / 2.0));
    }

private:
    Vec3d axis_;
    double half_angle_;
    double cos_half_;
};

}  // namespace niwalk
