#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "niwalk/errors.hpp"
#include "niwalk/geometry.hpp"
#include "niwalk/rng.hpp"

namespace niwalk {

/// Packed lattice step codes, 3 bits each (21 per word).
class StepCodes {
public:
    void push_back(int code) {
        std::size_t word = n_ / 21, slot = n_ % 21;
        if (slot == 0) words_.push_back(0);
        words_[word] |= static_cast<std::uint64_t>(code) << (3 * slot);
        ++n_;
    }

    int operator[](std::uint64_t i) const {
        return static_cast<int>((words_[i / 21] >> (3 * (i % 21))) & 7u);
    }

    std::uint64_t size() const { return n_; }
    std::span<const std::uint64_t> words() const { return words_; }

    static StepCodes from_words(std::span<const std::uint64_t> words, std::uint64_t n) {
        StepCodes s;
        s.words_.assign(words.begin(), words.end());
        s.n_ = n;
        return s;
    }

private:
    std::vector<std::uint64_t> words_;
    std::uint64_t n_ = 0;
};

/// One shell extension (or the initial segment): an immutable delta-encoded
/// lattice path. Shared between resampled particles, so clones cost nothing.
struct Segment {
    Vec3 start = Vec3::Zero();
    StepCodes steps;
    Vec3 end = Vec3::Zero();
};

/// A lattice curve from the origin to the current outer shell, stored as a
/// chain of shared segments. The site at index 0 is the origin; index i >= 1
/// is the position after step i.
class Curve {
public:
    std::uint64_t length() const { return length_; }  // number of steps
    const Vec3& endpoint() const { return endpoint_; }
    std::span<const std::shared_ptr<const Segment>> segments() const { return segments_; }

    /// crossing_log()[j] = index of the first site at or beyond shell j's
    /// radius; strictly increasing. Extensions stop at first crossing, so the
    /// entry for the newest shell is length().
    std::span<const std::uint64_t> crossing_log() const { return crossing_log_; }

    void append(std::shared_ptr<const Segment> seg) {
        length_ += seg->steps.size();
        endpoint_ = seg->end;
        segments_.push_back(std::move(seg));
        crossing_log_.push_back(length_);
    }

    /// Calls f(index, site) for every site with index in [first, length()],
    /// where index counts steps from the origin (index 0 = origin).
    template <class F>
    void for_each_site_from(std::uint64_t first, F&& f) const {
        std::uint64_t idx = 0;
        if (first == 0) f(std::uint64_t{0}, Vec3(Vec3::Zero()));
        for (const auto& seg : segments_) {
            std::uint64_t n = seg->steps.size();
            if (idx + n < first) {
                idx += n;
                continue;
            }
            Vec3 p = seg->start;
            for (std::uint64_t i = 0; i < n; ++i) {
                int code = seg->steps[i];
                p[code >> 1] += (code & 1) ? 1 : -1;
                ++idx;
                if (idx >= first) f(idx, p);
            }
        }
    }

    template <class F>
    void for_each_site(F&& f) const {
        for_each_site_from(1, std::forward<F>(f));
    }

    /// O(index); test and inspection use only.
    Vec3 site_at(std::uint64_t index) const {
        Vec3 out = Vec3::Zero();
        bool found = index == 0;
        for_each_site_from(index, [&](std::uint64_t i, const Vec3& p) {
            if (i == index) {
                out = p;
                found = true;
            }
        });
        if (!found) throw std::out_of_range("Curve::site_at");
        return out;
    }

private:
    std::vector<std::shared_ptr<const Segment>> segments_;
    std::vector<std::uint64_t> crossing_log_;
    std::uint64_t length_ = 0;
    Vec3 endpoint_ = Vec3::Zero();
};

/// Ordered pair of curves with disjoint site sets (except the shared origin).
struct CurvePair {
    Curve a, b;
    int shell = 0;  // outer shell index n; outer radius = shells.radius(n)
    ShellConfig shells{ShellConfig::kDefaultMinBaseRadius};
    bool alive = true;

    double outer_radius() const { return shells.radius(shell); }
};

enum class InitialKind { diametric_lines, given_endpoints, explicit_pair };

/// Initial configuration of a path-space experiment.
struct StartConfig {
    InitialKind kind = InitialKind::diametric_lines;
    double base_radius = 32.0;
    double min_base_radius = ShellConfig::kDefaultMinBaseRadius;
    /// Angular separation (radians) of the two endpoints for
    /// given-endpoints starts; realized on the lattice, so gaps below about
    /// one lattice spacing degenerate to the nearest distinct boundary sites.
    double angular_gap = 0.0;
};

/// Deterministic lattice site near radius R in direction (cos phi, sin phi, 0),
/// at or just beyond R.
Vec3 boundary_site(double radius, double phi);

CurvePair initial_pair_diametric(const ShellConfig& shells);
CurvePair initial_pair_endpoints(const ShellConfig& shells, const Vec3& w1, const Vec3& w2);
CurvePair initial_pair_explicit(const ShellConfig& shells,
                                std::span<const Vec3> sites_a,
                                std::span<const Vec3> sites_b);
CurvePair build_initial_pair(const StartConfig& config);

/// Attaches one fresh lattice walk per curve out to shell n+1 and re-checks
/// disjointness incrementally. Rescaling is implicit: coordinates stay in
/// lattice units and every geometric predicate divides by the current outer
/// radius. Throws invalid_state_error if the pair is already dead.
CurvePair extend_one_shell(const CurvePair& pair, RandomStream& stream_a,
                           RandomStream& stream_b);

/// Separation event on the rescaled annulus [e^-1/2, 1]: curve a must hug the
/// +x half-space (with margin e^-1/8 past each first crossing and e^-1/16 at
/// the crossing itself), curve b the -x half-space. margin_scale multiplies
/// both margin exponents (1 = the canonical event; larger = looser margins,
/// a diagnostic for positivity at scales where the canonical event is rare).
bool sep_test(const CurvePair& pair, double margin_scale = 1.0);

/// Forward cursor over the sites of a curve, starting at a given step index.
class SiteCursor {
public:
    SiteCursor(const Curve& curve, std::uint64_t start);

    bool at_end() const { return index_ > curve_->length(); }
    std::uint64_t index() const { return index_; }
    const Vec3& site() const { return site_; }
    void next();

private:
    const Curve* curve_;
    std::size_t seg_ = 0;
    std::uint64_t in_seg_ = 0;
    std::uint64_t index_ = 0;
    Vec3 site_ = Vec3::Zero();
};

/// Lazy view of the depth-k tails: the suffix of each curve from its first
/// visit to rescaled radius e^-k. Valid while the pair it was taken from is.
struct PairTailView {
    const CurvePair* pair = nullptr;
    std::uint64_t start_a = 0, start_b = 0;
    int depth = 0;

    std::uint64_t length_a() const { return pair->a.length() - start_a + 1; }
    std::uint64_t length_b() const { return pair->b.length() - start_b + 1; }

    template <class F>
    void for_each_a(F&& f) const {
        pair->a.for_each_site_from(start_a, std::forward<F>(f));
    }
    template <class F>
    void for_each_b(F&& f) const {
        pair->b.for_each_site_from(start_b, std::forward<F>(f));
    }
};

struct PairTail {
    std::vector<Vec3> a, b;
    int depth = 0;
};

/// Suffix of each curve from its first visit to rescaled radius e^-k.
/// Depths below two lattice units raise resolution_error.
PairTailView pi_k(const CurvePair& pair, int k);

PairTail materialize(const PairTailView& view);

/// True iff the depth-k tails of the two pairs are identical site sequences.
bool eq_k(const CurvePair& p1, const CurvePair& p2, int k);

/// Versioned compact binary record (length-prefixed delta-encoded steps).
std::vector<std::uint8_t> serialize_pair(const CurvePair& pair);
CurvePair deserialize_pair(std::span<const std::uint8_t> bytes);

/// JSON form for inspection; round-trips through parse_pair_json.
std::string pair_to_json(const CurvePair& pair);
CurvePair pair_from_json(const std::string& text);

struct DirectSurvival {
    std::uint64_t trials = 0;
    /// alive_after[j] = trials still alive after extending to shell j+1.
    std::vector<std::uint64_t> alive_after;
    /// Conditional SEP frequency among survivors at each shell (optional).
    std::vector<std::uint64_t> sep_counts;
};

/// Direct (rejection) Monte Carlo over fresh pairs: extends each trial shell
/// by shell until death or n_shells. The per-shell survivor counts are the
/// unnormalized q-hat estimates.
DirectSurvival direct_pathspace_survival(const StartConfig& config, int n_shells,
                                         std::uint64_t trials, std::uint64_t master_seed,
                                         unsigned threads, bool eval_sep = false);

}  // namespace niwalk
