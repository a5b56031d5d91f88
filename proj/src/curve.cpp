#include "niwalk/curve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <mutex>

#include <nlohmann/json.hpp>

#include "niwalk/parallel.hpp"
#include "niwalk/site_set.hpp"

namespace niwalk {

namespace {

const std::uint64_t kOriginKey = pack_site(Vec3::Zero());

int code_for_step(const Vec3& d) {
    for (int axis = 0; axis < 3; ++axis) {
        if (d[axis] == 1 && d[(axis + 1) % 3] == 0 && d[(axis + 2) % 3] == 0)
            return axis * 2 + 1;
        if (d[axis] == -1 && d[(axis + 1) % 3] == 0 && d[(axis + 2) % 3] == 0)
            return axis * 2;
    }
    throw invalid_state_error("explicit curve: consecutive sites must differ by a unit step");
}

std::shared_ptr<const Segment> segment_from_sites(std::span<const Vec3> sites) {
    auto seg = std::make_shared<Segment>();
    seg->start = sites.front();
    Vec3 p = sites.front();
    for (std::size_t i = 1; i < sites.size(); ++i) {
        Vec3 d = sites[i] - p;
        seg->steps.push_back(code_for_step(d));
        p = sites[i];
    }
    seg->end = p;
    return seg;
}

/// Greedy monotone lattice geodesic from the origin toward w, truncated at
/// its first crossing of `radius`.
std::vector<Vec3> geodesic_sites(const Vec3& w, double radius) {
    std::vector<Vec3> sites{Vec3::Zero()};
    Vec3 p = Vec3::Zero();
    double r2 = radius * radius;
    while (static_cast<double>(p.squaredNorm()) < r2) {
        Vec3 rem = w - p;
        if (rem.isZero())
            throw invalid_state_error("geodesic: endpoint lies strictly inside the shell");
        int best = 0;
        for (int axis = 1; axis < 3; ++axis)
            if (std::llabs(rem[axis]) > std::llabs(rem[best])) best = axis;
        p[best] += rem[best] > 0 ? 1 : -1;
        sites.push_back(p);
    }
    return sites;
}

void check_disjoint(const Curve& a, const Curve& b) {
    SiteSet seen(1 << 12);
    seen.reserve(a.length());
    a.for_each_site([&](std::uint64_t, const Vec3& p) {
        std::uint64_t k = pack_site(p);
        if (k != kOriginKey) seen.insert(k);
    });
    bool hit = false;
    b.for_each_site([&](std::uint64_t, const Vec3& p) {
        std::uint64_t k = pack_site(p);
        if (k != kOriginKey && seen.contains(k)) hit = true;
    });
    if (hit)
        throw invalid_state_error("initial pair: curves share a site other than the origin");
}

Curve curve_from_sites(std::span<const Vec3> sites, double radius) {
    if (sites.size() < 2 || sites.front() != Vec3(Vec3::Zero()))
        throw invalid_state_error("curve: must start at the origin and take at least one step");
    for (const auto& p : sites)
        if (!site_in_range(p))
            throw coordinate_overflow_error("curve site outside packable range");
    double r2 = radius * radius;
    for (std::size_t i = 1; i + 1 < sites.size(); ++i)
        if (static_cast<double>(sites[i].squaredNorm()) >= r2)
            throw invalid_state_error("curve: interior site at or beyond the outer radius");
    if (static_cast<double>(sites.back().squaredNorm()) < r2)
        throw invalid_state_error("curve: endpoint strictly inside the outer radius");
    Curve c;
    c.append(segment_from_sites(sites));
    return c;
}

}  // namespace

Vec3 boundary_site(double radius, double phi) {
    Vec3d dir{std::cos(phi), std::sin(phi), 0.0};
    for (double r = radius;; r += 0.5) {
        Vec3 c{static_cast<std::int64_t>(std::llround(dir.x() * r)),
               static_cast<std::int64_t>(std::llround(dir.y() * r)), 0};
        if (static_cast<double>(c.squaredNorm()) >= radius * radius) return c;
    }
}

CurvePair initial_pair_diametric(const ShellConfig& shells) {
    auto line = [&](int code) {
        auto seg = std::make_shared<Segment>();
        auto steps = static_cast<std::int64_t>(std::ceil(shells.base_radius()));
        Vec3 p = Vec3::Zero();
        for (std::int64_t i = 0; i < steps; ++i) {
            seg->steps.push_back(code);
            p[0] += (code & 1) ? 1 : -1;
        }
        seg->end = p;
        Curve c;
        c.append(std::move(seg));
        return c;
    };
    CurvePair pair;
    pair.a = line(1);  // 0 -> (+R0, 0, 0)
    pair.b = line(0);  // 0 -> (-R0, 0, 0)
    pair.shell = 0;
    pair.shells = shells;
    pair.alive = true;
    return pair;
}

CurvePair initial_pair_endpoints(const ShellConfig& shells, const Vec3& w1, const Vec3& w2) {
    CurvePair pair;
    pair.shells = shells;
    pair.shell = 0;
    auto sa = geodesic_sites(w1, shells.base_radius());
    auto sb = geodesic_sites(w2, shells.base_radius());
    pair.a = curve_from_sites(sa, shells.base_radius());
    pair.b = curve_from_sites(sb, shells.base_radius());
    check_disjoint(pair.a, pair.b);
    pair.alive = true;
    return pair;
}

CurvePair initial_pair_explicit(const ShellConfig& shells,
                                std::span<const Vec3> sites_a,
                                std::span<const Vec3> sites_b) {
    CurvePair pair;
    pair.shells = shells;
    pair.shell = 0;
    pair.a = curve_from_sites(sites_a, shells.base_radius());
    pair.b = curve_from_sites(sites_b, shells.base_radius());
    check_disjoint(pair.a, pair.b);
    pair.alive = true;
    return pair;
}

namespace {

/// Disjoint-by-construction pair for endpoints too close for plain
/// geodesics: each curve leaves the origin transversally (z = +1 / z = -1)
/// and runs a staircase in its own plane to the shell near the target angle.
CurvePair split_plane_pair(const ShellConfig& shells, const Vec3& w1, const Vec3& w2) {
    auto plane_path = [&](const Vec3& w, std::int64_t z) {
        std::vector<Vec3> sites{Vec3::Zero(), Vec3{0, 0, z}};
        Vec3 p{0, 0, z};
        double r2 = shells.base_radius() * shells.base_radius();
        while (static_cast<double>(p.squaredNorm()) < r2) {
            Vec3 rem = w - p;
            rem.z() = 0;
            if (rem.x() == 0 && rem.y() == 0)
                throw invalid_state_error("split-plane path: target inside the shell");
            int axis = std::llabs(rem.x()) >= std::llabs(rem.y()) ? 0 : 1;
            p[axis] += rem[axis] > 0 ? 1 : -1;
            sites.push_back(p);
        }
        return sites;
    };
    auto sa = plane_path(w1, 1);
    auto sb = plane_path(w2, -1);
    return initial_pair_explicit(shells, sa, sb);
}

}  // namespace

CurvePair build_initial_pair(const StartConfig& config) {
    ShellConfig shells(config.base_radius, config.min_base_radius);
    if (config.kind == InitialKind::diametric_lines) return initial_pair_diametric(shells);
    if (config.kind != InitialKind::given_endpoints)
        throw std::invalid_argument("build_initial_pair: explicit pairs need explicit sites");
    double half = config.angular_gap / 2.0;
    Vec3 w1 = boundary_site(config.base_radius, half);
    Vec3 w2 = boundary_site(config.base_radius, -half);
    // lattice floor: gaps under one lattice spacing collapse to the nearest
    // distinct boundary site
    double nudge = 0.75 / config.base_radius;
    for (int k = 1; w2 == w1 && k < 64; ++k)
        w2 = boundary_site(config.base_radius, -half - k * nudge);
    try {
        return initial_pair_endpoints(shells, w1, w2);
    } catch (const invalid_state_error&) {
        // geodesics to near-coincident endpoints overlap; realize the
        // adversarial configuration with transversally separated planes
        return split_plane_pair(shells, w1, w2);
    }
}

namespace {

std::shared_ptr<const Segment> walk_extension(const Vec3& start, double target_radius,
                                              RandomStream& stream) {
    auto seg = std::make_shared<Segment>();
    seg->start = start;
    Vec3 p = start;
    double r2 = target_radius * target_radius;
    while (static_cast<double>(p.squaredNorm()) < r2) {
        int code = stream.step6();
        p[code >> 1] += (code & 1) ? 1 : -1;
        if (!site_in_range(p))
            throw coordinate_overflow_error("shell extension left the packable range");
        seg->steps.push_back(code);
    }
    seg->end = p;
    return seg;
}

// The site tables outgrow the cache at deep shells, so the scan loops below
// run a second decode cursor kLookahead steps ahead that only issues bucket
// prefetches; decoding is a few cycles while a cold probe is a DRAM access.
constexpr std::uint64_t kLookahead = 24;

bool segment_hits(const Segment& seg, const SiteSet& sites) {
    const std::uint64_t n = seg.steps.size();
    Vec3 p = seg.start, q = seg.start;
    std::uint64_t ahead = 0;
    for (; ahead < std::min(kLookahead, n); ++ahead) {
        int code = seg.steps[ahead];
        q[code >> 1] += (code & 1) ? 1 : -1;
        sites.prefetch(pack_site(q));
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        if (ahead < n) {
            int code = seg.steps[ahead++];
            q[code >> 1] += (code & 1) ? 1 : -1;
            sites.prefetch(pack_site(q));
        }
        int code = seg.steps[i];
        p[code >> 1] += (code & 1) ? 1 : -1;
        std::uint64_t k = pack_site(p);
        if (k != kOriginKey && sites.contains(k)) return true;
    }
    return false;
}

void insert_segment_sites(const Segment& seg, SiteSet& out) {
    const std::uint64_t n = seg.steps.size();
    out.reserve(out.size() + n);
    Vec3 p = seg.start, q = seg.start;
    std::uint64_t ahead = 0;
    for (; ahead < std::min(kLookahead, n); ++ahead) {
        int code = seg.steps[ahead];
        q[code >> 1] += (code & 1) ? 1 : -1;
        out.prefetch(pack_site(q));
    }
    for (std::uint64_t i = 0; i < n; ++i) {
        if (ahead < n) {
            int code = seg.steps[ahead++];
            q[code >> 1] += (code & 1) ? 1 : -1;
            out.prefetch(pack_site(q));
        }
        int code = seg.steps[i];
        p[code >> 1] += (code & 1) ? 1 : -1;
        std::uint64_t k = pack_site(p);
        if (k != kOriginKey) out.insert(k);
    }
}

void insert_curve_sites(const Curve& c, SiteSet& out) {
    out.reserve(out.size() + c.length());
    for (const auto& seg : c.segments()) insert_segment_sites(*seg, out);
}

}  // namespace

CurvePair extend_one_shell(const CurvePair& pair, RandomStream& stream_a,
                           RandomStream& stream_b) {
    if (!pair.alive)
        throw invalid_state_error("extend_one_shell: pair is dead");
    double target = pair.shells.radius(pair.shell + 1);
    auto ext_a = walk_extension(pair.a.endpoint(), target, stream_a);
    auto ext_b = walk_extension(pair.b.endpoint(), target, stream_b);

    // new a against all of b (old and new); then new b against old a.
    // new-a x new-b collisions are covered by the first test.
    SiteSet b_all = SiteSet::sized_for(pair.b.length() + ext_b->steps.size());
    insert_curve_sites(pair.b, b_all);
    insert_segment_sites(*ext_b, b_all);
    bool dead = segment_hits(*ext_a, b_all);
    if (!dead) {
        SiteSet a_old = SiteSet::sized_for(pair.a.length());
        insert_curve_sites(pair.a, a_old);
        dead = segment_hits(*ext_b, a_old);
    }

    CurvePair out = pair;
    out.a.append(std::move(ext_a));
    out.b.append(std::move(ext_b));
    out.shell = pair.shell + 1;
    out.alive = !dead;
    return out;
}

namespace {

/// One curve's half of SEP. sign = +1 checks the +x half-spaces, -1 the -x.
/// All comparisons run on squared quantities; x must be positive wherever a
/// margin applies, so squaring preserves the order.
bool curve_separated(const Curve& c, int shell, double outer_radius, int sign,
                     double margin_scale) {
    const double rin2 = outer_radius * outer_radius * std::exp(-1.0);
    const double r_out2 = outer_radius * outer_radius;
    const double body2 = std::exp(-0.25 * margin_scale);    // (e^-s/8)^2
    const double entry2 = std::exp(-0.125 * margin_scale);  // (e^-s/16)^2
    std::uint64_t start = shell >= 1 ? c.crossing_log()[static_cast<std::size_t>(shell - 1)] : 1;
    double runmax2 = 0.0;
    bool ok = true;
    c.for_each_site_from(start, [&](std::uint64_t, const Vec3& p) {
        if (!ok) return;
        double r2 = static_cast<double>(p.squaredNorm());
        double x = static_cast<double>(sign * p.x());
        double x2 = x * x;
        if (r2 > runmax2) {
            runmax2 = r2;
            // first crossing of each new radius in the annulus: the entry
            // point itself must sit within angle arccos(e^-1/16) of the axis
            if (r2 >= rin2 && (x < 0.0 || x2 < entry2 * std::min(r2, r_out2))) ok = false;
        }
        if (runmax2 >= rin2) {
            double rho2 = std::min(runmax2, r_out2);
            if (x < 0.0 || x2 < body2 * rho2) ok = false;
        }
    });
    return ok;
}

}  // namespace

bool sep_test(const CurvePair& pair, double margin_scale) {
    if (!(margin_scale > 0.0))
        throw std::invalid_argument("sep_test: margin_scale must be positive");
    double R = pair.outer_radius();
    if (R * std::exp(-0.5) < 2.0)
        throw invalid_state_error("sep_test: annulus below lattice resolution");
    return curve_separated(pair.a, pair.shell, R, +1, margin_scale) &&
           curve_separated(pair.b, pair.shell, R, -1, margin_scale);
}

SiteCursor::SiteCursor(const Curve& curve, std::uint64_t start) : curve_(&curve) {
    if (start > curve.length() + 1)
        throw std::out_of_range("SiteCursor: start beyond curve end");
    // skip whole segments using the cumulative lengths in the crossing log
    auto segs = curve.segments();
    std::uint64_t base = 0;
    while (seg_ < segs.size() && curve.crossing_log()[seg_] < start)
        base = curve.crossing_log()[seg_++];
    index_ = base;
    if (seg_ < segs.size()) site_ = segs[seg_]->start;
    while (index_ < start && !at_end()) next();
}

void SiteCursor::next() {
    auto segs = curve_->segments();
    while (seg_ < segs.size() && in_seg_ >= segs[seg_]->steps.size()) {
        ++seg_;
        in_seg_ = 0;
        if (seg_ < segs.size()) site_ = segs[seg_]->start;
    }
    if (seg_ >= segs.size()) {
        index_ = curve_->length() + 1;  // end marker
        return;
    }
    int code = segs[seg_]->steps[in_seg_++];
    site_[code >> 1] += (code & 1) ? 1 : -1;
    ++index_;
}

namespace {

std::uint64_t tail_start(const Curve& c, int shell, int k, double depth_radius) {
    if (k <= shell) return c.crossing_log()[static_cast<std::size_t>(shell - k)];
    double r2 = depth_radius * depth_radius;
    std::uint64_t found = 0;
    c.for_each_site([&](std::uint64_t i, const Vec3& p) {
        if (found == 0 && static_cast<double>(p.squaredNorm()) >= r2) found = i;
    });
    return found;  // curves reach their outer shell, so found >= 1
}

}  // namespace

PairTailView pi_k(const CurvePair& pair, int k) {
    if (k < 0) throw std::invalid_argument("pi_k: k must be >= 0");
    double depth_radius = pair.outer_radius() * std::exp(-static_cast<double>(k));
    if (depth_radius < 2.0)
        throw resolution_error("pi_k: depth below lattice resolution (e^-k R < 2)");
    PairTailView v;
    v.pair = &pair;
    v.depth = k;
    v.start_a = tail_start(pair.a, pair.shell, k, depth_radius);
    v.start_b = tail_start(pair.b, pair.shell, k, depth_radius);
    return v;
}

PairTail materialize(const PairTailView& view) {
    PairTail t;
    t.depth = view.depth;
    t.a.reserve(view.length_a());
    t.b.reserve(view.length_b());
    view.for_each_a([&](std::uint64_t, const Vec3& p) { t.a.push_back(p); });
    view.for_each_b([&](std::uint64_t, const Vec3& p) { t.b.push_back(p); });
    return t;
}

namespace {

bool tails_equal(const Curve& c1, std::uint64_t s1, const Curve& c2, std::uint64_t s2) {
    if (c1.length() - s1 != c2.length() - s2) return false;
    SiteCursor a(c1, s1), b(c2, s2);
    while (!a.at_end() && !b.at_end()) {
        if (a.site() != b.site()) return false;
        a.next();
        b.next();
    }
    return a.at_end() && b.at_end();
}

}  // namespace

bool eq_k(const CurvePair& p1, const CurvePair& p2, int k) {
    auto v1 = pi_k(p1, k);
    auto v2 = pi_k(p2, k);
    return tails_equal(p1.a, v1.start_a, p2.a, v2.start_a) &&
           tails_equal(p1.b, v1.start_b, p2.b, v2.start_b);
}

// ---------------------------------------------------------------------------
// serialization

namespace {

constexpr std::uint32_t kBinaryMagic = 0x3150574eu;  // "NWP1"

template <class T>
void put(std::vector<std::uint8_t>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> bytes, std::size_t& off) {
    if (off + sizeof(T) > bytes.size()) throw data_error("curve record truncated");
    T v;
    std::memcpy(&v, bytes.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

void put_curve(std::vector<std::uint8_t>& out, const Curve& c) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.segments().size()));
    for (const auto& seg : c.segments()) {
        for (int i = 0; i < 3; ++i) put<std::int64_t>(out, seg->start[i]);
        put<std::uint64_t>(out, seg->steps.size());
        for (std::uint64_t w : seg->steps.words()) put<std::uint64_t>(out, w);
    }
}

Curve get_curve(std::span<const std::uint8_t> bytes, std::size_t& off) {
    Curve c;
    auto n_segs = get<std::uint32_t>(bytes, off);
    for (std::uint32_t s = 0; s < n_segs; ++s) {
        auto seg = std::make_shared<Segment>();
        for (int i = 0; i < 3; ++i) seg->start[i] = get<std::int64_t>(bytes, off);
        auto n_steps = get<std::uint64_t>(bytes, off);
        std::uint64_t n_words = (n_steps + 20) / 21;
        std::vector<std::uint64_t> words(n_words);
        for (auto& w : words) w = get<std::uint64_t>(bytes, off);
        seg->steps = StepCodes::from_words(words, n_steps);
        Vec3 p = seg->start;
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            int code = seg->steps[i];
            if (code > 5) throw data_error("curve record: invalid step code");
            p[code >> 1] += (code & 1) ? 1 : -1;
        }
        seg->end = p;
        c.append(std::move(seg));
    }
    return c;
}

}  // namespace

std::vector<std::uint8_t> serialize_pair(const CurvePair& pair) {
    std::vector<std::uint8_t> out;
    put<std::uint32_t>(out, kBinaryMagic);
    put<std::uint32_t>(out, 1);  // format version
    put<double>(out, pair.shells.base_radius());
    put<double>(out, pair.shells.min_base_radius());
    put<std::int32_t>(out, pair.shell);
    put<std::uint8_t>(out, pair.alive ? 1 : 0);
    put_curve(out, pair.a);
    put_curve(out, pair.b);
    return out;
}

CurvePair deserialize_pair(std::span<const std::uint8_t> bytes) {
    std::size_t off = 0;
    if (get<std::uint32_t>(bytes, off) != kBinaryMagic)
        throw data_error("curve record: bad magic");
    if (get<std::uint32_t>(bytes, off) != 1)
        throw data_error("curve record: unsupported version");
    double base = get<double>(bytes, off);
    double min_base = get<double>(bytes, off);
    CurvePair pair;
    pair.shells = ShellConfig(base, min_base);
    pair.shell = get<std::int32_t>(bytes, off);
    pair.alive = get<std::uint8_t>(bytes, off) != 0;
    pair.a = get_curve(bytes, off);
    pair.b = get_curve(bytes, off);
    if (off != bytes.size()) throw data_error("curve record: trailing bytes");
    return pair;
}

std::string pair_to_json(const CurvePair& pair) {
    nlohmann::ordered_json j;
    j["format"] = "niwalk-curvepair";
    j["version"] = 1;
    j["base_radius"] = pair.shells.base_radius();
    j["min_base_radius"] = pair.shells.min_base_radius();
    j["shell"] = pair.shell;
    j["alive"] = pair.alive;
    auto curve_json = [](const Curve& c) {
        nlohmann::ordered_json segs = nlohmann::ordered_json::array();
        for (const auto& seg : c.segments()) {
            std::string codes;
            codes.reserve(seg->steps.size());
            for (std::uint64_t i = 0; i < seg->steps.size(); ++i)
                codes.push_back(static_cast<char>('0' + seg->steps[i]));
            segs.push_back({{"start", {seg->start.x(), seg->start.y(), seg->start.z()}},
                            {"steps", std::move(codes)}});
        }
        return segs;
    };
    j["curve_a"] = curve_json(pair.a);
    j["curve_b"] = curve_json(pair.b);
    return j.dump(2);
}

CurvePair pair_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("curve json: ") + e.what());
    }
    if (j.value("format", "") != "niwalk-curvepair" || j.value("version", 0) != 1)
        throw data_error("curve json: wrong format or version");
    CurvePair pair;
    pair.shells = ShellConfig(j.at("base_radius").get<double>(),
                              j.at("min_base_radius").get<double>());
    pair.shell = j.at("shell").get<int>();
    pair.alive = j.at("alive").get<bool>();
    auto parse_curve = [](const nlohmann::json& segs) {
        Curve c;
        for (const auto& sj : segs) {
            auto seg = std::make_shared<Segment>();
            auto st = sj.at("start");
            seg->start = Vec3{st.at(0).get<std::int64_t>(), st.at(1).get<std::int64_t>(),
                              st.at(2).get<std::int64_t>()};
            Vec3 p = seg->start;
            for (char ch : sj.at("steps").get<std::string>()) {
                if (ch < '0' || ch > '5') throw data_error("curve json: invalid step code");
                int code = ch - '0';
                seg->steps.push_back(code);
                p[code >> 1] += (code & 1) ? 1 : -1;
            }
            seg->end = p;
            c.append(std::move(seg));
        }
        return c;
    };
    pair.a = parse_curve(j.at("curve_a"));
    pair.b = parse_curve(j.at("curve_b"));
    return pair;
}

DirectSurvival direct_pathspace_survival(const StartConfig& config, int n_shells,
                                         std::uint64_t trials, std::uint64_t master_seed,
                                         unsigned threads, bool eval_sep) {
    if (n_shells < 1 || trials == 0)
        throw std::invalid_argument("direct_pathspace_survival: need shells >= 1, trials >= 1");
    const CurvePair initial = build_initial_pair(config);

    DirectSurvival out;
    out.trials = trials;
    out.alive_after.assign(static_cast<std::size_t>(n_shells), 0);
    out.sep_counts.assign(static_cast<std::size_t>(n_shells), 0);

    std::mutex merge;
    constexpr std::uint64_t kChunk = 256;
    std::uint64_t n_chunks = (trials + kChunk - 1) / kChunk;
    parallel_for_index(0, n_chunks, threads, [&](std::uint64_t chunk) {
        std::vector<std::uint64_t> alive(static_cast<std::size_t>(n_shells), 0);
        std::vector<std::uint64_t> sep(static_cast<std::size_t>(n_shells), 0);
        std::uint64_t lo = chunk * kChunk, hi = std::min(trials, lo + kChunk);
        for (std::uint64_t trial = lo; trial < hi; ++trial) {
            CurvePair pair = initial;
            RandomStream sa({master_seed, stream_id::pathspace_trial(trial, 0)});
            RandomStream sb({master_seed, stream_id::pathspace_trial(trial, 1)});
            for (int j = 0; j < n_shells; ++j) {
                pair = extend_one_shell(pair, sa, sb);
                if (!pair.alive) break;
                ++alive[static_cast<std::size_t>(j)];
                if (eval_sep && sep_test(pair)) ++sep[static_cast<std::size_t>(j)];
            }
        }
        std::lock_guard<std::mutex> lock(merge);
        for (int j = 0; j < n_shells; ++j) {
            out.alive_after[static_cast<std::size_t>(j)] += alive[static_cast<std::size_t>(j)];
            out.sep_counts[static_cast<std::size_t>(j)] += sep[static_cast<std::size_t>(j)];
        }
    });
    return out;
}

}  // namespace niwalk
