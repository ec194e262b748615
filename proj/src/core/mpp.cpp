#include "mpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "capacity.hpp"

namespace perfhom {

bool operator==(const MppPoint& a, const MppPoint& b) {
    return a.z == b.z && a.shape == b.shape && a.rho == b.rho && a.cap == b.cap;
}

MarkLaw MarkLaw::fixed(HoleShape shape) { return MarkLaw{{MarkAtom{std::move(shape), 1.0}}}; }

bool operator==(const MarkAtom& a, const MarkAtom& b) {
    return a.shape == b.shape && a.weight == b.weight;
}

bool operator==(const MarkLaw& a, const MarkLaw& b) { return a.atoms == b.atoms; }

const char* generator_kind_name(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::Poisson: return "poisson";
        case GeneratorKind::Lattice: return "lattice";
        case GeneratorKind::PerturbedLattice: return "perturbed_lattice";
        case GeneratorKind::MaternHardcore: return "matern_hardcore";
        case GeneratorKind::Mixture: return "mixture";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_name(const std::string& name) {
    if (name == "poisson") return GeneratorKind::Poisson;
    if (name == "lattice") return GeneratorKind::Lattice;
    if (name == "perturbed_lattice") return GeneratorKind::PerturbedLattice;
    if (name == "matern_hardcore") return GeneratorKind::MaternHardcore;
    if (name == "mixture") return GeneratorKind::Mixture;
    throw ConfigError("unknown generator kind: " + name);
}

GeneratorSpec GeneratorSpec::poisson(double intensity, MarkLaw law) {
    GeneratorSpec s;
    s.kind = GeneratorKind::Poisson;
    s.intensity = intensity;
    s.mark_law = std::move(law);
    return s;
}

GeneratorSpec GeneratorSpec::lattice(double spacing, MarkLaw law) {
    GeneratorSpec s;
    s.kind = GeneratorKind::Lattice;
    s.spacing = spacing;
    s.mark_law = std::move(law);
    return s;
}

GeneratorSpec GeneratorSpec::perturbed_lattice(double spacing, double jitter, MarkLaw law) {
    GeneratorSpec s;
    s.kind = GeneratorKind::PerturbedLattice;
    s.spacing = spacing;
    s.jitter = jitter;
    s.mark_law = std::move(law);
    return s;
}

GeneratorSpec GeneratorSpec::matern_hardcore(double intensity, double hardcore_radius, MarkLaw law) {
    GeneratorSpec s;
    s.kind = GeneratorKind::MaternHardcore;
    s.intensity = intensity;
    s.hardcore_radius = hardcore_radius;
    s.mark_law = std::move(law);
    return s;
}

GeneratorSpec GeneratorSpec::mixture(GeneratorSpec a, GeneratorSpec b, double p) {
    GeneratorSpec s;
    s.kind = GeneratorKind::Mixture;
    s.mix_p = p;
    s.mix_a = std::make_shared<GeneratorSpec>(std::move(a));
    s.mix_b = std::make_shared<GeneratorSpec>(std::move(b));
    return s;
}

bool operator==(const GeneratorSpec& a, const GeneratorSpec& b) {
    if (a.kind != b.kind || a.intensity != b.intensity || a.spacing != b.spacing ||
        a.jitter != b.jitter || a.hardcore_radius != b.hardcore_radius || a.mix_p != b.mix_p ||
        !(a.mark_law == b.mark_law))
        return false;
    const bool ha = static_cast<bool>(a.mix_a), hb = static_cast<bool>(b.mix_a);
    const bool ha2 = static_cast<bool>(a.mix_b), hb2 = static_cast<bool>(b.mix_b);
    if (ha != hb || ha2 != hb2) return false;
    if (ha && !(*a.mix_a == *b.mix_a)) return false;
    if (ha2 && !(*a.mix_b == *b.mix_b)) return false;
    return true;
}

namespace {

void validate_mark_law(const MarkLaw& law) {
    if (law.atoms.empty()) throw ConfigError("mark law needs at least one shape");
    double total = 0.0;
    for (const MarkAtom& a : law.atoms) {
        if (!(a.weight > 0.0)) throw ConfigError("mark weights must be positive");
        try {
            validate_shape(a.shape);
        } catch (const ShapeError& e) {
            throw ConfigError(std::string("invalid mark shape: ") + e.what());
        }
        total += a.weight;
    }
    if (!(total > 0.0)) throw ConfigError("mark weights must have positive total");
}

}  // namespace

void validate_generator(const GeneratorSpec& spec) {
    switch (spec.kind) {
        case GeneratorKind::Poisson:
            if (!(spec.intensity > 0.0)) throw ConfigError("poisson intensity must be positive");
            validate_mark_law(spec.mark_law);
            return;
        case GeneratorKind::Lattice:
            if (!(spec.spacing > 0.0)) throw ConfigError("lattice spacing must be positive");
            validate_mark_law(spec.mark_law);
            return;
        case GeneratorKind::PerturbedLattice:
            if (!(spec.spacing > 0.0)) throw ConfigError("lattice spacing must be positive");
            if (!(spec.jitter >= 0.0)) throw ConfigError("jitter must be nonnegative");
            validate_mark_law(spec.mark_law);
            return;
        case GeneratorKind::MaternHardcore:
            if (!(spec.intensity > 0.0)) throw ConfigError("parent intensity must be positive");
            if (!(spec.hardcore_radius > 0.0)) throw ConfigError("hardcore radius must be positive");
            validate_mark_law(spec.mark_law);
            return;
        case GeneratorKind::Mixture:
            if (!(spec.mix_p >= 0.0 && spec.mix_p <= 1.0))
                throw ConfigError("mixture probability must lie in [0,1]");
            if (!spec.mix_a || !spec.mix_b) throw ConfigError("mixture needs two components");
            validate_generator(*spec.mix_a);
            validate_generator(*spec.mix_b);
            return;
    }
    throw ConfigError("unknown generator kind");
}

bool operator==(const MppRealization& a, const MppRealization& b) {
    return a.window == b.window && a.generator == b.generator && a.seed == b.seed &&
           a.cap_resolution == b.cap_resolution && a.points == b.points;
}

namespace {

// Uniform cell buckets with a wrapping spatial hash. Hash collisions between
// distinct cells only add candidates (every pair is distance-checked), they
// can never hide one: a point's bucket key is a pure function of its cell, and
// lookups enumerate exactly the keys of the 27 surrounding cells.
class CellGrid {
public:
    CellGrid(const std::vector<Vec3>& pts, double cell) : pts_(pts), cell_(cell) {
        buckets_.reserve(pts.size() * 2);
        for (std::size_t i = 0; i < pts.size(); ++i)
            buckets_[key_of(pts[i])].push_back(i);
    }

    // Visits candidate indices near p (including p itself if present);
    // f returns false to stop early. Returns false when stopped.
    template <typename F>
    bool visit(const Vec3& p, F&& f) const {
        const long long cx = coord(p.x), cy = coord(p.y), cz = coord(p.z);
        for (long long dz = -1; dz <= 1; ++dz)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dx = -1; dx <= 1; ++dx) {
                    auto it = buckets_.find(pack(cx + dx, cy + dy, cz + dz));
                    if (it == buckets_.end()) continue;
                    for (std::size_t j : it->second)
                        if (!f(j)) return false;
                }
        return true;
    }

private:
    long long coord(double x) const { return static_cast<long long>(std::floor(x / cell_)); }
    static std::uint64_t pack(long long cx, long long cy, long long cz) {
        return static_cast<std::uint64_t>(cx) * 0x9E3779B97F4A7C15ULL +
               static_cast<std::uint64_t>(cy) * 0xC2B2AE3D27D4EB4FULL +
               static_cast<std::uint64_t>(cz) * 0x165667B19E3779F9ULL;
    }
    std::uint64_t key_of(const Vec3& p) const { return pack(coord(p.x), coord(p.y), coord(p.z)); }

    const std::vector<Vec3>& pts_;
    double cell_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace

std::vector<char> close_flags(const std::vector<Vec3>& pts, double delta) {
    if (!(delta > 0.0)) throw DomainError("thinning radius must be positive");
    std::vector<char> close(pts.size(), 0);
    if (pts.size() < 2) return close;
    const CellGrid grid(pts, delta);
    const double d2 = delta * delta;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        grid.visit(pts[i], [&](std::size_t j) {
            if (j != i && (pts[i] - pts[j]).norm2() < d2) {
                close[i] = 1;
                return false;
            }
            return true;
        });
    }
    return close;
}

std::vector<char> close_flags_naive(const std::vector<Vec3>& pts, double delta) {
    if (!(delta > 0.0)) throw DomainError("thinning radius must be positive");
    std::vector<char> close(pts.size(), 0);
    const double d2 = delta * delta;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i && (pts[i] - pts[j]).norm2() < d2) {
                close[i] = 1;
                break;
            }
    return close;
}

namespace {

constexpr int kMarkCapGridN = 49;  // resolution for grid-estimated mark capacities

// Whole-space capacity of each mark atom; balls are analytic, everything else
// runs through the grid estimator once per atom.
std::vector<double> atom_capacities(const MarkLaw& law, int& cap_resolution) {
    std::vector<double> caps;
    caps.reserve(law.atoms.size());
    for (const MarkAtom& a : law.atoms) {
        if (std::holds_alternative<Ball>(a.shape.body)) {
            caps.push_back(cap_ball(std::get<Ball>(a.shape.body).radius,
                                    std::numeric_limits<double>::infinity(), kDim)
                               .value);
        } else {
            const double R = 8.0 * shape_circumradius(a.shape);
            caps.push_back(cap_whole_space(a.shape, {R}, kMarkCapGridN).value);
            cap_resolution = std::max(cap_resolution, kMarkCapGridN);
        }
    }
    return caps;
}

void draw_marks(const MarkLaw& law, Rng& rng, const std::vector<Vec3>& positions,
                std::vector<MppPoint>& out, int& cap_resolution) {
    const std::vector<double> caps = atom_capacities(law, cap_resolution);
    double total = 0.0;
    for (const MarkAtom& a : law.atoms) total += a.weight;
    out.reserve(out.size() + positions.size());
    for (const Vec3& z : positions) {
        std::size_t pick = 0;
        if (law.atoms.size() > 1) {
            const double u = rng.next_double() * total;
            double acc = 0.0;
            for (std::size_t k = 0; k < law.atoms.size(); ++k) {
                acc += law.atoms[k].weight;
                if (u < acc || k + 1 == law.atoms.size()) {
                    pick = k;
                    break;
                }
            }
        }
        MppPoint p;
        p.z = z;
        p.shape = law.atoms[pick].shape;
        p.rho = shape_circumradius(p.shape);
        p.cap = caps[pick];
        out.push_back(std::move(p));
    }
}

std::vector<Vec3> lattice_positions(const Box3& w, double spacing) {
    std::array<long long, 3> k0{}, k1{};
    for (int a = 0; a < 3; ++a) {
        long long k = static_cast<long long>(std::ceil(w.lo[a] / spacing));
        while ((k - 1) * spacing >= w.lo[a]) --k;  // guard against ceil rounding up past a hit
        while (k * spacing < w.lo[a]) ++k;
        k0[a] = k;
        long long m = k;
        while (m * spacing < w.hi[a]) ++m;
        k1[a] = m;  // one past the last index
    }
    std::vector<Vec3> pts;
    for (long long kx = k0[0]; kx < k1[0]; ++kx)
        for (long long ky = k0[1]; ky < k1[1]; ++ky)
            for (long long kz = k0[2]; kz < k1[2]; ++kz)
                pts.push_back(Vec3{kx * spacing, ky * spacing, kz * spacing});
    return pts;
}

std::vector<Vec3> poisson_positions(const Box3& w, double intensity, Rng& rng) {
    const std::uint64_t count = rng.poisson(intensity * w.volume());
    std::vector<Vec3> pts;
    pts.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double ux = rng.next_double();
        const double uy = rng.next_double();
        const double uz = rng.next_double();
        pts.push_back(Vec3{w.lo.x + ux * (w.hi.x - w.lo.x), w.lo.y + uy * (w.hi.y - w.lo.y),
                           w.lo.z + uz * (w.hi.z - w.lo.z)});
    }
    return pts;
}

void sample_into(const GeneratorSpec& spec, const Box3& window, Rng& rng,
                 std::vector<MppPoint>& out, int& cap_resolution) {
    switch (spec.kind) {
        case GeneratorKind::Poisson: {
            const std::vector<Vec3> pos = poisson_positions(window, spec.intensity, rng);
            draw_marks(spec.mark_law, rng, pos, out, cap_resolution);
            return;
        }
        case GeneratorKind::Lattice: {
            const std::vector<Vec3> pos = lattice_positions(window, spec.spacing);
            draw_marks(spec.mark_law, rng, pos, out, cap_resolution);
            return;
        }
        case GeneratorKind::PerturbedLattice: {
            std::vector<Vec3> pos = lattice_positions(window, spec.spacing);
            for (Vec3& p : pos) {
                p.x += rng.uniform(-spec.jitter, spec.jitter);
                p.y += rng.uniform(-spec.jitter, spec.jitter);
                p.z += rng.uniform(-spec.jitter, spec.jitter);
            }
            draw_marks(spec.mark_law, rng, pos, out, cap_resolution);
            return;
        }
        case GeneratorKind::MaternHardcore: {
            const std::vector<Vec3> parents = poisson_positions(window, spec.intensity, rng);
            const std::vector<char> crowded = close_flags(parents, spec.hardcore_radius);
            std::vector<Vec3> kept;
            for (std::size_t i = 0; i < parents.size(); ++i)
                if (!crowded[i]) kept.push_back(parents[i]);
            draw_marks(spec.mark_law, rng, kept, out, cap_resolution);
            return;
        }
        case GeneratorKind::Mixture: {
            const bool pick_a = rng.bernoulli(spec.mix_p);
            sample_into(pick_a ? *spec.mix_a : *spec.mix_b, window, rng, out, cap_resolution);
            return;
        }
    }
    throw ConfigError("unknown generator kind");
}

}  // namespace

MppRealization sample_process(const GeneratorSpec& spec, const Box3& window, std::uint64_t seed) {
    validate_generator(spec);
    if (!window.valid() || !(window.volume() > 0.0))
        throw ConfigError("sampling window must have positive volume");
    MppRealization real;
    real.window = window;
    real.generator = spec;
    real.seed = seed;
    Rng rng(seed);
    sample_into(spec, window, rng, real.points, real.cap_resolution);
    return real;
}

std::pair<MppRealization, MppRealization> thin(const MppRealization& real, double delta) {
    std::vector<Vec3> pos;
    pos.reserve(real.points.size());
    for (const MppPoint& p : real.points) pos.push_back(p.z);
    const std::vector<char> flags = close_flags(pos, delta);
    MppRealization close, far;
    close.window = far.window = real.window;
    close.generator = far.generator = real.generator;
    close.seed = far.seed = real.seed;
    close.cap_resolution = far.cap_resolution = real.cap_resolution;
    for (std::size_t i = 0; i < real.points.size(); ++i)
        (flags[i] ? close : far).points.push_back(real.points[i]);
    return {std::move(close), std::move(far)};
}

double empirical_average(const MppRealization& real,
                         const std::function<double(double, double)>& weight, const Box3& region) {
    if (!region.valid() || !(region.volume() > 0.0))
        throw DomainError("empirical_average: region must have positive volume");
    double sum = 0.0;
    for (const MppPoint& p : real.points)
        if (region.contains_halfopen(p.z)) sum += weight(p.cap, p.rho);
    return sum / region.volume();
}

double estimate_c0(const MppRealization& real) {
    if (!real.window.valid() || !(real.window.volume() > 0.0))
        throw DomainError("estimate_c0: realization window must have positive volume");
    double sum = 0.0;
    for (const MppPoint& p : real.points)
        if (real.window.contains_halfopen(p.z)) sum += p.cap;
    return sum / real.window.volume();
}

namespace {

// All physical distances in the decomposition are derived from unscaled ones
// as fl(eps * |z - z'|), so membership tests and the d_z minima see bitwise
// consistent values and the output invariants hold exactly in floating point.
double scaled_dist(double eps, const Vec3& a, const Vec3& b) { return eps * (a - b).norm(); }

}  // namespace

GoodBadDecomposition good_bad_decompose(const MppRealization& real, double epsilon, double alpha,
                                        double M) {
    const double dexp = static_cast<double>(kDim) / (kDim - 2);
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw DomainError("good_bad_decompose: epsilon must lie in ]0,1]");
    if (!(alpha > 0.0 && alpha < dexp))
        throw DomainError("good_bad_decompose: alpha must lie in ]0, d/(d-2)[");
    if (!(M > 1.0)) throw DomainError("good_bad_decompose: M must exceed 1");

    const std::size_t n = real.points.size();
    const double s3 = epsilon * epsilon * epsilon;  // hole scale eps^{d/(d-2)} at d = 3

    GoodBadDecomposition dec;
    dec.epsilon = epsilon;
    dec.alpha = alpha;
    dec.M = M;

    std::vector<char> inw(n, 0);
    double max_rho = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (real.window.contains_halfopen(real.points[i].z)) {
            inw[i] = 1;
            dec.in_window.push_back(i);
            max_rho = std::max(max_rho, real.points[i].rho);
        }
    }

    dec.r_eps = std::max(std::min(std::cbrt(s3 * max_rho), 1.0), std::pow(epsilon, alpha));
    dec.eta_eps = epsilon * dec.r_eps;
    const double eta = dec.eta_eps;

    // big_r = diameter bound 2 eps^3 rho of the safety ball around each hole;
    // the doubling is exact, keeping the J membership test and the d_z lower
    // bound on the same float.
    std::vector<double> big_r(n);
    for (std::size_t i = 0; i < n; ++i) big_r[i] = 2.0 * (s3 * real.points[i].rho);

    std::vector<char> in_J(n, 0), in_K(n, 0), in_T(n, 0);
    for (std::size_t i : dec.in_window)
        if (big_r[i] >= eta) {
            in_J[i] = 1;
            dec.J_b.push_back(i);
        }

    std::vector<Vec3> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = real.points[i].z;
    const std::vector<char> crowded =
        n > 0 ? close_flags(pos, 2.0 * dec.r_eps) : std::vector<char>();
    for (std::size_t i : dec.in_window)
        if (!in_J[i] && crowded[i]) {
            in_K[i] = 1;
            dec.K_b.push_back(i);
        }

    for (std::size_t i : dec.in_window) {
        if (in_J[i] || in_K[i]) continue;
        for (std::size_t j : dec.J_b) {
            if (scaled_dist(epsilon, pos[i], pos[j]) - big_r[j] < eta) {
                in_T[i] = 1;
                dec.I_tilde_b.push_back(i);
                break;
            }
        }
    }

    for (std::size_t i : dec.in_window) {
        if (in_J[i] || in_K[i] || in_T[i])
            dec.I_b.push_back(i);
        else
            dec.I_g.push_back(i);
    }

    // d_z = min(eps, half the scaled nearest-neighbor distance, distance to the
    // bad safety balls). Candidates beyond 2 in unscaled coordinates cannot
    // lower the first two terms below the eps cap, so one radius-2 grid pass
    // suffices.
    const CellGrid nn_grid(pos, 2.0);
    dec.d_z.reserve(dec.I_g.size());
    for (std::size_t i : dec.I_g) {
        double nn_u = std::numeric_limits<double>::infinity();
        nn_grid.visit(pos[i], [&](std::size_t j) {
            if (j != i) nn_u = std::min(nn_u, (pos[i] - pos[j]).norm());
            return true;
        });
        double d = epsilon;
        if (nn_u < 2.0) d = std::min(d, 0.5 * (epsilon * nn_u));
        for (std::size_t j : dec.I_b)
            d = std::min(d, std::max(scaled_dist(epsilon, pos[i], pos[j]) - big_r[j], 0.0));
        dec.d_z.push_back(d);
    }

    const double cutoff = epsilon / M;
    for (std::size_t k = 0; k < dec.I_g.size(); ++k)
        if (dec.d_z[k] >= cutoff) dec.I_gM.push_back(dec.I_g[k]);

    return dec;
}

DecompositionCheck verify_decomposition(const MppRealization& real,
                                        const GoodBadDecomposition& dec) {
    DecompositionCheck chk;
    chk.min_separation = std::numeric_limits<double>::infinity();
    const std::size_t n = real.points.size();
    const double eps = dec.epsilon;
    const double s3 = eps * eps * eps;

    // Partition: I_g and I_b sorted, disjoint, and together exactly the
    // in-window index set.
    std::vector<std::size_t> merged;
    merged.reserve(dec.I_g.size() + dec.I_b.size());
    std::merge(dec.I_g.begin(), dec.I_g.end(), dec.I_b.begin(), dec.I_b.end(),
               std::back_inserter(merged));
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < n; ++i)
        if (real.window.contains_halfopen(real.points[i].z)) expect.push_back(i);
    if (merged != expect || std::adjacent_find(merged.begin(), merged.end()) != merged.end())
        ++chk.partition_violations;

    for (std::size_t k = 0; k < dec.I_g.size(); ++k) {
        const std::size_t i = dec.I_g[k];
        const double lower = 2.0 * (s3 * real.points[i].rho);
        if (!(lower <= dec.d_z[k] && dec.d_z[k] <= eps)) ++chk.dz_bound_violations;
    }

    // Pairwise overlap of the placed good hole balls, radius eps^3 rho. A cell
    // grid of the maximal overlap range keeps this near-linear; overlap means
    // open balls intersect.
    if (dec.I_g.size() > 1) {
        std::vector<Vec3> centers;
        std::vector<double> radii;
        centers.reserve(dec.I_g.size());
        double max_r = 0.0;
        for (std::size_t i : dec.I_g) {
            centers.push_back(real.points[i].z * eps);
            radii.push_back(s3 * real.points[i].rho);
            max_r = std::max(max_r, radii.back());
        }
        if (max_r > 0.0) {
            const CellGrid grid(centers, 2.0 * max_r);
            for (std::size_t a = 0; a < centers.size(); ++a) {
                grid.visit(centers[a], [&](std::size_t b) {
                    if (b > a) {
                        const double rr = radii[a] + radii[b];
                        if ((centers[a] - centers[b]).norm2() < rr * rr) ++chk.disjoint_violations;
                    }
                    return true;
                });
            }
        }
    }

    // Separation of the good holes from the bad safety region, in the same
    // fl(eps * unscaled distance) convention the decomposition used.
    for (std::size_t k = 0; k < dec.I_g.size(); ++k) {
        const std::size_t i = dec.I_g[k];
        const double hole_r = s3 * real.points[i].rho;
        for (std::size_t j : dec.I_b) {
            const double big_r = 2.0 * (s3 * real.points[j].rho);
            const double gap =
                scaled_dist(eps, real.points[i].z, real.points[j].z) - hole_r - big_r;
            chk.min_separation = std::min(chk.min_separation, gap);
            if (!(gap >= 0.5 * dec.eta_eps)) ++chk.separation_violations;
        }
    }
    return chk;
}

std::vector<DiagnosticsRow> decomposition_diagnostics(const MppRealization& real,
                                                      const std::vector<double>& epsilons,
                                                      double alpha, double M) {
    if (epsilons.empty()) throw DomainError("decomposition_diagnostics: need at least one epsilon");
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw DomainError("decomposition_diagnostics: epsilons must be strictly decreasing");

    std::vector<Vec3> pos;
    pos.reserve(real.points.size());
    for (const MppPoint& p : real.points) pos.push_back(p.z);
    const std::vector<char> crowded_2M =
        pos.empty() ? std::vector<char>() : close_flags(pos, 2.0 / M);

    std::vector<DiagnosticsRow> rows;
    rows.reserve(epsilons.size());
    for (double eps : epsilons) {
        const GoodBadDecomposition dec = good_bad_decompose(real, eps, alpha, M);
        const DecompositionCheck chk = verify_decomposition(real, dec);
        DiagnosticsRow row;
        row.epsilon = eps;
        row.r_eps = dec.r_eps;
        const double e3 = eps * eps * eps;
        row.scaled_bad_count = e3 * static_cast<double>(dec.I_b.size());
        std::size_t excess = 0;
        for (std::size_t i : dec.in_window)
            if (!crowded_2M[i] && !std::binary_search(dec.I_gM.begin(), dec.I_gM.end(), i))
                ++excess;
        row.scaled_truncation_excess = e3 * static_cast<double>(excess);
        row.balls_disjoint = chk.disjoint_violations == 0;
        row.separation_ok = chk.separation_violations == 0;
        row.dz_bounds_ok = chk.dz_bound_violations == 0 && chk.partition_violations == 0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace perfhom
