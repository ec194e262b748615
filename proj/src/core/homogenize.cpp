#include "homogenize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <thread>

#include <json.hpp>

namespace perfhom {

bool placed_contains(const HoleShape& shape, const PlacedHole& hole, const Vec3& x) {
    return shape_contains(shape, (x - hole.center) / hole.scale);
}

std::vector<PlacedHole> place_holes(const PerforationSpec& spec) {
    if (!(spec.epsilon > 0.0 && spec.epsilon <= 1.0))
        throw DomainError("place_holes: epsilon must lie in ]0,1]");
    const double eps = spec.epsilon;
    const double s3 = eps * eps * eps;  // eps^{d/(d-2)} at d = 3
    std::vector<PlacedHole> holes;
    const MppRealization& real = spec.realization;
    for (std::size_t i = 0; i < real.points.size(); ++i) {
        const MppPoint& pt = real.points[i];
        if (!real.window.contains_halfopen(pt.z)) continue;
        PlacedHole h;
        h.point_index = i;
        h.center = Vec3{eps * pt.z.x, eps * pt.z.y, eps * pt.z.z};
        double v = 1.0;
        if (spec.modulation) {
            v = spec.modulation(h.center);
            if (v < 0.0) throw DomainError("place_holes: modulation must be nonnegative");
            if (v == 0.0) continue;  // zero modulation removes the hole
        }
        h.scale = spec.modulation ? s3 * v : s3;
        h.radius = h.scale * pt.rho;
        holes.push_back(h);
    }
    return holes;
}

MppRealization apply_modulation(const MppRealization& real,
                                const std::function<double(const Vec3&)>& V, double epsilon) {
    if (!V) return real;
    MppRealization out = real;
    for (MppPoint& pt : out.points) {
        const Vec3 center{epsilon * pt.z.x, epsilon * pt.z.y, epsilon * pt.z.z};
        const double v = V(center);
        if (!(v > 0.0)) throw DomainError("apply_modulation: modulation must be positive");
        pt.shape = shape_scale(pt.shape, v);
        pt.rho = shape_circumradius(pt.shape);
        // Recompute the capacity exactly as the sampler would for the scaled
        // shape so a constant modulation reproduces scaled marks bitwise.
        if (std::holds_alternative<Ball>(pt.shape.body)) {
            pt.cap = cap_ball(std::get<Ball>(pt.shape.body).radius,
                              std::numeric_limits<double>::infinity(), kDim)
                         .value;
        } else {
            const double R = 8.0 * shape_circumradius(pt.shape);
            const int n = out.cap_resolution > 0 ? out.cap_resolution : 49;
            pt.cap = cap_whole_space(pt.shape, {R}, n).value;
            out.cap_resolution = std::max(out.cap_resolution, n);
        }
    }
    return out;
}

namespace {

// Interior nodes (never face nodes) lying inside the placed hole. The index
// window is the hole's bounding box widened by one node, so rounding in the
// range arithmetic can only add candidates; membership itself is re-tested.
std::vector<std::size_t> hole_interior_nodes(const Grid& grid, const HoleShape& shape,
                                             const PlacedHole& hole) {
    std::array<int, 3> i0{}, i1{};
    for (int a = 0; a < 3; ++a) {
        const double lo = hole.center[a] - hole.radius;
        const double hi = hole.center[a] + hole.radius;
        const long long b0 = static_cast<long long>(std::floor((lo - grid.box.lo[a]) / grid.h[a]));
        const long long b1 = static_cast<long long>(std::ceil((hi - grid.box.lo[a]) / grid.h[a]));
        i0[a] = static_cast<int>(std::clamp(b0, 1LL, static_cast<long long>(grid.n[a] - 2)));
        i1[a] = static_cast<int>(std::clamp(b1, 1LL, static_cast<long long>(grid.n[a] - 2)));
        if (b1 < 1 || b0 > grid.n[a] - 2) return {};
    }
    std::vector<std::size_t> nodes;
    for (int k = i0[2]; k <= i1[2]; ++k)
        for (int j = i0[1]; j <= i1[1]; ++j)
            for (int i = i0[0]; i <= i1[0]; ++i)
                if (placed_contains(shape, hole, grid.node(i, j, k)))
                    nodes.push_back(grid.index(i, j, k));
    return nodes;
}

std::size_t nearest_interior_node(const Grid& grid, const Vec3& center) {
    std::array<int, 3> idx{};
    for (int a = 0; a < 3; ++a) {
        const long long r = std::llround((center[a] - grid.box.lo[a]) / grid.h[a]);
        idx[a] = static_cast<int>(std::clamp(r, 1LL, static_cast<long long>(grid.n[a] - 2)));
    }
    return grid.index(idx[0], idx[1], idx[2]);
}

double max_spacing(const Grid& grid) { return std::max({grid.h.x, grid.h.y, grid.h.z}); }

}  // namespace

PerforationBuild build_perforation(const PerforationSpec& spec, const Grid& grid) {
    if (!(grid.box == spec.domain))
        throw DomainError("build_perforation: grid box must equal the domain box");
    const Box3 physical_window = spec.realization.window.scaled(spec.epsilon);
    if (!physical_window.contains_box(spec.domain))
        throw DomainError("build_perforation: domain must lie inside the physical window");
    if (!(spec.resolve_factor >= 2.0))
        throw DomainError("build_perforation: resolve_factor must be at least 2");

    PerforationBuild out(grid);
    out.mask = NodeMask::plain(grid);
    out.holes = place_holes(spec);

    // Resolution gate over the holes whose centers can claim a node: the
    // smallest such circumradius must span resolve_factor cells.
    const double h = max_spacing(grid);
    double min_radius = std::numeric_limits<double>::infinity();
    for (const PlacedHole& hole : out.holes)
        if (spec.domain.contains_closed(hole.center)) min_radius = std::min(min_radius, hole.radius);
    if (std::isfinite(min_radius) && h > min_radius / spec.resolve_factor) {
        if (!spec.allow_underresolved) {
            const double side = std::max({grid.box.side().x, grid.box.side().y, grid.box.side().z});
            const int needed =
                static_cast<int>(std::ceil(side * spec.resolve_factor / min_radius)) + 1;
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "build_perforation: grid spacing %.3g exceeds hole radius %.3g / %.3g; "
                          "need n >= %d",
                          h, min_radius, spec.resolve_factor, needed);
            throw ResolutionError(msg);
        }
        out.underresolved = true;
    }

    for (const PlacedHole& hole : out.holes) {
        const HoleShape& shape = spec.realization.points[hole.point_index].shape;
        const std::vector<std::size_t> nodes = hole_interior_nodes(grid, shape, hole);
        for (std::size_t p : nodes) out.mask.cls[p] = std::uint8_t(NodeClass::HOLE);
        if (nodes.empty() && spec.domain.contains_closed(hole.center)) {
            if (!spec.allow_underresolved)
                throw ResolutionError(
                    "build_perforation: a hole contains no grid node; raise n or pass "
                    "allow-underresolved");
            out.mask.cls[nearest_interior_node(grid, hole.center)] =
                std::uint8_t(NodeClass::HOLE);
            ++out.pinned_holes;
            out.underresolved = true;
        }
    }
    return out;
}

ScalarField solve_perforated(const NodeMask& mask, const ScalarField& f, double tol, int max_iter,
                             CgReport* report) {
    return solve_dirichlet(mask, f, nullptr, 0.0, nullptr, tol, max_iter, false, report);
}

ScalarField solve_homogenized(const ScalarField& f, double c0, const ScalarField* V, double tol,
                              int max_iter, CgReport* report) {
    if (c0 < 0.0) throw DomainError("solve_homogenized: c0 must be nonnegative");
    const NodeMask mask = NodeMask::plain(f.grid);
    if (!V) return solve_dirichlet(mask, f, nullptr, c0, nullptr, tol, max_iter, false, report);
    if (!V->grid.same_layout(f.grid))
        throw ShapeError("solve_homogenized: V grid does not match f");
    ScalarField weight(f.grid);
    for (std::size_t p = 0; p < weight.values.size(); ++p) {
        const double v = V->values[p];
        if (v < 0.0) throw DomainError("solve_homogenized: V must be nonnegative");
        weight.values[p] = std::pow(v, kDim - 2);
    }
    return solve_dirichlet(mask, f, nullptr, c0, &weight, tol, max_iter, false, report);
}

namespace {

// Explicit relative capacitary potential of the ball B_r inside U_R at
// distance s from the center: 1 below r, harmonic decay to 0 at R.
double radial_profile(double s, double r, double R) {
    if (s <= r) return 1.0;
    if (s >= R) return 0.0;
    return (1.0 / s - 1.0 / R) / (1.0 / r - 1.0 / R);
}

// Trilinear interpolation on a source grid, clamped to its box.
double trilinear(const ScalarField& src, const Vec3& x) {
    const Grid& g = src.grid;
    double w[3][2];
    int base[3];
    for (int a = 0; a < 3; ++a) {
        double t = (x[a] - g.box.lo[a]) / g.h[a];
        t = std::clamp(t, 0.0, static_cast<double>(g.n[a] - 1));
        int i = static_cast<int>(t);
        i = std::min(i, g.n[a] - 2);
        base[a] = i;
        const double frac = t - i;
        w[a][0] = 1.0 - frac;
        w[a][1] = frac;
    }
    double acc = 0.0;
    for (int dk = 0; dk < 2; ++dk)
        for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di)
                acc += w[0][di] * w[1][dj] * w[2][dk] *
                       src.values[g.index(base[0] + di, base[1] + dj, base[2] + dk)];
    return acc;
}

void paint_radial(ScalarField& e, const HoleShape& shape, const PlacedHole& hole, double R) {
    const Grid& g = e.grid;
    std::array<int, 3> i0{}, i1{};
    for (int a = 0; a < 3; ++a) {
        const long long b0 =
            static_cast<long long>(std::floor((hole.center[a] - R - g.box.lo[a]) / g.h[a]));
        const long long b1 =
            static_cast<long long>(std::ceil((hole.center[a] + R - g.box.lo[a]) / g.h[a]));
        i0[a] = static_cast<int>(std::clamp(b0, 0LL, static_cast<long long>(g.n[a] - 1)));
        i1[a] = static_cast<int>(std::clamp(b1, 0LL, static_cast<long long>(g.n[a] - 1)));
        if (b1 < 0 || b0 > g.n[a] - 1) return;
    }
    for (int k = i0[2]; k <= i1[2]; ++k)
        for (int j = i0[1]; j <= i1[1]; ++j)
            for (int i = i0[0]; i <= i1[0]; ++i) {
                const Vec3 x = g.node(i, j, k);
                const double s = (x - hole.center).norm();
                if (s >= R) continue;
                // Hole membership uses the same containment rule as the mask
                // so corrector and mask agree on where the value is 1.
                const double val = placed_contains(shape, hole, x)
                                       ? 1.0
                                       : radial_profile(s, hole.radius, R);
                e.values[g.index(i, j, k)] += val;
            }
}

// Capacitary potential of a non-ball good hole solved on a local cubic grid
// over U_z and interpolated onto the global grid.
void paint_local_solve(ScalarField& e, const HoleShape& shape, const PlacedHole& hole, double R,
                       const PerforationSpec& spec, double tol, int max_iter) {
    const double want_h = hole.radius / spec.resolve_factor;
    int n_sub = static_cast<int>(std::ceil(2.0 * R / want_h)) + 1;
    n_sub = std::max(n_sub, 17);
    if (n_sub > 129) {
        if (!spec.allow_underresolved)
            throw ResolutionError(
                "assemble_corrector: local capacitary grid would exceed 129 nodes per axis; "
                "hole too small relative to its clearance");
        n_sub = 129;
    }
    const Box3 sub_box{Vec3{hole.center.x - R, hole.center.y - R, hole.center.z - R},
                       Vec3{hole.center.x + R, hole.center.y + R, hole.center.z + R}};
    const Grid sub = Grid::cubic(sub_box, n_sub);
    NodeMask mask = NodeMask::plain(sub);
    const double R2 = R * R;
    bool any_hole = false;
    std::size_t p = 0;
    for (int k = 0; k < n_sub; ++k)
        for (int j = 0; j < n_sub; ++j)
            for (int i = 0; i < n_sub; ++i, ++p) {
                if (mask.cls[p] != std::uint8_t(NodeClass::FREE)) continue;
                const Vec3 x = sub.node(i, j, k);
                if ((x - hole.center).norm2() >= R2) {
                    mask.cls[p] = std::uint8_t(NodeClass::BOUNDARY);
                } else if (placed_contains(shape, hole, x)) {
                    mask.cls[p] = std::uint8_t(NodeClass::HOLE);
                    any_hole = true;
                }
            }
    if (!any_hole) {
        if (!spec.allow_underresolved)
            throw ResolutionError("assemble_corrector: a good hole contains no subgrid node");
        mask.cls[nearest_interior_node(sub, hole.center)] = std::uint8_t(NodeClass::HOLE);
    }
    const ScalarField u = capacitary_potential(mask, tol, max_iter);

    const Grid& g = e.grid;
    std::array<int, 3> i0{}, i1{};
    for (int a = 0; a < 3; ++a) {
        const long long b0 =
            static_cast<long long>(std::floor((hole.center[a] - R - g.box.lo[a]) / g.h[a]));
        const long long b1 =
            static_cast<long long>(std::ceil((hole.center[a] + R - g.box.lo[a]) / g.h[a]));
        i0[a] = static_cast<int>(std::clamp(b0, 0LL, static_cast<long long>(g.n[a] - 1)));
        i1[a] = static_cast<int>(std::clamp(b1, 0LL, static_cast<long long>(g.n[a] - 1)));
        if (b1 < 0 || b0 > g.n[a] - 1) return;
    }
    for (int k = i0[2]; k <= i1[2]; ++k)
        for (int j = i0[1]; j <= i1[1]; ++j)
            for (int i = i0[0]; i <= i1[0]; ++i) {
                const Vec3 x = g.node(i, j, k);
                if ((x - hole.center).norm2() >= R2) continue;
                double val = placed_contains(shape, hole, x)
                                 ? 1.0
                                 : std::clamp(trilinear(u, x), 0.0, 1.0);
                e.values[g.index(i, j, k)] += val;
            }
}

}  // namespace

ScalarField assemble_corrector(const PerforationSpec& spec, const GoodBadDecomposition& decomp,
                               const Grid& grid, double tol, int max_iter) {
    if (decomp.epsilon != spec.epsilon)
        throw DomainError("assemble_corrector: decomposition was built at a different epsilon");
    ScalarField e(grid);
    const std::vector<PlacedHole> holes = place_holes(spec);
    std::vector<long long> hole_of_point(spec.realization.points.size(), -1);
    for (std::size_t k = 0; k < holes.size(); ++k)
        hole_of_point[holes[k].point_index] = static_cast<long long>(k);

    for (std::size_t k = 0; k < decomp.I_g.size(); ++k) {
        const std::size_t i = decomp.I_g[k];
        if (hole_of_point[i] < 0) continue;  // removed by zero modulation
        const PlacedHole& hole = holes[static_cast<std::size_t>(hole_of_point[i])];
        const HoleShape& shape = spec.realization.points[i].shape;
        const double R = decomp.d_z[k];
        if (!(hole.radius < R))
            throw DomainError(
                "assemble_corrector: placed hole radius reaches its clearance ball; the "
                "decomposition does not match this perforation");
        if (std::holds_alternative<Ball>(shape.body)) {
            paint_radial(e, shape, hole, R);
        } else {
            paint_local_solve(e, shape, hole, R, spec, tol, max_iter);
        }
        // Under-resolved good ball holes still get their pinned node, matching
        // the mask's pinning rule.
        if (std::holds_alternative<Ball>(shape.body) &&
            spec.domain.contains_closed(hole.center) &&
            hole_interior_nodes(grid, shape, hole).empty() && spec.allow_underresolved) {
            e.values[nearest_interior_node(grid, hole.center)] = 1.0;
        }
    }

    if (!decomp.I_b.empty()) {
        // One global capacitary solve: bad holes pinned to 1 inside the union
        // of their safety balls, zero outside it.
        NodeMask mask(grid);
        std::fill(mask.cls.begin(), mask.cls.end(), std::uint8_t(NodeClass::BOUNDARY));
        std::vector<const PlacedHole*> bad;
        for (std::size_t i : decomp.I_b)
            if (hole_of_point[i] >= 0) bad.push_back(&holes[static_cast<std::size_t>(hole_of_point[i])]);
        for (const PlacedHole* hole : bad) {
            const double R = 2.0 * hole->radius;
            std::array<int, 3> i0{}, i1{};
            bool outside = false;
            for (int a = 0; a < 3; ++a) {
                const long long b0 = static_cast<long long>(
                    std::floor((hole->center[a] - R - grid.box.lo[a]) / grid.h[a]));
                const long long b1 = static_cast<long long>(
                    std::ceil((hole->center[a] + R - grid.box.lo[a]) / grid.h[a]));
                i0[a] = static_cast<int>(std::clamp(b0, 1LL, static_cast<long long>(grid.n[a] - 2)));
                i1[a] = static_cast<int>(std::clamp(b1, 1LL, static_cast<long long>(grid.n[a] - 2)));
                if (b1 < 1 || b0 > grid.n[a] - 2) outside = true;
            }
            if (outside) continue;
            const double R2 = R * R;
            for (int k = i0[2]; k <= i1[2]; ++k)
                for (int j = i0[1]; j <= i1[1]; ++j)
                    for (int i = i0[0]; i <= i1[0]; ++i) {
                        const std::size_t p = grid.index(i, j, k);
                        const Vec3 x = grid.node(i, j, k);
                        if ((x - hole->center).norm2() < R2 &&
                            mask.cls[p] == std::uint8_t(NodeClass::BOUNDARY))
                            mask.cls[p] = std::uint8_t(NodeClass::FREE);
                    }
        }
        std::size_t hole_nodes = 0;
        for (const PlacedHole* hole : bad) {
            const HoleShape& shape = spec.realization.points[hole->point_index].shape;
            std::vector<std::size_t> nodes = hole_interior_nodes(grid, shape, *hole);
            if (nodes.empty() && spec.domain.contains_closed(hole->center)) {
                if (!spec.allow_underresolved)
                    throw ResolutionError("assemble_corrector: a bad hole contains no grid node");
                nodes.push_back(nearest_interior_node(grid, hole->center));
            }
            for (std::size_t p : nodes) mask.cls[p] = std::uint8_t(NodeClass::HOLE);
            hole_nodes += nodes.size();
        }
        if (hole_nodes > 0) {
            const ScalarField u = capacitary_potential(mask, tol, max_iter);
            for (std::size_t p = 0; p < e.values.size(); ++p)
                if (mask.cls[p] != std::uint8_t(NodeClass::BOUNDARY)) e.values[p] += u.values[p];
        }
    }
    return e;
}

CorrectorError corrector_error(const ScalarField& u_eps, const ScalarField& u_hom,
                               const ScalarField& corrector) {
    if (!u_eps.grid.same_layout(u_hom.grid) || !u_eps.grid.same_layout(corrector.grid))
        throw ShapeError("corrector_error: fields live on different grids");
    ScalarField diff(u_eps.grid);
    for (std::size_t p = 0; p < diff.values.size(); ++p)
        diff.values[p] = u_eps.values[p] - u_hom.values[p];
    CorrectorError out;
    out.h1_plain = seminorm_h1(diff);
    for (std::size_t p = 0; p < diff.values.size(); ++p)
        diff.values[p] = u_eps.values[p] - (1.0 - corrector.values[p]) * u_hom.values[p];
    out.h1_corr = seminorm_h1(diff);
    out.ratio = out.h1_plain > 0.0 ? out.h1_corr / out.h1_plain
                                   : std::numeric_limits<double>::quiet_NaN();
    return out;
}

double heat_compare(const NodeMask& mask, double c0, const ScalarField& u0, double t, double dt,
                    double tol, int max_iter) {
    if (!(t > 0.0) || !(dt > 0.0)) throw DomainError("heat_compare: t and dt must be positive");
    if (c0 < 0.0) throw DomainError("heat_compare: c0 must be nonnegative");
    if (!u0.grid.same_layout(mask.grid)) throw ShapeError("heat_compare: u0 grid mismatch");
    const int steps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
    const double step = t / steps;
    const NodeMask plain = NodeMask::plain(mask.grid);

    auto evolve = [&](const NodeMask& m) {
        ScalarField u = extend_restrict(u0, m, ExtendRestrict::Restrict);
        ScalarField rhs(u.grid);
        for (int s = 0; s < steps; ++s) {
            for (std::size_t p = 0; p < u.values.size(); ++p) rhs.values[p] = u.values[p] / step;
            u = solve_dirichlet(m, rhs, nullptr, 1.0 / step, nullptr, tol, max_iter);
        }
        return u;
    };

    const ScalarField u_perf = evolve(mask);
    const ScalarField u_plain = evolve(plain);
    const double damp = std::exp(-c0 * t);
    ScalarField diff(u0.grid);
    for (std::size_t p = 0; p < diff.values.size(); ++p)
        diff.values[p] = u_perf.values[p] - damp * u_plain.values[p];
    const double denom = norm_l2(u_plain);
    const double num = norm_l2(diff);
    return denom > 0.0 ? num / denom : num;
}

ScalarField lowest_mode(const Grid& grid) {
    ScalarField u(grid);
    const Vec3 side = grid.box.side();
    std::size_t p = 0;
    for (int k = 0; k < grid.n[2]; ++k)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int i = 0; i < grid.n[0]; ++i, ++p) {
                const Vec3 x = grid.node(i, j, k);
                u.values[p] = std::sin(M_PI * (x.x - grid.box.lo.x) / side.x) *
                              std::sin(M_PI * (x.y - grid.box.lo.y) / side.y) *
                              std::sin(M_PI * (x.z - grid.box.lo.z) / side.z);
            }
    return u;
}

double lowest_eigenvalue(const Box3& box) {
    const Vec3 side = box.side();
    return M_PI * M_PI / (side.x * side.x) + M_PI * M_PI / (side.y * side.y) +
           M_PI * M_PI / (side.z * side.z);
}

ScalarField manufactured_source(const Grid& grid, double c0) {
    ScalarField f = lowest_mode(grid);
    const double factor = lowest_eigenvalue(grid.box) + c0;
    for (double& v : f.values) v *= factor;
    return f;
}

namespace {

struct RowTask {
    std::size_t index;
    double epsilon;
    std::uint64_t seed;
};

StudyRow run_row(const StudyConfig& cfg, const Grid& grid, const ScalarField& f,
                 const ScalarField& u0, const RowTask& task) {
    StudyRow row;
    row.epsilon = task.epsilon;
    row.seed = task.seed;
    row.grid_n = cfg.grid_n;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Box3 sampling_window = cfg.window.scaled(1.0 / task.epsilon);
        const MppRealization real = sample_process(cfg.generator, sampling_window, task.seed);
        const GoodBadDecomposition dec = good_bad_decompose(real, task.epsilon, cfg.alpha, cfg.M);
        row.c0_est = estimate_c0(real);

        PerforationSpec spec;
        spec.epsilon = task.epsilon;
        spec.domain = cfg.domain;
        spec.realization = real;
        spec.resolve_factor = cfg.resolve_factor;
        spec.allow_underresolved = cfg.allow_underresolved;

        const PerforationBuild build = build_perforation(spec, grid);
        row.pinned_holes = build.pinned_holes;

        const ScalarField u_eps = solve_perforated(build.mask, f, cfg.tol, cfg.max_iter);
        const ScalarField u_hom = solve_homogenized(f, row.c0_est, nullptr, cfg.tol, cfg.max_iter);
        const ScalarField corr = assemble_corrector(spec, dec, grid, cfg.tol, cfg.max_iter);

        ScalarField diff(grid);
        for (std::size_t p = 0; p < diff.values.size(); ++p)
            diff.values[p] = u_eps.values[p] - u_hom.values[p];
        row.l2_err = norm_l2(diff);

        const CorrectorError ce = corrector_error(u_eps, u_hom, corr);
        row.h1_err_plain = ce.h1_plain;
        row.h1_err_corr = ce.h1_corr;
        row.corr_ratio = ce.ratio;

        if (cfg.heat.enabled) {
            const double dt = cfg.heat.dt > 0.0 ? cfg.heat.dt : cfg.heat.t / 64.0;
            row.heat_err =
                heat_compare(build.mask, row.c0_est, u0, cfg.heat.t, dt, cfg.tol, cfg.max_iter);
        } else {
            row.heat_err = 0.0;
        }

        if (cfg.dump_fields) {
            namespace fs = std::filesystem;
            fs::create_directories(cfg.output_dir);
            char stem[64];
            std::snprintf(stem, sizeof(stem), "row_%04zu", task.index);
            const std::string base = (fs::path(cfg.output_dir) / stem).string();
            dump_field(u_eps, base + "_ueps");
            dump_field(u_hom, base + "_uhom");
            dump_field(corr, base + "_corr");
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.status = e.what();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.c0_est = row.l2_err = row.h1_err_plain = row.h1_err_corr = row.corr_ratio =
            row.heat_err = nan;
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return row;
}

}  // namespace

StudyReport run_study(const StudyConfig& cfg) {
    validate_config(cfg);
    const auto t_start = std::chrono::steady_clock::now();
    const Grid grid = Grid::cubic(cfg.domain, cfg.grid_n);

    // Nominal c0 from a pre-pass realization (first epsilon, first seed); it
    // only shapes the manufactured source, the per-row solves use each row's
    // own estimate.
    const double eps0 = cfg.epsilons.front();
    const MppRealization real0 =
        sample_process(cfg.generator, cfg.window.scaled(1.0 / eps0), mix64(cfg.base_seed, 0));
    const double c0_nominal = estimate_c0(real0);

    ScalarField f = cfg.source == "constant" ? ScalarField(grid)
                                             : manufactured_source(grid, c0_nominal);
    if (cfg.source == "constant")
        std::fill(f.values.begin(), f.values.end(), 1.0);
    const ScalarField u0 = lowest_mode(grid);

    std::vector<RowTask> tasks;
    for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei)
        for (int si = 0; si < cfg.seed_count; ++si)
            tasks.push_back(RowTask{tasks.size(), cfg.epsilons[ei],
                                    mix64(cfg.base_seed, static_cast<std::uint64_t>(si))});

    StudyReport report;
    report.c0_nominal = c0_nominal;
    report.rows.resize(tasks.size());
    report.workers_used = std::max(1, cfg.workers);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            report.rows[i] = run_row(cfg, grid, f, u0, tasks[i]);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < report.workers_used; ++w) pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool) th.join();

    if (cfg.fail_fast)
        for (const StudyRow& row : report.rows)
            if (!row.ok) throw DomainError("study row failed: " + row.status);

    for (std::size_t ei = 0; ei < cfg.epsilons.size(); ++ei) {
        StudyAggregate agg;
        agg.epsilon = cfg.epsilons[ei];
        for (int si = 0; si < cfg.seed_count; ++si) {
            const StudyRow& row = report.rows[ei * cfg.seed_count + si];
            if (!row.ok) continue;
            ++agg.rows_ok;
            agg.mean_c0 += row.c0_est;
            agg.mean_l2 += row.l2_err;
            agg.mean_h1_plain += row.h1_err_plain;
            agg.mean_h1_corr += row.h1_err_corr;
            agg.mean_corr_ratio += row.corr_ratio;
            agg.mean_heat += row.heat_err;
        }
        if (agg.rows_ok > 0) {
            agg.mean_c0 /= agg.rows_ok;
            agg.mean_l2 /= agg.rows_ok;
            agg.mean_h1_plain /= agg.rows_ok;
            agg.mean_h1_corr /= agg.rows_ok;
            agg.mean_corr_ratio /= agg.rows_ok;
            agg.mean_heat /= agg.rows_ok;
        }
        report.aggregates.push_back(agg);
    }

    report.total_wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    return report;
}

std::string report_csv(const StudyReport& report, const StudyConfig& config) {
    std::string out =
        "epsilon,seed,grid_n,c0_est,l2_err,h1_err_plain,h1_err_corr,corr_ratio,heat_err,wall_ms\n";
    char buf[400];
    for (const StudyRow& r : report.rows) {
        const double wall = config.timing ? r.wall_ms : 0.0;
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%llu,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epsilon,
                      static_cast<unsigned long long>(r.seed), r.grid_n, r.c0_est, r.l2_err,
                      r.h1_err_plain, r.h1_err_corr, r.corr_ratio, r.heat_err, wall);
        out += buf;
    }
    return out;
}

std::string report_manifest(const StudyReport& report, const StudyConfig& config) {
    nlohmann::json j;
    j["version"] = "0.1.0";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(render_config(config))));
    j["config_hash"] = hash;
    j["workers"] = report.workers_used;
    j["c0_nominal"] = report.c0_nominal;
    j["total_wall_ms"] = report.total_wall_ms;
    nlohmann::json rows = nlohmann::json::array();
    for (const StudyRow& r : report.rows) {
        nlohmann::json jr;
        jr["epsilon"] = r.epsilon;
        jr["seed"] = r.seed;
        jr["status"] = r.status;
        jr["pinned_holes"] = r.pinned_holes;
        jr["wall_ms"] = r.wall_ms;  // real time, independent of the timing flag
        rows.push_back(jr);
    }
    j["rows"] = rows;
    nlohmann::json aggs = nlohmann::json::array();
    for (const StudyAggregate& a : report.aggregates) {
        nlohmann::json ja;
        ja["epsilon"] = a.epsilon;
        ja["rows_ok"] = a.rows_ok;
        ja["mean_c0"] = a.mean_c0;
        ja["mean_l2"] = a.mean_l2;
        ja["mean_h1_plain"] = a.mean_h1_plain;
        ja["mean_h1_corr"] = a.mean_h1_corr;
        ja["mean_corr_ratio"] = a.mean_corr_ratio;
        ja["mean_heat"] = a.mean_heat;
        aggs.push_back(ja);
    }
    j["aggregates"] = aggs;
    return j.dump(2) + "\n";
}

}  // namespace perfhom
