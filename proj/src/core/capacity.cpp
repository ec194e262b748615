#include "capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perfhom {

const char* cap_method_name(CapMethod m) {
    switch (m) {
        case CapMethod::Analytic: return "analytic";
        case CapMethod::Grid: return "grid";
        case CapMethod::GridExtrapolated: return "grid-extrapolated";
    }
    return "unknown";
}

double mazya_factor(int d, double lambda) {
    if (d < 3) throw DomainError("mazya_factor: d must be >= 3");
    if (!(lambda > 1.0)) throw DomainError("mazya_factor: lambda must be > 1");
    if (d == 3) return (1.0 / (lambda - 1.0)) * (1.0 + 2.0 * std::log(lambda));
    return (2.0 / (d - 3)) / (lambda - 1.0);
}

MazyaFactor mazya(int d, double lambda) {
    return MazyaFactor{d, lambda, mazya_factor(d, lambda)};
}

CapacityEstimate cap_ball(double r, double R, int d) {
    if (d < 3) throw DomainError("cap_ball: d must be >= 3");
    if (!(r > 0.0)) throw DomainError("cap_ball: radius must be positive");
    if (!(R > r)) throw DomainError("cap_ball: outer radius must exceed inner radius");
    const double outer = std::isinf(R) ? 0.0 : std::pow(R, 2.0 - d);
    const double inner = std::pow(r, 2.0 - d);
    CapacityEstimate est;
    est.value = (d - 2) * unit_sphere_area(d) / (inner - outer);
    est.method = CapMethod::Analytic;
    return est;
}

ScalarField capacitary_potential(const NodeMask& mask, double tol, int max_iter) {
    ScalarField f(mask.grid);  // zeros
    ScalarField g(mask.grid);
    const std::size_t total = mask.grid.size();
    for (std::size_t p = 0; p < total; ++p)
        if (mask.cls[p] == std::uint8_t(NodeClass::HOLE)) g.values[p] = 1.0;
    ScalarField u = solve_dirichlet(mask, f, &g, 0.0, nullptr, tol, max_iter);
    for (double& v : u.values) v = std::clamp(v, 0.0, 1.0);
    return u;
}

namespace {

// One relative-capacity solve at a fixed resolution; throws ResolutionError
// when the grid cannot see the shape at all.
double cap_relative_once(const HoleShape& shape, double R, int n, const CapGridOptions& opt) {
    const Grid grid = Grid::cubic(Box3{Vec3{-R, -R, -R}, Vec3{R, R, R}}, n);
    NodeMask mask(grid);
    const double R2 = R * R;
    std::size_t hole_count = 0;
    std::size_t p = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i, ++p) {
                const Vec3 x = grid.node(i, j, k);
                if (x.norm2() >= R2 || i == 0 || j == 0 || k == 0 || i == n - 1 ||
                    j == n - 1 || k == n - 1) {
                    mask.cls[p] = std::uint8_t(NodeClass::BOUNDARY);
                } else if (shape_contains(shape, x)) {
                    mask.cls[p] = std::uint8_t(NodeClass::HOLE);
                    ++hole_count;
                }
            }
    if (hole_count == 0)
        throw ResolutionError("cap_relative_grid: no grid node falls inside the shape");
    const ScalarField u = capacitary_potential(mask, opt.tol, opt.max_iter);
    const Norms nm = norms(u);
    return nm.h1_semi * nm.h1_semi;
}

}  // namespace

CapacityEstimate cap_relative_grid(const HoleShape& shape, double domain_radius, int n,
                                   const CapGridOptions& opt) {
    validate_shape(shape);
    if (n < 3) throw ResolutionError("cap_relative_grid: need n >= 3");
    if (!(domain_radius > 0.0)) throw DomainError("cap_relative_grid: domain radius must be positive");
    if (shape_circumradius(shape) >= domain_radius)
        throw DomainError("cap_relative_grid: shape is not contained in the domain ball");

    const double coarse = cap_relative_once(shape, domain_radius, n, opt);
    CapacityEstimate est;
    est.method = CapMethod::Grid;
    est.resolution = n;
    est.value = coarse;
    if (opt.extrapolate) {
        const int fine_n = 2 * n - 1;  // halves h while keeping node positions nested
        const double fine = cap_relative_once(shape, domain_radius, fine_n, opt);
        est.value = fine + (fine - coarse) / 3.0;  // second-order Richardson step
        est.method = CapMethod::GridExtrapolated;
        est.resolution = fine_n;
        if (est.value != 0.0)
            est.relative_error_indicator = std::abs(fine - est.value) / std::abs(est.value);
    }
    return est;
}

CapacityEstimate cap_whole_space(const HoleShape& shape, const std::vector<double>& R_schedule,
                                 int n, const CapGridOptions& opt,
                                 std::vector<std::pair<double, double>>* raw_values) {
    if (R_schedule.empty()) throw DomainError("cap_whole_space: empty truncation schedule");
    for (std::size_t i = 1; i < R_schedule.size(); ++i)
        if (!(R_schedule[i] > R_schedule[i - 1]))
            throw DomainError("cap_whole_space: truncation radii must be strictly increasing");

    const int d = kDim;
    const double geom = (d - 2) * unit_sphere_area(d);
    std::vector<double> corrected;
    corrected.reserve(R_schedule.size());
    double raw_last = 0.0;
    CapacityEstimate inner;
    for (double R : R_schedule) {
        inner = cap_relative_grid(shape, R, n, opt);
        const double m = inner.value;
        if (raw_values) raw_values->emplace_back(R, m);
        // Relative capacity in U_R of a set with whole-space capacity C behaves
        // like C / (1 - C R^{2-d} / geom); invert that monopole model.
        const double c = m / (1.0 + m * std::pow(R, 2.0 - d) / geom);
        corrected.push_back(c);
        raw_last = m;
    }

    CapacityEstimate est;
    est.value = corrected.back();
    est.method = inner.method;
    est.resolution = inner.resolution;
    est.upper_bound = raw_last;  // relative capacity dominates the whole-space value
    double spread = inner.relative_error_indicator;
    if (est.value > 0.0)
        for (double c : corrected)
            spread = std::max(spread, std::abs(c - est.value) / est.value);
    est.relative_error_indicator = spread;
    return est;
}

double alpha_ratio(const HoleShape& shape, const CapacityEstimate& cap, int d) {
    if (d < 3) throw DomainError("alpha_ratio: d must be >= 3");
    const double diam = shape_diameter(shape);
    if (!(diam > 0.0)) throw DomainError("alpha_ratio: shape has degenerate diameter");
    return cap.value / std::pow(diam, d - 2);
}

}  // namespace perfhom
