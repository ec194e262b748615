#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "capacity.hpp"
#include "config.hpp"
#include "grid.hpp"
#include "mpp.hpp"

namespace perfhom {

struct PerforationSpec {
    double epsilon = 0.5;
    Box3 domain;                 // D, the PDE box; must lie inside eps * realization.window
    MppRealization realization;  // sampled on the unscaled window (1/eps) * W
    std::function<double(const Vec3&)> modulation;  // optional V, evaluated at hole centers
    double resolve_factor = 2.0;
    bool allow_underresolved = false;
};

struct PlacedHole {
    std::size_t point_index = 0;  // into realization.points
    Vec3 center;                  // eps * z, per coordinate
    double scale = 0.0;           // eps^{d/(d-2)} * V(center)
    double radius = 0.0;          // scale * rho, circumradius of the placed hole
};

// Places every in-window point of the realization: center eps*z, template
// shape scaled by eps^{d/(d-2)} times the modulation value at the center.
std::vector<PlacedHole> place_holes(const PerforationSpec& spec);

bool placed_contains(const HoleShape& shape, const PlacedHole& hole, const Vec3& x);

// Scales each point's template shape (and its capacity) by V(eps*z), turning a
// modulated run into an unmodulated one over the transformed marks.
MppRealization apply_modulation(const MppRealization& real,
                                const std::function<double(const Vec3&)>& V, double epsilon);

struct PerforationBuild {
    NodeMask mask;
    std::vector<PlacedHole> holes;
    std::size_t pinned_holes = 0;  // holes represented only by their pinned nearest node
    bool underresolved = false;

    explicit PerforationBuild(const Grid& g) : mask(g) {}
};

// Marks HOLE on every node inside a placed hole and BOUNDARY on the box faces.
// Requires max grid spacing <= (smallest relevant hole circumradius) /
// resolve_factor and at least one node per hole centered inside the closed
// domain box; allow_underresolved turns both failures into nearest-node pins.
PerforationBuild build_perforation(const PerforationSpec& spec, const Grid& grid);

// Discrete -Delta u = f with u = 0 on HOLE and BOUNDARY, returned as the zero
// extension over the whole grid.
ScalarField solve_perforated(const NodeMask& mask, const ScalarField& f, double tol, int max_iter,
                             CgReport* report = nullptr);

// (-Delta + c0 * V^{d-2}) u = f on f's grid with Dirichlet zero on the box
// faces; V = nullptr means the constant 1.
ScalarField solve_homogenized(const ScalarField& f, double c0, const ScalarField* V, double tol,
                              int max_iter, CgReport* report = nullptr);

// Oscillating corrector: explicit radial capacitary profile on each good ball
// hole (1 inside the hole, harmonic decay to 0 at radius d_z), a local subgrid
// solve for non-ball good holes, and one masked grid solve for the capacitary
// potential of the bad holes inside their safety region. Contributions have
// pairwise disjoint supports and sum into [0,1] with value 1 on hole nodes.
ScalarField assemble_corrector(const PerforationSpec& spec, const GoodBadDecomposition& decomp,
                               const Grid& grid, double tol = 1e-8, int max_iter = 50000);

struct CorrectorError {
    double h1_plain = 0.0;  // |u_eps - u_hom|_{H^1}
    double h1_corr = 0.0;   // |u_eps - (1 - corrector) u_hom|_{H^1}
    double ratio = 0.0;     // h1_corr / h1_plain, NaN when h1_plain == 0
};

CorrectorError corrector_error(const ScalarField& u_eps, const ScalarField& u_hom,
                               const ScalarField& corrector);

// Implicit-Euler heat evolution of u0 in the perforated domain versus
// exp(-c0 t) times the unperforated evolution; returns the L2 difference at
// time t relative to the unperforated solution (absolute when that is zero).
double heat_compare(const NodeMask& mask, double c0, const ScalarField& u0, double t, double dt,
                    double tol, int max_iter = 50000);

// Product of the lowest Dirichlet sine modes of the box, and its eigenvalue.
ScalarField lowest_mode(const Grid& grid);
double lowest_eigenvalue(const Box3& box);

// f = (lambda_1 + c0) * mode, so the c0-shifted homogenized solution is the
// mode itself up to discretization error.
ScalarField manufactured_source(const Grid& grid, double c0);

struct StudyRow {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    int grid_n = 0;
    double c0_est = 0.0;
    double l2_err = 0.0;
    double h1_err_plain = 0.0;
    double h1_err_corr = 0.0;
    double corr_ratio = 0.0;
    double heat_err = 0.0;
    double wall_ms = 0.0;  // real milliseconds, CSV shows 0 unless timing is on
    std::size_t pinned_holes = 0;
    bool ok = false;
    std::string status = "ok";
};

struct StudyAggregate {
    double epsilon = 0.0;
    int rows_ok = 0;
    double mean_c0 = 0.0;
    double mean_l2 = 0.0;
    double mean_h1_plain = 0.0;
    double mean_h1_corr = 0.0;
    double mean_corr_ratio = 0.0;
    double mean_heat = 0.0;
};

struct StudyReport {
    std::vector<StudyRow> rows;  // ordered by (epsilon index, seed index)
    std::vector<StudyAggregate> aggregates;
    double c0_nominal = 0.0;
    double total_wall_ms = 0.0;
    int workers_used = 1;
};

// Full pipeline per (epsilon, seed): sample on (1/eps) * window, decompose,
// perforate, solve both problems, assemble the corrector, compare, optionally
// run the heat probe. Row errors are recorded per row unless fail_fast.
StudyReport run_study(const StudyConfig& config);

std::string report_csv(const StudyReport& report, const StudyConfig& config);
std::string report_manifest(const StudyReport& report, const StudyConfig& config);

}  // namespace perfhom
