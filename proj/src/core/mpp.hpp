#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace perfhom {

struct MppPoint {
    Vec3 z;
    HoleShape shape;
    double rho = 0.0;  // circumradius of shape
    double cap = 0.0;  // whole-space capacity of shape
};

bool operator==(const MppPoint& a, const MppPoint& b);

// Mark distribution: a finite mixture of template shapes. A single atom means
// a deterministic mark; weights need not be normalized.
struct MarkAtom {
    HoleShape shape;
    double weight = 1.0;
};

struct MarkLaw {
    std::vector<MarkAtom> atoms;
    static MarkLaw fixed(HoleShape shape);
};

bool operator==(const MarkAtom& a, const MarkAtom& b);
bool operator==(const MarkLaw& a, const MarkLaw& b);

enum class GeneratorKind { Poisson, Lattice, PerturbedLattice, MaternHardcore, Mixture };

const char* generator_kind_name(GeneratorKind k);
GeneratorKind generator_kind_from_name(const std::string& name);  // ConfigError on unknown

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Poisson;
    double intensity = 0.0;        // poisson, matern_hardcore parent
    double spacing = 0.0;          // lattice, perturbed_lattice
    double jitter = 0.0;           // perturbed_lattice, amplitude per axis
    double hardcore_radius = 0.0;  // matern_hardcore
    double mix_p = 0.0;            // mixture: probability of component a
    std::shared_ptr<GeneratorSpec> mix_a, mix_b;
    MarkLaw mark_law;              // unused by mixture (components carry their own)

    static GeneratorSpec poisson(double intensity, MarkLaw law);
    static GeneratorSpec lattice(double spacing, MarkLaw law);
    static GeneratorSpec perturbed_lattice(double spacing, double jitter, MarkLaw law);
    static GeneratorSpec matern_hardcore(double intensity, double hardcore_radius, MarkLaw law);
    static GeneratorSpec mixture(GeneratorSpec a, GeneratorSpec b, double p);
};

bool operator==(const GeneratorSpec& a, const GeneratorSpec& b);

void validate_generator(const GeneratorSpec& spec);  // throws ConfigError

struct MppRealization {
    Box3 window;
    GeneratorSpec generator;
    std::uint64_t seed = 0;
    int cap_resolution = 0;  // grid nodes per axis used for non-ball mark capacities, 0 if all analytic
    std::vector<MppPoint> points;
};

bool operator==(const MppRealization& a, const MppRealization& b);

// Deterministic sampling: one draw stream per (spec, window, seed), consumed in
// the documented order (coins and counts, then positions, then marks). The
// mixture flips a single Bernoulli(p) coin choosing component a with
// probability p, then delegates to that component with the same stream.
MppRealization sample_process(const GeneratorSpec& spec, const Box3& window, std::uint64_t seed);

// close[i] = 1 iff some other point lies at squared distance < delta^2 from
// point i. Cell-bucket implementation; the quadratic reference is kept for
// cross-checks and must agree exactly.
std::vector<char> close_flags(const std::vector<Vec3>& pts, double delta);
std::vector<char> close_flags_naive(const std::vector<Vec3>& pts, double delta);

// Splits into (close, far): close holds the points whose nearest distinct
// ground point is strictly closer than delta, far the rest. A point with no
// distinct neighbor is far. Both halves keep the window, generator and seed.
std::pair<MppRealization, MppRealization> thin(const MppRealization& real, double delta);

// |region|^{-1} * sum over points with z in region (half-open) of weight(cap, rho).
double empirical_average(const MppRealization& real,
                         const std::function<double(double, double)>& weight, const Box3& region);

// |W|^{-1} * sum of cap over points inside the realization's window.
double estimate_c0(const MppRealization& real);

// Good/bad split of the points with eps*z inside the physical window
// eps*real.window. All index vectors refer to real.points and are sorted.
struct GoodBadDecomposition {
    double epsilon = 0.0;
    double alpha = 0.0;
    double M = 0.0;
    double r_eps = 0.0;
    double eta_eps = 0.0;
    std::vector<std::size_t> in_window;
    std::vector<std::size_t> J_b;        // oversized radius
    std::vector<std::size_t> K_b;        // crowded pair
    std::vector<std::size_t> I_tilde_b;  // safety ball touches an oversized hole ball
    std::vector<std::size_t> I_b;        // union of the three
    std::vector<std::size_t> I_g;        // remaining in-window points
    std::vector<double> d_z;             // parallel to I_g: radius of the good ball U_z
    std::vector<std::size_t> I_gM;       // good points with d_z >= eps/M
};

GoodBadDecomposition good_bad_decompose(const MppRealization& real, double epsilon, double alpha,
                                        double M);

struct DecompositionCheck {
    std::size_t partition_violations = 0;   // in_window != I_g disjoint-union I_b
    std::size_t dz_bound_violations = 0;    // 2 eps^3 rho <= d_z <= eps failures
    std::size_t disjoint_violations = 0;    // overlapping good hole balls
    std::size_t separation_violations = 0;  // good hole closer than eta/2 to a bad safety ball
    double min_separation = 0.0;            // observed min distance good holes to bad region
    bool ok() const {
        return partition_violations == 0 && dz_bound_violations == 0 && disjoint_violations == 0 &&
               separation_violations == 0;
    }
};

DecompositionCheck verify_decomposition(const MppRealization& real, const GoodBadDecomposition& dec);

struct DiagnosticsRow {
    double epsilon = 0.0;
    double r_eps = 0.0;
    double scaled_bad_count = 0.0;         // eps^3 * |I_b|
    double scaled_truncation_excess = 0.0; // eps^3 * |{spread-out in-window points} \ I_gM|
    bool balls_disjoint = true;
    bool separation_ok = true;
    bool dz_bounds_ok = true;
};

std::vector<DiagnosticsRow> decomposition_diagnostics(const MppRealization& real,
                                                      const std::vector<double>& epsilons,
                                                      double alpha, double M);

}  // namespace perfhom
