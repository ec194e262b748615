#pragma once

#include <optional>
#include <vector>

#include "geometry.hpp"
#include "grid.hpp"

namespace perfhom {

enum class CapMethod { Analytic, Grid, GridExtrapolated };

const char* cap_method_name(CapMethod m);

struct CapacityEstimate {
    double value = 0.0;
    CapMethod method = CapMethod::Analytic;
    std::optional<int> resolution;           // grid nodes per axis, when a grid was used
    std::optional<double> upper_bound;       // certified upper bound on the whole-space value
    double relative_error_indicator = 0.0;   // dimensionless spread of the estimate
};

struct MazyaFactor {
    int d = 3;
    double lambda = 0.0;
    double value = 0.0;
};

// f_d(lambda): (1/(lambda-1))(1 + 2 ln lambda) at d = 3, else (2/(d-3))/(lambda-1).
// Multiplicative overhead of relative capacity in a ball of radius lambda*r:
// Cap(F, U_{lambda r}) <= (1 + f_d(lambda)) Cap F for F inside B_r.
double mazya_factor(int d, double lambda);
MazyaFactor mazya(int d, double lambda);

// Analytic ball capacity: Cap(B_r, U_R) = (d-2) omega_{d-1} / (r^{2-d} - R^{2-d});
// pass R = infinity for the whole-space Cap B_r = (d-2) omega_{d-1} r^{d-2}.
CapacityEstimate cap_ball(double r, double R, int d);

struct CapGridOptions {
    bool extrapolate = false;  // Richardson across (n, 2n-1), reported as grid-extrapolated
    double tol = 1e-8;
    int max_iter = 50000;
};

// Discrete relative capacity of shape in the ball U_R(0): grid on [-R,R]^3,
// nodes outside the sphere and on the box faces pinned to 0, nodes whose
// centers lie in the shape pinned to 1, energy = h^{d-2} sum over all grid
// edges of the squared difference of the solved potential. d = 3 only.
CapacityEstimate cap_relative_grid(const HoleShape& shape, double domain_radius, int n,
                                   const CapGridOptions& opt = {});

// Whole-space capacity estimate from an increasing truncation schedule: each
// relative value m_R is deflated by the far-field monopole factor,
// C = m / (1 + m * R^{2-d} / ((d-2) omega_{d-1})), exact for balls; the value
// at the largest R is returned, the raw annulus value there is the certified
// upper bound, and the indicator is the relative spread of the corrected
// schedule values. raw_values, when given, receives (R, m_R) pairs.
CapacityEstimate cap_whole_space(const HoleShape& shape, const std::vector<double>& R_schedule,
                                 int n, const CapGridOptions& opt = {},
                                 std::vector<std::pair<double, double>>* raw_values = nullptr);

// Cap F / (diam F)^{d-2}: the scale-invariant thickness ratio.
double alpha_ratio(const HoleShape& shape, const CapacityEstimate& cap, int d = 3);

// Capacitary potential on an externally supplied mask (HOLE pinned to 1,
// BOUNDARY to 0); the linear-solve output is clamped to [0,1], the projection
// onto the admissible class (cannot increase the energy). Shared with the
// corrector assembly.
ScalarField capacitary_potential(const NodeMask& mask, double tol, int max_iter);

}  // namespace perfhom
