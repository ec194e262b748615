#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "base.hpp"

namespace perfhom {

// Uniform structured grid on a closed box. Node (i,j,k) sits at
// box.lo + (i*h.x, j*h.y, k*h.z); linear index is x-fastest.
struct Grid {
    Box3 box;
    std::array<int, 3> n{0, 0, 0};
    Vec3 h;

    Grid() = default;
    Grid(const Box3& b, std::array<int, 3> nodes);
    static Grid cubic(const Box3& b, int nodes_per_axis);

    std::size_t size() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
    }
    std::size_t index(int i, int j, int k) const {
        return std::size_t(i) + std::size_t(n[0]) * (std::size_t(j) + std::size_t(n[1]) * k);
    }
    Vec3 node(int i, int j, int k) const {
        return {box.lo.x + i * h.x, box.lo.y + j * h.y, box.lo.z + k * h.z};
    }
    bool same_layout(const Grid& o) const { return n == o.n && box == o.box; }
};

enum class NodeClass : std::uint8_t { FREE = 0, BOUNDARY = 1, HOLE = 2 };

// Per-node labels. BOUNDARY and HOLE both carry Dirichlet value 0 in solves;
// every node on the box faces is BOUNDARY.
struct NodeMask {
    Grid grid;
    std::vector<std::uint8_t> cls;

    NodeMask() = default;
    explicit NodeMask(const Grid& g)
        : grid(g), cls(g.size(), std::uint8_t(NodeClass::FREE)) {}

    static NodeMask plain(const Grid& g);  // faces BOUNDARY, interior FREE

    bool is_free(std::size_t idx) const { return cls[idx] == std::uint8_t(NodeClass::FREE); }
    std::size_t count(NodeClass c) const;
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {}
};

// Deterministic fixed-order reductions: partial sums over fixed-size chunks,
// accumulated in index order, so results are bit-stable for fixed inputs.
double chunked_sum(const double* v, std::size_t n);
double chunked_dot(const double* a, const double* b, std::size_t n);

// -Laplacian, 7-point second-order stencil at FREE nodes; non-FREE neighbors
// contribute value 0 and the output is 0 at non-FREE nodes.
void apply_laplacian(const ScalarField& field, const NodeMask& mask, ScalarField& out);
ScalarField apply_laplacian(const ScalarField& field, const NodeMask& mask);

struct CgReport {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Plain conjugate gradient on raw vectors. `apply` must be SPD on the span of
// the iterates. Throws ConvergenceError (carrying the final residual) if the
// relative residual has not reached tol within max_iter iterations.
// `jacobi_diag`, when given, enables diagonally preconditioned CG.
CgReport cg_solve_raw(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                      const std::vector<double>& rhs, std::vector<double>& x, double tol,
                      int max_iter, const std::vector<double>* jacobi_diag = nullptr);

// Field-level CG: operator maps fields to fields, rhs zero at non-FREE nodes.
ScalarField cg_solve(const std::function<void(const ScalarField&, ScalarField&)>& op,
                     const ScalarField& rhs, double tol, int max_iter, CgReport* report = nullptr);

struct Norms {
    double l2 = 0.0;
    double h1_semi = 0.0;
};

// l2^2 = (prod h) * sum_nodes v^2; h1_semi^2 = sum_axes (prod h / h_a^2) *
// sum_{edges along a} (v_i - v_j)^2. Reduces to h^d and h^{d-2} sums on
// isotropic grids.
Norms norms(const ScalarField& field);
double norm_l2(const ScalarField& field);
double seminorm_h1(const ScalarField& field);

enum class ExtendRestrict { Extend, Restrict };

// Zero extension i (FREE values kept, everything else 0) and restriction r
// (same node action; the two directions differ only in reading).
ScalarField extend_restrict(const ScalarField& field, const NodeMask& mask, ExtendRestrict dir);

// Solves (-lap + shift * w(x)) u = f on FREE nodes with u = g on non-FREE
// nodes (g = nullptr means 0). w is shift_field when given, else 1. Returns
// the full-grid field (g on non-FREE). The Dirichlet data enters the right
// hand side by node elimination.
ScalarField solve_dirichlet(const NodeMask& mask, const ScalarField& f, const ScalarField* g,
                            double shift, const ScalarField* shift_field, double tol, int max_iter,
                            bool jacobi = false, CgReport* report = nullptr);

// Field dump: <base>.json sidecar {grid:{box,n}, order:"x-fastest",
// dtype:"f64-le"} plus <base>.f64 raw little-endian doubles, x-fastest.
void dump_field(const ScalarField& field, const std::string& path_base);
ScalarField load_field(const std::string& path_base);

}  // namespace perfhom
