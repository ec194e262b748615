#include "grid.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace perfhom {

Grid::Grid(const Box3& b, std::array<int, 3> nodes) : box(b), n(nodes) {
    if (!b.valid()) throw DomainError("grid box is degenerate");
    for (int a = 0; a < 3; ++a)
        if (n[a] < 3) throw DomainError("grid needs at least 3 nodes per axis");
    Vec3 s = b.side();
    h = {s.x / (n[0] - 1), s.y / (n[1] - 1), s.z / (n[2] - 1)};
}

Grid Grid::cubic(const Box3& b, int nodes_per_axis) {
    return Grid(b, {nodes_per_axis, nodes_per_axis, nodes_per_axis});
}

NodeMask NodeMask::plain(const Grid& g) {
    NodeMask m;
    m.grid = g;
    m.cls.assign(g.size(), std::uint8_t(NodeClass::FREE));
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (i == 0 || i == nx - 1 || j == 0 || j == ny - 1 || k == 0 || k == nz - 1)
                    m.cls[g.index(i, j, k)] = std::uint8_t(NodeClass::BOUNDARY);
    return m;
}

std::size_t NodeMask::count(NodeClass c) const {
    std::size_t out = 0;
    for (std::uint8_t v : cls) out += (v == std::uint8_t(c));
    return out;
}

namespace {
constexpr std::size_t kChunk = 4096;
}

double chunked_sum(const double* v, std::size_t n) {
    double total = 0.0;
    for (std::size_t base = 0; base < n; base += kChunk) {
        std::size_t end = std::min(n, base + kChunk);
        double part = 0.0;
        for (std::size_t i = base; i < end; ++i) part += v[i];
        total += part;
    }
    return total;
}

double chunked_dot(const double* a, const double* b, std::size_t n) {
    double total = 0.0;
    for (std::size_t base = 0; base < n; base += kChunk) {
        std::size_t end = std::min(n, base + kChunk);
        double part = 0.0;
        for (std::size_t i = base; i < end; ++i) part += a[i] * b[i];
        total += part;
    }
    return total;
}

namespace {

// Raw kernel shared by the field API and the solver hot loops.
void laplacian_raw(const Grid& g, const std::uint8_t* cls, const double* u, double* w) {
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    const double ax = 1.0 / (g.h.x * g.h.x), ay = 1.0 / (g.h.y * g.h.y), az = 1.0 / (g.h.z * g.h.z);
    const double diag = 2.0 * (ax + ay + az);
    const std::size_t sx = 1, sy = std::size_t(nx), sz = std::size_t(nx) * ny;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j) {
            std::size_t row = g.index(0, j, k);
            for (int i = 0; i < nx; ++i) {
                std::size_t p = row + i;
                if (cls[p] != std::uint8_t(NodeClass::FREE)) {
                    w[p] = 0.0;
                    continue;
                }
                // FREE nodes are never on a box face, so all six neighbors exist;
                // non-FREE neighbors hold 0 in admissible inputs by convention.
                w[p] = diag * u[p] - ax * (u[p - sx] + u[p + sx]) - ay * (u[p - sy] + u[p + sy]) -
                       az * (u[p - sz] + u[p + sz]);
            }
        }
}

}  // namespace

void apply_laplacian(const ScalarField& field, const NodeMask& mask, ScalarField& out) {
    if (!field.grid.same_layout(mask.grid)) throw ShapeError("apply_laplacian: grid mismatch");
    const Grid& g = field.grid;
    if (!out.grid.same_layout(g)) out = ScalarField(g);
    laplacian_raw(g, mask.cls.data(), field.values.data(), out.values.data());
}

ScalarField apply_laplacian(const ScalarField& field, const NodeMask& mask) {
    ScalarField out(field.grid);
    apply_laplacian(field, mask, out);
    return out;
}

CgReport cg_solve_raw(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                      const std::vector<double>& rhs, std::vector<double>& x, double tol,
                      int max_iter, const std::vector<double>* jacobi_diag) {
    const std::size_t n = rhs.size();
    x.assign(n, 0.0);
    const double bnorm = std::sqrt(chunked_dot(rhs.data(), rhs.data(), n));
    if (bnorm == 0.0) return {0, 0.0};

    std::vector<double> r = rhs, z(n), p(n), Ap(n);
    auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (jacobi_diag) {
            for (std::size_t i = 0; i < n; ++i) out[i] = in[i] / (*jacobi_diag)[i];
        } else {
            out = in;
        }
    };
    precondition(r, z);
    p = z;
    double rz = chunked_dot(r.data(), z.data(), n);
    double res = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, Ap);
        const double pAp = chunked_dot(p.data(), Ap.data(), n);
        if (pAp <= 0.0)
            throw ConvergenceError("cg: operator not positive definite on iterate", res);
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        res = std::sqrt(chunked_dot(r.data(), r.data(), n)) / bnorm;
        if (res <= tol) return {it, res};
        precondition(r, z);
        const double rz_next = chunked_dot(r.data(), z.data(), n);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw ConvergenceError("cg: no convergence within max_iter (residual " + std::to_string(res) + ")",
                           res);
}

ScalarField cg_solve(const std::function<void(const ScalarField&, ScalarField&)>& op,
                     const ScalarField& rhs, double tol, int max_iter, CgReport* report) {
    ScalarField in(rhs.grid), out(rhs.grid);
    auto apply = [&](const std::vector<double>& v, std::vector<double>& w) {
        in.values = v;
        op(in, out);
        w = out.values;
    };
    std::vector<double> x;
    CgReport rep = cg_solve_raw(apply, rhs.values, x, tol, max_iter);
    if (report) *report = rep;
    return ScalarField(rhs.grid, std::move(x));
}

Norms norms(const ScalarField& field) {
    const Grid& g = field.grid;
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    const double cell = g.h.x * g.h.y * g.h.z;
    const double* u = field.values.data();

    Norms out;
    out.l2 = std::sqrt(cell * chunked_dot(u, u, g.size()));

    const std::size_t sx = 1, sy = std::size_t(nx), sz = std::size_t(nx) * ny;
    double e = 0.0;
    auto edge_sum = [&](std::size_t stride, int ni, int nj, int nk, double coeff) {
        // fixed i->j->k order so the reduction is deterministic
        double acc = 0.0;
        for (int k = 0; k < nk; ++k)
            for (int j = 0; j < nj; ++j) {
                double part = 0.0;
                std::size_t row = g.index(0, j, k);
                for (int i = 0; i < ni; ++i) {
                    const double d = u[row + i + stride] - u[row + i];
                    part += d * d;
                }
                acc += part;
            }
        return coeff * acc;
    };
    e += edge_sum(sx, nx - 1, ny, nz, cell / (g.h.x * g.h.x));
    e += edge_sum(sy, nx, ny - 1, nz, cell / (g.h.y * g.h.y));
    e += edge_sum(sz, nx, ny, nz - 1, cell / (g.h.z * g.h.z));
    out.h1_semi = std::sqrt(e);
    return out;
}

double norm_l2(const ScalarField& field) { return norms(field).l2; }
double seminorm_h1(const ScalarField& field) { return norms(field).h1_semi; }

ScalarField extend_restrict(const ScalarField& field, const NodeMask& mask, ExtendRestrict) {
    if (!field.grid.same_layout(mask.grid)) throw ShapeError("extend_restrict: grid mismatch");
    ScalarField out(field.grid);
    const std::size_t n = field.values.size();
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = mask.is_free(i) ? field.values[i] : 0.0;
    return out;
}

ScalarField solve_dirichlet(const NodeMask& mask, const ScalarField& f, const ScalarField* g,
                            double shift, const ScalarField* shift_field, double tol, int max_iter,
                            bool jacobi, CgReport* report) {
    const Grid& grid = mask.grid;
    if (!f.grid.same_layout(grid)) throw ShapeError("solve_dirichlet: rhs grid mismatch");
    if (g && !g->grid.same_layout(grid)) throw ShapeError("solve_dirichlet: data grid mismatch");
    if (shift_field && !shift_field->grid.same_layout(grid))
        throw ShapeError("solve_dirichlet: shift field grid mismatch");

    const int nx = grid.n[0], ny = grid.n[1], nz = grid.n[2];
    const double ax = 1.0 / (grid.h.x * grid.h.x), ay = 1.0 / (grid.h.y * grid.h.y),
                 az = 1.0 / (grid.h.z * grid.h.z);
    const std::uint8_t* cls = mask.cls.data();
    const std::size_t sx = 1, sy = std::size_t(nx), sz = std::size_t(nx) * ny;

    // Right hand side: f restricted to FREE plus the Dirichlet lifting of g.
    std::vector<double> rhs(grid.size(), 0.0);
    const double* gv = g ? g->values.data() : nullptr;
    for (int k = 1; k < nz - 1; ++k)
        for (int j = 1; j < ny - 1; ++j) {
            std::size_t row = grid.index(0, j, k);
            for (int i = 1; i < nx - 1; ++i) {
                std::size_t p = row + i;
                if (cls[p] != std::uint8_t(NodeClass::FREE)) continue;
                double b = f.values[p];
                if (gv) {
                    if (cls[p - sx]) b += ax * gv[p - sx];
                    if (cls[p + sx]) b += ax * gv[p + sx];
                    if (cls[p - sy]) b += ay * gv[p - sy];
                    if (cls[p + sy]) b += ay * gv[p + sy];
                    if (cls[p - sz]) b += az * gv[p - sz];
                    if (cls[p + sz]) b += az * gv[p + sz];
                }
                rhs[p] = b;
            }
        }

    const double* w = shift_field ? shift_field->values.data() : nullptr;
    auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        laplacian_raw(grid, cls, v.data(), out.data());
        if (shift != 0.0) {
            const std::size_t n = out.size();
            for (std::size_t i = 0; i < n; ++i)
                if (cls[i] == std::uint8_t(NodeClass::FREE))
                    out[i] += shift * (w ? w[i] : 1.0) * v[i];
        }
    };

    std::vector<double> diag;
    if (jacobi) {
        diag.assign(grid.size(), 1.0);
        const double d0 = 2.0 * (ax + ay + az);
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (cls[i] == std::uint8_t(NodeClass::FREE))
                diag[i] = d0 + shift * (w ? w[i] : 1.0);
    }

    std::vector<double> x;
    CgReport rep = cg_solve_raw(apply, rhs, x, tol, max_iter, jacobi ? &diag : nullptr);
    if (report) *report = rep;

    ScalarField u(grid, std::move(x));
    if (gv)
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (cls[i]) u.values[i] = gv[i];
    return u;
}

void dump_field(const ScalarField& field, const std::string& path_base) {
    static_assert(std::endian::native == std::endian::little,
                  "field dump assumes a little-endian host");
    nlohmann::json side;
    side["grid"]["box"]["min"] = {field.grid.box.lo.x, field.grid.box.lo.y, field.grid.box.lo.z};
    side["grid"]["box"]["max"] = {field.grid.box.hi.x, field.grid.box.hi.y, field.grid.box.hi.z};
    side["grid"]["n"] = {field.grid.n[0], field.grid.n[1], field.grid.n[2]};
    side["order"] = "x-fastest";
    side["dtype"] = "f64-le";
    std::ofstream js(path_base + ".json");
    if (!js) throw DomainError("dump_field: cannot write " + path_base + ".json");
    js << side.dump(2) << "\n";
    std::ofstream raw(path_base + ".f64", std::ios::binary);
    if (!raw) throw DomainError("dump_field: cannot write " + path_base + ".f64");
    raw.write(reinterpret_cast<const char*>(field.values.data()),
              std::streamsize(field.values.size() * sizeof(double)));
}

ScalarField load_field(const std::string& path_base) {
    std::ifstream js(path_base + ".json");
    if (!js) throw DomainError("load_field: cannot read " + path_base + ".json");
    nlohmann::json side = nlohmann::json::parse(js);
    if (side.at("order") != "x-fastest" || side.at("dtype") != "f64-le")
        throw DomainError("load_field: unsupported layout in sidecar");
    auto mn = side.at("grid").at("box").at("min");
    auto mx = side.at("grid").at("box").at("max");
    auto nn = side.at("grid").at("n");
    Grid g(Box3{{mn[0], mn[1], mn[2]}, {mx[0], mx[1], mx[2]}}, {nn[0], nn[1], nn[2]});
    ScalarField f(g);
    std::ifstream raw(path_base + ".f64", std::ios::binary);
    if (!raw) throw DomainError("load_field: cannot read " + path_base + ".f64");
    raw.read(reinterpret_cast<char*>(f.values.data()),
             std::streamsize(f.values.size() * sizeof(double)));
    if (std::size_t(raw.gcount()) != f.values.size() * sizeof(double))
        throw DomainError("load_field: raw payload size mismatch");
    return f;
}

}  // namespace perfhom
