#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace perfhom {

// Error taxonomy shared by all modules. Exit-code mapping lives in the CLI:
// DomainError and friends -> 1, ConfigError -> 2.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};
struct ResolutionError : std::runtime_error {
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};
struct ConvergenceError : std::runtime_error {
    double final_residual = -1.0;
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), final_residual(residual) {}
};
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double t) const { return {x * t, y * t, z * t}; }
    Vec3 operator/(double t) const { return {x / t, y / t, z / t}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double t, const Vec3& v) { return v * t; }

inline double dist(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Axis-aligned box. Point-process membership is half-open (lo <= p < hi) so
// abutting windows tile without double counting; grids use the closed box.
struct Box3 {
    Vec3 lo, hi;

    Vec3 side() const { return hi - lo; }
    double volume() const {
        Vec3 s = side();
        return s.x * s.y * s.z;
    }
    bool valid() const { return hi.x > lo.x && hi.y > lo.y && hi.z > lo.z; }
    bool contains_halfopen(const Vec3& p) const {
        return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y && p.z >= lo.z && p.z < hi.z;
    }
    bool contains_closed(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
               p.z <= hi.z;
    }
    // Euclidean distance from p to the closed box (0 inside).
    double exterior_distance(const Vec3& p) const {
        double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
        double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
        double dz = std::max({lo.z - p.z, 0.0, p.z - hi.z});
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    Box3 scaled(double t) const { return {lo * t, hi * t}; }
    Box3 expanded(double m) const { return {{lo.x - m, lo.y - m, lo.z - m}, {hi.x + m, hi.y + m, hi.z + m}}; }
    bool contains_box(const Box3& inner) const {
        return inner.lo.x >= lo.x && inner.lo.y >= lo.y && inner.lo.z >= lo.z &&
               inner.hi.x <= hi.x && inner.hi.y <= hi.y && inner.hi.z <= hi.z;
    }
    bool operator==(const Box3& o) const { return lo == o.lo && hi == o.hi; }
};

inline constexpr int kDim = 3;  // the PDE pipeline is d = 3; capacity formulas take d explicitly

// Surface measure of the unit sphere S^{d-1}: 2 pi^{d/2} / Gamma(d/2).
double unit_sphere_area(int d);

}  // namespace perfhom
