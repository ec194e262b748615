#pragma once

#include <variant>
#include <vector>

#include "base.hpp"

namespace perfhom {

// Hole shapes: compact sets with circumcenter at the origin. Three parametric
// families, each with exact containment, diameter, and circumradius.

struct Ball {
    double radius = 1.0;
};

struct AxisBox {
    Vec3 half_widths{1.0, 1.0, 1.0};
};

struct UnionOfBalls {
    struct Member {
        Vec3 center;
        double radius = 0.0;
    };
    std::vector<Member> balls;
};

struct HoleShape {
    std::variant<Ball, AxisBox, UnionOfBalls> body;

    static HoleShape ball(double r);
    static HoleShape axis_box(Vec3 half_widths);
    static HoleShape union_of_balls(std::vector<UnionOfBalls::Member> members);

    const char* kind() const;
    bool operator==(const HoleShape& o) const;
};

// Closed-set containment: boundary points count as inside.
bool shape_contains(const HoleShape& s, const Vec3& x);

// Exact for all three families; for UnionOfBalls the diameter is
// max over pairs of |c_i - c_j| + r_i + r_j (attained on some pair of spheres).
double shape_diameter(const HoleShape& s);

// Radius of the smallest origin-centered ball containing the shape.
double shape_circumradius(const HoleShape& s);

// t * shape, kind preserved, every length parameter multiplied by t.
HoleShape shape_scale(const HoleShape& s, double t);

// A shape placed in the ambient space: center + scale_factor * shape.
struct Placement {
    Vec3 center;
    double scale_factor = 1.0;
    HoleShape shape;

    bool contains(const Vec3& x) const {
        return shape_contains(shape, (x - center) / scale_factor);
    }
    double circumradius() const { return scale_factor * shape_circumradius(shape); }
};

void validate_shape(const HoleShape& s);  // throws ShapeError on an inadmissible shape

}  // namespace perfhom
