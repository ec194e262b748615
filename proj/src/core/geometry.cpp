#include "geometry.hpp"

#include <algorithm>
#include <cmath>

namespace perfhom {

double unit_sphere_area(int d) {
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

HoleShape HoleShape::ball(double r) {
    HoleShape s{Ball{r}};
    validate_shape(s);
    return s;
}

HoleShape HoleShape::axis_box(Vec3 half_widths) {
    HoleShape s{AxisBox{half_widths}};
    validate_shape(s);
    return s;
}

HoleShape HoleShape::union_of_balls(std::vector<UnionOfBalls::Member> members) {
    HoleShape s{UnionOfBalls{std::move(members)}};
    validate_shape(s);
    return s;
}

const char* HoleShape::kind() const {
    return std::visit(
        [](const auto& b) -> const char* {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Ball>) return "ball";
            if constexpr (std::is_same_v<T, AxisBox>) return "axis_box";
            if constexpr (std::is_same_v<T, UnionOfBalls>) return "union_of_balls";
        },
        body);
}

bool HoleShape::operator==(const HoleShape& o) const {
    if (body.index() != o.body.index()) return false;
    if (const auto* b = std::get_if<Ball>(&body))
        return b->radius == std::get<Ball>(o.body).radius;
    if (const auto* b = std::get_if<AxisBox>(&body))
        return b->half_widths == std::get<AxisBox>(o.body).half_widths;
    const auto& a = std::get<UnionOfBalls>(body).balls;
    const auto& c = std::get<UnionOfBalls>(o.body).balls;
    if (a.size() != c.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i].center == c[i].center) || a[i].radius != c[i].radius) return false;
    return true;
}

void validate_shape(const HoleShape& s) {
    std::visit(
        [](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Ball>) {
                if (!(b.radius > 0.0)) throw ShapeError("ball radius must be positive");
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                if (!(b.half_widths.x > 0.0 && b.half_widths.y > 0.0 && b.half_widths.z > 0.0))
                    throw ShapeError("axis_box half widths must be positive");
            } else {
                if (b.balls.empty()) throw ShapeError("union_of_balls needs at least one ball");
                for (const auto& m : b.balls)
                    if (!(m.radius > 0.0)) throw ShapeError("union_of_balls radii must be positive");
            }
        },
        s.body);
}

bool shape_contains(const HoleShape& s, const Vec3& x) {
    return std::visit(
        [&](const auto& b) -> bool {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return x.norm2() <= b.radius * b.radius;
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                return std::fabs(x.x) <= b.half_widths.x && std::fabs(x.y) <= b.half_widths.y &&
                       std::fabs(x.z) <= b.half_widths.z;
            } else {
                for (const auto& m : b.balls)
                    if ((x - m.center).norm2() <= m.radius * m.radius) return true;
                return false;
            }
        },
        s.body);
}

double shape_diameter(const HoleShape& s) {
    return std::visit(
        [](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return 2.0 * b.radius;
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                return 2.0 * b.half_widths.norm();
            } else {
                double dmax = 0.0;
                for (std::size_t i = 0; i < b.balls.size(); ++i)
                    for (std::size_t j = i; j < b.balls.size(); ++j)
                        dmax = std::max(dmax, dist(b.balls[i].center, b.balls[j].center) +
                                                  b.balls[i].radius + b.balls[j].radius);
                return dmax;
            }
        },
        s.body);
}

double shape_circumradius(const HoleShape& s) {
    return std::visit(
        [](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return b.radius;
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                return b.half_widths.norm();
            } else {
                double r = 0.0;
                for (const auto& m : b.balls) r = std::max(r, m.center.norm() + m.radius);
                return r;
            }
        },
        s.body);
}

HoleShape shape_scale(const HoleShape& s, double t) {
    if (!(t > 0.0)) throw DomainError("shape_scale: factor must be positive");
    return std::visit(
        [&](const auto& b) -> HoleShape {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return HoleShape{Ball{b.radius * t}};
            } else if constexpr (std::is_same_v<T, AxisBox>) {
                return HoleShape{AxisBox{b.half_widths * t}};
            } else {
                UnionOfBalls out;
                out.balls.reserve(b.balls.size());
                for (const auto& m : b.balls) out.balls.push_back({m.center * t, m.radius * t});
                return HoleShape{std::move(out)};
            }
        },
        s.body);
}

}  // namespace perfhom
