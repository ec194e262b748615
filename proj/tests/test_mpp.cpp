#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "core/capacity.hpp"
#include "core/mpp.hpp"

using namespace perfhom;

namespace {

const Box3 kBox8{{0, 0, 0}, {8, 8, 8}};
const Box3 kBox4{{0, 0, 0}, {4, 4, 4}};

MarkLaw ball_mark(double r) { return MarkLaw::fixed(HoleShape::ball(r)); }

std::vector<Vec3> positions(const MppRealization& real) {
    std::vector<Vec3> out;
    for (const MppPoint& p : real.points) out.push_back(p.z);
    return out;
}

}  // namespace

TEST_CASE("seed mixing matches the frozen reference values") {
    CHECK(mix64(0, 0) == 0xe220a8397b1dcdafull);
    CHECK(mix64(1, 0) == 0x910a2dec89025cc1ull);
    CHECK(mix64(1, 1) == 0xbeeb8da1658eec67ull);
    CHECK(mix64(42, 7) == 0xccf635ee9e9e2fa4ull);
    CHECK(mix64(0x8000000000000000ull, 123456789ull) == 0xacdc9a05bba6d5b7ull);
}

TEST_CASE("uniform doubles stay in the half-open unit interval") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.next_double();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("poisson counts have the right first two moments") {
    Rng rng(11);
    const double mean = 40.0;
    double acc = 0.0, acc2 = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        const double v = double(rng.poisson(mean));
        acc += v;
        acc2 += v * v;
    }
    const double m = acc / n;
    const double var = acc2 / n - m * m;
    CHECK(m == doctest::Approx(mean).epsilon(0.02));
    CHECK(var == doctest::Approx(mean).epsilon(0.12));
    CHECK(Rng(1).poisson(0.0) == 0);
}

TEST_CASE("lattice sampling fills the window exactly once per site") {
    const GeneratorSpec gen = GeneratorSpec::lattice(1.0, ball_mark(1.5));
    const MppRealization real = sample_process(gen, kBox8, 7);
    CHECK(real.points.size() == 512);
    CHECK(real.window == kBox8);
    CHECK(real.seed == 7);
    CHECK(real.cap_resolution == 0);  // all marks analytic
    std::set<std::array<long long, 3>> sites;
    for (const MppPoint& p : real.points) {
        CHECK(kBox8.contains_halfopen(p.z));
        CHECK(p.rho == 1.5);
        CHECK(p.z.x == std::floor(p.z.x));  // exact integer coordinates
        sites.insert({llround(p.z.x), llround(p.z.y), llround(p.z.z)});
    }
    CHECK(sites.size() == 512);
}

TEST_CASE("the intensity estimator is exact on the deterministic lattice") {
    const GeneratorSpec gen = GeneratorSpec::lattice(1.0, ball_mark(1.5));
    const MppRealization real = sample_process(gen, kBox8, 1);
    const double cap = cap_ball(1.5, std::numeric_limits<double>::infinity(), 3).value;
    // 512 equal summands over volume 512; sequential addition rounds at odd
    // multiples, so exactness here is up to accumulation error only.
    CHECK(estimate_c0(real) == doctest::Approx(cap).epsilon(1e-14));
    CHECK(estimate_c0(real) == doctest::Approx(6.0 * M_PI).epsilon(1e-13));
}

TEST_CASE("sampling is a pure function of spec, window, and seed") {
    const GeneratorSpec gen = GeneratorSpec::poisson(3.0, ball_mark(0.5));
    const MppRealization a = sample_process(gen, kBox4, 11);
    const MppRealization b = sample_process(gen, kBox4, 11);
    CHECK(a == b);
    const MppRealization c = sample_process(gen, kBox4, 12);
    CHECK_FALSE(a == c);
}

TEST_CASE("poisson counts concentrate at intensity times volume") {
    const GeneratorSpec gen = GeneratorSpec::poisson(2.0, ball_mark(0.1));
    double acc = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const MppRealization real = sample_process(gen, kBox4, mix64(5, s));
        for (const MppPoint& p : real.points) CHECK(kBox4.contains_halfopen(p.z));
        acc += double(real.points.size());
    }
    const double mean = acc / seeds;  // target 2 * 64 = 128
    CHECK(std::fabs(mean - 128.0) < 5.0);
}

TEST_CASE("perturbed lattice jitters each site in place") {
    const GeneratorSpec gen = GeneratorSpec::perturbed_lattice(1.0, 0.25, ball_mark(0.3));
    const MppRealization real = sample_process(gen, kBox8, 99);
    CHECK(real.points.size() == 512);
    for (const MppPoint& p : real.points) {
        const Vec3 site{std::round(p.z.x), std::round(p.z.y), std::round(p.z.z)};
        CHECK(std::fabs(p.z.x - site.x) <= 0.25);
        CHECK(std::fabs(p.z.y - site.y) <= 0.25);
        CHECK(std::fabs(p.z.z - site.z) <= 0.25);
    }
}

TEST_CASE("hardcore thinning leaves no close pair") {
    const GeneratorSpec gen = GeneratorSpec::matern_hardcore(5.0, 0.5, ball_mark(0.1));
    const GeneratorSpec parent_gen = GeneratorSpec::poisson(5.0, ball_mark(0.1));
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const MppRealization real = sample_process(gen, kBox4, s);
        const std::vector<Vec3> pts = positions(real);
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                CHECK((pts[i] - pts[j]).norm() >= 0.5);
        // Strictly fewer points than the untinned parent process on average.
        const MppRealization parent = sample_process(parent_gen, kBox4, s);
        CHECK(real.points.size() < parent.points.size());
    }
}

TEST_CASE("mixture picks one pure component per realization") {
    const GeneratorSpec gen = GeneratorSpec::mixture(
        GeneratorSpec::lattice(1.0, ball_mark(0.05)),
        GeneratorSpec::lattice(1.0, ball_mark(0.2)), 0.5);
    int small = 0, large = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        const MppRealization real = sample_process(gen, kBox8, mix64(77, s));
        REQUIRE(real.points.size() == 512);
        const double r0 = real.points.front().rho;
        for (const MppPoint& p : real.points) CHECK(p.rho == r0);  // no within-realization mixing
        if (r0 == 0.05)
            ++small;
        else if (r0 == 0.2)
            ++large;
    }
    CHECK(small + large == 40);
    CHECK(small >= 8);  // two-sided binomial(40, 1/2) sanity band
    CHECK(large >= 8);
}

TEST_CASE("mark mixtures draw every atom eventually") {
    MarkLaw law;
    law.atoms.push_back({HoleShape::ball(0.1), 1.0});
    law.atoms.push_back({HoleShape::ball(0.3), 3.0});
    const GeneratorSpec gen = GeneratorSpec::lattice(1.0, law);
    const MppRealization real = sample_process(gen, kBox8, 5);
    int small = 0, large = 0;
    for (const MppPoint& p : real.points) {
        if (p.rho == 0.1) ++small;
        if (p.rho == 0.3) ++large;
    }
    CHECK(small + large == 512);
    CHECK(small > 60);   // expected 128
    CHECK(large > 300);  // expected 384
}

TEST_CASE("close flags match the quadratic reference") {
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const GeneratorSpec gen = GeneratorSpec::poisson(3.0, ball_mark(0.1));
        const std::vector<Vec3> pts = positions(sample_process(gen, kBox4, s));
        for (double delta : {0.3, 1.0, 2.5}) {
            const std::vector<char> fast = close_flags(pts, delta);
            const std::vector<char> slow = close_flags_naive(pts, delta);
            CHECK(fast == slow);
        }
    }
}

TEST_CASE("thinning partitions the realization exactly") {
    const GeneratorSpec gen = GeneratorSpec::poisson(4.0, ball_mark(0.1));
    for (std::uint64_t s = 1; s <= 100; ++s) {
        const MppRealization real = sample_process(gen, kBox4, s);
        const auto [close_part, far_part] = thin(real, 1.0);
        CHECK(close_part.points.size() + far_part.points.size() == real.points.size());
        CHECK(close_part.window == real.window);
        CHECK(far_part.seed == real.seed);
        // Multiset partition: counting by exact equality.
        std::vector<MppPoint> merged = close_part.points;
        merged.insert(merged.end(), far_part.points.begin(), far_part.points.end());
        auto key = [](const MppPoint& p) { return std::tuple(p.z.x, p.z.y, p.z.z, p.rho); };
        std::vector<MppPoint> orig = real.points;
        std::sort(merged.begin(), merged.end(),
                  [&](const MppPoint& a, const MppPoint& b) { return key(a) < key(b); });
        std::sort(orig.begin(), orig.end(),
                  [&](const MppPoint& a, const MppPoint& b) { return key(a) < key(b); });
        REQUIRE(merged.size() == orig.size());
        for (std::size_t i = 0; i < orig.size(); ++i) CHECK(merged[i] == orig[i]);
    }
}

TEST_CASE("the close part grows with delta") {
    const GeneratorSpec gen = GeneratorSpec::poisson(4.0, ball_mark(0.1));
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const MppRealization real = sample_process(gen, kBox4, s);
        const auto [c1, f1] = thin(real, 0.5);
        const auto [c2, f2] = thin(real, 1.5);
        // Every close point at the smaller threshold stays close at the larger.
        for (const MppPoint& p : c1.points) {
            const bool found = std::any_of(c2.points.begin(), c2.points.end(),
                                           [&](const MppPoint& q) { return p == q; });
            CHECK(found);
        }
        CHECK(c1.points.size() <= c2.points.size());
    }
}

TEST_CASE("thinning thresholds are strict") {
    MppRealization real;
    real.window = kBox4;
    MppPoint a, b;
    a.z = {1.0, 1.0, 1.0};
    b.z = {2.0, 1.0, 1.0};  // distance exactly 1
    a.shape = b.shape = HoleShape::ball(0.1);
    a.rho = b.rho = 0.1;
    real.points = {a, b};
    const auto [close_eq, far_eq] = thin(real, 1.0);
    CHECK(close_eq.points.empty());  // needs distance strictly below delta
    CHECK(far_eq.points.size() == 2);
    const auto [close_above, far_above] = thin(real, 1.0000001);
    CHECK(close_above.points.size() == 2);
    CHECK(far_above.points.empty());
}

TEST_CASE("an isolated point is always far") {
    MppRealization real;
    real.window = kBox4;
    MppPoint a;
    a.z = {2.0, 2.0, 2.0};
    a.shape = HoleShape::ball(0.1);
    a.rho = 0.1;
    real.points = {a};
    const auto [close_part, far_part] = thin(real, 100.0);
    CHECK(close_part.points.empty());
    CHECK(far_part.points.size() == 1);
}

TEST_CASE("empirical averages restrict to the region") {
    const GeneratorSpec gen = GeneratorSpec::lattice(1.0, ball_mark(1.5));
    const MppRealization real = sample_process(gen, kBox8, 1);
    const double cap = real.points.front().cap;
    const double over_all =
        empirical_average(real, [](double c, double) { return c; }, kBox8);
    CHECK(over_all == doctest::Approx(cap).epsilon(1e-13));
    const double over_sub =
        empirical_average(real, [](double c, double) { return c; }, kBox4);
    CHECK(over_sub == doctest::Approx(cap).epsilon(1e-13));  // 64 points over volume 64
    const double rho_avg =
        empirical_average(real, [](double, double r) { return r; }, kBox8);
    CHECK(rho_avg == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("the estimator obeys the law of large numbers across window sizes") {
    const GeneratorSpec gen = GeneratorSpec::poisson(50.0, ball_mark(0.1));
    const double target = 50.0 * cap_ball(0.1, std::numeric_limits<double>::infinity(), 3).value;
    const int seeds = 40;
    double acc8 = 0.0, acc8sq = 0.0, acc4 = 0.0, acc4sq = 0.0;
    for (int s = 0; s < seeds; ++s) {
        const double v8 = estimate_c0(sample_process(gen, kBox8, mix64(1000, s)));
        const double v4 = estimate_c0(sample_process(gen, kBox4, mix64(2000, s)));
        acc8 += v8;
        acc8sq += v8 * v8;
        acc4 += v4;
        acc4sq += v4 * v4;
    }
    const double mean8 = acc8 / seeds;
    const double sd8 = std::sqrt(acc8sq / seeds - mean8 * mean8);
    const double mean4 = acc4 / seeds;
    const double sd4 = std::sqrt(acc4sq / seeds - mean4 * mean4);
    CHECK(std::fabs(mean8 - target) < 5.0 * sd8 / std::sqrt(double(seeds)) + 0.05);
    // Fluctuations shrink like the square root of the window volume.
    CHECK(sd4 / sd8 > 1.5);
    CHECK(sd4 / sd8 < 5.0);
}

TEST_CASE("generator validation rejects inconsistent specs") {
    CHECK_THROWS_AS(validate_generator(GeneratorSpec::poisson(-1.0, ball_mark(0.1))),
                    ConfigError);
    CHECK_THROWS_AS(validate_generator(GeneratorSpec::lattice(0.0, ball_mark(0.1))),
                    ConfigError);
    CHECK_THROWS_AS(
        validate_generator(GeneratorSpec::matern_hardcore(1.0, -0.5, ball_mark(0.1))),
        ConfigError);
    CHECK_THROWS_AS(
        validate_generator(GeneratorSpec::mixture(GeneratorSpec::poisson(1.0, ball_mark(0.1)),
                                                  GeneratorSpec::poisson(1.0, ball_mark(0.1)),
                                                  1.5)),
        ConfigError);
    CHECK_NOTHROW(validate_generator(GeneratorSpec::poisson(1.0, ball_mark(0.1))));
}

TEST_CASE("generator kind names round-trip") {
    for (GeneratorKind k :
         {GeneratorKind::Poisson, GeneratorKind::Lattice, GeneratorKind::PerturbedLattice,
          GeneratorKind::MaternHardcore, GeneratorKind::Mixture}) {
        CHECK(generator_kind_from_name(generator_kind_name(k)) == k);
    }
    CHECK_THROWS_AS(generator_kind_from_name("gibberish"), ConfigError);
}
