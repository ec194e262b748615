#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mpp.hpp"

namespace perfhom {

struct HeatConfig {
    bool enabled = false;
    double t = 0.05;
    double dt = 0.0;  // 0 means t/64
};

bool operator==(const HeatConfig& a, const HeatConfig& b);

GeneratorSpec default_generator();

struct StudyConfig {
    Box3 domain{Vec3{0.0, 0.0, 0.0}, Vec3{1.0, 1.0, 1.0}};
    int grid_n = 65;
    Box3 window{Vec3{-1.0, -1.0, -1.0}, Vec3{2.0, 2.0, 2.0}};  // default: domain expanded by 1
    GeneratorSpec generator = default_generator();
    std::vector<double> epsilons{0.5, 0.25};
    std::uint64_t base_seed = 1;
    int seed_count = 1;
    double alpha = 1.0;
    double M = 10.0;
    double tol = 1e-8;
    int max_iter = 20000;
    double resolve_factor = 2.0;
    std::string source = "manufactured";  // or "constant"
    HeatConfig heat;
    std::string output_dir = "out";
    bool extrapolate = false;
    bool allow_underresolved = false;
    bool dump_fields = false;
    bool fail_fast = false;
    bool timing = false;  // when false the CSV wall_ms column is 0 so reruns are byte-identical
    int workers = 1;
};

bool operator==(const StudyConfig& a, const StudyConfig& b);

// Strict plain-text config: [section] headers over key = value lines, full-line
// comments with # or ;. Unknown sections, unknown keys, duplicated keys, and
// keys that do not apply to the chosen generator are all errors.
StudyConfig parse_config(const std::string& text);
std::string render_config(const StudyConfig& cfg);  // parse(render(c)) == c
void validate_config(const StudyConfig& cfg);       // throws ConfigError

// Shape shorthand shared by configs and the command line:
//   ball:R    axis_box:HX:HY:HZ    union_of_balls:CX:CY:CZ:R[:CX:CY:CZ:R...]
HoleShape parse_shape_shorthand(const std::string& text);
std::string shape_shorthand(const HoleShape& shape);

std::uint64_t fnv1a64(std::string_view text);
std::string format_g17(double v);  // shortest %.17g rendering, round-trip exact

}  // namespace perfhom
