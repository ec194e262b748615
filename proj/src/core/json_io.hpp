#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "capacity.hpp"
#include "mpp.hpp"

namespace perfhom {

// JSON forms used by the CLI and the shared library. Numbers round-trip
// exactly: serialization uses the shortest representation that parses back to
// the same double. Parsers throw ConfigError on any structural defect.

nlohmann::json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j, const char* where);

nlohmann::json box_to_json(const Box3& b);
Box3 box_from_json(const nlohmann::json& j, const char* where);

// {"kind": "...", "params": {...}}
nlohmann::json shape_to_json(const HoleShape& shape);
HoleShape shape_from_json(const nlohmann::json& j);

// Recursive for mixtures: {"kind": "mixture", "p": ..., "a": {...}, "b": {...}}.
nlohmann::json generator_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const nlohmann::json& j);

// {window, generator, seed, cap_resolution, points: [{z, shape, rho, cap}]}
nlohmann::json realization_to_json(const MppRealization& real);
MppRealization realization_from_json(const nlohmann::json& j);

nlohmann::json capacity_to_json(const CapacityEstimate& est);

// Counts, radii, and the exact invariant-check outcome for one decomposition.
nlohmann::json decomposition_to_json(const GoodBadDecomposition& d, const DecompositionCheck& chk);

nlohmann::json diagnostics_to_json(const std::vector<DiagnosticsRow>& rows);

std::string json_dumps(const nlohmann::json& j);
nlohmann::json json_loads(const std::string& text, const char* where);

}  // namespace perfhom
