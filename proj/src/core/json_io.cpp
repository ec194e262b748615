#include "json_io.hpp"

namespace perfhom {

namespace {

std::string loc(const char* where) { return std::string(where) + ": "; }

double need_number(const nlohmann::json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(loc(where) + "missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

const nlohmann::json& need_object(const nlohmann::json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j[key].is_object())
        throw ConfigError(loc(where) + "missing or non-object field '" + key + "'");
    return j[key];
}

std::string need_string(const nlohmann::json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j[key].is_string())
        throw ConfigError(loc(where) + "missing or non-string field '" + key + "'");
    return j[key].get<std::string>();
}

}  // namespace

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const nlohmann::json& j, const char* where) {
    if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
        !j[2].is_number())
        throw ConfigError(loc(where) + "expected an array of three numbers");
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json box_to_json(const Box3& b) {
    return nlohmann::json{{"lo", vec3_to_json(b.lo)}, {"hi", vec3_to_json(b.hi)}};
}

Box3 box_from_json(const nlohmann::json& j, const char* where) {
    if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
        throw ConfigError(loc(where) + "expected an object with 'lo' and 'hi'");
    Box3 b{vec3_from_json(j["lo"], where), vec3_from_json(j["hi"], where)};
    if (!b.valid()) throw ConfigError(loc(where) + "box has nonpositive extent");
    return b;
}

nlohmann::json shape_to_json(const HoleShape& shape) {
    nlohmann::json j;
    if (const Ball* b = std::get_if<Ball>(&shape.body)) {
        j["kind"] = "ball";
        j["params"] = {{"radius", b->radius}};
    } else if (const AxisBox* ab = std::get_if<AxisBox>(&shape.body)) {
        j["kind"] = "axis_box";
        j["params"] = {{"half_widths", vec3_to_json(ab->half_widths)}};
    } else {
        const UnionOfBalls& u = std::get<UnionOfBalls>(shape.body);
        nlohmann::json balls = nlohmann::json::array();
        for (const UnionOfBalls::Member& m : u.balls)
            balls.push_back({{"center", vec3_to_json(m.center)}, {"radius", m.radius}});
        j["kind"] = "union_of_balls";
        j["params"] = {{"balls", balls}};
    }
    return j;
}

HoleShape shape_from_json(const nlohmann::json& j) {
    const char* where = "shape";
    const std::string kind = need_string(j, "kind", where);
    const nlohmann::json& p = need_object(j, "params", where);
    if (kind == "ball") return HoleShape::ball(need_number(p, "radius", where));
    if (kind == "axis_box") {
        if (!p.contains("half_widths"))
            throw ConfigError("shape: axis_box params need 'half_widths'");
        return HoleShape::axis_box(vec3_from_json(p["half_widths"], where));
    }
    if (kind == "union_of_balls") {
        if (!p.contains("balls") || !p["balls"].is_array() || p["balls"].empty())
            throw ConfigError("shape: union_of_balls params need a nonempty 'balls' array");
        std::vector<UnionOfBalls::Member> members;
        for (const nlohmann::json& m : p["balls"]) {
            if (!m.is_object() || !m.contains("center"))
                throw ConfigError("shape: each union member needs 'center' and 'radius'");
            members.push_back(UnionOfBalls::Member{vec3_from_json(m["center"], where),
                                                   need_number(m, "radius", where)});
        }
        return HoleShape::union_of_balls(std::move(members));
    }
    throw ConfigError("shape: unknown kind '" + kind + "'");
}

namespace {

nlohmann::json mark_law_to_json(const MarkLaw& law) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const MarkAtom& a : law.atoms)
        atoms.push_back({{"shape", shape_to_json(a.shape)}, {"weight", a.weight}});
    return nlohmann::json{{"atoms", atoms}};
}

MarkLaw mark_law_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty())
        throw ConfigError("mark_law: expected an object with a nonempty 'atoms' array");
    MarkLaw law;
    for (const nlohmann::json& a : j["atoms"]) {
        if (!a.is_object() || !a.contains("shape"))
            throw ConfigError("mark_law: each atom needs 'shape' and 'weight'");
        MarkAtom atom;
        atom.shape = shape_from_json(a["shape"]);
        atom.weight = need_number(a, "weight", "mark_law");
        law.atoms.push_back(std::move(atom));
    }
    return law;
}

}  // namespace

nlohmann::json generator_to_json(const GeneratorSpec& spec) {
    nlohmann::json j;
    j["kind"] = generator_kind_name(spec.kind);
    switch (spec.kind) {
        case GeneratorKind::Lattice:
            j["spacing"] = spec.spacing;
            break;
        case GeneratorKind::PerturbedLattice:
            j["spacing"] = spec.spacing;
            j["jitter"] = spec.jitter;
            break;
        case GeneratorKind::Poisson:
            j["intensity"] = spec.intensity;
            break;
        case GeneratorKind::MaternHardcore:
            j["intensity"] = spec.intensity;
            j["hardcore_radius"] = spec.hardcore_radius;
            break;
        case GeneratorKind::Mixture:
            j["p"] = spec.mix_p;
            j["a"] = generator_to_json(*spec.mix_a);
            j["b"] = generator_to_json(*spec.mix_b);
            return j;  // mixture carries no mark law of its own
    }
    j["mark_law"] = mark_law_to_json(spec.mark_law);
    return j;
}

GeneratorSpec generator_from_json(const nlohmann::json& j) {
    const char* where = "generator";
    const std::string kind = need_string(j, "kind", where);
    GeneratorSpec spec;
    spec.kind = generator_kind_from_name(kind);
    if (spec.kind == GeneratorKind::Mixture) {
        spec.mix_p = need_number(j, "p", where);
        spec.mix_a = std::make_shared<GeneratorSpec>(
            generator_from_json(need_object(j, "a", where)));
        spec.mix_b = std::make_shared<GeneratorSpec>(
            generator_from_json(need_object(j, "b", where)));
        validate_generator(spec);
        return spec;
    }
    switch (spec.kind) {
        case GeneratorKind::Lattice:
            spec.spacing = need_number(j, "spacing", where);
            break;
        case GeneratorKind::PerturbedLattice:
            spec.spacing = need_number(j, "spacing", where);
            spec.jitter = need_number(j, "jitter", where);
            break;
        case GeneratorKind::Poisson:
            spec.intensity = need_number(j, "intensity", where);
            break;
        case GeneratorKind::MaternHardcore:
            spec.intensity = need_number(j, "intensity", where);
            spec.hardcore_radius = need_number(j, "hardcore_radius", where);
            break;
        case GeneratorKind::Mixture:
            break;
    }
    if (j.contains("mark_law")) spec.mark_law = mark_law_from_json(j["mark_law"]);
    validate_generator(spec);
    return spec;
}

nlohmann::json realization_to_json(const MppRealization& real) {
    nlohmann::json pts = nlohmann::json::array();
    for (const MppPoint& p : real.points) {
        pts.push_back({{"z", vec3_to_json(p.z)},
                       {"shape", shape_to_json(p.shape)},
                       {"rho", p.rho},
                       {"cap", p.cap}});
    }
    return nlohmann::json{{"window", box_to_json(real.window)},
                          {"generator", generator_to_json(real.generator)},
                          {"seed", real.seed},
                          {"cap_resolution", real.cap_resolution},
                          {"points", pts}};
}

MppRealization realization_from_json(const nlohmann::json& j) {
    const char* where = "realization";
    if (!j.is_object()) throw ConfigError("realization: expected a JSON object");
    MppRealization real;
    real.window = box_from_json(need_object(j, "window", where), where);
    real.generator = generator_from_json(need_object(j, "generator", where));
    if (!j.contains("seed") || !j["seed"].is_number_unsigned())
        throw ConfigError("realization: missing or non-unsigned field 'seed'");
    real.seed = j["seed"].get<std::uint64_t>();
    real.cap_resolution =
        j.contains("cap_resolution") ? static_cast<int>(need_number(j, "cap_resolution", where)) : 0;
    if (!j.contains("points") || !j["points"].is_array())
        throw ConfigError("realization: missing 'points' array");
    for (const nlohmann::json& p : j["points"]) {
        MppPoint pt;
        pt.z = vec3_from_json(p.contains("z") ? p["z"] : nlohmann::json(), "point");
        if (!p.contains("shape")) throw ConfigError("realization: point missing 'shape'");
        pt.shape = shape_from_json(p["shape"]);
        pt.rho = need_number(p, "rho", "point");
        pt.cap = need_number(p, "cap", "point");
        real.points.push_back(std::move(pt));
    }
    return real;
}

nlohmann::json capacity_to_json(const CapacityEstimate& est) {
    nlohmann::json j;
    j["value"] = est.value;
    j["method"] = cap_method_name(est.method);
    if (est.resolution) j["resolution"] = *est.resolution;
    if (est.upper_bound) j["upper_bound"] = *est.upper_bound;
    j["relative_error_indicator"] = est.relative_error_indicator;
    return j;
}

nlohmann::json decomposition_to_json(const GoodBadDecomposition& d,
                                     const DecompositionCheck& chk) {
    nlohmann::json j;
    j["epsilon"] = d.epsilon;
    j["alpha"] = d.alpha;
    j["M"] = d.M;
    j["r_eps"] = d.r_eps;
    j["eta_eps"] = d.eta_eps;
    j["counts"] = {{"in_window", d.in_window.size()},
                   {"J_b", d.J_b.size()},
                   {"K_b", d.K_b.size()},
                   {"I_tilde_b", d.I_tilde_b.size()},
                   {"I_b", d.I_b.size()},
                   {"I_g", d.I_g.size()},
                   {"I_gM", d.I_gM.size()}};
    j["checks"] = {{"partition_violations", chk.partition_violations},
                   {"dz_bound_violations", chk.dz_bound_violations},
                   {"disjoint_violations", chk.disjoint_violations},
                   {"separation_violations", chk.separation_violations},
                   {"min_separation", chk.min_separation},
                   {"ok", chk.ok()}};
    return j;
}

nlohmann::json diagnostics_to_json(const std::vector<DiagnosticsRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const DiagnosticsRow& r : rows) {
        arr.push_back({{"epsilon", r.epsilon},
                       {"r_eps", r.r_eps},
                       {"scaled_bad_count", r.scaled_bad_count},
                       {"scaled_truncation_excess", r.scaled_truncation_excess},
                       {"balls_disjoint", r.balls_disjoint},
                       {"separation_ok", r.separation_ok},
                       {"dz_bounds_ok", r.dz_bounds_ok}});
    }
    return nlohmann::json{{"rows", arr}};
}

std::string json_dumps(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json json_loads(const std::string& text, const char* where) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(loc(where) + "malformed JSON");
    return j;
}

}  // namespace perfhom
