#include "config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace perfhom {

bool operator==(const HeatConfig& a, const HeatConfig& b) {
    return a.enabled == b.enabled && a.t == b.t && a.dt == b.dt;
}

GeneratorSpec default_generator() {
    return GeneratorSpec::lattice(1.0, MarkLaw::fixed(HoleShape::ball(1.5)));
}

bool operator==(const StudyConfig& a, const StudyConfig& b) {
    return a.domain == b.domain && a.grid_n == b.grid_n && a.window == b.window &&
           a.generator == b.generator && a.epsilons == b.epsilons && a.base_seed == b.base_seed &&
           a.seed_count == b.seed_count && a.alpha == b.alpha && a.M == b.M && a.tol == b.tol &&
           a.max_iter == b.max_iter && a.resolve_factor == b.resolve_factor &&
           a.source == b.source && a.heat == b.heat && a.output_dir == b.output_dir &&
           a.extrapolate == b.extrapolate && a.allow_underresolved == b.allow_underresolved &&
           a.dump_fields == b.dump_fields && a.fail_fast == b.fail_fast && a.timing == b.timing &&
           a.workers == b.workers;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void fail(const std::string& where, const std::string& why) {
    throw ConfigError(where + ": " + why);
}

double parse_double(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) fail(where, "empty value");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) fail(where, "not a number: '" + t + "'");
    return v;
}

long long parse_int(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) fail(where, "empty value");
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) fail(where, "not an integer: '" + t + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty() || t[0] == '-') fail(where, "not an unsigned integer: '" + t + "'");
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) fail(where, "not an unsigned integer: '" + t + "'");
    return v;
}

bool parse_bool(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true") return true;
    if (t == "false") return false;
    fail(where, "expected true or false, got '" + t + "'");
}

std::vector<double> parse_double_list(const std::string& where, const std::string& text) {
    std::vector<double> out;
    for (const std::string& part : split(text, ',')) out.push_back(parse_double(where, part));
    return out;
}

Box3 parse_box(const std::string& where, const std::string& text) {
    const std::vector<double> v = parse_double_list(where, text);
    if (v.size() != 6) fail(where, "expected six numbers (lo x,y,z then hi x,y,z)");
    return Box3{Vec3{v[0], v[1], v[2]}, Vec3{v[3], v[4], v[5]}};
}

// Raw key-value store with consumption tracking so leftovers are reportable.
struct Section {
    std::map<std::string, std::string> entries;
    std::string name;

    std::string* find(const std::string& key) {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    }
    bool take(const std::string& key, std::string& out) {
        auto it = entries.find(key);
        if (it == entries.end()) return false;
        out = it->second;
        entries.erase(it);
        return true;
    }
    void reject_leftovers(const std::string& why_suffix = "unknown key") const {
        if (!entries.empty())
            fail("[" + name + "] " + entries.begin()->first, why_suffix);
    }
};

std::map<std::string, Section> scan_document(const std::string& text) {
    std::map<std::string, Section> doc;
    std::string current;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail("line " + std::to_string(lineno), "malformed section header");
            current = trim(t.substr(1, t.size() - 2));
            if (current.empty()) fail("line " + std::to_string(lineno), "empty section name");
            if (doc.count(current))
                fail("[" + current + "]", "section appears twice");
            doc[current].name = current;
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            fail("line " + std::to_string(lineno), "expected key = value");
        if (current.empty()) fail("line " + std::to_string(lineno), "key outside any section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) fail("line " + std::to_string(lineno), "empty key");
        Section& sec = doc[current];
        if (sec.entries.count(key)) fail("[" + current + "] " + key, "duplicate key");
        sec.entries[key] = value;
    }
    return doc;
}

MarkLaw parse_mark_law(const std::string& section, Section& sec) {
    std::string mark_text = "ball:1.5";
    sec.take("mark", mark_text);
    MarkLaw law;
    for (const std::string& part : split(mark_text, ',')) {
        MarkAtom atom;
        try {
            atom.shape = parse_shape_shorthand(trim(part));
        } catch (const ConfigError& e) {
            fail("[" + section + "] mark", e.what());
        }
        law.atoms.push_back(std::move(atom));
    }
    std::string weights_text;
    if (sec.take("mark_weights", weights_text)) {
        const std::vector<double> w =
            parse_double_list("[" + section + "] mark_weights", weights_text);
        if (w.size() != law.atoms.size())
            fail("[" + section + "] mark_weights", "count does not match the mark list");
        for (std::size_t i = 0; i < w.size(); ++i) law.atoms[i].weight = w[i];
    }
    return law;
}

double require_double(const std::string& section, Section& sec, const char* key,
                      const std::string& kind) {
    std::string text;
    if (!sec.take(key, text))
        fail("[" + section + "] " + key, "required for generator '" + kind + "'");
    return parse_double("[" + section + "] " + key, text);
}

GeneratorSpec parse_process_section(std::map<std::string, Section>& doc, const std::string& name,
                                    bool allow_mixture);

GeneratorSpec parse_process_body(std::map<std::string, Section>& doc, Section& sec,
                                 const std::string& name, bool allow_mixture) {
    std::string kind_text = "lattice";
    sec.take("generator", kind_text);
    GeneratorKind kind;
    try {
        kind = generator_kind_from_name(trim(kind_text));
    } catch (const ConfigError&) {
        fail("[" + name + "] generator", "unknown generator '" + trim(kind_text) + "'");
    }

    GeneratorSpec spec;
    switch (kind) {
        case GeneratorKind::Poisson:
            spec = GeneratorSpec::poisson(require_double(name, sec, "intensity", "poisson"),
                                          parse_mark_law(name, sec));
            break;
        case GeneratorKind::Lattice:
            spec = GeneratorSpec::lattice(require_double(name, sec, "spacing", "lattice"),
                                          parse_mark_law(name, sec));
            break;
        case GeneratorKind::PerturbedLattice:
            spec = GeneratorSpec::perturbed_lattice(
                require_double(name, sec, "spacing", "perturbed_lattice"),
                require_double(name, sec, "jitter", "perturbed_lattice"),
                parse_mark_law(name, sec));
            break;
        case GeneratorKind::MaternHardcore:
            spec = GeneratorSpec::matern_hardcore(
                require_double(name, sec, "intensity", "matern_hardcore"),
                require_double(name, sec, "hardcore_radius", "matern_hardcore"),
                parse_mark_law(name, sec));
            break;
        case GeneratorKind::Mixture: {
            if (!allow_mixture)
                fail("[" + name + "] generator", "nested mixtures are not supported in config files");
            const double p = require_double(name, sec, "p", "mixture");
            sec.reject_leftovers("not a parameter of generator 'mixture'");
            GeneratorSpec a = parse_process_section(doc, name + ".a", false);
            GeneratorSpec b = parse_process_section(doc, name + ".b", false);
            return GeneratorSpec::mixture(std::move(a), std::move(b), p);
        }
    }
    sec.reject_leftovers("not a parameter of generator '" +
                         std::string(generator_kind_name(kind)) + "'");
    return spec;
}

GeneratorSpec parse_process_section(std::map<std::string, Section>& doc, const std::string& name,
                                    bool allow_mixture) {
    auto it = doc.find(name);
    if (it == doc.end()) fail("[" + name + "]", "section required by the mixture generator");
    GeneratorSpec spec = parse_process_body(doc, it->second, name, allow_mixture);
    doc.erase(name);
    return spec;
}

}  // namespace

HoleShape parse_shape_shorthand(const std::string& text) {
    const std::vector<std::string> parts = split(trim(text), ':');
    const std::string& kind = parts[0];
    auto num = [&](std::size_t i) { return parse_double("shape '" + text + "'", parts[i]); };
    if (kind == "ball") {
        if (parts.size() != 2) throw ConfigError("shape '" + text + "': expected ball:R");
        return HoleShape::ball(num(1));
    }
    if (kind == "axis_box") {
        if (parts.size() != 4)
            throw ConfigError("shape '" + text + "': expected axis_box:HX:HY:HZ");
        return HoleShape::axis_box(Vec3{num(1), num(2), num(3)});
    }
    if (kind == "union_of_balls") {
        if (parts.size() < 5 || (parts.size() - 1) % 4 != 0)
            throw ConfigError("shape '" + text +
                              "': expected union_of_balls:CX:CY:CZ:R repeated per member");
        std::vector<UnionOfBalls::Member> members;
        for (std::size_t i = 1; i + 3 < parts.size(); i += 4)
            members.push_back({Vec3{num(i), num(i + 1), num(i + 2)}, num(i + 3)});
        return HoleShape::union_of_balls(std::move(members));
    }
    throw ConfigError("shape '" + text + "': unknown kind '" + kind + "'");
}

std::string shape_shorthand(const HoleShape& shape) {
    if (const Ball* b = std::get_if<Ball>(&shape.body))
        return "ball:" + format_g17(b->radius);
    if (const AxisBox* a = std::get_if<AxisBox>(&shape.body)) {
        const Vec3& h = a->half_widths;
        return "axis_box:" + format_g17(h.x) + ":" + format_g17(h.y) + ":" + format_g17(h.z);
    }
    const UnionOfBalls& u = std::get<UnionOfBalls>(shape.body);
    std::string out = "union_of_balls";
    for (const auto& m : u.balls)
        out += ":" + format_g17(m.center.x) + ":" + format_g17(m.center.y) + ":" +
               format_g17(m.center.z) + ":" + format_g17(m.radius);
    return out;
}

StudyConfig parse_config(const std::string& text) {
    std::map<std::string, Section> doc = scan_document(text);
    StudyConfig cfg;

    if (auto it = doc.find("domain"); it != doc.end()) {
        Section& sec = it->second;
        std::string v;
        if (sec.take("box", v)) cfg.domain = parse_box("[domain] box", v);
        if (sec.take("grid_n", v))
            cfg.grid_n = static_cast<int>(parse_int("[domain] grid_n", v));
        sec.reject_leftovers();
        doc.erase(it);
    }

    bool window_given = false;
    if (auto it = doc.find("window"); it != doc.end()) {
        Section& sec = it->second;
        std::string v;
        if (sec.take("box", v)) {
            cfg.window = parse_box("[window] box", v);
            window_given = true;
        }
        sec.reject_leftovers();
        doc.erase(it);
    }
    if (!window_given) cfg.window = cfg.domain.expanded(1.0);

    if (auto it = doc.find("process"); it != doc.end()) {
        cfg.generator = parse_process_body(doc, it->second, "process", true);
        doc.erase("process");
    }

    if (auto it = doc.find("study"); it != doc.end()) {
        Section& sec = it->second;
        std::string v;
        if (sec.take("epsilons", v)) cfg.epsilons = parse_double_list("[study] epsilons", v);
        if (sec.take("base_seed", v)) cfg.base_seed = parse_u64("[study] base_seed", v);
        if (sec.take("seed_count", v))
            cfg.seed_count = static_cast<int>(parse_int("[study] seed_count", v));
        if (sec.take("alpha", v)) cfg.alpha = parse_double("[study] alpha", v);
        if (sec.take("M", v)) cfg.M = parse_double("[study] M", v);
        if (sec.take("source", v)) cfg.source = trim(v);
        if (sec.take("output_dir", v)) cfg.output_dir = trim(v);
        if (sec.take("workers", v)) cfg.workers = static_cast<int>(parse_int("[study] workers", v));
        if (sec.take("timing", v)) cfg.timing = parse_bool("[study] timing", v);
        if (sec.take("extrapolate", v)) cfg.extrapolate = parse_bool("[study] extrapolate", v);
        if (sec.take("allow_underresolved", v))
            cfg.allow_underresolved = parse_bool("[study] allow_underresolved", v);
        if (sec.take("dump_fields", v)) cfg.dump_fields = parse_bool("[study] dump_fields", v);
        if (sec.take("fail_fast", v)) cfg.fail_fast = parse_bool("[study] fail_fast", v);
        sec.reject_leftovers();
        doc.erase(it);
    }

    if (auto it = doc.find("solver"); it != doc.end()) {
        Section& sec = it->second;
        std::string v;
        if (sec.take("tol", v)) cfg.tol = parse_double("[solver] tol", v);
        if (sec.take("max_iter", v))
            cfg.max_iter = static_cast<int>(parse_int("[solver] max_iter", v));
        if (sec.take("resolve_factor", v))
            cfg.resolve_factor = parse_double("[solver] resolve_factor", v);
        sec.reject_leftovers();
        doc.erase(it);
    }

    if (auto it = doc.find("heat"); it != doc.end()) {
        Section& sec = it->second;
        std::string v;
        if (sec.take("enabled", v)) cfg.heat.enabled = parse_bool("[heat] enabled", v);
        if (sec.take("t", v)) cfg.heat.t = parse_double("[heat] t", v);
        if (sec.take("dt", v)) cfg.heat.dt = parse_double("[heat] dt", v);
        sec.reject_leftovers();
        doc.erase(it);
    }

    if (!doc.empty()) fail("[" + doc.begin()->first + "]", "unknown section");

    validate_config(cfg);
    return cfg;
}

namespace {

void render_process_body(std::string& out, const GeneratorSpec& g, const std::string& name) {
    out += "[" + name + "]\n";
    out += "generator = ";
    out += generator_kind_name(g.kind);
    out += "\n";
    switch (g.kind) {
        case GeneratorKind::Poisson:
            out += "intensity = " + format_g17(g.intensity) + "\n";
            break;
        case GeneratorKind::Lattice:
            out += "spacing = " + format_g17(g.spacing) + "\n";
            break;
        case GeneratorKind::PerturbedLattice:
            out += "spacing = " + format_g17(g.spacing) + "\n";
            out += "jitter = " + format_g17(g.jitter) + "\n";
            break;
        case GeneratorKind::MaternHardcore:
            out += "intensity = " + format_g17(g.intensity) + "\n";
            out += "hardcore_radius = " + format_g17(g.hardcore_radius) + "\n";
            break;
        case GeneratorKind::Mixture:
            out += "p = " + format_g17(g.mix_p) + "\n\n";
            render_process_body(out, *g.mix_a, name + ".a");
            out += "\n";
            render_process_body(out, *g.mix_b, name + ".b");
            return;
    }
    std::string marks, weights;
    for (std::size_t i = 0; i < g.mark_law.atoms.size(); ++i) {
        if (i) {
            marks += ", ";
            weights += ", ";
        }
        marks += shape_shorthand(g.mark_law.atoms[i].shape);
        weights += format_g17(g.mark_law.atoms[i].weight);
    }
    out += "mark = " + marks + "\n";
    out += "mark_weights = " + weights + "\n";
}

std::string render_box(const Box3& b) {
    return format_g17(b.lo.x) + ", " + format_g17(b.lo.y) + ", " + format_g17(b.lo.z) + ", " +
           format_g17(b.hi.x) + ", " + format_g17(b.hi.y) + ", " + format_g17(b.hi.z);
}

}  // namespace

std::string render_config(const StudyConfig& cfg) {
    std::string out;
    out += "[domain]\n";
    out += "box = " + render_box(cfg.domain) + "\n";
    out += "grid_n = " + std::to_string(cfg.grid_n) + "\n\n";
    out += "[window]\n";
    out += "box = " + render_box(cfg.window) + "\n\n";
    render_process_body(out, cfg.generator, "process");
    out += "\n[study]\n";
    out += "epsilons = ";
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
        out += (i ? ", " : "") + format_g17(cfg.epsilons[i]);
    out += "\n";
    out += "base_seed = " + std::to_string(cfg.base_seed) + "\n";
    out += "seed_count = " + std::to_string(cfg.seed_count) + "\n";
    out += "alpha = " + format_g17(cfg.alpha) + "\n";
    out += "M = " + format_g17(cfg.M) + "\n";
    out += "source = " + cfg.source + "\n";
    out += "output_dir = " + cfg.output_dir + "\n";
    out += "workers = " + std::to_string(cfg.workers) + "\n";
    out += std::string("timing = ") + (cfg.timing ? "true" : "false") + "\n";
    out += std::string("extrapolate = ") + (cfg.extrapolate ? "true" : "false") + "\n";
    out += std::string("allow_underresolved = ") + (cfg.allow_underresolved ? "true" : "false") +
           "\n";
    out += std::string("dump_fields = ") + (cfg.dump_fields ? "true" : "false") + "\n";
    out += std::string("fail_fast = ") + (cfg.fail_fast ? "true" : "false") + "\n\n";
    out += "[solver]\n";
    out += "tol = " + format_g17(cfg.tol) + "\n";
    out += "max_iter = " + std::to_string(cfg.max_iter) + "\n";
    out += "resolve_factor = " + format_g17(cfg.resolve_factor) + "\n\n";
    out += "[heat]\n";
    out += std::string("enabled = ") + (cfg.heat.enabled ? "true" : "false") + "\n";
    out += "t = " + format_g17(cfg.heat.t) + "\n";
    out += "dt = " + format_g17(cfg.heat.dt) + "\n";
    return out;
}

void validate_config(const StudyConfig& cfg) {
    if (!cfg.domain.valid()) throw ConfigError("domain: box must have lo < hi on every axis");
    if (!cfg.window.valid()) throw ConfigError("window: box must have lo < hi on every axis");
    if (!cfg.window.contains_box(cfg.domain))
        throw ConfigError("domain: must be contained in the window");
    if (cfg.grid_n < 33) throw ConfigError("grid_n: must be at least 33");
    if (cfg.epsilons.empty()) throw ConfigError("epsilons: need at least one value");
    for (double e : cfg.epsilons)
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("epsilons: each value must lie in ]0,1]");
    const double eps_max = *std::max_element(cfg.epsilons.begin(), cfg.epsilons.end());
    for (int a = 0; a < kDim; ++a)
        if (!(cfg.domain.lo[a] - cfg.window.lo[a] >= eps_max &&
              cfg.window.hi[a] - cfg.domain.hi[a] >= eps_max))
            throw ConfigError("window: must surround the domain with margin >= the largest epsilon");
    const double alpha_max = static_cast<double>(kDim) / (kDim - 2);
    if (!(cfg.alpha > 0.0 && cfg.alpha < alpha_max))
        throw ConfigError("alpha: must lie in ]0, " + format_g17(alpha_max) + "[");
    if (!(cfg.M > 1.0)) throw ConfigError("M: must exceed 1");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol: must be positive");
    if (cfg.max_iter < 1) throw ConfigError("max_iter: must be at least 1");
    if (!(cfg.resolve_factor >= 2.0)) throw ConfigError("resolve_factor: must be at least 2");
    if (cfg.seed_count < 1) throw ConfigError("seed_count: must be at least 1");
    if (cfg.workers < 1) throw ConfigError("workers: must be at least 1");
    if (cfg.source != "manufactured" && cfg.source != "constant")
        throw ConfigError("source: must be 'manufactured' or 'constant'");
    if (cfg.heat.enabled) {
        if (!(cfg.heat.t > 0.0)) throw ConfigError("heat t: must be positive");
        if (!(cfg.heat.dt >= 0.0)) throw ConfigError("heat dt: must be nonnegative");
    }
    validate_generator(cfg.generator);
}

}  // namespace perfhom
