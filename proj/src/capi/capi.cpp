#include "perfhom/perfhom.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "../core/config.hpp"
#include "../core/homogenize.hpp"
#include "../core/json_io.hpp"

using namespace perfhom;

struct ph_config {
    StudyConfig cfg;
};

struct ph_study {
    StudyConfig cfg;  // the report's CSV rendering depends on the timing flag
    StudyReport report;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ph_status fail(ph_status code, const char* what) {
    g_last_error = what;
    return code;
}

// Runs `fn` and maps the error taxonomy onto status codes.
template <typename Fn>
ph_status guarded(Fn&& fn) {
    try {
        fn();
        return PH_OK;
    } catch (const ConfigError& e) {
        return fail(PH_ERR_CONFIG, e.what());
    } catch (const ShapeError& e) {
        return fail(PH_ERR_SHAPE, e.what());
    } catch (const ResolutionError& e) {
        return fail(PH_ERR_RESOLUTION, e.what());
    } catch (const ConvergenceError& e) {
        return fail(PH_ERR_CONVERGENCE, e.what());
    } catch (const DomainError& e) {
        return fail(PH_ERR_DOMAIN, e.what());
    } catch (const std::exception& e) {
        return fail(PH_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PH_ERR_INTERNAL, "unknown failure");
    }
}

HoleShape shape_from_text(const char* text) {
    std::string s(text);
    const std::size_t first = s.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && s[first] == '{')
        return shape_from_json(json_loads(s, "shape"));
    return parse_shape_shorthand(s);
}

// One (epsilon, seed_index) pipeline shared by ph_solve / ph_corrector /
// ph_heat. `need` flags select how deep to go.
struct RowPieces {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double c0_est = 0.0;
    PerforationBuild build;
    MppRealization real;
    GoodBadDecomposition decomp;

    RowPieces() : build(Grid()) {}
};

RowPieces build_row(const StudyConfig& cfg, const Grid& grid, double epsilon,
                    std::uint64_t seed_index, bool need_decomp) {
    RowPieces out;
    out.epsilon = epsilon > 0.0 ? epsilon : cfg.epsilons.front();
    if (!(out.epsilon > 0.0 && out.epsilon <= 1.0))
        throw DomainError("epsilon must lie in ]0,1]");
    out.seed = mix64(cfg.base_seed, seed_index);
    out.real = sample_process(cfg.generator, cfg.window.scaled(1.0 / out.epsilon), out.seed);
    out.c0_est = estimate_c0(out.real);
    if (need_decomp) out.decomp = good_bad_decompose(out.real, out.epsilon, cfg.alpha, cfg.M);

    PerforationSpec spec;
    spec.epsilon = out.epsilon;
    spec.domain = cfg.domain;
    spec.realization = out.real;
    spec.resolve_factor = cfg.resolve_factor;
    spec.allow_underresolved = cfg.allow_underresolved;
    out.build = build_perforation(spec, grid);
    return out;
}

void maybe_dump(const StudyConfig& cfg, const ScalarField& field, const char* name) {
    if (!cfg.dump_fields) return;
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    dump_field(field, (fs::path(cfg.output_dir) / name).string());
}

}  // namespace

extern "C" {

const char* ph_last_error(void) { return g_last_error.c_str(); }

void ph_string_free(char* s) { std::free(s); }

const char* ph_version(void) { return "0.1.0"; }

uint64_t ph_mix64(uint64_t seed, uint64_t index) { return mix64(seed, index); }

ph_status ph_capacity(const char* shape, double domain_radius, int whole_space, int n,
                      int extrapolate, char** out_json) {
    if (!shape || !out_json) return fail(PH_ERR_ARGUMENT, "ph_capacity: null argument");
    return guarded([&] {
        const HoleShape hs = shape_from_text(shape);
        CapGridOptions opt;
        opt.extrapolate = extrapolate != 0;
        CapacityEstimate est;
        if (whole_space) {
            const double r = shape_circumradius(hs);
            est = cap_whole_space(hs, {2.0 * r, 4.0 * r, 8.0 * r}, n, opt);
        } else {
            est = cap_relative_grid(hs, domain_radius, n, opt);
        }
        *out_json = dup_string(json_dumps(capacity_to_json(est)));
    });
}

ph_status ph_sample(const char* generator_json, const double window[6], uint64_t seed,
                    char** out_json) {
    if (!generator_json || !window || !out_json)
        return fail(PH_ERR_ARGUMENT, "ph_sample: null argument");
    return guarded([&] {
        const GeneratorSpec gen =
            generator_from_json(json_loads(generator_json, "generator"));
        const Box3 box{{window[0], window[1], window[2]}, {window[3], window[4], window[5]}};
        if (!box.valid()) throw DomainError("ph_sample: window has nonpositive extent");
        const MppRealization real = sample_process(gen, box, seed);
        *out_json = dup_string(json_dumps(realization_to_json(real)));
    });
}

ph_status ph_thin(const char* realization_json, double delta, char** out_close_json,
                  char** out_far_json) {
    if (!realization_json || !out_close_json || !out_far_json)
        return fail(PH_ERR_ARGUMENT, "ph_thin: null argument");
    return guarded([&] {
        const MppRealization real =
            realization_from_json(json_loads(realization_json, "realization"));
        const auto [close_part, far_part] = thin(real, delta);
        *out_close_json = dup_string(json_dumps(realization_to_json(close_part)));
        *out_far_json = dup_string(json_dumps(realization_to_json(far_part)));
    });
}

ph_status ph_estimate_c0(const char* realization_json, double* out_c0) {
    if (!realization_json || !out_c0)
        return fail(PH_ERR_ARGUMENT, "ph_estimate_c0: null argument");
    return guarded([&] {
        const MppRealization real =
            realization_from_json(json_loads(realization_json, "realization"));
        *out_c0 = estimate_c0(real);
    });
}

ph_status ph_decompose(const char* realization_json, double epsilon, double alpha, double M,
                       char** out_json) {
    if (!realization_json || !out_json)
        return fail(PH_ERR_ARGUMENT, "ph_decompose: null argument");
    return guarded([&] {
        const MppRealization real =
            realization_from_json(json_loads(realization_json, "realization"));
        const GoodBadDecomposition d = good_bad_decompose(real, epsilon, alpha, M);
        const DecompositionCheck chk = verify_decomposition(real, d);
        *out_json = dup_string(json_dumps(decomposition_to_json(d, chk)));
    });
}

ph_status ph_config_parse(const char* text, ph_config** out) {
    if (!text || !out) return fail(PH_ERR_ARGUMENT, "ph_config_parse: null argument");
    return guarded([&] {
        auto handle = std::make_unique<ph_config>();
        handle->cfg = parse_config(text);
        *out = handle.release();
    });
}

ph_status ph_config_render(const ph_config* cfg, char** out_text) {
    if (!cfg || !out_text) return fail(PH_ERR_ARGUMENT, "ph_config_render: null argument");
    return guarded([&] { *out_text = dup_string(render_config(cfg->cfg)); });
}

void ph_config_free(ph_config* cfg) { delete cfg; }

ph_status ph_config_set_workers(ph_config* cfg, int workers) {
    if (!cfg) return fail(PH_ERR_ARGUMENT, "ph_config_set_workers: null handle");
    if (workers < 1) return fail(PH_ERR_ARGUMENT, "ph_config_set_workers: workers must be >= 1");
    cfg->cfg.workers = workers;
    return PH_OK;
}

ph_status ph_solve(const ph_config* cfg, double epsilon, uint64_t seed_index, char** out_json) {
    if (!cfg || !out_json) return fail(PH_ERR_ARGUMENT, "ph_solve: null argument");
    return guarded([&] {
        const StudyConfig& c = cfg->cfg;
        const Grid grid = Grid::cubic(c.domain, c.grid_n);
        const RowPieces row = build_row(c, grid, epsilon, seed_index, false);
        const ScalarField f = c.source == "constant"
                                  ? ScalarField(grid, std::vector<double>(grid.size(), 1.0))
                                  : manufactured_source(grid, row.c0_est);
        const ScalarField u_eps = solve_perforated(row.build.mask, f, c.tol, c.max_iter);
        const ScalarField u_hom = solve_homogenized(f, row.c0_est, nullptr, c.tol, c.max_iter);
        ScalarField diff(grid);
        for (std::size_t p = 0; p < diff.values.size(); ++p)
            diff.values[p] = u_eps.values[p] - u_hom.values[p];
        maybe_dump(c, u_eps, "solve_ueps");
        maybe_dump(c, u_hom, "solve_uhom");
        nlohmann::json j{{"epsilon", row.epsilon},
                         {"seed", row.seed},
                         {"grid_n", c.grid_n},
                         {"c0_est", row.c0_est},
                         {"l2_err", norm_l2(diff)},
                         {"h1_err_plain", seminorm_h1(diff)},
                         {"pinned_holes", row.build.pinned_holes}};
        *out_json = dup_string(json_dumps(j));
    });
}

ph_status ph_corrector(const ph_config* cfg, double epsilon, uint64_t seed_index,
                       char** out_json) {
    if (!cfg || !out_json) return fail(PH_ERR_ARGUMENT, "ph_corrector: null argument");
    return guarded([&] {
        const StudyConfig& c = cfg->cfg;
        const Grid grid = Grid::cubic(c.domain, c.grid_n);
        const RowPieces row = build_row(c, grid, epsilon, seed_index, true);
        const ScalarField f = c.source == "constant"
                                  ? ScalarField(grid, std::vector<double>(grid.size(), 1.0))
                                  : manufactured_source(grid, row.c0_est);
        const ScalarField u_eps = solve_perforated(row.build.mask, f, c.tol, c.max_iter);
        const ScalarField u_hom = solve_homogenized(f, row.c0_est, nullptr, c.tol, c.max_iter);

        PerforationSpec spec;
        spec.epsilon = row.epsilon;
        spec.domain = c.domain;
        spec.realization = row.real;
        spec.resolve_factor = c.resolve_factor;
        spec.allow_underresolved = c.allow_underresolved;
        const ScalarField corr = assemble_corrector(spec, row.decomp, grid, c.tol, c.max_iter);
        const CorrectorError err = corrector_error(u_eps, u_hom, corr);
        maybe_dump(c, corr, "corrector");
        nlohmann::json j{{"epsilon", row.epsilon},
                         {"seed", row.seed},
                         {"grid_n", c.grid_n},
                         {"c0_est", row.c0_est},
                         {"h1_err_plain", err.h1_plain},
                         {"h1_err_corr", err.h1_corr},
                         {"corr_ratio", err.ratio},
                         {"good_holes", row.decomp.I_g.size()},
                         {"bad_holes", row.decomp.I_b.size()}};
        *out_json = dup_string(json_dumps(j));
    });
}

ph_status ph_heat(const ph_config* cfg, double epsilon, uint64_t seed_index, char** out_json) {
    if (!cfg || !out_json) return fail(PH_ERR_ARGUMENT, "ph_heat: null argument");
    return guarded([&] {
        const StudyConfig& c = cfg->cfg;
        const Grid grid = Grid::cubic(c.domain, c.grid_n);
        const RowPieces row = build_row(c, grid, epsilon, seed_index, false);
        const ScalarField u0 = lowest_mode(grid);
        const double t = c.heat.t;
        const double dt = c.heat.dt > 0.0 ? c.heat.dt : t / 64.0;
        const double err = heat_compare(row.build.mask, row.c0_est, u0, t, dt, c.tol, c.max_iter);
        const double err_zero =
            heat_compare(row.build.mask, 0.0, u0, t, dt, c.tol, c.max_iter);
        nlohmann::json j{{"epsilon", row.epsilon},
                         {"seed", row.seed},
                         {"grid_n", c.grid_n},
                         {"c0_est", row.c0_est},
                         {"t", t},
                         {"dt", dt},
                         {"heat_err", err},
                         {"heat_err_zero", err_zero}};
        *out_json = dup_string(json_dumps(j));
    });
}

ph_status ph_study_run(const ph_config* cfg, ph_study** out) {
    if (!cfg || !out) return fail(PH_ERR_ARGUMENT, "ph_study_run: null argument");
    return guarded([&] {
        auto handle = std::make_unique<ph_study>();
        handle->cfg = cfg->cfg;
        handle->report = run_study(cfg->cfg);
        *out = handle.release();
    });
}

ph_status ph_study_csv(const ph_study* study, char** out_csv) {
    if (!study || !out_csv) return fail(PH_ERR_ARGUMENT, "ph_study_csv: null argument");
    return guarded([&] { *out_csv = dup_string(report_csv(study->report, study->cfg)); });
}

ph_status ph_study_manifest(const ph_study* study, char** out_json) {
    if (!study || !out_json) return fail(PH_ERR_ARGUMENT, "ph_study_manifest: null argument");
    return guarded([&] { *out_json = dup_string(report_manifest(study->report, study->cfg)); });
}

void ph_study_free(ph_study* study) { delete study; }

}  // extern "C"
