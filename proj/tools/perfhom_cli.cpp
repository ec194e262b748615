// Command-line front end. Talks to the core exclusively through the C API so
// the shared library surface stays honest.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfhom/perfhom.h"

namespace {

// Exit codes: 0 success, 1 domain-side failure, 2 configuration failure.
int exit_code_for(ph_status s) {
    switch (s) {
        case PH_OK:
            return 0;
        case PH_ERR_CONFIG:
        case PH_ERR_ARGUMENT:
            return 2;
        default:
            return 1;
    }
}

int report_failure(ph_status s) {
    std::cerr << "error: " << ph_last_error() << "\n";
    return exit_code_for(s);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const char* text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CLI::ValidationError("cannot open output file: " + path);
    out << text;
}

// Inline JSON if the text starts with '{', otherwise a file path.
std::string json_or_file(const std::string& arg) {
    const std::size_t first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{') return arg;
    return read_file(arg);
}

struct ConfigHandle {
    ph_config* cfg = nullptr;
    ~ConfigHandle() { ph_config_free(cfg); }
};

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { ph_string_free(s); }
};

// Loads a config file and applies the worker override chain:
// config value < --workers flag < PERFHOM_WORKERS environment variable.
ph_status load_config(const std::string& path, int workers_flag, ConfigHandle& out) {
    const std::string text = read_file(path);
    ph_status s = ph_config_parse(text.c_str(), &out.cfg);
    if (s != PH_OK) return s;
    int workers = workers_flag;
    if (const char* env = std::getenv("PERFHOM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            std::cerr << "error: PERFHOM_WORKERS must be a positive integer\n";
            return PH_ERR_CONFIG;
        }
        workers = static_cast<int>(v);
    }
    if (workers > 0) return ph_config_set_workers(out.cfg, workers);
    return PH_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perforated-domain homogenization laboratory"};
    app.require_subcommand(1);

    // cap
    std::string cap_shape, cap_R = "inf", cap_out;
    int cap_n = 129;
    bool cap_extrapolate = false;
    CLI::App* cap = app.add_subcommand("cap", "capacity of a hole shape");
    cap->add_option("--shape", cap_shape, "shape (shorthand like ball:1 or JSON)")->required();
    cap->add_option("--R", cap_R, "domain radius, or 'inf' for whole space");
    cap->add_option("--n", cap_n, "grid nodes per axis");
    cap->add_flag("--extrapolate", cap_extrapolate, "two-grid extrapolation");
    cap->add_option("--out", cap_out, "output file (default stdout)");

    // sample
    std::string sample_gen, sample_out;
    std::vector<double> sample_window;
    std::uint64_t sample_seed = 1;
    CLI::App* sample = app.add_subcommand("sample", "draw one marked point realization");
    sample->add_option("--generator", sample_gen, "generator JSON (inline or file)")->required();
    sample->add_option("--window", sample_window, "window lo_x lo_y lo_z hi_x hi_y hi_z")
        ->expected(6)
        ->required();
    sample->add_option("--seed", sample_seed, "seed");
    sample->add_option("--out", sample_out, "output file (default stdout)");

    // thin
    std::string thin_in, thin_close, thin_far;
    double thin_delta = 1.0;
    CLI::App* thin = app.add_subcommand("thin", "split a realization at distance delta");
    thin->add_option("--in", thin_in, "realization JSON file")->required();
    thin->add_option("--delta", thin_delta, "thinning distance")->required();
    thin->add_option("--out-close", thin_close, "close-part output (default <in>.close.json)");
    thin->add_option("--out-far", thin_far, "far-part output (default <in>.far.json)");

    // decompose
    std::string dec_in, dec_out;
    double dec_eps = 0.5, dec_alpha = 1.0, dec_M = 10.0;
    CLI::App* dec = app.add_subcommand("decompose", "good/bad hole decomposition summary");
    dec->add_option("--in", dec_in, "realization JSON file")->required();
    dec->add_option("--epsilon", dec_eps, "scale epsilon")->required();
    dec->add_option("--alpha", dec_alpha, "bad-radius floor exponent");
    dec->add_option("--M", dec_M, "truncation parameter");
    dec->add_option("--out", dec_out, "output file (default stdout)");

    // solve / corrector / heat share flags
    struct RowArgs {
        std::string config, out;
        double epsilon = 0.0;
        std::uint64_t seed_index = 0;
        int workers = 0;
    };
    auto add_row_args = [](CLI::App* cmd, RowArgs& a) {
        cmd->add_option("--config", a.config, "study config file")->required();
        cmd->add_option("--epsilon", a.epsilon, "override epsilon (default: first in config)");
        cmd->add_option("--seed-index", a.seed_index, "seed index (seed = mix64(base, index))");
        cmd->add_option("--out", a.out, "output file (default stdout)");
    };
    RowArgs solve_args, corr_args, heat_args;
    CLI::App* solve = app.add_subcommand("solve", "one perforated + homogenized solve");
    add_row_args(solve, solve_args);
    CLI::App* corr = app.add_subcommand("corrector", "corrector assembly and error ratio");
    add_row_args(corr, corr_args);
    CLI::App* heat = app.add_subcommand("heat", "heat semigroup comparison");
    add_row_args(heat, heat_args);

    // study
    std::string study_config, study_csv, study_manifest;
    int study_workers = 0;
    CLI::App* study = app.add_subcommand("study", "full (epsilon, seed) sweep with CSV report");
    study->add_option("--config", study_config, "study config file")->required();
    study->add_option("--out-csv", study_csv, "CSV output (default stdout)");
    study->add_option("--out-manifest", study_manifest,
                      "manifest output (default <output_dir>/manifest.json)");
    study->add_option("--workers", study_workers, "worker threads (PERFHOM_WORKERS overrides)");

    try {
        app.parse(argc, argv);

        if (cap->parsed()) {
            const bool whole = cap_R == "inf";
            double R = 0.0;
            if (!whole) {
                char* end = nullptr;
                R = std::strtod(cap_R.c_str(), &end);
                if (end == cap_R.c_str() || *end != '\0')
                    throw CLI::ValidationError("--R must be a number or 'inf'");
            }
            OwnedString out;
            const ph_status s = ph_capacity(cap_shape.c_str(), R, whole ? 1 : 0, cap_n,
                                            cap_extrapolate ? 1 : 0, &out.s);
            if (s != PH_OK) return report_failure(s);
            write_output(cap_out, out.s);
            return 0;
        }

        if (sample->parsed()) {
            const std::string gen = json_or_file(sample_gen);
            OwnedString out;
            const ph_status s =
                ph_sample(gen.c_str(), sample_window.data(), sample_seed, &out.s);
            if (s != PH_OK) return report_failure(s);
            write_output(sample_out, out.s);
            return 0;
        }

        if (thin->parsed()) {
            const std::string real = read_file(thin_in);
            const std::string stem =
                thin_in.size() > 5 && thin_in.substr(thin_in.size() - 5) == ".json"
                    ? thin_in.substr(0, thin_in.size() - 5)
                    : thin_in;
            if (thin_close.empty()) thin_close = stem + ".close.json";
            if (thin_far.empty()) thin_far = stem + ".far.json";
            OwnedString close_out, far_out;
            const ph_status s = ph_thin(real.c_str(), thin_delta, &close_out.s, &far_out.s);
            if (s != PH_OK) return report_failure(s);
            write_output(thin_close, close_out.s);
            write_output(thin_far, far_out.s);
            return 0;
        }

        if (dec->parsed()) {
            const std::string real = read_file(dec_in);
            OwnedString out;
            const ph_status s = ph_decompose(real.c_str(), dec_eps, dec_alpha, dec_M, &out.s);
            if (s != PH_OK) return report_failure(s);
            write_output(dec_out, out.s);
            return 0;
        }

        auto run_row = [&](const RowArgs& a,
                           ph_status (*fn)(const ph_config*, double, uint64_t, char**)) {
            ConfigHandle cfg;
            ph_status s = load_config(a.config, 0, cfg);
            if (s != PH_OK) return report_failure(s);
            OwnedString out;
            s = fn(cfg.cfg, a.epsilon, a.seed_index, &out.s);
            if (s != PH_OK) return report_failure(s);
            write_output(a.out, out.s);
            return 0;
        };
        if (solve->parsed()) return run_row(solve_args, ph_solve);
        if (corr->parsed()) return run_row(corr_args, ph_corrector);
        if (heat->parsed()) return run_row(heat_args, ph_heat);

        if (study->parsed()) {
            ConfigHandle cfg;
            ph_status s = load_config(study_config, study_workers, cfg);
            if (s != PH_OK) return report_failure(s);
            ph_study* run = nullptr;
            s = ph_study_run(cfg.cfg, &run);
            if (s != PH_OK) return report_failure(s);
            OwnedString csv, manifest;
            s = ph_study_csv(run, &csv.s);
            if (s == PH_OK) s = ph_study_manifest(run, &manifest.s);
            if (s != PH_OK) {
                ph_study_free(run);
                return report_failure(s);
            }
            write_output(study_csv, csv.s);
            if (study_manifest.empty()) {
                // Recover output_dir from the rendered config to place the manifest.
                OwnedString rendered;
                if (ph_config_render(cfg.cfg, &rendered.s) == PH_OK) {
                    std::istringstream in(rendered.s);
                    std::string line, dir = "out";
                    while (std::getline(in, line)) {
                        const std::string key = "output_dir = ";
                        const std::size_t pos = line.find(key);
                        if (pos != std::string::npos) {
                            dir = line.substr(pos + key.size());
                            break;
                        }
                    }
                    std::error_code ec;
                    std::filesystem::create_directories(dir, ec);
                    study_manifest = dir + "/manifest.json";
                }
            }
            if (!study_manifest.empty()) write_output(study_manifest, manifest.s);
            ph_study_free(run);
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
