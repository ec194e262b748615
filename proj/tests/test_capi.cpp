#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>
#include <perfhom/perfhom.h>

namespace {

// RAII wrapper so failed CHECKs cannot leak the C strings.
struct Str {
    char* p = nullptr;
    ~Str() { ph_string_free(p); }
    std::string view() const { return p ? std::string(p) : std::string(); }
};

const char* kLatticeGen =
    R"({"kind":"lattice","spacing":1.0,"mark_law":{"atoms":[{"shape":{"kind":"ball","params":{"radius":1.5}},"weight":1.0}]}})";

const double kWindow8[6] = {0, 0, 0, 8, 8, 8};

std::string sample_lattice() {
    Str out;
    REQUIRE(ph_sample(kLatticeGen, kWindow8, 1, &out.p) == PH_OK);
    return out.view();
}

}  // namespace

TEST_CASE("version and seed mixing are stable") {
    CHECK(std::string(ph_version()) == "0.1.0");
    CHECK(ph_mix64(0, 0) == 0xe220a8397b1dcdafull);
    CHECK(ph_mix64(1, 1) == 0xbeeb8da1658eec67ull);
    CHECK(ph_mix64(42, 7) == 0xccf635ee9e9e2fa4ull);
    CHECK(std::string(ph_last_error()) == "");  // nothing failed yet on this thread
}

TEST_CASE("null arguments are reported without crashing") {
    CHECK(ph_capacity(nullptr, 2.0, 0, 33, 0, nullptr) == PH_ERR_ARGUMENT);
    CHECK(std::strlen(ph_last_error()) > 0);
    Str out;
    CHECK(ph_capacity("ball:1", 2.0, 0, 33, 0, nullptr) == PH_ERR_ARGUMENT);
    CHECK(ph_sample(nullptr, kWindow8, 1, &out.p) == PH_ERR_ARGUMENT);
    CHECK(ph_sample(kLatticeGen, nullptr, 1, &out.p) == PH_ERR_ARGUMENT);
    CHECK(ph_estimate_c0("{}", nullptr) == PH_ERR_ARGUMENT);
    CHECK(ph_config_parse(nullptr, nullptr) == PH_ERR_ARGUMENT);
    ph_string_free(nullptr);  // must be a no-op
}

TEST_CASE("capacity accepts shorthand and JSON shapes") {
    Str a, b;
    REQUIRE(ph_capacity("ball:1", 2.0, 0, 65, 0, &a.p) == PH_OK);
    const nlohmann::json ja = nlohmann::json::parse(a.view());
    CHECK(std::fabs(ja["value"].get<double>() - 8.0 * M_PI) / (8.0 * M_PI) < 0.10);
    REQUIRE(ph_capacity(R"({"kind":"ball","params":{"radius":1.0}})", 2.0, 0, 65, 0, &b.p) ==
            PH_OK);
    CHECK(nlohmann::json::parse(b.view())["value"] == ja["value"]);

    Str w;
    REQUIRE(ph_capacity("ball:1", 0.0, 1, 49, 0, &w.p) == PH_OK);
    const nlohmann::json jw = nlohmann::json::parse(w.view());
    CHECK(jw["value"].get<double>() > 0.0);
    CHECK(jw["value"].get<double>() < jw["upper_bound"].get<double>());
}

TEST_CASE("capacity failures map to their status codes") {
    Str out;
    CHECK(ph_capacity("blob:1", 2.0, 0, 33, 0, &out.p) == PH_ERR_CONFIG);
    CHECK(ph_capacity("ball:1", 0.5, 0, 33, 0, &out.p) == PH_ERR_DOMAIN);
    CHECK(std::string(ph_last_error()).find("domain ball") != std::string::npos);
    CHECK(ph_capacity("ball:0", 2.0, 0, 33, 0, &out.p) == PH_ERR_SHAPE);
    // even n keeps the origin off the grid, so the tiny ball contains no node
    CHECK(ph_capacity("ball:0.001", 2.0, 0, 34, 0, &out.p) == PH_ERR_RESOLUTION);
    CHECK(out.p == nullptr);  // out parameters untouched on failure
}

TEST_CASE("sampling, thinning, and the estimator round-trip as JSON") {
    const std::string real = sample_lattice();
    const nlohmann::json jr = nlohmann::json::parse(real);
    CHECK(jr["points"].size() == 512);

    double c0 = 0.0;
    REQUIRE(ph_estimate_c0(real.c_str(), &c0) == PH_OK);
    CHECK(c0 == doctest::Approx(6.0 * M_PI).epsilon(1e-12));

    Str close_part, far_part;
    REQUIRE(ph_thin(real.c_str(), 1.5, &close_part.p, &far_part.p) == PH_OK);
    const nlohmann::json jc = nlohmann::json::parse(close_part.view());
    const nlohmann::json jf = nlohmann::json::parse(far_part.view());
    CHECK(jc["points"].size() + jf["points"].size() == 512);
    CHECK(jf["points"].empty());  // unit spacing, delta 1.5

    CHECK(ph_thin("not json", 1.0, &close_part.p, &far_part.p) == PH_ERR_CONFIG);
    CHECK(ph_thin(real.c_str(), -1.0, &close_part.p, &far_part.p) == PH_ERR_DOMAIN);
}

TEST_CASE("the decomposition summary carries counts and exact checks") {
    const std::string real = sample_lattice();
    Str out;
    REQUIRE(ph_decompose(real.c_str(), 0.25, 1.0, 10.0, &out.p) == PH_OK);
    const nlohmann::json j = nlohmann::json::parse(out.view());
    CHECK(j["epsilon"].get<double>() == 0.25);
    CHECK(j["counts"]["in_window"].get<std::size_t>() == 512);
    CHECK(j["counts"]["I_g"].get<std::size_t>() == 512);
    CHECK(j["counts"]["J_b"].get<std::size_t>() == 0);
    CHECK(j["checks"]["ok"].get<bool>());
    Str bad;
    CHECK(ph_decompose(real.c_str(), 2.0, 1.0, 10.0, &bad.p) == PH_ERR_DOMAIN);
}

TEST_CASE("configs parse, render, and take worker overrides") {
    ph_config* cfg = nullptr;
    REQUIRE(ph_config_parse("[domain]\ngrid_n = 33\n", &cfg) == PH_OK);
    Str text;
    REQUIRE(ph_config_render(cfg, &text.p) == PH_OK);
    CHECK(text.view().find("grid_n = 33") != std::string::npos);
    CHECK(ph_config_set_workers(cfg, 4) == PH_OK);
    Str text2;
    REQUIRE(ph_config_render(cfg, &text2.p) == PH_OK);
    CHECK(text2.view().find("workers = 4") != std::string::npos);
    CHECK(ph_config_set_workers(cfg, 0) == PH_ERR_ARGUMENT);  // bad scalar argument
    ph_config_free(cfg);

    ph_config* bad = nullptr;
    CHECK(ph_config_parse("[study]\nalpha = 5\n", &bad) == PH_ERR_CONFIG);
    CHECK(bad == nullptr);
    ph_config_free(nullptr);  // must be a no-op
}

TEST_CASE("single-row solves and studies work through the C surface") {
    const char* text =
        "[domain]\nbox = 0, 0, 0, 1, 1, 1\ngrid_n = 33\n\n"
        "[process]\ngenerator = lattice\nspacing = 1\nmark = ball:1.5\n\n"
        "[study]\nepsilons = 0.5\nseed_count = 2\n";
    ph_config* cfg = nullptr;
    REQUIRE(ph_config_parse(text, &cfg) == PH_OK);

    Str row;
    REQUIRE(ph_solve(cfg, 0.0, 0, &row.p) == PH_OK);
    const nlohmann::json jr = nlohmann::json::parse(row.view());
    CHECK(jr["epsilon"].get<double>() == 0.5);
    CHECK(jr["c0_est"].get<double>() == doctest::Approx(6.0 * M_PI).epsilon(1e-12));
    CHECK(jr["l2_err"].get<double>() > 0.0);
    CHECK(jr["pinned_holes"].get<int>() == 0);

    Str corr;
    REQUIRE(ph_corrector(cfg, 0.5, 0, &corr.p) == PH_OK);
    const nlohmann::json jc = nlohmann::json::parse(corr.view());
    CHECK(jc["h1_err_corr"].get<double>() > 0.0);
    CHECK(jc["corr_ratio"].get<double>() > 0.0);
    CHECK(jc["good_holes"].get<int>() + jc["bad_holes"].get<int>() == 216);

    Str heat;
    REQUIRE(ph_heat(cfg, 0.5, 0, &heat.p) == PH_OK);
    const nlohmann::json jh = nlohmann::json::parse(heat.view());
    CHECK(jh["heat_err"].get<double>() > 0.0);
    CHECK(jh["heat_err"].get<double>() < jh["heat_err_zero"].get<double>());

    Str fail;
    CHECK(ph_solve(cfg, 0.25, 0, &fail.p) == PH_ERR_RESOLUTION);  // n = 33 cannot resolve

    ph_study* study = nullptr;
    REQUIRE(ph_study_run(cfg, &study) == PH_OK);
    Str csv, manifest;
    REQUIRE(ph_study_csv(study, &csv.p) == PH_OK);
    const std::string csv_text = csv.view();
    CHECK(csv_text.rfind("epsilon,seed,grid_n,", 0) == 0);
    CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == 3);
    REQUIRE(ph_study_manifest(study, &manifest.p) == PH_OK);
    const nlohmann::json jm = nlohmann::json::parse(manifest.view());
    CHECK(jm["version"] == "0.1.0");
    CHECK(jm["rows"].size() == 2);
    ph_study_free(study);
    ph_study_free(nullptr);  // must be a no-op
    ph_config_free(cfg);
}
