#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fkdmc/errors.hpp"
#include "fkdmc/io.hpp"

using namespace fkdmc;

namespace {

Json desk_config() {
    return Json{
        {"model",
         {{"type", "gaussian"}, {"d", 1}, {"A", {0.5}}, {"B", {1.0}}, {"S", {1.0}}}},
        {"eta0", {{"mean", {0.25}}, {"cov", {1.5}}}},
        {"N", 1000},
        {"n_steps", 50},
        {"seed", 42},
        {"policy", "proportional"},
    };
}

}  // namespace

TEST_CASE("doubles round-trip through their printed form") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 2.0,
                     0.6847416489820999}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("model json round trip") {
    Matrix a(2, 2), b(2, 2), s(2, 2);
    a << 0.5, 0.125, -0.25, 0.0625;
    b << 2.0, 0.5, 0.5, 1.0;
    s << 1.0, 0.25, 0.25, 0.75;
    const GaussianModel model(a, b, s);
    const GaussianModel back = model_from_json(model_to_json(model));
    CHECK(max_abs_diff(back.A, model.A) == 0.0);
    CHECK(max_abs_diff(back.B, model.B) == 0.0);
    CHECK(max_abs_diff(back.S, model.S) == 0.0);
}

TEST_CASE("config errors name the offending field") {
    Json j = desk_config();
    j["model"]["B"] = Json::array({1.0, 2.0});  // wrong arity for d = 1
    try {
        config_from_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("'B'") != std::string::npos);
    }

    Json j2 = desk_config();
    j2["model"].erase("A");
    CHECK_THROWS_AS(config_from_json(j2), ConfigError);

    Json j3 = desk_config();
    j3["N"] = 1;
    CHECK_THROWS_AS(config_from_json(j3), ConfigError);

    Json j4 = desk_config();
    j4["policy"] = "always";
    CHECK_THROWS_AS(config_from_json(j4), ConfigError);
}

TEST_CASE("config round-trips bit-exactly and hashes deterministically") {
    const Json j = desk_config();
    const RunConfig a = config_from_json(j);
    const RunConfig b = config_from_json(Json::parse(a.canonical.dump()));
    CHECK(a.canonical.dump() == b.canonical.dump());
    CHECK(a.hash == b.hash);
    CHECK(a.hash.size() == 16);

    Json tweaked = desk_config();
    tweaked["seed"] = 43;
    CHECK(config_from_json(tweaked).hash != a.hash);
}

TEST_CASE("continuous and kstep model sources resolve") {
    Json j = desk_config();
    j["model"] = {{"type", "continuous"}, {"d", 1},     {"C", {-1.0}},
                  {"D", {0.5}},           {"F", {1.0}}, {"delta", 0.1},
                  {"scheme", "exact"}};
    const RunConfig cont = config_from_json(j);
    CHECK(cont.model.A(0, 0) == doctest::Approx(std::exp(-0.1)));
    CHECK(cont.model.delta.has_value());

    Json k = desk_config();
    k["model"] = {{"type", "kstep"},
                  {"base",
                   {{"type", "gaussian"}, {"d", 1}, {"A", {1.5}}, {"B", {1.0}},
                    {"S", {1.0}}}},
                  {"k", 0}};
    const RunConfig ks = config_from_json(k);
    CHECK(ks.kstep);
    CHECK(ks.kstep_k == 0);
    CHECK(ks.model.A(0, 0) == doctest::Approx(1.5));
}

TEST_CASE("series csv layout and re-write stability") {
    EstimatorSeries series;
    series.dim = 1;
    series.observable_names = {"psi_x0", "psi_xsq"};
    EstimatorRow row;
    row.step = 0;
    row.mean = {1.0 / 3.0};
    row.eta_g = 0.6847416489820999;
    row.psi = {0.25, 0.125};
    series.rows.push_back(row);
    const std::string csv = series_to_csv(series);
    CHECK(csv.find("step,mean_0,eta_G,psi_x0,psi_xsq\n") == 0);
    CHECK(csv == series_to_csv(series));

    const auto path = std::filesystem::temp_directory_path() / "fkdmc_csv_test.csv";
    write_text(path, csv);
    write_text(path, csv);
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == csv);
    std::filesystem::remove(path);
}
