#pragma once

// Config loading, CSV/JSON emission. Configs are JSON documents with
// row-major decimal matrices; every output embeds the config hash, the seed
// and the artifact version, and CSV doubles are printed in shortest
// round-trip form so re-runs are byte-identical.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkdmc/analysis.hpp"
#include "fkdmc/engine.hpp"
#include "fkdmc/exact_gaussian.hpp"

namespace fkdmc {

inline constexpr const char* kArtifactVersion = "0.1.0";

using Json = nlohmann::json;

// Shortest representation that parses back to the same double.
std::string format_double(double v);

std::string fnv1a_hex(const std::string& bytes);

Json model_to_json(const GaussianModel& model);
GaussianModel model_from_json(const Json& j);

Json measure_to_json(const GaussianMeasure& eta);
GaussianMeasure measure_from_json(const Json& j);

Json matrix_to_json(const Matrix& m);

struct RunConfig {
    GaussianModel model;       // resolved model (continuous already discretized)
    GaussianMeasure eta0;
    std::size_t n_walkers = 1000;
    int n_steps = 100;
    std::uint64_t seed = 42;
    SelectionPolicy policy = SelectionPolicy::proportional;
    int reps = 32;
    int threads = 1;
    BurnInRule burn_in;
    std::filesystem::path out_dir = ".";

    // k-step wrapper
    bool kstep = false;
    int kstep_k = 0;  // 0 = pick min stable k automatically
    int kstep_k_max = 60;
    bool kstep_offsets = false;  // run k offset systems to fill the k-mesh gaps

    // experiment extras
    std::vector<std::size_t> walker_counts;  // sweep
    int n_lo = 10;                           // diverge checkpoints
    int n_hi = 40;
    int clt_n = 20;
    GaussianMeasure tv_nu2;                  // second initial law for stability TV
    bool has_tv_nu2 = false;

    Json canonical;       // round-tripped config document
    std::string hash;     // FNV-1a of the canonical dump

    ExecPolicy exec() const { return ExecPolicy{threads}; }
};

RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

// Canonical run-summary skeleton: version, seed, hash, config echo.
Json summary_skeleton(const RunConfig& config);

// One comment line carried at the top of every CSV: version, config hash, seed.
std::string csv_preamble(const RunConfig& config);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

// CSV writers; columns never contain separators, so no quoting is needed.
std::string series_to_csv(const EstimatorSeries& series);
std::string flow_to_csv(const std::vector<GaussianMeasure>& flow);
std::string tv_bound_to_csv(const std::vector<TvBoundStep>& steps);
std::string growth_to_csv(const GrowthReport& report);
std::string sweep_to_csv(const SweepResult& sweep);
std::string variance_curve_to_csv(const std::vector<double>& sigma2);

}  // namespace fkdmc
