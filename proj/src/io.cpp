#include "fkdmc/io.hpp"

#include <charconv>
#include <fstream>

#include "fkdmc/errors.hpp"

namespace fkdmc {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

Matrix matrix_from_json(const Json& j, const std::string& field, int rows, int cols) {
    if (!j.contains(field)) throw ConfigError("config: missing field '" + field + "'");
    const Json& arr = j.at(field);
    if (!arr.is_array() || static_cast<int>(arr.size()) != rows * cols)
        throw ConfigError("config: field '" + field + "' must be a row-major array of " +
                          std::to_string(rows * cols) + " numbers");
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const Json& v = arr[r * cols + c];
            if (!v.is_number())
                throw ConfigError("config: field '" + field + "' entry " +
                                  std::to_string(r * cols + c) + " is not a number");
            m(r, c) = v.get<double>();
        }
    return m;
}

int dim_from_json(const Json& j) {
    if (!j.contains("d")) throw ConfigError("config: missing field 'd'");
    if (!j.at("d").is_number_integer() || j.at("d").get<int>() <= 0)
        throw ConfigError("config: field 'd' must be a positive integer");
    return j.at("d").get<int>();
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json arr = Json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

Json model_to_json(const GaussianModel& model) {
    Json j;
    j["d"] = model.d;
    j["A"] = matrix_to_json(model.A);
    j["B"] = matrix_to_json(model.B);
    j["S"] = matrix_to_json(model.S);
    if (model.delta) j["delta"] = *model.delta;
    return j;
}

GaussianModel model_from_json(const Json& j) {
    const int d = dim_from_json(j);
    GaussianModel model;
    model.d = d;
    model.A = matrix_from_json(j, "A", d, d);
    model.B = matrix_from_json(j, "B", d, d);
    model.S = matrix_from_json(j, "S", d, d);
    if (j.contains("delta")) model.delta = j.at("delta").get<double>();
    model.validate();
    return model;
}

Json measure_to_json(const GaussianMeasure& eta) {
    Json j;
    j["mean"] = Json::array();
    for (int i = 0; i < eta.mean.size(); ++i) j["mean"].push_back(eta.mean(i));
    j["cov"] = matrix_to_json(eta.cov);
    return j;
}

GaussianMeasure measure_from_json(const Json& j) {
    if (!j.contains("mean") || !j.at("mean").is_array())
        throw ConfigError("config: measure needs a 'mean' array");
    const int d = static_cast<int>(j.at("mean").size());
    GaussianMeasure eta;
    eta.mean.resize(d);
    for (int i = 0; i < d; ++i) eta.mean(i) = j.at("mean")[i].get<double>();
    eta.cov = matrix_from_json(j, "cov", d, d);
    eta.validate();
    return eta;
}

namespace {

GaussianModel resolve_model(const Json& j) {
    if (!j.contains("model")) throw ConfigError("config: missing field 'model'");
    const Json& m = j.at("model");
    const std::string type = m.value("type", "gaussian");
    if (type == "gaussian") return model_from_json(m);
    if (type == "continuous") {
        const int d = dim_from_json(m);
        const Matrix C = matrix_from_json(m, "C", d, d);
        const Matrix D = matrix_from_json(m, "D", d, d);
        const Matrix F = matrix_from_json(m, "F", d, d);
        if (!m.contains("delta")) throw ConfigError("config: continuous model needs 'delta'");
        const double delta = m.at("delta").get<double>();
        const std::string scheme = m.value("scheme", "exact");
        if (scheme != "exact" && scheme != "euler")
            throw ConfigError("config: field 'scheme' must be exact|euler");
        return discretize_continuous(C, D, F, delta,
                                     scheme == "exact" ? DiscretizationScheme::exact
                                                       : DiscretizationScheme::euler);
    }
    throw ConfigError("config: model 'type' must be gaussian|continuous");
}

}  // namespace

RunConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
    RunConfig cfg;

    const Json& mj = j.contains("model") ? j.at("model") : Json();
    if (mj.is_object() && mj.value("type", "gaussian") == "kstep") {
        if (!mj.contains("base")) throw ConfigError("config: kstep model needs 'base'");
        Json base_wrapper;
        base_wrapper["model"] = mj.at("base");
        cfg.model = resolve_model(base_wrapper);
        cfg.kstep = true;
        cfg.kstep_k = mj.value("k", 0);
        cfg.kstep_k_max = mj.value("k_max", 60);
        cfg.kstep_offsets = mj.value("offsets", false);
        if (cfg.kstep_k < 0) throw ConfigError("config: field 'k' must be >= 0");
        if (cfg.kstep_k_max < 1) throw ConfigError("config: field 'k_max' must be >= 1");
    } else {
        cfg.model = resolve_model(j);
    }

    if (j.contains("eta0"))
        cfg.eta0 = measure_from_json(j.at("eta0"));
    else
        cfg.eta0 = GaussianMeasure::standard(cfg.model.d);
    if (cfg.eta0.dim() != cfg.model.d)
        throw ConfigError("config: eta0 dimension does not match the model");

    auto get_positive_int = [&](const char* field, int fallback) {
        if (!j.contains(field)) return fallback;
        if (!j.at(field).is_number_integer() || j.at(field).get<long long>() < 0)
            throw ConfigError(std::string("config: field '") + field +
                              "' must be a non-negative integer");
        return static_cast<int>(j.at(field).get<long long>());
    };

    if (j.contains("N")) {
        if (!j.at("N").is_number_integer() || j.at("N").get<long long>() < 2)
            throw ConfigError("config: field 'N' must be an integer >= 2");
        cfg.n_walkers = j.at("N").get<std::size_t>();
    }
    cfg.n_steps = get_positive_int("n_steps", cfg.n_steps);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("policy"))
        cfg.policy = selection_policy_from_string(j.at("policy").get<std::string>());
    cfg.reps = get_positive_int("reps", cfg.reps);
    cfg.threads = get_positive_int("threads", cfg.threads);
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("burn_in")) {
        const Json& b = j.at("burn_in");
        if (b.contains("steps")) {
            cfg.burn_in.explicit_steps = b.at("steps").get<int>();
        } else {
            cfg.burn_in.a = b.value("a", cfg.burn_in.a);
            cfg.burn_in.b = b.value("b", cfg.burn_in.b);
        }
    }

    if (j.contains("N_list")) {
        for (const auto& v : j.at("N_list")) {
            if (!v.is_number_integer() || v.get<long long>() < 2)
                throw ConfigError("config: field 'N_list' entries must be integers >= 2");
            cfg.walker_counts.push_back(v.get<std::size_t>());
        }
    }
    if (j.contains("checkpoints")) {
        cfg.n_lo = j.at("checkpoints").value("n_lo", cfg.n_lo);
        cfg.n_hi = j.at("checkpoints").value("n_hi", cfg.n_hi);
        if (cfg.n_lo <= 0 || cfg.n_hi <= cfg.n_lo)
            throw ConfigError("config: checkpoints need 0 < n_lo < n_hi");
    }
    if (j.contains("clt")) cfg.clt_n = j.at("clt").value("n", cfg.clt_n);
    if (j.contains("tv_nu2")) {
        cfg.tv_nu2 = measure_from_json(j.at("tv_nu2"));
        cfg.has_tv_nu2 = true;
    }

    cfg.canonical = j;
    cfg.hash = fnv1a_hex(j.dump());
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config: parse error in '" + path.string() + "': " + e.what());
    }
    return config_from_json(j);
}

Json summary_skeleton(const RunConfig& config) {
    Json j;
    j["artifact_version"] = kArtifactVersion;
    j["config_hash"] = config.hash;
    j["seed"] = config.seed;
    j["config"] = config.canonical;
    return j;
}

std::string csv_preamble(const RunConfig& config) {
    return "# fkdmc " + std::string(kArtifactVersion) + " config=" + config.hash +
           " seed=" + std::to_string(config.seed) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "."
                                                                   : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

std::string series_to_csv(const EstimatorSeries& series) {
    std::string csv = "step";
    for (int k = 0; k < series.dim; ++k) csv += ",mean_" + std::to_string(k);
    csv += ",eta_G";
    for (const auto& name : series.observable_names) csv += "," + name;
    csv += "\n";
    for (const auto& row : series.rows) {
        csv += std::to_string(row.step);
        for (double m : row.mean) csv += "," + format_double(m);
        csv += "," + format_double(row.eta_g);
        for (double p : row.psi) csv += "," + format_double(p);
        csv += "\n";
    }
    return csv;
}

std::string flow_to_csv(const std::vector<GaussianMeasure>& flow) {
    if (flow.empty()) return "step\n";
    const int d = flow.front().dim();
    std::string csv = "step";
    for (int k = 0; k < d; ++k) csv += ",mean_" + std::to_string(k);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            csv += ",cov_" + std::to_string(r) + std::to_string(c);
    csv += "\n";
    for (std::size_t n = 0; n < flow.size(); ++n) {
        csv += std::to_string(n);
        for (int k = 0; k < d; ++k) csv += "," + format_double(flow[n].mean(k));
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) csv += "," + format_double(flow[n].cov(r, c));
        csv += "\n";
    }
    return csv;
}

std::string tv_bound_to_csv(const std::vector<TvBoundStep>& steps) {
    std::string csv = "step,kl,pinsker,tv_quadrature\n";
    for (std::size_t n = 0; n < steps.size(); ++n) {
        csv += std::to_string(n) + "," + format_double(steps[n].kl) + "," +
               format_double(steps[n].pinsker) + ",";
        csv += steps[n].tv ? format_double(*steps[n].tv) : std::string("");
        csv += "\n";
    }
    return csv;
}

std::string growth_to_csv(const GrowthReport& report) {
    std::string csv = "step,mean_abs_error\n";
    for (std::size_t n = 0; n < report.mean_abs_error.size(); ++n)
        csv += std::to_string(n) + "," + format_double(report.mean_abs_error[n]) + "\n";
    return csv;
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::string csv = "N,sup_l2_error,energy,energy_std_error\n";
    for (const auto& p : sweep.points) {
        csv += std::to_string(p.n_walkers) + "," + format_double(p.sup_l2_error) + "," +
               format_double(p.energy) + "," + format_double(p.energy_std_error) + "\n";
    }
    return csv;
}

std::string variance_curve_to_csv(const std::vector<double>& sigma2) {
    std::string csv = "n,sigma_n2\n";
    for (std::size_t n = 0; n < sigma2.size(); ++n)
        csv += std::to_string(n) + "," + format_double(sigma2[n]) + "\n";
    return csv;
}

}  // namespace fkdmc
