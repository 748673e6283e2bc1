// fkdmc command-line driver: one experiment per invocation, deterministic
// outputs named by the config hash. Exit codes: 0 ok, 2 config error,
// 3 extinction, 4 non-convergence, 5 no stable k, 6 numeric failure.

#include <CLI11.hpp>
#include <iostream>

#include "fkdmc/errors.hpp"
#include "fkdmc/io.hpp"

namespace {

using namespace fkdmc;

std::filesystem::path out_path(const RunConfig& cfg, const std::string& stem,
                               const std::string& ext) {
    return cfg.out_dir / (stem + "_" + cfg.hash + ext);
}

GaussianFkModel make_fk(const RunConfig& cfg, Json& summary) {
    if (!cfg.kstep) return GaussianFkModel(cfg.model, cfg.eta0);
    const HatModel hat = hat_model(cfg.model);
    if (hat.degenerate)
        throw ConfigError("k-step model: updated potential is degenerate");
    int k = cfg.kstep_k;
    if (k == 0) k = min_stable_k(hat.model, cfg.kstep_k_max);
    const KStepModel ks = build_k_step(cfg.model, cfg.eta0, k);
    summary["k"] = k;
    summary["k_base_model"] = [&] {
        try {
            return Json(min_stable_k(cfg.model, cfg.kstep_k_max));
        } catch (const NoStableKError&) {
            return Json(nullptr);
        }
    }();
    return ks.fk_model();
}

int cmd_exact(const RunConfig& cfg) {
    const auto flow = exact_flow(cfg.model, cfg.eta0, cfg.n_steps);
    write_text(out_path(cfg, "exact_flow", ".csv"), csv_preamble(cfg) + flow_to_csv(flow));

    const GroundStateTriple gs = ground_state(cfg.model);
    Json j = summary_skeleton(cfg);
    j["ground_state"] = {
        {"S_inf", matrix_to_json(gs.S_inf)},
        {"E0", gs.E0},
        {"P_inf", matrix_to_json(gs.P_inf)},
        {"riccati_residual", gs.riccati_residual},
        {"iterations", gs.iterations},
    };
    if (cfg.model.delta) j["ground_state"]["lambda0"] = -std::log(gs.E0) / *cfg.model.delta;
    write_json(out_path(cfg, "ground_state", ".json"), j);
    std::cout << "E0 = " << gs.E0 << "\n";
    return 0;
}

int cmd_dmc(const RunConfig& cfg) {
    Json j = summary_skeleton(cfg);
    const GaussianFkModel fk = make_fk(cfg, j);
    RunSpec spec;
    spec.n_walkers = cfg.n_walkers;
    spec.n_steps = cfg.n_steps;
    spec.seed = cfg.seed;
    spec.policy = cfg.policy;
    spec.exec = cfg.exec();
    const EstimatorSeries series = run(fk, spec);
    write_text(out_path(cfg, "dmc_series", ".csv"), csv_preamble(cfg) + series_to_csv(series));

    const EnergyEstimate est = energy_estimate(series, cfg.burn_in, cfg.model.delta);
    j["policy"] = to_string(cfg.policy);
    j["energy"] = {{"value", est.value},
                   {"std_error", est.std_error},
                   {"burn_in", est.burn_in},
                   {"samples", est.samples}};
    if (est.lambda0) j["energy"]["lambda0"] = *est.lambda0;
    j["wall_ms"] = series.wall_ms;
    write_json(out_path(cfg, "dmc_summary", ".json"), j);
    std::cout << "energy estimate = " << est.value << " +- " << est.std_error << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg) {
    if (cfg.walker_counts.empty())
        throw ConfigError("sweep: config needs a non-empty 'N_list'");
    const SweepResult sweep =
        convergence_sweep(cfg.model, cfg.eta0, cfg.walker_counts, cfg.n_steps, cfg.reps,
                          cfg.seed, cfg.policy, cfg.burn_in, cfg.exec());
    write_text(out_path(cfg, "sweep", ".csv"), csv_preamble(cfg) + sweep_to_csv(sweep));
    Json j = summary_skeleton(cfg);
    j["slope"] = sweep.slope;
    j["reps"] = cfg.reps;
    write_json(out_path(cfg, "sweep_summary", ".json"), j);
    std::cout << "error-vs-N slope = " << sweep.slope << "\n";
    return 0;
}

int cmd_diverge(const RunConfig& cfg) {
    const GrowthReport rep = divergence_experiment(
        cfg.model, cfg.eta0, cfg.n_walkers, cfg.n_hi, cfg.reps, cfg.seed, cfg.exec());
    write_text(out_path(cfg, "diverge", ".csv"), csv_preamble(cfg) + growth_to_csv(rep));
    Json j = summary_skeleton(cfg);
    const double ratio = rep.mean_abs_error[cfg.n_hi] /
                         std::max(rep.mean_abs_error[cfg.n_lo], 1e-300);
    j["growth"] = {{"flag", rep.growth},
                   {"slope", rep.slope},
                   {"slope_ci", {rep.slope_ci_lo, rep.slope_ci_hi}},
                   {"checkpoint_ratio", ratio},
                   {"n_lo", cfg.n_lo},
                   {"n_hi", cfg.n_hi},
                   {"extinctions", rep.extinctions}};
    write_json(out_path(cfg, "diverge_summary", ".json"), j);
    std::cout << "growth flag = " << (rep.growth ? "true" : "false")
              << ", slope = " << rep.slope << ", ratio = " << ratio << "\n";
    return 0;
}

int cmd_variance(const RunConfig& cfg) {
    const CltComparison clt =
        clt_empirical(cfg.model, cfg.clt_n, cfg.n_walkers, cfg.reps, cfg.seed, cfg.exec());
    const int horizon = std::max(500, cfg.clt_n);
    const auto sigma2 = asymptotic_variance_1d(cfg.model, horizon);
    write_text(out_path(cfg, "variance_curve", ".csv"), csv_preamble(cfg) + variance_curve_to_csv(sigma2));
    Json j = summary_skeleton(cfg);
    j["clt"] = {{"n", cfg.clt_n},
                {"n_var", clt.n_var},
                {"sigma_n2", clt.sigma_n2},
                {"relative_gap", clt.n_var / clt.sigma_n2 - 1.0},
                {"reps", clt.reps}};
    j["sigma2_sup"] = *std::max_element(sigma2.begin(), sigma2.end());
    write_json(out_path(cfg, "variance_summary", ".json"), j);
    std::cout << "N*Var = " << clt.n_var << " vs sigma_n^2 = " << clt.sigma_n2 << "\n";
    return 0;
}

int cmd_stability(const RunConfig& cfg) {
    const StabilityReport rep = stability_report(cfg.model);
    Json j = summary_skeleton(cfg);
    j["stability"] = {{"holds", rep.holds},
                      {"rho", rep.rho},
                      {"min_eig_gap", rep.min_eig_gap}};
    if (rep.alpha_bar) j["stability"]["alpha_bar"] = *rep.alpha_bar;
    if (rep.H) j["stability"]["H"] = matrix_to_json(*rep.H);
    if (rep.chi) j["stability"]["chi"] = *rep.chi;
    if (cfg.has_tv_nu2) {
        const auto bounds = tv_stability_bound(cfg.model, cfg.eta0, cfg.tv_nu2, cfg.n_steps);
        write_text(out_path(cfg, "tv_bounds", ".csv"), csv_preamble(cfg) + tv_bound_to_csv(bounds));
    }
    write_json(out_path(cfg, "stability", ".json"), j);
    std::cout << "holds = " << (rep.holds ? "true" : "false") << ", rho = " << rep.rho
              << "\n";
    return 0;
}

int cmd_importance(const RunConfig& cfg) {
    Json j = summary_skeleton(cfg);
    const HatModel hat = hat_model(cfg.model);
    if (hat.degenerate)
        throw ConfigError("importance: updated potential is degenerate");
    int k = cfg.kstep_k;
    if (k == 0) k = min_stable_k(hat.model, cfg.kstep_k_max);
    j["k"] = k;
    try {
        j["k_base_model"] = min_stable_k(cfg.model, cfg.kstep_k_max);
    } catch (const NoStableKError&) {
        j["k_base_model"] = nullptr;
    }

    const KStepModel ks = build_k_step(cfg.model, cfg.eta0, k);

    // Exact cross-check: the k-step flow against the psi_G-updated base flow.
    const int blocks = std::max(1, std::min(50, cfg.n_steps));
    const auto kflow = ks.exact_kstep_flow(blocks);
    const auto base_flow = exact_flow(cfg.model, cfg.eta0, blocks * k);
    double max_dev = 0.0;
    for (int n = 0; n <= blocks; ++n) {
        const GaussianMeasure upd = bg_update(base_flow[n * k], cfg.model.S);
        max_dev = std::max(max_dev, (kflow[n].mean - upd.mean).cwiseAbs().maxCoeff());
        max_dev = std::max(max_dev, max_abs_diff(kflow[n].cov, upd.cov));
    }
    j["kstep_flow_max_deviation"] = max_dev;

    RunSpec spec;
    spec.n_walkers = cfg.n_walkers;
    spec.n_steps = cfg.n_steps;
    spec.seed = cfg.seed;
    spec.policy = cfg.policy;
    spec.exec = cfg.exec();
    const EstimatorSeries series = run(ks.fk_model(), spec);
    write_text(out_path(cfg, "importance_series", ".csv"), csv_preamble(cfg) + series_to_csv(series));
    const EnergyEstimate est = energy_estimate(series, cfg.burn_in);
    j["energy_kstep"] = {{"value", est.value}, {"std_error", est.std_error}};

    // Optional gap filling: an independent system per offset o approximates
    // the updated measures at times n*k + o.
    j["offsets"] = cfg.kstep_offsets ? k : 1;
    if (cfg.kstep_offsets) {
        const auto offset_base = exact_flow(cfg.model, cfg.eta0, k - 1);
        for (int o = 1; o < k; ++o) {
            const KStepModel shifted = build_k_step(cfg.model, offset_base[o], k);
            RunSpec ospec = spec;
            ospec.seed = splitmix64(cfg.seed ^ (0x0FF5E7ull + o));
            const EstimatorSeries oseries = run(shifted.fk_model(), ospec);
            write_text(out_path(cfg, "importance_series_offset" + std::to_string(o),
                                ".csv"),
                       csv_preamble(cfg) + series_to_csv(oseries));
        }
    }
    write_json(out_path(cfg, "importance_summary", ".json"), j);
    std::cout << "k = " << k << ", kstep flow max deviation = " << max_dev << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feynman-Kac / Diffusion Monte Carlo engine with exact "
                 "linear-Gaussian oracles"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    int threads_override = -1;

    const std::vector<std::string> names = {"exact",    "dmc",       "sweep",
                                            "diverge",  "variance",  "stability",
                                            "importance"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config path")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed_override, "seed override")
            ->each([&](const std::string&) { has_seed = true; });
        sub->add_option("--threads", threads_override,
                        "thread count override (must not change results)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string mode = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (has_seed) cfg.seed = seed_override;
        if (threads_override >= 0) cfg.threads = threads_override;

        if (mode == "exact") return cmd_exact(cfg);
        if (mode == "dmc") return cmd_dmc(cfg);
        if (mode == "sweep") return cmd_sweep(cfg);
        if (mode == "diverge") return cmd_diverge(cfg);
        if (mode == "variance") return cmd_variance(cfg);
        if (mode == "stability") return cmd_stability(cfg);
        if (mode == "importance") return cmd_importance(cfg);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::config_error);
    } catch (const ExtinctionError& e) {
        std::cerr << "extinction: " << e.what() << "\n";
        return static_cast<int>(ExitCode::extinction);
    } catch (const NonConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return static_cast<int>(ExitCode::non_convergence);
    } catch (const NoStableKError& e) {
        std::cerr << "no stable k: " << e.what() << "\n";
        return static_cast<int>(ExitCode::no_stable_k);
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return static_cast<int>(ExitCode::numeric_failure);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::failure);
    }
}
