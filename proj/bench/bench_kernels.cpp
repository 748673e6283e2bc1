// Timing comparison of the serial reference kernels against the OpenMP
// variants: potential evaluation, mutation, and a full engine step. Output is
// one line per kernel with both timings and the speedup.

#include <chrono>
#include <iostream>

#include "fkdmc/engine.hpp"
#include "fkdmc/exact_gaussian.hpp"

using namespace fkdmc;

namespace {

double time_ms(const std::function<void()>& fn, int iters) {
    fn();  // warm-up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < iters; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / iters;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n_walkers = argc > 1 ? std::stoull(argv[1]) : 200000;
    const int dim = argc > 2 ? std::stoi(argv[2]) : 3;
    const int iters = 5;

    Matrix a = 0.4 * Matrix::Identity(dim, dim);
    a(0, dim - 1) = 0.2;
    const GaussianModel model(a, Matrix::Identity(dim, dim),
                              0.5 * Matrix::Identity(dim, dim));
    const GaussianFkModel fk(model, GaussianMeasure::standard(dim));

    const ExecPolicy serial{1};
    const ExecPolicy parallel{0};

    WalkerEnsemble ens = init_ensemble(fk, n_walkers, 42, parallel);

    std::cout << "N = " << n_walkers << ", d = " << dim << "\n";

    const double pot_s = time_ms([&] { eval_log_potentials(fk, ens, serial); }, iters);
    const double pot_p = time_ms([&] { eval_log_potentials(fk, ens, parallel); }, iters);
    std::cout << "log-potential eval: serial " << pot_s << " ms, openmp " << pot_p
              << " ms, speedup " << pot_s / pot_p << "x\n";

    auto mutate_with = [&](const ExecPolicy& exec) {
        WalkerEnsemble copy = ens;
        mutation_step(copy, fk, exec);
    };
    const double mut_s = time_ms([&] { mutate_with(serial); }, iters);
    const double mut_p = time_ms([&] { mutate_with(parallel); }, iters);
    std::cout << "mutation:           serial " << mut_s << " ms, openmp " << mut_p
              << " ms, speedup " << mut_s / mut_p << "x\n";

    auto run_with = [&](const ExecPolicy& exec) {
        RunSpec spec;
        spec.n_walkers = n_walkers;
        spec.n_steps = 10;
        spec.seed = 42;
        spec.exec = exec;
        run(fk, spec);
    };
    const double run_s = time_ms([&] { run_with(serial); }, 1);
    const double run_p = time_ms([&] { run_with(parallel); }, 1);
    std::cout << "10-step run:        serial " << run_s << " ms, openmp " << run_p
              << " ms, speedup " << run_s / run_p << "x\n";
    return 0;
}
