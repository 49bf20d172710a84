// serial reference vs OpenMP timing for curve estimation and the bootstrap
#include "edgeband/confidence.hpp"
#include "edgeband/estimator.hpp"
#include "edgeband/exec.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/scenes.hpp"
#include "edgeband/variance.hpp"

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>

using namespace edgeband;

namespace {

template <typename Fn> double seconds(Fn&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const std::string& name, double ts, double tp, bool identical) {
    std::cout << std::left << std::setw(28) << name << std::right << std::fixed
              << std::setprecision(3) << std::setw(10) << ts << " s" << std::setw(10) << tp
              << " s" << std::setw(9) << std::setprecision(2) << (ts / tp) << "x  "
              << (identical ? "identical" : "MISMATCH") << '\n';
}

bool same(const EdgeEstimate& a, const EdgeEstimate& b) {
    return a.phi_hat == b.phi_hat && a.psi_hat == b.psi_hat && a.tau_hat == b.tau_hat;
}

} // namespace

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 128;
    int nboot = argc > 2 ? std::atoi(argv[2]) : 2000;
    std::cout << "n=" << n << " bootstrap=" << nboot << " threads=" << max_threads() << "\n\n";
    std::cout << std::left << std::setw(28) << "operation" << std::right << std::setw(12)
              << "serial" << std::setw(12) << "parallel" << std::setw(10) << "speedup" << '\n';

    ImageGrid grid = generate(scene_linear(0.5, 7), n);
    KernelPair pair = make_default_kernels();
    EstimationConfig cfg;
    double sig = estimate_sigma(grid);

    EdgeEstimate es, ep;
    double ts = seconds([&] { es = estimate_curve(grid, pair, cfg, Exec::serial); });
    double tp = seconds([&] { ep = estimate_curve(grid, pair, cfg, Exec::parallel); });
    row("estimate_curve", ts, tp, same(es, ep));

    ts = seconds([&] { es = estimate_curve_tracked(grid, pair, cfg, {}, sig, Exec::serial); });
    tp = seconds([&] { ep = estimate_curve_tracked(grid, pair, cfg, {}, sig, Exec::parallel); });
    row("estimate_curve_tracked", ts, tp, same(es, ep));

    VarianceComponents comp = variance_components(ep, pair, sig);
    BandConfig bc;
    bc.n_bootstrap = nboot;
    bc.seed = 7;
    SupQuantileResult qs, qp;
    ts = seconds([&] { qs = bootstrap_sup_quantile(grid, ep, comp, bc, pair, Exec::serial); });
    tp = seconds([&] { qp = bootstrap_sup_quantile(grid, ep, comp, bc, pair, Exec::parallel); });
    row("bootstrap_sup_quantile", ts, tp, qs.sup_samples == qp.sup_samples);
    return 0;
}
