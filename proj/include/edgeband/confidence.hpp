#pragma once

#include "edgeband/estimator.hpp"
#include "edgeband/exec.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/variance.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace edgeband {

enum class BandTarget { phi, psi, tau };
enum class TnPolicy { fixed, inv_sqrt_log };

struct BandConfig {
    double alpha = 0.05;
    int n_bootstrap = 4000;
    TnPolicy tn_policy = TnPolicy::inv_sqrt_log;
    double tn_fixed = 0.0; // used when tn_policy == fixed
    BandTarget target = BandTarget::phi;
    std::uint64_t seed = 0;
    double multiplier_scale = 1.0; // scales every multiplier; test hook
    double resolve_tn(double n_eff) const;
    void validate() const;
};

struct PointwiseCi {
    std::vector<double> lower, upper;
    std::vector<unsigned char> unbounded; // VH_phi == 0 at that x
};

// phi_hat(x) +/- sigma sqrt(VS_phi) q_{1-alpha/2} / (n VH_phi)
PointwiseCi pointwise_ci(const EdgeEstimate& est, const VarianceComponents& comp, double alpha);

struct SupQuantileResult {
    double quantile;
    std::vector<double> sup_samples;
};

// multiplier-bootstrap sup of |Z(x)| over the x grid; multipliers drawn once
// per replication and shared across x
SupQuantileResult bootstrap_sup_quantile(const ImageGrid& grid, const EdgeEstimate& est,
                                         const VarianceComponents& comp, const BandConfig& cfg,
                                         const KernelPair& pair, Exec exec = Exec::parallel);

struct BandResult {
    std::vector<double> x_grid;
    std::vector<double> center;
    std::vector<double> lower, upper;
    double quantile_boot = 0.0;
    double t_n_used = 0.0;
    double alpha = 0.0;
    std::vector<double> pointwise_lower, pointwise_upper;
    std::vector<unsigned char> unbounded;
};

BandResult uniform_band(const ImageGrid& grid, const EdgeEstimate& est,
                        const VarianceComponents& comp, const BandConfig& cfg,
                        const KernelPair& pair, Exec exec = Exec::parallel);

// sup over the grid of n |VH_phi (phi_hat - phi)| / (sigma sqrt(VS_phi))
double sup_statistic(const EdgeEstimate& est, const VarianceComponents& comp,
                     const std::function<double(double)>& true_phi);

} // namespace edgeband
