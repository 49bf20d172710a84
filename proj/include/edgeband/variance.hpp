#pragma once

#include "edgeband/estimator.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"

#include <optional>
#include <vector>

namespace edgeband {

// 1-based inclusive pixel rectangle
struct PixelRect {
    int i1_lo, i1_hi, i2_lo, i2_hi;
};

// sigma^2 = sum of squared horizontal-neighbor differences / (2N)
double estimate_sigma(const ImageGrid& grid, const std::optional<PixelRect>& region = {});

struct KernelConstants {
    double k2p0;        // K2'(0)
    double i_k1p_k2_sq; // int (K1'(z1) K2(z2))^2
    double i_k1_k2p_sq; // int (K1(z1) K2'(z2))^2
    double i_y2_k1;     // int y^2 K1(y) dy
    double vs_psi;      // int (K1' K2 z2 - K1 K2' z1)^2
    double vs_tau;      // int K^2
};

KernelConstants kernel_constants(const KernelPair& pair);

struct VarianceComponents {
    double sigma_hat = 0.0;
    std::vector<double> x_grid;
    std::vector<double> vh_phi; // tau cos^2(psi) K2'(0)
    std::vector<double> vs_phi; // sin^2 psi * i_k1p_k2_sq + cos^2 psi * i_k1_k2p_sq
    std::vector<double> vh_psi; // tau K2'(0) int y^2 K1
    double vs_psi = 0.0;
    double vs_tau = 0.0;
    KernelConstants constants{};
    bool degenerate(int i) const { return vh_phi[i] == 0.0; }
};

VarianceComponents variance_components(const EdgeEstimate& est, const KernelPair& pair,
                                       double sigma_hat);
VarianceComponents variance_components(const EdgeEstimate& est, const KernelConstants& kc,
                                       double sigma_hat);

// sd of n * phi_hat(x_i): sigma * sqrt(VS_phi) / |VH_phi|
double asymptotic_sd_phi(const VarianceComponents& comp, int i);

} // namespace edgeband
