#include "edgeband/variance.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/numerics.hpp"

#include <cmath>

namespace edgeband {

double estimate_sigma(const ImageGrid& grid, const std::optional<PixelRect>& region) {
    PixelRect r{1, grid.n1, 1, grid.n2};
    if (region) {
        r = *region;
        if (r.i1_lo < 1 || r.i2_lo < 1 || r.i1_hi > grid.n1 || r.i2_hi > grid.n2 ||
            r.i1_lo > r.i1_hi || r.i2_lo > r.i2_hi)
            throw argument_error("estimate_sigma: region out of bounds");
        long long npix =
            static_cast<long long>(r.i1_hi - r.i1_lo + 1) * (r.i2_hi - r.i2_lo + 1);
        if (npix < 100) throw argument_error("estimate_sigma: region must contain >= 100 pixels");
    }
    if (r.i1_hi - r.i1_lo < 1) throw argument_error("estimate_sigma: degenerate region");
    double ss = 0.0;
    long long npairs = 0;
    for (int i1 = r.i1_lo; i1 < r.i1_hi; ++i1)
        for (int i2 = r.i2_lo; i2 <= r.i2_hi; ++i2) {
            double d = grid.at(i1 + 1, i2) - grid.at(i1, i2);
            ss += d * d;
            ++npairs;
        }
    return std::sqrt(ss / (2.0 * npairs));
}

KernelConstants kernel_constants(const KernelPair& pair) {
    KernelConstants kc;
    kc.k2p0 = pair.k2.deriv1(0.0);
    QuadRule gl = gauss_legendre(512);
    // map nodes to [-1, 1]; the rule is already on [-1, 1]
    std::vector<double> k1(gl.nodes.size()), k1p(gl.nodes.size());
    std::vector<double> k2(gl.nodes.size()), k2p(gl.nodes.size());
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        k1[i] = pair.k1.eval(gl.nodes[i]);
        k1p[i] = pair.k1.deriv1(gl.nodes[i]);
        k2[i] = pair.k2.eval(gl.nodes[i]);
        k2p[i] = pair.k2.deriv1(gl.nodes[i]);
    }
    double s_k1_sq = 0, s_k1p_sq = 0, s_k2_sq = 0, s_k2p_sq = 0, s_y2k1 = 0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        double w = gl.weights[i];
        s_k1_sq += w * k1[i] * k1[i];
        s_k1p_sq += w * k1p[i] * k1p[i];
        s_k2_sq += w * k2[i] * k2[i];
        s_k2p_sq += w * k2p[i] * k2p[i];
        s_y2k1 += w * gl.nodes[i] * gl.nodes[i] * k1[i];
    }
    kc.i_k1p_k2_sq = s_k1p_sq * s_k2_sq;
    kc.i_k1_k2p_sq = s_k1_sq * s_k2p_sq;
    kc.i_y2_k1 = s_y2k1;
    kc.vs_tau = s_k1_sq * s_k2_sq;
    // genuinely two-dimensional integrand: tensor product over the 512^2 grid
    double vs_psi = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            double g = k1p[i] * k2[j] * gl.nodes[j] - k1[i] * k2p[j] * gl.nodes[i];
            vs_psi += gl.weights[i] * gl.weights[j] * g * g;
        }
    kc.vs_psi = vs_psi;
    return kc;
}

VarianceComponents variance_components(const EdgeEstimate& est, const KernelConstants& kc,
                                       double sigma_hat) {
    if (est.x_grid.empty()) throw argument_error("variance_components: empty estimate");
    VarianceComponents vc;
    vc.sigma_hat = sigma_hat;
    vc.x_grid = est.x_grid;
    vc.constants = kc;
    vc.vs_psi = kc.vs_psi;
    vc.vs_tau = kc.vs_tau;
    std::size_t m = est.x_grid.size();
    vc.vh_phi.resize(m);
    vc.vs_phi.resize(m);
    vc.vh_psi.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double c = std::cos(est.psi_hat[i]), s = std::sin(est.psi_hat[i]);
        vc.vh_phi[i] = est.tau_hat[i] * c * c * kc.k2p0;
        vc.vs_phi[i] = s * s * kc.i_k1p_k2_sq + c * c * kc.i_k1_k2p_sq;
        vc.vh_psi[i] = est.tau_hat[i] * kc.k2p0 * kc.i_y2_k1;
    }
    return vc;
}

VarianceComponents variance_components(const EdgeEstimate& est, const KernelPair& pair,
                                       double sigma_hat) {
    return variance_components(est, kernel_constants(pair), sigma_hat);
}

double asymptotic_sd_phi(const VarianceComponents& comp, int i) {
    if (i < 0 || i >= static_cast<int>(comp.x_grid.size()))
        throw argument_error("asymptotic_sd_phi: index out of range");
    if (comp.vh_phi[i] == 0.0)
        throw config_error("asymptotic_sd_phi: degenerate curvature (VH_phi = 0)");
    return comp.sigma_hat * std::sqrt(comp.vs_phi[i]) / std::abs(comp.vh_phi[i]);
}

} // namespace edgeband
