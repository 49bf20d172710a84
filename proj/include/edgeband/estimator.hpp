#pragma once
#include "edgeband/contrast.hpp"
#include "edgeband/exec.hpp"
#include "edgeband/image.hpp"

#include <cmath>
#include "edgeband/kernels.hpp"

#include <vector>

namespace edgeband {

// window with about points_per_window design points: sqrt(ppw)/(2n), clamped
// into [2/n, 1/4]
double default_bandwidth(int n, int points_per_window = 100);

struct EstimationConfig {
    double h = 0.0;            // 0: default_bandwidth(n2)
    double I_lo = 0.0;         // 0/0: [max(2h, 0.04), min(1-2h, 0.96)]
    double I_hi = 0.0;
    int x_grid_size = 64;
    double coarse_y_step = 0.0;   // 0: 1/n2
    double coarse_psi_step = 0.0; // 0: pi/64
    int refine_iters = 30;

    // resolved copies with all defaults filled in for a given grid
    EstimationConfig resolved(const ImageGrid& grid) const;
};

struct StripEstimate {
    double phi;
    double psi;
    double tau;
    double value; // contrast at the refined argmax (equals tau by definition)
};

struct EdgeEstimate {
    std::vector<double> x_grid;
    std::vector<double> phi_hat;
    std::vector<double> psi_hat;
    std::vector<double> tau_hat;
    std::vector<double> contrast_at_max;
    double h = 0.0;
    int n1 = 0, n2 = 0; // image dimensions the estimate came from
    double n_eff() const { return std::sqrt(static_cast<double>(n1) * n2); }
};

/// coarse grid scan of one strip: V[j*npsi + k] = contrast at (y_j, psi_k)
struct StripScan {
    std::vector<double> ys;
    std::vector<double> psis;
    std::vector<double> V; // row-major over (y, psi)
    int best_j = 0;
    int best_k = 0;

    double value(int j, int k) const { return V[static_cast<std::size_t>(j) * psis.size() + k]; }
};
StripScan strip_scan(const ImageGrid& grid, const KernelPair& pair, double x,
                     const EstimationConfig& cfg);

/// joint argmax over [h, 1-h] x [-pi/2, pi/2]: exhaustive coarse grid, ties
// broken by smallest y then smallest psi, then local golden-section rounds and
// a Newton polish on the analytic gradient
StripEstimate estimate_strip(const ImageGrid& grid, const KernelPair& pair, double x,
                             const EstimationConfig& cfg);

// restricted variant: y confined to [y_lo, y_hi] (used by candidate tracking
// and by the multi-edge delta-neighborhood maximization)
StripEstimate estimate_strip_restricted(const ImageGrid& grid, const KernelPair& pair,
                                        double x, const EstimationConfig& cfg, double y_lo,
                                        double y_hi);

// independent per-strip maxima over the x grid (parallel map)
EdgeEstimate estimate_curve(const ImageGrid& grid, const KernelPair& pair,
                            const EstimationConfig& cfg, Exec exec = Exec::parallel);

// curve-level maximization: per strip the top local maxima of the coarse
// profile are kept as candidates and a dynamic program selects the path that
// maximizes total contrast subject to a continuity corridor; chosen candidates
// are then refined as in estimate_strip. The per-strip argmax surface has
// spurious noise maxima whose height is comparable to weak-edge contrast, so
// per-strip independent argmax is not consistent pathwise; the corridor
// restores curve-level consistency.
struct TrackConfig {
    int max_candidates = 8;
    double nms_spacing = 0.0;  // 0: 2/n2
    double corridor = 0.0;     // 0: 2 * x-grid spacing
    double jump_penalty = 0.0; // 0: 3 sigma_hat sqrt(VS_tau) / (nh) per h of excess
};
EdgeEstimate estimate_curve_tracked(const ImageGrid& grid, const KernelPair& pair,
                                    const EstimationConfig& cfg, const TrackConfig& track,
                                    double sigma_hat, Exec exec = Exec::parallel);

} // namespace edgeband
