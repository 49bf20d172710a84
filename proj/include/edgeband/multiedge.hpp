#pragma once

#include "edgeband/confidence.hpp"
#include "edgeband/estimator.hpp"
#include "edgeband/exec.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/variance.hpp"

#include <string>
#include <vector>

namespace edgeband {

struct MultiEdgeConfig {
    int max_curves = 2;      // J
    double separation = 0.0; // delta; 0: h
    BandConfig band{};
    void validate() const;
};

struct CandidatePoint {
    double y;
    double psi;
    double value;
    bool weak; // contrast below the noise floor 3 sigma sqrt(VS_tau) / (n h)
};

// per strip: up to J local maxima of the best-psi contrast profile, greedy
// non-maximum suppression at spacing delta, ties broken by smaller y
std::vector<std::vector<CandidatePoint>> detect_candidates(const ImageGrid& grid,
                                                           const KernelPair& pair,
                                                           const EstimationConfig& cfg,
                                                           const MultiEdgeConfig& multi,
                                                           Exec exec = Exec::parallel);

struct MultiEdgeResult {
    std::vector<EdgeEstimate> curves;   // ordered by mean y
    std::vector<std::string> warnings;  // discarded tracks etc.
};

// chain candidates into tracks (nearest neighbor, jump tolerance 2h), drop
// tracks with gaps above 25% of the grid, re-estimate each track restricted
// to the delta-neighborhood of its chained y values
MultiEdgeResult estimate_multi(const ImageGrid& grid, const KernelPair& pair,
                               const EstimationConfig& cfg, const MultiEdgeConfig& multi,
                               const std::vector<std::vector<CandidatePoint>>& candidates,
                               Exec exec = Exec::parallel);

// uniform band per curve at level alpha / (number of curves)
std::vector<BandResult> bonferroni_bands(const ImageGrid& grid,
                                         const std::vector<EdgeEstimate>& estimates,
                                         const std::vector<VarianceComponents>& components,
                                         const BandConfig& cfg, const KernelPair& pair,
                                         Exec exec = Exec::parallel);

} // namespace edgeband
