#pragma once
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/numerics.hpp"

#include <vector>

namespace edgeband {

struct ContrastQuery {
    double x = 0.0;   // first coordinate of the probe point
    double y = 0.0;   // second coordinate
    double psi = 0.0; // rotation angle
    double h = 0.0;   // bandwidth
};

// Priestley-Chao contrast: (n1 n2)^{-1} sum Y * K(p - x_i; psi, h), iterating
// only the support box |x - x_{i1}| <= h sqrt2, |y - x_{i2}| <= h sqrt2
double contrast(const ImageGrid& grid, const KernelPair& pair, const ContrastQuery& q);

// d/dw and d/dpsi of the rescaled contrast; the dpsi pairing matches the
// bootstrap score kernel (rotated-position inner product)
void contrast_gradient(const ImageGrid& grid, const KernelPair& pair, const ContrastQuery& q,
                       double out[2]);

/// contrast profile along the y-lattice {h + j/n2} at fixed (x, psi): one pass
// over the support box per psi, same accumulation order as contrast() so the
// profile agrees with direct evaluation to the last ulp
struct YProfile {
    std::vector<double> ys;
    std::vector<double> values;
};
YProfile contrast_y_profile(const ImageGrid& grid, const KernelPair& pair, double x,
                            double psi, double h);

/// score weights for the multiplier bootstrap: per design point in the support
// box, the inner product used by the phi / psi / tau processes
enum class ScoreKind { location, slope, height };
struct ScoreWeights {
    std::vector<std::size_t> flat_index; // row-major pixel index
    std::vector<double> weight;
};
ScoreWeights score_weights(const ImageGrid& grid, const KernelPair& pair,
                           const ContrastQuery& q, ScoreKind kind);

// closed-form limit L(w, psi; x) = -tau(x) int K1(y) K2bar{a y + b} dy of the
// rescaled contrast for a noiseless single-curve scene
struct AsymptoticOracleQuery {
    double w = 0.0;
    double psi = 0.0;
    double x = 0.0;
    double psi_x = 0.0; // true angle at x
    double tau_x = 0.0; // true height at x
};

// caches the antiderivative K2bar as a 4097-point table with monotone cubic
// interpolation; cheap to evaluate inside test grids
class AsymptoticOracle {
  public:
    explicit AsymptoticOracle(const KernelPair& pair);
    double operator()(const AsymptoticOracleQuery& q) const;

  private:
    KernelPair pair_;
    Pchip k2bar_;
};

double asymptotic_contrast(const KernelPair& pair, const AsymptoticOracleQuery& q);

} // namespace edgeband
