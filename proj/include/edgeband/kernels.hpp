#pragma once
#include <functional>

namespace edgeband {

// one-dimensional kernel with analytic derivatives
struct Kernel1D {
    std::function<double(double)> eval;
    std::function<double(double)> deriv1;
    std::function<double(double)> deriv2;
    std::function<double(double)> deriv3;
};

// K1 even with unit mass on [-1,1]; K2 odd with unit mass on [0,1]
struct KernelPair {
    Kernel1D k1;
    Kernel1D k2;
};

// validated rotation angle in [-pi/2, pi/2]
class RotationAngle {
  public:
    explicit RotationAngle(double psi);
    double value() const { return psi_; }

  private:
    double psi_;
};

struct Mat2 {
    double a, b, c, d; // [[a, b], [c, d]]
};

// smooth bump kernels: K1 = C1 exp{-1/(1-x^2)}, K2 = C2 exp{-1/(1-x^2)}(x^3-x),
// with C1, C2 fixed by the two unit-mass constraints
KernelPair make_default_kernels();

Mat2 rotation_matrix(RotationAngle psi);

// K(h^{-1} R_{-psi} z) / h^2 with K(z1,z2) = K1(z1) K2(z2)
double rotated_kernel(const KernelPair& pair, double z1, double z2, RotationAngle psi,
                      double h);

// (K1'(z1) K2(z2), K1(z1) K2'(z2)); zero outside [-1,1]^2
void kernel_gradient(const KernelPair& pair, double z1, double z2, double out[2]);

struct MomentReport {
    double moment;     // int_0^1 x K2(x) dx
    double tolerance;  // pass threshold on |moment|
    bool satisfied;    // |moment| < tolerance
};

// reports the odd-moment condition; when violated only the location-curve rate
// is guaranteed, the faster slope/height rates are not
MomentReport check_moment_assumption(const KernelPair& pair, double tolerance = 1e-8);

} // namespace edgeband
