#include "edgeband/kernels.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/numerics.hpp"

#include <cmath>
#include <numbers>

namespace edgeband {

namespace {

constexpr double kEdge = 1.0 - 1e-14; // clamp to 0 at |x| >= kEdge

double bump(double x) {
    if (std::abs(x) >= kEdge) return 0.0;
    return std::exp(-1.0 / (1.0 - x * x));
}

// log-derivative chain for the bump: B' = B g, B'' = B (g^2 + g'), ...
double bump_g(double x) {
    double u = 1.0 - x * x;
    return -2.0 * x / (u * u);
}
double bump_gp(double x) {
    double u = 1.0 - x * x;
    return (-2.0 - 6.0 * x * x) / (u * u * u);
}
double bump_gpp(double x) {
    double u = 1.0 - x * x;
    return -24.0 * x * (1.0 + x * x) / (u * u * u * u);
}

double bump_d1(double x) {
    if (std::abs(x) >= kEdge) return 0.0;
    return bump(x) * bump_g(x);
}
double bump_d2(double x) {
    if (std::abs(x) >= kEdge) return 0.0;
    double g = bump_g(x);
    return bump(x) * (g * g + bump_gp(x));
}
double bump_d3(double x) {
    if (std::abs(x) >= kEdge) return 0.0;
    double g = bump_g(x), gp = bump_gp(x);
    return bump(x) * (g * g * g + 3.0 * g * gp + bump_gpp(x));
}

} // namespace

RotationAngle::RotationAngle(double psi) : psi_(psi) {
    const double lim = std::numbers::pi / 2 + 1e-12;
    if (!(psi >= -lim && psi <= lim))
        throw argument_error("RotationAngle: psi outside [-pi/2, pi/2]");
}

KernelPair make_default_kernels() {
    double mass1 = integrate([](double x) { return bump(x); }, -1.0, 1.0, 1e-12);
    double mass2 = integrate([](double x) { return bump(x) * (x * x * x - x); }, 0.0, 1.0, 1e-12);
    if (!(mass1 > 0.0) || !(mass2 < 0.0))
        throw config_error("make_default_kernels: normalizing quadrature failed");
    const double c1 = 1.0 / mass1;
    const double c2 = 1.0 / mass2; // negative: x^3 - x < 0 on (0,1)

    Kernel1D k1;
    k1.eval = [c1](double x) { return c1 * bump(x); };
    k1.deriv1 = [c1](double x) { return c1 * bump_d1(x); };
    k1.deriv2 = [c1](double x) { return c1 * bump_d2(x); };
    k1.deriv3 = [c1](double x) { return c1 * bump_d3(x); };

    // K2 = c2 B q with q = x^3 - x; product rule through third order
    Kernel1D k2;
    k2.eval = [c2](double x) {
        if (std::abs(x) >= kEdge) return 0.0;
        return c2 * bump(x) * (x * x * x - x);
    };
    k2.deriv1 = [c2](double x) {
        if (std::abs(x) >= kEdge) return 0.0;
        double q = x * x * x - x, qp = 3.0 * x * x - 1.0;
        return c2 * (bump_d1(x) * q + bump(x) * qp);
    };
    k2.deriv2 = [c2](double x) {
        if (std::abs(x) >= kEdge) return 0.0;
        double q = x * x * x - x, qp = 3.0 * x * x - 1.0, qpp = 6.0 * x;
        return c2 * (bump_d2(x) * q + 2.0 * bump_d1(x) * qp + bump(x) * qpp);
    };
    k2.deriv3 = [c2](double x) {
        if (std::abs(x) >= kEdge) return 0.0;
        double q = x * x * x - x, qp = 3.0 * x * x - 1.0, qpp = 6.0 * x;
        return c2 *
               (bump_d3(x) * q + 3.0 * bump_d2(x) * qp + 3.0 * bump_d1(x) * qpp + 6.0 * bump(x));
    };

    return KernelPair{k1, k2};
}

Mat2 rotation_matrix(RotationAngle psi) {
    double c = std::cos(psi.value()), s = std::sin(psi.value());
    return Mat2{c, -s, s, c};
}

double rotated_kernel(const KernelPair& pair, double z1, double z2, RotationAngle psi,
                      double h) {
    if (!(h > 0.0)) throw argument_error("rotated_kernel: h must be positive");
    double c = std::cos(psi.value()), s = std::sin(psi.value());
    // R_{-psi} (z1, z2)
    double r1 = (c * z1 + s * z2) / h;
    double r2 = (-s * z1 + c * z2) / h;
    if (std::abs(r1) >= 1.0 || std::abs(r2) >= 1.0) return 0.0;
    return pair.k1.eval(r1) * pair.k2.eval(r2) / (h * h);
}

void kernel_gradient(const KernelPair& pair, double z1, double z2, double out[2]) {
    if (std::abs(z1) >= 1.0 || std::abs(z2) >= 1.0) {
        out[0] = 0.0;
        out[1] = 0.0;
        return;
    }
    out[0] = pair.k1.deriv1(z1) * pair.k2.eval(z2);
    out[1] = pair.k1.eval(z1) * pair.k2.deriv1(z2);
}

MomentReport check_moment_assumption(const KernelPair& pair, double tolerance) {
    double m = integrate([&](double x) { return x * pair.k2.eval(x); }, 0.0, 1.0, 1e-12);
    return MomentReport{m, tolerance, std::abs(m) < tolerance};
}

} // namespace edgeband
