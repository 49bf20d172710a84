#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "edgeband/errors.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/numerics.hpp"

#include <cmath>

using namespace edgeband;

namespace {

double bump(double x) { return std::abs(x) >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - x * x)); }

// independent normalizer oracle: plain midpoint rule; the integrand vanishes
// to infinite order at the endpoints, so midpoint converges superalgebraically
double midpoint(double (*f)(double), double a, double b, int n) {
    double s = 0.0, w = (b - a) / n;
    for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * w);
    return s * w;
}

double bump_q(double x) { return bump(x) * (x * x * x - x); }

} // namespace

TEST_CASE("normalizing constants match an independent quadrature") {
    KernelPair pair = make_default_kernels();
    double c1 = 1.0 / midpoint(&bump, -1.0, 1.0, 2000000);
    double c2 = 1.0 / midpoint(&bump_q, 0.0, 1.0, 2000000);
    CHECK(pair.k1.eval(0.0) == doctest::Approx(c1 * std::exp(-1.0)).epsilon(1e-11));
    CHECK(pair.k2.eval(0.5) == doctest::Approx(c2 * bump_q(0.5)).epsilon(1e-11));
    // frozen values pin the constants against regressions
    CHECK(c1 == doctest::Approx(2.252283621043585).epsilon(1e-11));
    CHECK(c2 == doctest::Approx(-18.232875670779627).epsilon(1e-11));
    // closed form for the slope at zero: K2'(0) = -C2 / e
    CHECK(pair.k2.deriv1(0.0) == doctest::Approx(-c2 * std::exp(-1.0)).epsilon(1e-11));
    CHECK(pair.k2.deriv1(0.0) == doctest::Approx(6.707500112027313).epsilon(1e-9));
}

TEST_CASE("unit masses") {
    KernelPair pair = make_default_kernels();
    double m1 = integrate([&](double x) { return pair.k1.eval(x); }, -1.0, 1.0, 1e-12);
    double m2 = integrate([&](double x) { return pair.k2.eval(x); }, 0.0, 1.0, 1e-12);
    CHECK(m1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("parity and support") {
    KernelPair pair = make_default_kernels();
    for (double x : {0.1, 0.33, 0.5, 0.77, 0.93}) {
        CHECK(pair.k1.eval(-x) == doctest::Approx(pair.k1.eval(x)).epsilon(1e-14));
        CHECK(pair.k2.eval(-x) == doctest::Approx(-pair.k2.eval(x)).epsilon(1e-14));
    }
    CHECK(pair.k2.eval(0.0) == 0.0);
    for (double x : {1.0, -1.0, 1.5, -2.0, 1.0 - 5e-15}) {
        CHECK(pair.k1.eval(x) == 0.0);
        CHECK(pair.k2.eval(x) == 0.0);
        CHECK(pair.k1.deriv1(x) == 0.0);
        CHECK(pair.k2.deriv1(x) == 0.0);
    }
    // K2 > 0 on (0,1) would be wrong: x^3 - x < 0 there and C2 < 0
    CHECK(pair.k2.eval(0.5) > 0.0);
    CHECK(pair.k2.eval(-0.5) < 0.0);
}

TEST_CASE("analytic derivatives agree with finite differences") {
    KernelPair pair = make_default_kernels();
    double eps = 1e-6;
    for (double x : {-0.8, -0.4, -0.1, 0.0, 0.2, 0.55, 0.85}) {
        for (const Kernel1D* k : {&pair.k1, &pair.k2}) {
            double fd1 = (k->eval(x + eps) - k->eval(x - eps)) / (2 * eps);
            double fd2 = (k->deriv1(x + eps) - k->deriv1(x - eps)) / (2 * eps);
            double fd3 = (k->deriv2(x + eps) - k->deriv2(x - eps)) / (2 * eps);
            CHECK(k->deriv1(x) == doctest::Approx(fd1).epsilon(1e-5));
            CHECK(k->deriv2(x) == doctest::Approx(fd2).epsilon(1e-5));
            CHECK(k->deriv3(x) == doctest::Approx(fd3).epsilon(2e-5));
        }
    }
}

TEST_CASE("rotation angle validation and matrix orthogonality") {
    CHECK_THROWS_AS(RotationAngle(1.7), argument_error);
    CHECK_THROWS_AS(RotationAngle(-3.0), argument_error);
    RotationAngle psi(0.6);
    Mat2 r = rotation_matrix(psi);
    CHECK(r.a * r.a + r.c * r.c == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.b * r.b + r.d * r.d == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.a * r.b + r.c * r.d == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(r.a * r.d - r.b * r.c == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.a == doctest::Approx(std::cos(0.6)).epsilon(1e-14));
    CHECK(r.c == doctest::Approx(std::sin(0.6)).epsilon(1e-14));
}

TEST_CASE("rotated kernel is the separable kernel in rotated coordinates") {
    KernelPair pair = make_default_kernels();
    double h = 0.13;
    // at psi = 0 the kernel is separable directly
    CHECK(rotated_kernel(pair, 0.04, -0.06, RotationAngle(0.0), h) ==
          doctest::Approx(pair.k1.eval(0.04 / h) * pair.k2.eval(-0.06 / h) / (h * h))
              .epsilon(1e-13));
    // a point built by rotating (a, b) lands back on K1(a) K2(b) / h^2
    for (double psi : {-1.2, -0.3, 0.45, 1.5}) {
        double a = 0.37, b = -0.52;
        double c = std::cos(psi), s = std::sin(psi);
        double z1 = h * (c * a - s * b), z2 = h * (s * a + c * b);
        CHECK(rotated_kernel(pair, z1, z2, RotationAngle(psi), h) ==
              doctest::Approx(pair.k1.eval(a) * pair.k2.eval(b) / (h * h)).epsilon(1e-12));
    }
    // support: outside the rotated square the kernel vanishes
    CHECK(rotated_kernel(pair, 2.0 * h, 0.0, RotationAngle(0.3), h) == 0.0);
}

TEST_CASE("kernel gradient matches the separable partials") {
    KernelPair pair = make_default_kernels();
    double out[2];
    kernel_gradient(pair, 0.3, -0.4, out);
    CHECK(out[0] == doctest::Approx(pair.k1.deriv1(0.3) * pair.k2.eval(-0.4)).epsilon(1e-13));
    CHECK(out[1] == doctest::Approx(pair.k1.eval(0.3) * pair.k2.deriv1(-0.4)).epsilon(1e-13));
    kernel_gradient(pair, 1.2, 0.1, out);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);
}

TEST_CASE("odd moment of K2 on [0,1] is reported, not hidden") {
    KernelPair pair = make_default_kernels();
    MomentReport rep = check_moment_assumption(pair);
    // frozen: the default kernel does not integrate x K2 to zero
    CHECK(rep.moment == doctest::Approx(0.4255359656161207).epsilon(1e-9));
    CHECK(rep.tolerance == 1e-8);
    CHECK_FALSE(rep.satisfied);
    MomentReport loose = check_moment_assumption(pair, 0.5);
    CHECK(loose.satisfied);
}
