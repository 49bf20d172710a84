#pragma once
#include <functional>
#include <vector>

namespace edgeband {

// nodes/weights of the m-point Gauss-Legendre rule on [-1,1]
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
QuadRule gauss_legendre(int m);

// adaptive quadrature with an embedded Gauss pair (10/21), bisecting until
// the per-panel error estimate is below abs_tol
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10, int max_depth = 40);

// cumulative integral of f over [a,b] sampled at npts equally spaced points
// (npts odd; composite Simpson per pair of intervals)
std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        double a, double b, int npts);

// monotone cubic interpolant (Fritsch-Carlson tangents)
class Pchip {
  public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;

  private:
    std::vector<double> x_, y_, d_;
};

// golden-section maximization on [lo,hi]; returns (argmax, value)
struct GoldenResult {
    double arg;
    double value;
};
GoldenResult golden_max(const std::function<double(double)>& f, double lo, double hi,
                        int iters = 30);

double normal_cdf(double x);
double normal_quantile(double p);

// empirical quantile, inverted-CDF convention: the ceil(p*m)-th order statistic
double empirical_quantile(std::vector<double> v, double p);

// local quadratic least-squares smoother with clamped windows of half width hw
std::vector<double> local_quadratic_smooth(const std::vector<double>& v, int hw);

} // namespace edgeband
