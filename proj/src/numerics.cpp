#include "edgeband/numerics.hpp"
#include "edgeband/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace edgeband {

QuadRule gauss_legendre(int m) {
    if (m < 2) throw argument_error("gauss_legendre: need m >= 2");
    QuadRule r;
    r.nodes.resize(m);
    r.weights.resize(m);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        // Newton iteration on P_m from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[m - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[m - 1 - i] = w;
    }
    return r;
}

namespace {

const QuadRule& rule10() {
    static const QuadRule r = gauss_legendre(10);
    return r;
}
const QuadRule& rule21() {
    static const QuadRule r = gauss_legendre(21);
    return r;
}

double apply_rule(const QuadRule& r, const std::function<double(double)>& f, double a,
                  double b) {
    double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(c + hw * r.nodes[i]);
    return s * hw;
}

double integrate_rec(const std::function<double(double)>& f, double a, double b,
                     double tol, int depth) {
    double coarse = apply_rule(rule10(), f, a, b);
    double fine = apply_rule(rule21(), f, a, b);
    if (std::abs(fine - coarse) <= tol || depth <= 0) return fine;
    double c = 0.5 * (a + b);
    return integrate_rec(f, a, c, tol * 0.5, depth - 1) +
           integrate_rec(f, c, b, tol * 0.5, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, int max_depth) {
    if (!(abs_tol > 0)) throw argument_error("integrate: tolerance must be positive");
    if (a == b) return 0.0;
    return integrate_rec(f, a, b, abs_tol, max_depth);
}

std::vector<double> cumulative_integral(const std::function<double(double)>& f, double a,
                                        double b, int npts) {
    if (npts < 3 || npts % 2 == 0)
        throw argument_error("cumulative_integral: npts must be odd and >= 3");
    std::vector<double> fv(npts), out(npts);
    double dx = (b - a) / (npts - 1);
    for (int i = 0; i < npts; ++i) fv[i] = f(a + i * dx);
    out[0] = 0.0;
    for (int i = 2; i < npts; i += 2) {
        double panel = dx / 3.0 * (fv[i - 2] + 4.0 * fv[i - 1] + fv[i]);
        out[i] = out[i - 2] + panel;
        // midpoint via Simpson on the half panels (3-point rule on [i-2, i-1])
        out[i - 1] = out[i - 2] + dx / 12.0 * (5.0 * fv[i - 2] + 8.0 * fv[i - 1] - fv[i]);
    }
    return out;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw argument_error("Pchip: need matched arrays, size >= 2");
    d_.assign(n, 0.0);
    std::vector<double> dl(n - 1), sl(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        dl[i] = x_[i + 1] - x_[i];
        if (!(dl[i] > 0)) throw argument_error("Pchip: x must be strictly increasing");
        sl[i] = (y_[i + 1] - y_[i]) / dl[i];
    }
    // Fritsch-Carlson: harmonic-mean tangents, zero at local extrema
    d_[0] = sl[0];
    d_[n - 1] = sl[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (sl[i - 1] * sl[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2.0 * dl[i] + dl[i - 1];
            double w2 = dl[i] + 2.0 * dl[i - 1];
            d_[i] = (w1 + w2) / (w1 / sl[i - 1] + w2 / sl[i]);
        }
    }
    // clamp endpoint tangents to preserve monotonicity on end panels
    if (sl[0] == 0.0) d_[0] = 0.0;
    else if (d_[0] / sl[0] > 3.0) d_[0] = 3.0 * sl[0];
    if (sl[n - 2] == 0.0) d_[n - 1] = 0.0;
    else if (d_[n - 1] / sl[n - 2] > 3.0) d_[n - 1] = 3.0 * sl[n - 2];
}

double Pchip::operator()(double t) const {
    std::size_t n = x_.size();
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    std::size_t i = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin() - 1;
    double dx = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / dx;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    double h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s);
    double h11 = s * s * (s - 1);
    return h00 * y_[i] + h10 * dx * d_[i] + h01 * y_[i + 1] + h11 * dx * d_[i + 1];
}

GoldenResult golden_max(const std::function<double(double)>& f, double lo, double hi,
                        int iters) {
    if (!(hi >= lo)) throw argument_error("golden_max: empty interval");
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iters; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw argument_error("normal_quantile: p must be in (0,1)");
    // Acklam's rational approximation, then one Halley step against erfc
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double empirical_quantile(std::vector<double> v, double p) {
    if (v.empty()) throw argument_error("empirical_quantile: empty sample");
    if (!(p > 0.0 && p <= 1.0)) throw argument_error("empirical_quantile: p must be in (0,1]");
    std::sort(v.begin(), v.end());
    std::size_t k = static_cast<std::size_t>(std::ceil(p * v.size()));
    if (k == 0) k = 1;
    if (k > v.size()) k = v.size();
    return v[k - 1];
}

std::vector<double> local_quadratic_smooth(const std::vector<double>& v, int hw) {
    int m = static_cast<int>(v.size());
    if (hw < 2) throw argument_error("local_quadratic_smooth: half width must be >= 2");
    std::vector<double> out(m);
    for (int k = 0; k < m; ++k) {
        int lo = std::max(0, k - hw), hi = std::min(m - 1, k + hw);
        // normal equations for y ~ c0 + c1 t + c2 t^2, t centered at k
        double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, r0 = 0, r1 = 0, r2 = 0;
        for (int j = lo; j <= hi; ++j) {
            double t = j - k, t2 = t * t;
            s0 += 1;
            s1 += t;
            s2 += t2;
            s3 += t * t2;
            s4 += t2 * t2;
            r0 += v[j];
            r1 += t * v[j];
            r2 += t2 * v[j];
        }
        // solve the 3x3 system by Cramer's rule
        double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s3 * s2) +
                     s2 * (s1 * s3 - s2 * s2);
        if (std::abs(det) < 1e-12) {
            out[k] = r0 / s0;
            continue;
        }
        double det0 = r0 * (s2 * s4 - s3 * s3) - s1 * (r1 * s4 - s3 * r2) +
                      s2 * (r1 * s3 - s2 * r2);
        out[k] = det0 / det;
    }
    return out;
}

} // namespace edgeband
