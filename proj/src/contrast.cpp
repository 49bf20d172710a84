#include "edgeband/contrast.hpp"
#include "edgeband/errors.hpp"

#include <cmath>

namespace edgeband {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Box {
    int i1lo, i1hi, i2lo, i2hi;
};

Box support_box(const ImageGrid& g, double x, double y, double h) {
    double hs = h * kSqrt2;
    Box b;
    b.i1lo = std::max(1, static_cast<int>(std::ceil((x - hs) * g.n1)));
    b.i1hi = std::min(g.n1, static_cast<int>(std::floor((x + hs) * g.n1)));
    b.i2lo = std::max(1, static_cast<int>(std::ceil((y - hs) * g.n2)));
    b.i2hi = std::min(g.n2, static_cast<int>(std::floor((y + hs) * g.n2)));
    return b;
}

void check_query(const ContrastQuery& q) {
    if (!(q.h > 0.0 && q.h < 0.5)) throw argument_error("contrast: h must be in (0, 1/2)");
    (void)RotationAngle(q.psi);
}

} // namespace

double contrast(const ImageGrid& grid, const KernelPair& pair, const ContrastQuery& q) {
    check_query(q);
    Box b = support_box(grid, q.x, q.y, q.h);
    if (b.i1lo > b.i1hi || b.i2lo > b.i2hi) return 0.0;
    double c = std::cos(q.psi), s = std::sin(q.psi);
    double acc = 0.0;
    for (int i1 = b.i1lo; i1 <= b.i1hi; ++i1) {
        double d1 = q.x - grid.x1(i1);
        for (int i2 = b.i2lo; i2 <= b.i2hi; ++i2) {
            double d2 = q.y - grid.x2(i2);
            double z1 = (c * d1 + s * d2) / q.h;
            double z2 = (-s * d1 + c * d2) / q.h;
            acc += grid.at(i1, i2) * pair.k1.eval(z1) * pair.k2.eval(z2);
        }
    }
    double n1 = grid.n1, n2 = grid.n2;
    return acc / (n1 * n2 * q.h * q.h);
}

void contrast_gradient(const ImageGrid& grid, const KernelPair& pair, const ContrastQuery& q,
                       double out[2]) {
    check_query(q);
    out[0] = out[1] = 0.0;
    Box b = support_box(grid, q.x, q.y, q.h);
    if (b.i1lo > b.i1hi || b.i2lo > b.i2hi) return;
    double c = std::cos(q.psi), s = std::sin(q.psi);
    double aw = 0.0, ap = 0.0;
    for (int i1 = b.i1lo; i1 <= b.i1hi; ++i1) {
        double d1 = q.x - grid.x1(i1);
        for (int i2 = b.i2lo; i2 <= b.i2hi; ++i2) {
            double d2 = q.y - grid.x2(i2);
            double z1 = (c * d1 + s * d2) / q.h;
            double z2 = (-s * d1 + c * d2) / q.h;
            if (std::abs(z1) >= 1.0 || std::abs(z2) >= 1.0) continue;
            double y = grid.at(i1, i2);
            double g1 = pair.k1.deriv1(z1) * pair.k2.eval(z2);
            double g2 = pair.k1.eval(z1) * pair.k2.deriv1(z2);
            aw += y * (g1 * s + g2 * c);
            // d/dpsi pairing: <gradK, R_{3pi/2-psi}(p - x_i)>/h = <gradK, (z2, -z1)>
            ap += y * (g1 * z2 - g2 * z1);
        }
    }
    double norm = grid.n1 * static_cast<double>(grid.n2) * q.h * q.h;
    out[0] = aw / norm;
    out[1] = ap / norm;
}

YProfile contrast_y_profile(const ImageGrid& grid, const KernelPair& pair, double x,
                            double psi, double h) {
    ContrastQuery probe{x, h, psi, h};
    check_query(probe);
    YProfile prof;
    // y lattice h + j/n2 inside [h, 1-h]
    int jmax = static_cast<int>(std::floor((1.0 - 2.0 * h) * grid.n2 + 1e-9));
    if (jmax < 0) throw config_error("contrast_y_profile: empty search region (h > 1/2)");
    prof.ys.resize(jmax + 1);
    prof.values.assign(jmax + 1, 0.0);
    for (int j = 0; j <= jmax; ++j) prof.ys[j] = h + static_cast<double>(j) / grid.n2;

    double hs = h * kSqrt2;
    int i1lo = std::max(1, static_cast<int>(std::ceil((x - hs) * grid.n1)));
    int i1hi = std::min(grid.n1, static_cast<int>(std::floor((x + hs) * grid.n1)));
    if (i1lo > i1hi) return prof;
    double c = std::cos(psi), s = std::sin(psi);

    // y_j - x2(i2) = (H + delta + j - i2)/n2 with H = floor(h n2): the offset
    // set is one fractional shift plus integers, so the kernel weights form a
    // small table reused by every j
    int H = static_cast<int>(std::floor(h * grid.n2));
    double delta = h * grid.n2 - H;
    int mlo = -static_cast<int>(std::ceil(hs * grid.n2)) - 1;
    int mhi = static_cast<int>(std::ceil(hs * grid.n2)) + 1;
    int ncols = i1hi - i1lo + 1, noff = mhi - mlo + 1;
    std::vector<double> w(static_cast<std::size_t>(ncols) * noff);
    for (int k = 0; k < ncols; ++k) {
        double d1 = x - grid.x1(i1lo + k);
        for (int m = mlo; m <= mhi; ++m) {
            double d2 = (delta + m) / grid.n2;
            double z1 = (c * d1 + s * d2) / h;
            double z2 = (-s * d1 + c * d2) / h;
            w[static_cast<std::size_t>(k) * noff + (m - mlo)] =
                pair.k1.eval(z1) * pair.k2.eval(z2);
        }
    }
    double norm = grid.n1 * static_cast<double>(grid.n2) * h * h;
    for (int j = 0; j <= jmax; ++j) {
        double acc = 0.0;
        for (int k = 0; k < ncols; ++k) {
            const double* wk = &w[static_cast<std::size_t>(k) * noff];
            const double* row = &grid.values[static_cast<std::size_t>(i1lo + k - 1) * grid.n2];
            // i2 = H + j - m, descending m keeps i2 ascending as in contrast()
            for (int m = mhi; m >= mlo; --m) {
                int i2 = H + j - m;
                if (i2 < 1 || i2 > grid.n2) continue;
                acc += row[i2 - 1] * wk[m - mlo];
            }
        }
        prof.values[j] = acc / norm;
    }
    return prof;
}

ScoreWeights score_weights(const ImageGrid& grid, const KernelPair& pair,
                           const ContrastQuery& q, ScoreKind kind) {
    check_query(q);
    ScoreWeights out;
    Box b = support_box(grid, q.x, q.y, q.h);
    if (b.i1lo > b.i1hi || b.i2lo > b.i2hi) return out;
    double c = std::cos(q.psi), s = std::sin(q.psi);
    for (int i1 = b.i1lo; i1 <= b.i1hi; ++i1) {
        double d1 = q.x - grid.x1(i1);
        for (int i2 = b.i2lo; i2 <= b.i2hi; ++i2) {
            double d2 = q.y - grid.x2(i2);
            double z1 = (c * d1 + s * d2) / q.h;
            double z2 = (-s * d1 + c * d2) / q.h;
            if (std::abs(z1) >= 1.0 || std::abs(z2) >= 1.0) continue;
            double g;
            switch (kind) {
                case ScoreKind::location:
                    g = pair.k1.deriv1(z1) * pair.k2.eval(z2) * s +
                        pair.k1.eval(z1) * pair.k2.deriv1(z2) * c;
                    break;
                case ScoreKind::slope:
                    g = pair.k1.deriv1(z1) * pair.k2.eval(z2) * z2 -
                        pair.k1.eval(z1) * pair.k2.deriv1(z2) * z1;
                    break;
                default:
                    g = pair.k1.eval(z1) * pair.k2.eval(z2);
            }
            if (g == 0.0) continue;
            out.flat_index.push_back(static_cast<std::size_t>(i1 - 1) * grid.n2 + (i2 - 1));
            out.weight.push_back(g);
        }
    }
    return out;
}

AsymptoticOracle::AsymptoticOracle(const KernelPair& pair) : pair_(pair) {
    const int npts = 4097;
    std::vector<double> xs(npts), cum;
    for (int i = 0; i < npts; ++i) xs[i] = -1.0 + 2.0 * i / (npts - 1);
    cum = cumulative_integral([&](double t) { return pair.k2.eval(t); }, -1.0, 1.0, npts);
    k2bar_ = Pchip(std::move(xs), std::move(cum));
}

double AsymptoticOracle::operator()(const AsymptoticOracleQuery& q) const {
    double dd = q.psi_x - q.psi;
    double cd = std::cos(dd);
    if (std::abs(cd) < 1e-12) return 0.0;
    double a = std::tan(dd);
    double b = q.w * std::cos(q.psi_x) / cd;
    static const QuadRule rule = gauss_legendre(201);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double y = rule.nodes[i];
        acc += rule.weights[i] * pair_.k1.eval(y) * k2bar_(a * y + b);
    }
    return -q.tau_x * acc;
}

double asymptotic_contrast(const KernelPair& pair, const AsymptoticOracleQuery& q) {
    AsymptoticOracle oracle(pair);
    return oracle(q);
}

} // namespace edgeband
