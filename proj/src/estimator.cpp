#include "edgeband/estimator.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/numerics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace edgeband {

void set_max_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double default_bandwidth(int n, int points_per_window) {
    if (n < 16) throw argument_error("default_bandwidth: n must be >= 16");
    if (points_per_window < 1) throw argument_error("default_bandwidth: points_per_window >= 1");
    double h = std::sqrt(static_cast<double>(points_per_window)) / (2.0 * n);
    return std::clamp(h, 2.0 / n, 0.25);
}

EstimationConfig EstimationConfig::resolved(const ImageGrid& grid) const {
    EstimationConfig r = *this;
    int n = std::min(grid.n1, grid.n2);
    if (r.h == 0.0) r.h = default_bandwidth(n);
    if (!(r.h > 0.0 && r.h < 0.5)) throw config_error("EstimationConfig: h must be in (0, 1/2)");
    if (r.I_lo == 0.0 && r.I_hi == 0.0) {
        r.I_lo = std::max(2.0 * r.h, 0.04);
        r.I_hi = std::min(1.0 - 2.0 * r.h, 0.96);
    }
    if (!(r.I_lo >= r.h && r.I_hi <= 1.0 - r.h && r.I_lo <= r.I_hi))
        throw config_error("EstimationConfig: I must be inside [h, 1-h]");
    if (r.coarse_y_step == 0.0) r.coarse_y_step = 1.0 / grid.n2;
    if (r.coarse_psi_step == 0.0) r.coarse_psi_step = std::numbers::pi / 64.0;
    if (!(r.coarse_y_step > 0.0 && r.coarse_psi_step > 0.0))
        throw config_error("EstimationConfig: steps must be positive");
    if (r.x_grid_size < 1) throw config_error("EstimationConfig: x_grid_size must be >= 1");
    if (r.refine_iters < 0) throw config_error("EstimationConfig: refine_iters must be >= 0");
    return r;
}

namespace {

std::vector<double> make_x_grid(const EstimationConfig& cfg) {
    std::vector<double> xs(cfg.x_grid_size);
    if (cfg.x_grid_size == 1) {
        xs[0] = 0.5 * (cfg.I_lo + cfg.I_hi);
        return xs;
    }
    for (int i = 0; i < cfg.x_grid_size; ++i)
        xs[i] = cfg.I_lo + (cfg.I_hi - cfg.I_lo) * i / (cfg.x_grid_size - 1);
    return xs;
}

// golden rounds plus a Newton polish on the (w, psi) gradient; strictly
// improving only, so flat landscapes keep the coarse tie-break point
StripEstimate refine_from(const ImageGrid& grid, const KernelPair& pair, double x, double y0,
                          double p0, double v0, const EstimationConfig& cfg, double y_lo,
                          double y_hi, double p_lo = -std::numbers::pi / 2.0,
                          double p_hi = std::numbers::pi / 2.0) {
    double y = y0, p = p0, v = v0;
    double dy = cfg.coarse_y_step, dp = cfg.coarse_psi_step;
    auto cy = [&](double t) {
        return contrast(grid, pair, ContrastQuery{x, t, p, cfg.h});
    };
    auto cp = [&](double t) {
        return contrast(grid, pair, ContrastQuery{x, y, t, cfg.h});
    };
    for (int round = 0; round < 3; ++round) {
        GoldenResult gy =
            golden_max(cy, std::max(y_lo, y - dy), std::min(y_hi, y + dy), cfg.refine_iters);
        if (gy.value > v) {
            y = gy.arg;
            v = gy.value;
        }
        GoldenResult gp =
            golden_max(cp, std::max(p_lo, p - dp), std::min(p_hi, p + dp), cfg.refine_iters);
        if (gp.value > v) {
            p = gp.arg;
            v = gp.value;
        }
        dy *= 0.1;
        dp *= 0.1;
    }
    // Newton polish: analytic gradient, finite-difference Hessian
    auto grad = [&](double yy, double pp, double out[2]) {
        contrast_gradient(grid, pair, ContrastQuery{x, yy, pp, cfg.h}, out);
        out[0] /= cfg.h; // d/dw -> d/dy
    };
    const double ey = 1e-6, ep = 1e-6;
    for (int it = 0; it < 8; ++it) {
        double g[2];
        grad(y, p, g);
        if (std::hypot(g[0] * cfg.h, g[1]) < 1e-9) break;
        double gyp[2], gym[2], gpp[2], gpm[2];
        grad(std::min(y_hi, y + ey), p, gyp);
        grad(std::max(y_lo, y - ey), p, gym);
        grad(y, std::min(p_hi, p + ep), gpp);
        grad(y, std::max(p_lo, p - ep), gpm);
        double hyy = (gyp[0] - gym[0]) / (2 * ey);
        double hpp = (gpp[1] - gpm[1]) / (2 * ep);
        double hyp = 0.5 * ((gpp[0] - gpm[0]) / (2 * ep) + (gyp[1] - gym[1]) / (2 * ey));
        double det = hyy * hpp - hyp * hyp;
        if (!(hyy < 0.0) || !(det > 0.0)) break; // not locally concave
        double sy = -(hpp * g[0] - hyp * g[1]) / det;
        double sp = -(hyy * g[1] - hyp * g[0]) / det;
        double lim_y = 2.0 * cfg.coarse_y_step, lim_p = cfg.coarse_psi_step;
        double scale = 1.0;
        if (std::abs(sy) > lim_y) scale = std::min(scale, lim_y / std::abs(sy));
        if (std::abs(sp) > lim_p) scale = std::min(scale, lim_p / std::abs(sp));
        bool accepted = false;
        for (int bt = 0; bt < 3; ++bt) {
            double yn = std::clamp(y + scale * sy, y_lo, y_hi);
            double pn = std::clamp(p + scale * sp, p_lo, p_hi);
            double vn = contrast(grid, pair, ContrastQuery{x, yn, pn, cfg.h});
            if (vn > v) {
                y = yn;
                p = pn;
                v = vn;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    return StripEstimate{y, p, v, v};
}

struct JRange {
    int lo, hi;
};

JRange restrict_range(const StripScan& scan, double y_lo, double y_hi) {
    JRange r{0, static_cast<int>(scan.ys.size()) - 1};
    while (r.lo <= r.hi && scan.ys[r.lo] < y_lo - 1e-12) ++r.lo;
    while (r.hi >= r.lo && scan.ys[r.hi] > y_hi + 1e-12) --r.hi;
    return r;
}

StripEstimate estimate_strip_box(const ImageGrid& grid, const KernelPair& pair, double x,
                                 const EstimationConfig& cfg, const StripScan& scan,
                                 double y_lo, double y_hi, double p_lo, double p_hi) {
    const double pi2 = std::numbers::pi / 2.0;
    y_lo = std::max(y_lo, cfg.h);
    y_hi = std::min(y_hi, 1.0 - cfg.h);
    p_lo = std::max(p_lo, -pi2);
    p_hi = std::min(p_hi, pi2);
    JRange jr = restrict_range(scan, y_lo, y_hi);
    int npsi = static_cast<int>(scan.psis.size());
    int k_lo = 0, k_hi = npsi - 1;
    while (k_lo <= k_hi && scan.psis[k_lo] < p_lo - 1e-12) ++k_lo;
    while (k_hi >= k_lo && scan.psis[k_hi] > p_hi + 1e-12) --k_hi;
    if (jr.lo > jr.hi || k_lo > k_hi)
        throw config_error("estimate_strip_box: empty search box");
    int bj = jr.lo, bk = k_lo;
    double bv = scan.value(jr.lo, k_lo);
    for (int j = jr.lo; j <= jr.hi; ++j)
        for (int k = k_lo; k <= k_hi; ++k)
            if (scan.value(j, k) > bv) {
                bv = scan.value(j, k);
                bj = j;
                bk = k;
            }
    double y0 = scan.ys[bj], p0 = scan.psis[bk];
    double v0 = contrast(grid, pair, ContrastQuery{x, y0, p0, cfg.h});
    return refine_from(grid, pair, x, y0, p0, v0, cfg, y_lo, y_hi, p_lo, p_hi);
}

StripEstimate estimate_from_scan(const ImageGrid& grid, const KernelPair& pair, double x,
                                 const EstimationConfig& cfg, const StripScan& scan,
                                 double y_lo, double y_hi) {
    JRange jr = restrict_range(scan, y_lo, y_hi);
    if (jr.lo > jr.hi) throw config_error("estimate_strip: empty search region");
    int npsi = static_cast<int>(scan.psis.size());
    int bj = jr.lo, bk = 0;
    double bv = scan.value(jr.lo, 0);
    for (int j = jr.lo; j <= jr.hi; ++j)
        for (int k = 0; k < npsi; ++k) {
            double v = scan.value(j, k);
            if (v > bv) {
                bv = v;
                bj = j;
                bk = k;
            }
        }
    double y0 = scan.ys[bj], p0 = scan.psis[bk];
    // re-anchor the start value on the direct evaluation (the profile path can
    // differ in the last ulp)
    double v0 = contrast(grid, pair, ContrastQuery{x, y0, p0, cfg.h});
    StripEstimate est = refine_from(grid, pair, x, y0, p0, v0, cfg,
                                    std::max(y_lo, cfg.h), std::min(y_hi, 1.0 - cfg.h));
    return est;
}

} // namespace

StripScan strip_scan(const ImageGrid& grid, const KernelPair& pair, double x,
                     const EstimationConfig& raw) {
    EstimationConfig cfg = raw.resolved(grid); // idempotent; guards zero steps
    const double pi2 = std::numbers::pi / 2.0;
    StripScan scan;
    for (int k = 0;; ++k) {
        double p = -pi2 + k * cfg.coarse_psi_step;
        if (p > pi2 + 1e-12) break;
        scan.psis.push_back(std::min(p, pi2));
    }
    bool lattice = std::abs(cfg.coarse_y_step * grid.n2 - 1.0) < 1e-9;
    if (lattice) {
        for (std::size_t k = 0; k < scan.psis.size(); ++k) {
            YProfile prof = contrast_y_profile(grid, pair, x, scan.psis[k], cfg.h);
            if (k == 0) {
                scan.ys = prof.ys;
                scan.V.assign(scan.ys.size() * scan.psis.size(), 0.0);
            }
            for (std::size_t j = 0; j < prof.ys.size(); ++j)
                scan.V[j * scan.psis.size() + k] = prof.values[j];
        }
    } else {
        for (double y = cfg.h; y <= 1.0 - cfg.h + 1e-12; y += cfg.coarse_y_step)
            scan.ys.push_back(std::min(y, 1.0 - cfg.h));
        if (scan.ys.empty()) throw config_error("strip_scan: empty search region (h > 1/2)");
        scan.V.assign(scan.ys.size() * scan.psis.size(), 0.0);
        for (std::size_t j = 0; j < scan.ys.size(); ++j)
            for (std::size_t k = 0; k < scan.psis.size(); ++k)
                scan.V[j * scan.psis.size() + k] =
                    contrast(grid, pair, ContrastQuery{x, scan.ys[j], scan.psis[k], cfg.h});
    }
    // argmax with smallest-y-then-smallest-psi tie break
    int npsi = static_cast<int>(scan.psis.size());
    double bv = scan.V[0];
    for (std::size_t j = 0; j < scan.ys.size(); ++j)
        for (int k = 0; k < npsi; ++k) {
            double v = scan.V[j * npsi + k];
            if (v > bv) {
                bv = v;
                scan.best_j = static_cast<int>(j);
                scan.best_k = k;
            }
        }
    return scan;
}

StripEstimate estimate_strip(const ImageGrid& grid, const KernelPair& pair, double x,
                             const EstimationConfig& cfg) {
    EstimationConfig r = cfg.resolved(grid);
    if (!(x >= r.I_lo - 1e-12 && x <= r.I_hi + 1e-12))
        throw argument_error("estimate_strip: x outside I");
    StripScan scan = strip_scan(grid, pair, x, r);
    return estimate_from_scan(grid, pair, x, r, scan, r.h, 1.0 - r.h);
}

StripEstimate estimate_strip_restricted(const ImageGrid& grid, const KernelPair& pair,
                                        double x, const EstimationConfig& cfg, double y_lo,
                                        double y_hi) {
    EstimationConfig r = cfg.resolved(grid);
    StripScan scan = strip_scan(grid, pair, x, r);
    return estimate_from_scan(grid, pair, x, r, scan, std::max(y_lo, r.h),
                              std::min(y_hi, 1.0 - r.h));
}

namespace {

template <typename Fn>
void parallel_map(int m, Exec exec, Fn&& fn) {
    std::string first_error;
    bool failed = false;
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < m; ++i) {
            try {
                fn(i);
            } catch (const std::exception& e) {
#pragma omp critical
                {
                    if (!failed) {
                        failed = true;
                        first_error = e.what();
                    }
                }
            }
        }
#else
        for (int i = 0; i < m; ++i) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                if (!failed) {
                    failed = true;
                    first_error = e.what();
                }
            }
        }
#endif
    } else {
        for (int i = 0; i < m; ++i) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                if (!failed) {
                    failed = true;
                    first_error = e.what();
                }
            }
        }
    }
    if (failed) throw config_error(first_error);
}

} // namespace

EdgeEstimate estimate_curve(const ImageGrid& grid, const KernelPair& pair,
                            const EstimationConfig& cfg, Exec exec) {
    EstimationConfig r = cfg.resolved(grid);
    EdgeEstimate est;
    est.h = r.h;
    est.n1 = grid.n1;
    est.n2 = grid.n2;
    est.x_grid = make_x_grid(r);
    int m = static_cast<int>(est.x_grid.size());
    est.phi_hat.resize(m);
    est.psi_hat.resize(m);
    est.tau_hat.resize(m);
    est.contrast_at_max.resize(m);
    parallel_map(m, exec, [&](int i) {
        double x = est.x_grid[i];
        StripEstimate s;
        try {
            StripScan scan = strip_scan(grid, pair, x, r);
            s = estimate_from_scan(grid, pair, x, r, scan, r.h, 1.0 - r.h);
        } catch (const std::exception& e) {
            throw config_error("strip x=" + std::to_string(x) + ": " + e.what());
        }
        est.phi_hat[i] = s.phi;
        est.psi_hat[i] = s.psi;
        est.tau_hat[i] = s.tau;
        est.contrast_at_max[i] = s.value;
    });
    return est;
}

namespace {

struct Candidate {
    double y;
    double psi;
    double v;
};

std::vector<Candidate> scan_candidates(const StripScan& scan, int max_candidates,
                                       double nms_spacing) {
    int ny = static_cast<int>(scan.ys.size());
    int npsi = static_cast<int>(scan.psis.size());
    std::vector<double> vbest(ny);
    std::vector<int> kbest(ny, 0);
    for (int j = 0; j < ny; ++j) {
        double bv = scan.value(j, 0);
        int bk = 0;
        for (int k = 1; k < npsi; ++k)
            if (scan.value(j, k) > bv) {
                bv = scan.value(j, k);
                bk = k;
            }
        vbest[j] = bv;
        kbest[j] = bk;
    }
    std::vector<int> loc;
    for (int j = 0; j < ny; ++j) {
        bool up = j == 0 || vbest[j] >= vbest[j - 1];
        bool down = j + 1 == ny || vbest[j] > vbest[j + 1];
        if (up && down) loc.push_back(j);
    }
    std::sort(loc.begin(), loc.end(), [&](int a, int b) {
        if (vbest[a] != vbest[b]) return vbest[a] > vbest[b];
        return a < b;
    });
    std::vector<Candidate> out;
    for (int j : loc) {
        if (static_cast<int>(out.size()) >= max_candidates) break;
        bool clash = false;
        for (const auto& c : out)
            if (std::abs(scan.ys[j] - c.y) < nms_spacing) {
                clash = true;
                break;
            }
        if (!clash) out.push_back({scan.ys[j], scan.psis[kbest[j]], vbest[j]});
    }
    std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.y < b.y; });
    return out;
}

double median_of(std::vector<double> v) {
    std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    double hi = *mid;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (v[n / 2 - 1] + hi);
}

// running median after removing the window's median slope: a plain windowed
// median is biased by O(slope * hw) at the ends of a sloped series, which
// would flag correct boundary strips on steep curves
std::vector<double> running_median(const std::vector<double>& v, int hw) {
    int m = static_cast<int>(v.size());
    std::vector<double> out(m);
    std::vector<double> d, w;
    for (int i = 0; i < m; ++i) {
        int lo = std::max(0, i - hw), hi = std::min(m, i + hw + 1);
        d.clear();
        for (int j = lo; j + 1 < hi; ++j) d.push_back(v[j + 1] - v[j]);
        double slope = d.empty() ? 0.0 : median_of(d);
        w.clear();
        for (int j = lo; j < hi; ++j) w.push_back(v[j] - slope * (j - i));
        out[i] = median_of(w);
    }
    return out;
}

double vs_tau_constant(const KernelPair& pair) {
    double i1 = integrate([&](double t) { double v = pair.k1.eval(t); return v * v; }, -1, 1);
    double i2 = integrate([&](double t) { double v = pair.k2.eval(t); return v * v; }, -1, 1);
    return i1 * i2;
}

} // namespace

EdgeEstimate estimate_curve_tracked(const ImageGrid& grid, const KernelPair& pair,
                                    const EstimationConfig& cfg, const TrackConfig& track,
                                    double sigma_hat, Exec exec) {
    EstimationConfig r = cfg.resolved(grid);
    EdgeEstimate est;
    est.h = r.h;
    est.n1 = grid.n1;
    est.n2 = grid.n2;
    est.x_grid = make_x_grid(r);
    int m = static_cast<int>(est.x_grid.size());
    est.phi_hat.resize(m);
    est.psi_hat.resize(m);
    est.tau_hat.resize(m);
    est.contrast_at_max.resize(m);

    double spacing = track.nms_spacing > 0.0 ? track.nms_spacing : 2.0 / grid.n2;
    double corridor = track.corridor;
    if (corridor <= 0.0)
        corridor = m > 1 ? 2.0 * (est.x_grid[1] - est.x_grid[0]) : 2.0 * r.h;
    double kappa = track.jump_penalty;
    if (kappa <= 0.0) {
        double n_eff = std::sqrt(static_cast<double>(grid.n1) * grid.n2);
        kappa = 3.0 * sigma_hat * std::sqrt(vs_tau_constant(pair)) / (n_eff * r.h);
    }

    std::vector<std::vector<Candidate>> cands(m);
    parallel_map(m, exec, [&](int i) {
        StripScan scan = strip_scan(grid, pair, est.x_grid[i], r);
        cands[i] = scan_candidates(scan, track.max_candidates, spacing);
        if (cands[i].empty()) throw config_error("estimate_curve_tracked: no candidates");
    });

    // dynamic program over candidate paths: total contrast minus a penalty for
    // adjacent-strip moves beyond the corridor
    std::vector<std::vector<double>> best(m);
    std::vector<std::vector<int>> back(m);
    for (int i = 0; i < m; ++i) {
        best[i].assign(cands[i].size(), 0.0);
        back[i].assign(cands[i].size(), 0);
    }
    for (std::size_t a = 0; a < cands[0].size(); ++a) best[0][a] = cands[0][a].v;
    for (int i = 1; i < m; ++i)
        for (std::size_t a = 0; a < cands[i].size(); ++a) {
            double bs = -1e300;
            int bb = 0;
            for (std::size_t b = 0; b < cands[i - 1].size(); ++b) {
                double jump = std::abs(cands[i][a].y - cands[i - 1][b].y);
                double pen = kappa * std::max(0.0, jump - corridor) / r.h;
                double s = best[i - 1][b] + cands[i][a].v - pen;
                if (s > bs) {
                    bs = s;
                    bb = static_cast<int>(b);
                }
            }
            best[i][a] = bs;
            back[i][a] = bb;
        }
    std::vector<int> path(m);
    {
        std::size_t a = 0;
        for (std::size_t c = 1; c < cands[m - 1].size(); ++c)
            if (best[m - 1][c] > best[m - 1][a]) a = c;
        path[m - 1] = static_cast<int>(a);
        for (int i = m - 1; i > 0; --i) path[i - 1] = back[i][path[i]];
    }

    parallel_map(m, exec, [&](int i) {
        const Candidate& c = cands[i][path[i]];
        double v0 = contrast(grid, pair, ContrastQuery{est.x_grid[i], c.y, c.psi, r.h});
        StripEstimate s =
            refine_from(grid, pair, est.x_grid[i], c.y, c.psi, v0, r, r.h, 1.0 - r.h);
        est.phi_hat[i] = s.phi;
        est.psi_hat[i] = s.psi;
        est.tau_hat[i] = s.tau;
        est.contrast_at_max[i] = s.value;
    });

    // two consistency passes: a strip whose location or angle sits more than
    // three robust sds from the running median is re-fitted inside the median
    // box; this removes isolated noise fits that slip through the path search
    const double pi16 = std::numbers::pi / 16.0;
    for (int pass = 0; pass < 2 && m >= 3; ++pass) {
        std::vector<double> medy = running_median(est.phi_hat, 3);
        std::vector<double> medp = running_median(est.psi_hat, 3);
        std::vector<double> ay(m), ap(m);
        for (int i = 0; i < m; ++i) {
            ay[i] = std::abs(est.phi_hat[i] - medy[i]);
            ap[i] = std::abs(est.psi_hat[i] - medp[i]);
        }
        double sy = std::max(1.4826 * median_of(ay), 1e-4);
        double sp = std::max(1.4826 * median_of(ap), 1e-3);
        double flag_y = std::max(3.0 * sy, 2.0 / grid.n2);
        double flag_p = std::max(3.0 * sp, pi16);
        double box_y = std::max(2.5 * sy, 2.0 / grid.n2);
        double box_p = std::max(2.5 * sp, pi16);
        std::vector<int> flagged;
        for (int i = 0; i < m; ++i)
            if (ay[i] > flag_y || ap[i] > flag_p) flagged.push_back(i);
        if (flagged.empty()) break;
        parallel_map(static_cast<int>(flagged.size()), exec, [&](int fi) {
            int i = flagged[fi];
            StripScan scan = strip_scan(grid, pair, est.x_grid[i], r);
            StripEstimate s =
                estimate_strip_box(grid, pair, est.x_grid[i], r, scan, medy[i] - box_y,
                                   medy[i] + box_y, medp[i] - box_p, medp[i] + box_p);
            est.phi_hat[i] = s.phi;
            est.psi_hat[i] = s.psi;
            est.tau_hat[i] = s.tau;
            est.contrast_at_max[i] = s.value;
        });
    }
    return est;
}

} // namespace edgeband
