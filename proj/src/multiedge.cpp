#include "edgeband/multiedge.hpp"
#include "edgeband/contrast.hpp"
#include "edgeband/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>

namespace edgeband {

void MultiEdgeConfig::validate() const {
    if (max_curves < 1) throw config_error("MultiEdgeConfig: max_curves must be >= 1");
    if (separation < 0.0) throw config_error("MultiEdgeConfig: separation must be positive");
    band.validate();
}

std::vector<std::vector<CandidatePoint>> detect_candidates(const ImageGrid& grid,
                                                           const KernelPair& pair,
                                                           const EstimationConfig& cfg,
                                                           const MultiEdgeConfig& multi,
                                                           Exec exec) {
    multi.validate();
    EstimationConfig r = cfg.resolved(grid);
    double delta = multi.separation > 0.0 ? multi.separation : r.h;
    double sigma = estimate_sigma(grid);
    double n_eff = std::sqrt(static_cast<double>(grid.n1) * grid.n2);
    double floor = 3.0 * sigma * std::sqrt(kernel_constants(pair).vs_tau) / (n_eff * r.h);

    std::vector<double> xs(r.x_grid_size);
    if (r.x_grid_size == 1)
        xs[0] = 0.5 * (r.I_lo + r.I_hi);
    else
        for (int i = 0; i < r.x_grid_size; ++i)
            xs[i] = r.I_lo + (r.I_hi - r.I_lo) * i / (r.x_grid_size - 1);

    std::vector<std::vector<CandidatePoint>> out(xs.size());
    auto one_strip = [&](int i) {
        StripScan scan = strip_scan(grid, pair, xs[i], r);
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
        for (int j : loc) {
            if (static_cast<int>(out[i].size()) >= multi.max_curves) break;
            bool clash = false;
            for (const auto& c : out[i])
                if (std::abs(scan.ys[j] - c.y) < delta) {
                    clash = true;
                    break;
                }
            if (!clash)
                out[i].push_back({scan.ys[j], scan.psis[kbest[j]], vbest[j], vbest[j] < floor});
        }
        std::sort(out[i].begin(), out[i].end(),
                  [](const CandidatePoint& a, const CandidatePoint& b) { return a.y < b.y; });
    };
    int nx = static_cast<int>(xs.size());
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < nx; ++i) one_strip(i);
#else
        for (int i = 0; i < nx; ++i) one_strip(i);
#endif
    } else {
        for (int i = 0; i < nx; ++i) one_strip(i);
    }
    return out;
}

namespace {

struct Track {
    std::vector<int> strip; // strip indices with a matched candidate
    std::vector<double> ys; // matched y per entry
    double last_y() const { return ys.back(); }
    int count() const { return static_cast<int>(strip.size()); }
    double mean_y() const {
        double s = 0;
        for (double v : ys) s += v;
        return s / ys.size();
    }
    double mean_v = 0.0;
};

} // namespace

MultiEdgeResult estimate_multi(const ImageGrid& grid, const KernelPair& pair,
                               const EstimationConfig& cfg, const MultiEdgeConfig& multi,
                               const std::vector<std::vector<CandidatePoint>>& candidates,
                               Exec exec) {
    multi.validate();
    EstimationConfig r = cfg.resolved(grid);
    double delta = multi.separation > 0.0 ? multi.separation : r.h;
    int m = static_cast<int>(candidates.size());
    if (m == 0) throw argument_error("estimate_multi: empty candidate set");

    std::vector<double> xs(m);
    if (m == 1)
        xs[0] = 0.5 * (r.I_lo + r.I_hi);
    else
        for (int i = 0; i < m; ++i) xs[i] = r.I_lo + (r.I_hi - r.I_lo) * i / (m - 1);

    // nearest-neighbor chaining with jump tolerance 2h; candidates are taken
    // in y order per strip so the pass is order invariant
    std::vector<Track> tracks;
    for (int i = 0; i < m; ++i) {
        std::vector<const CandidatePoint*> cands;
        for (const auto& c : candidates[i]) cands.push_back(&c);
        std::sort(cands.begin(), cands.end(),
                  [](const CandidatePoint* a, const CandidatePoint* b) { return a->y < b->y; });
        std::vector<char> used(tracks.size(), 0);
        for (const CandidatePoint* c : cands) {
            int best = -1;
            double bd = 2.0 * r.h;
            for (std::size_t t = 0; t < tracks.size(); ++t) {
                if (used[t] || tracks[t].strip.back() >= i) continue;
                double d = std::abs(c->y - tracks[t].last_y());
                if (d < bd - 1e-15 || (best >= 0 && d <= bd + 1e-15 &&
                                       tracks[t].last_y() < tracks[best].last_y())) {
                    bd = std::min(bd, d);
                    best = static_cast<int>(t);
                }
            }
            if (best >= 0) {
                used[best] = 1;
                tracks[best].strip.push_back(i);
                tracks[best].ys.push_back(c->y);
                tracks[best].mean_v += c->value;
            } else {
                tracks.push_back(Track{{i}, {c->y}, c->value});
                used.push_back(1);
            }
        }
    }

    MultiEdgeResult res;
    std::vector<Track> kept;
    for (auto& t : tracks) {
        t.mean_v /= t.count();
        int gaps = m - t.count();
        if (gaps > m / 4) {
            res.warnings.push_back("track near y=" + std::to_string(t.mean_y()) +
                                   " discarded: covers " + std::to_string(t.count()) + "/" +
                                   std::to_string(m) + " strips");
            continue;
        }
        kept.push_back(t);
    }
    std::sort(kept.begin(), kept.end(), [](const Track& a, const Track& b) {
        if (a.count() != b.count()) return a.count() > b.count();
        if (a.mean_v != b.mean_v) return a.mean_v > b.mean_v;
        return a.mean_y() < b.mean_y();
    });
    if (static_cast<int>(kept.size()) > multi.max_curves) kept.resize(multi.max_curves);
    std::sort(kept.begin(), kept.end(),
              [](const Track& a, const Track& b) { return a.mean_y() < b.mean_y(); });

    for (const Track& t : kept) {
        // fill unmatched strips by linear interpolation of the chained ys
        std::vector<double> center(m);
        for (int i = 0; i < m; ++i) {
            auto it = std::lower_bound(t.strip.begin(), t.strip.end(), i);
            if (it != t.strip.end() && *it == i) {
                center[i] = t.ys[it - t.strip.begin()];
                continue;
            }
            int hi = static_cast<int>(it - t.strip.begin());
            if (hi == 0)
                center[i] = t.ys.front();
            else if (hi == t.count())
                center[i] = t.ys.back();
            else {
                double x0 = xs[t.strip[hi - 1]], x1 = xs[t.strip[hi]];
                double w = (xs[i] - x0) / (x1 - x0);
                center[i] = (1 - w) * t.ys[hi - 1] + w * t.ys[hi];
            }
        }
        EdgeEstimate est;
        est.h = r.h;
        est.n1 = grid.n1;
        est.n2 = grid.n2;
        est.x_grid = xs;
        est.phi_hat.resize(m);
        est.psi_hat.resize(m);
        est.tau_hat.resize(m);
        est.contrast_at_max.resize(m);
        auto one = [&](int i) {
            StripEstimate s = estimate_strip_restricted(grid, pair, xs[i], r,
                                                        center[i] - delta, center[i] + delta);
            est.phi_hat[i] = s.phi;
            est.psi_hat[i] = s.psi;
            est.tau_hat[i] = s.tau;
            est.contrast_at_max[i] = s.value;
        };
        if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < m; ++i) one(i);
#else
            for (int i = 0; i < m; ++i) one(i);
#endif
        } else {
            for (int i = 0; i < m; ++i) one(i);
        }
        res.curves.push_back(std::move(est));
    }
    return res;
}

std::vector<BandResult> bonferroni_bands(const ImageGrid& grid,
                                         const std::vector<EdgeEstimate>& estimates,
                                         const std::vector<VarianceComponents>& components,
                                         const BandConfig& cfg, const KernelPair& pair,
                                         Exec exec) {
    if (estimates.size() != components.size())
        throw argument_error("bonferroni_bands: estimates and components misaligned");
    std::vector<BandResult> out;
    BandConfig per = cfg;
    per.alpha = cfg.alpha / std::max<std::size_t>(1, estimates.size());
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        BandConfig cj = per;
        cj.seed = cfg.seed + j; // independent multiplier stream per curve
        out.push_back(uniform_band(grid, estimates[j], components[j], cj, pair, exec));
    }
    return out;
}

} // namespace edgeband
