#include "edgeband/confidence.hpp"
#include "edgeband/contrast.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/numerics.hpp"
#include "edgeband/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace edgeband {

void BandConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("BandConfig: alpha must be in (0,1)");
    if (n_bootstrap < 500) throw config_error("BandConfig: n_bootstrap must be >= 500");
    if (tn_policy == TnPolicy::fixed && !(tn_fixed >= 0.0))
        throw config_error("BandConfig: fixed t_n must be >= 0");
    if (!std::isfinite(multiplier_scale))
        throw config_error("BandConfig: multiplier_scale must be finite");
}

double BandConfig::resolve_tn(double n_eff) const {
    if (tn_policy == TnPolicy::fixed) return tn_fixed;
    return 1.0 / std::sqrt(std::log(n_eff));
}

PointwiseCi pointwise_ci(const EdgeEstimate& est, const VarianceComponents& comp, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("pointwise_ci: alpha must be in (0,1)");
    if (est.x_grid.size() != comp.x_grid.size())
        throw argument_error("pointwise_ci: estimate and components misaligned");
    double q = normal_quantile(1.0 - alpha / 2.0);
    std::size_t m = est.x_grid.size();
    PointwiseCi ci;
    ci.lower.resize(m);
    ci.upper.resize(m);
    ci.unbounded.assign(m, 0);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        if (comp.vh_phi[i] == 0.0) {
            ci.unbounded[i] = 1;
            ci.lower[i] = -inf;
            ci.upper[i] = inf;
            continue;
        }
        double half = comp.sigma_hat * std::sqrt(comp.vs_phi[i]) * q /
                      (est.n_eff() * std::abs(comp.vh_phi[i]));
        ci.lower[i] = est.phi_hat[i] - half;
        ci.upper[i] = est.phi_hat[i] + half;
    }
    return ci;
}

namespace {

struct ScoreMatrix {
    std::vector<double> G;    // m x s row-major, rows scaled by 1/(n_eff h sqrt(VS))
    std::size_t m = 0, s = 0; // strips, union slots
};

ScoreMatrix build_score_matrix(const ImageGrid& grid, const EdgeEstimate& est,
                               const VarianceComponents& comp, const KernelPair& pair,
                               BandTarget target) {
    std::size_t m = est.x_grid.size();
    std::vector<ScoreWeights> per_x(m);
    for (std::size_t i = 0; i < m; ++i) {
        ContrastQuery q{est.x_grid[i], est.phi_hat[i], est.psi_hat[i], est.h};
        ScoreKind kind = target == BandTarget::phi   ? ScoreKind::location
                         : target == BandTarget::psi ? ScoreKind::slope
                                                     : ScoreKind::height;
        per_x[i] = score_weights(grid, pair, q, kind);
    }
    std::vector<std::size_t> union_idx;
    for (const auto& sw : per_x)
        union_idx.insert(union_idx.end(), sw.flat_index.begin(), sw.flat_index.end());
    std::sort(union_idx.begin(), union_idx.end());
    union_idx.erase(std::unique(union_idx.begin(), union_idx.end()), union_idx.end());
    std::unordered_map<std::size_t, std::size_t> slot;
    slot.reserve(union_idx.size());
    for (std::size_t k = 0; k < union_idx.size(); ++k) slot[union_idx[k]] = k;

    double n_eff = std::sqrt(static_cast<double>(grid.n1) * grid.n2);
    ScoreMatrix sm;
    sm.m = m;
    sm.s = union_idx.size();
    sm.G.assign(m * sm.s, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double vs = target == BandTarget::phi   ? comp.vs_phi[i]
                    : target == BandTarget::psi ? comp.vs_psi
                                                : comp.vs_tau;
        double scale = 1.0 / (n_eff * est.h * std::sqrt(vs));
        for (std::size_t k = 0; k < per_x[i].flat_index.size(); ++k)
            sm.G[i * sm.s + slot[per_x[i].flat_index[k]]] += scale * per_x[i].weight[k];
    }
    return sm;
}

} // namespace

SupQuantileResult bootstrap_sup_quantile(const ImageGrid& grid, const EdgeEstimate& est,
                                         const VarianceComponents& comp, const BandConfig& cfg,
                                         const KernelPair& pair, Exec exec) {
    cfg.validate();
    if (est.x_grid.size() != comp.x_grid.size())
        throw argument_error("bootstrap_sup_quantile: estimate and components misaligned");
    ScoreMatrix sm = build_score_matrix(grid, est, comp, pair, cfg.target);
    SupQuantileResult out;
    out.sup_samples.assign(cfg.n_bootstrap, 0.0);
    // one multiplier vector per replication, reused across x; per-replication
    // substreams keep the result independent of the thread count and of the
    // blocking, which only exists so the score matrix streams row-major
    constexpr int kBlock = 16;
    auto run_block = [&](int b0) {
        int nb = std::min<int>(kBlock, cfg.n_bootstrap - b0);
        std::vector<double> xi(sm.s * kBlock, 0.0); // slot-major, kBlock lanes per slot
        for (int b = 0; b < nb; ++b) {
            Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(b0 + b));
            for (std::size_t k = 0; k < sm.s; ++k)
                xi[k * kBlock + b] = cfg.multiplier_scale * rng.normal();
        }
        std::vector<double> sup(nb, 0.0);
        std::vector<double> acc(kBlock);
        for (std::size_t i = 0; i < sm.m; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const double* row = sm.G.data() + i * sm.s;
            for (std::size_t k = 0; k < sm.s; ++k) {
                double g = row[k];
                const double* lane = xi.data() + k * kBlock;
                for (int b = 0; b < kBlock; ++b) acc[b] += g * lane[b];
            }
            for (int b = 0; b < nb; ++b) sup[b] = std::max(sup[b], std::abs(acc[b]));
        }
        for (int b = 0; b < nb; ++b) out.sup_samples[b0 + b] = sup[b];
    };
    int nblocks = (cfg.n_bootstrap + kBlock - 1) / kBlock;
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (int blk = 0; blk < nblocks; ++blk) run_block(blk * kBlock);
#else
        for (int blk = 0; blk < nblocks; ++blk) run_block(blk * kBlock);
#endif
    } else {
        for (int blk = 0; blk < nblocks; ++blk) run_block(blk * kBlock);
    }
    out.quantile = empirical_quantile(out.sup_samples, 1.0 - cfg.alpha);
    return out;
}

BandResult uniform_band(const ImageGrid& grid, const EdgeEstimate& est,
                        const VarianceComponents& comp, const BandConfig& cfg,
                        const KernelPair& pair, Exec exec) {
    cfg.validate();
    SupQuantileResult sq = bootstrap_sup_quantile(grid, est, comp, cfg, pair, exec);
    double n_eff = std::sqrt(static_cast<double>(grid.n1) * grid.n2);
    double tn = cfg.resolve_tn(n_eff);
    double qn = normal_quantile(1.0 - cfg.alpha / 2.0);

    std::size_t m = est.x_grid.size();
    BandResult br;
    br.x_grid = est.x_grid;
    br.quantile_boot = sq.quantile;
    br.t_n_used = tn;
    br.alpha = cfg.alpha;
    br.center.resize(m);
    br.lower.resize(m);
    br.upper.resize(m);
    br.pointwise_lower.resize(m);
    br.pointwise_upper.resize(m);
    br.unbounded.assign(m, 0);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        double center, denom_unif, denom_pw, vs;
        switch (cfg.target) {
        case BandTarget::phi:
            center = est.phi_hat[i];
            vs = comp.vs_phi[i];
            denom_unif = n_eff * std::abs(comp.vh_phi[i]);
            denom_pw = denom_unif;
            break;
        case BandTarget::psi:
            center = est.psi_hat[i];
            vs = comp.vs_psi;
            denom_unif = n_eff * est.h * std::abs(comp.vh_psi[i]);
            denom_pw = denom_unif;
            break;
        default:
            center = est.tau_hat[i];
            vs = comp.vs_tau;
            denom_unif = n_eff * est.h;
            denom_pw = denom_unif;
            break;
        }
        br.center[i] = center;
        if (denom_unif == 0.0) {
            br.unbounded[i] = 1;
            br.lower[i] = br.pointwise_lower[i] = -inf;
            br.upper[i] = br.pointwise_upper[i] = inf;
            continue;
        }
        double half = (1.0 + tn) * comp.sigma_hat * std::sqrt(vs) * sq.quantile / denom_unif;
        double half_pw = comp.sigma_hat * std::sqrt(vs) * qn / denom_pw;
        br.lower[i] = center - half;
        br.upper[i] = center + half;
        br.pointwise_lower[i] = center - half_pw;
        br.pointwise_upper[i] = center + half_pw;
    }
    return br;
}

double sup_statistic(const EdgeEstimate& est, const VarianceComponents& comp,
                     const std::function<double(double)>& true_phi) {
    if (est.x_grid.size() != comp.x_grid.size())
        throw argument_error("sup_statistic: estimate and components misaligned");
    double sup = 0.0;
    for (std::size_t i = 0; i < est.x_grid.size(); ++i) {
        double err = est.phi_hat[i] - true_phi(est.x_grid[i]);
        double v = est.n_eff() * std::abs(comp.vh_phi[i] * err) /
                   (comp.sigma_hat * std::sqrt(comp.vs_phi[i]));
        sup = std::max(sup, v);
    }
    return sup;
}

} // namespace edgeband
