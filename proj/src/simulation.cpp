#include "edgeband/simulation.hpp"

#include "edgeband/errors.hpp"
#include "edgeband/estimator.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/multiedge.hpp"
#include "edgeband/numerics.hpp"
#include "edgeband/scenes.hpp"
#include "edgeband/variance.hpp"

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <ostream>

namespace edgeband {

std::string scenario_name(Scenario s) {
    switch (s) {
    case Scenario::phi1:
        return "phi1";
    case Scenario::phi2:
        return "phi2";
    default:
        return "multi";
    }
}

void StudySpec::validate() const {
    if (reps < 0) throw config_error("StudySpec: reps must be >= 0");
    if (n_list.empty() || sigma_tilde_list.empty() || alpha_list.empty())
        throw config_error("StudySpec: n, sigma_tilde and alpha lists must be non-empty");
    for (int n : n_list)
        if (n < 32) throw config_error("StudySpec: n must be >= 32");
    for (double s : sigma_tilde_list)
        if (!std::isfinite(s) || s < 0.0)
            throw config_error("StudySpec: sigma_tilde must be finite and >= 0");
    for (double a : alpha_list)
        if (!(a > 0.0 && a < 1.0)) throw config_error("StudySpec: alpha must be in (0,1)");
    if (n_bootstrap < 500) throw config_error("StudySpec: n_bootstrap must be >= 500");
    if (h_override != 0.0 && !(h_override > 0.0 && h_override <= 0.25))
        throw config_error("StudySpec: h_override must be in (0, 1/4]");
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// alpha never enters: cells at different levels share scenes and multipliers,
// so coverage monotonicity and width ratios across alpha hold exactly
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, int n, double sigma_tilde,
                          int rep) {
    std::uint64_t bits;
    std::memcpy(&bits, &sigma_tilde, sizeof bits);
    std::uint64_t x = mix64(base ^ tag);
    x = mix64(x ^ static_cast<std::uint64_t>(n));
    x = mix64(x ^ bits);
    return mix64(x ^ static_cast<std::uint64_t>(rep));
}

constexpr std::uint64_t kSceneTag = 0x7363656eULL;
constexpr std::uint64_t kBootTag = 0x626f6f74ULL;

SceneSpec make_scene(Scenario sc, double sigma_tilde, std::uint64_t seed) {
    switch (sc) {
    case Scenario::phi1:
        return scene_linear(sigma_tilde, seed);
    case Scenario::phi2:
        return scene_parabolic(sigma_tilde, seed);
    default:
        return scene_two_edges(sigma_tilde, seed);
    }
}

// true slope angle from the location by central difference; scenes are smooth
double true_psi(const JumpCurve& c, double x) {
    const double e = 1e-5;
    return scene_psi_of((c.phi(x + e) - c.phi(x - e)) / (2.0 * e));
}

struct RepOut {
    int status = 0;                    // 0 ok, 1 errored, 2 wrong curve count
    std::vector<double> phi_hat;       // J*m
    std::vector<double> sd_hat;        // J*m, NaN where curvature degenerate
    std::vector<unsigned char> pw_hit; // A*J*m
    std::vector<double> pw_width;      // A*J*m, NaN where unbounded
    std::vector<double> un_width;      // A*J*m, NaN where unbounded
    std::vector<unsigned char> all_in; // A
    std::vector<double> x_grid;
    double h = 0.0;
    int n1 = 0, n2 = 0;
};

RepOut run_rep(const StudySpec& spec, int n, double st, int rep, const KernelPair& pair,
               const KernelConstants& kc, Exec inner, bool with_bands) {
    RepOut out;
    SceneSpec sc = make_scene(spec.scenario, st, derive_seed(spec.seed, kSceneTag, n, st, rep));
    std::size_t J = sc.curves.size();
    ImageGrid grid = generate(sc, n);
    double sig = estimate_sigma(grid);
    EstimationConfig cfg;
    cfg.h = spec.h_override;

    std::vector<EdgeEstimate> ests;
    if (spec.scenario == Scenario::multi) {
        MultiEdgeConfig mcfg;
        mcfg.max_curves = static_cast<int>(J);
        auto cands = detect_candidates(grid, pair, cfg, mcfg, inner);
        MultiEdgeResult mr = estimate_multi(grid, pair, cfg, mcfg, cands, inner);
        if (mr.curves.size() != J) {
            out.status = 2; // a detection miss counts against coverage, not as an error
            return out;
        }
        ests = std::move(mr.curves);
    } else {
        ests.push_back(estimate_curve_tracked(grid, pair, cfg, TrackConfig{}, sig, inner));
    }

    std::size_t m = ests[0].x_grid.size();
    std::size_t A = with_bands ? spec.alpha_list.size() : 0;
    out.x_grid = ests[0].x_grid;
    out.h = ests[0].h;
    out.n1 = ests[0].n1;
    out.n2 = ests[0].n2;
    out.phi_hat.assign(J * m, 0.0);
    out.sd_hat.assign(J * m, kNan);
    out.pw_hit.assign(A * J * m, 0);
    out.pw_width.assign(A * J * m, kNan);
    out.un_width.assign(A * J * m, kNan);
    out.all_in.assign(A, 0);

    std::vector<VarianceComponents> comps;
    comps.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
        comps.push_back(variance_components(ests[j], kc, sig));
        for (std::size_t i = 0; i < m; ++i) {
            out.phi_hat[j * m + i] = ests[j].phi_hat[i];
            if (!comps[j].degenerate(static_cast<int>(i)))
                out.sd_hat[j * m + i] = asymptotic_sd_phi(comps[j], static_cast<int>(i));
        }
    }

    auto tn_it = spec.t_n_table.find({n, st});
    for (std::size_t a = 0; a < A; ++a) {
        BandConfig bc;
        bc.alpha = spec.alpha_list[a];
        bc.n_bootstrap = spec.n_bootstrap;
        bc.seed = derive_seed(spec.seed, kBootTag, n, st, rep);
        if (tn_it != spec.t_n_table.end()) {
            bc.tn_policy = TnPolicy::fixed;
            bc.tn_fixed = tn_it->second;
        }
        std::vector<BandResult> bands;
        if (spec.scenario == Scenario::multi)
            bands = bonferroni_bands(grid, ests, comps, bc, pair, inner);
        else
            bands.push_back(uniform_band(grid, ests[0], comps[0], bc, pair, inner));

        bool all_in = true;
        for (std::size_t j = 0; j < J; ++j) {
            const BandResult& b = bands[j];
            for (std::size_t i = 0; i < m; ++i) {
                double tphi = sc.curves[j].phi(b.x_grid[i]);
                std::size_t k = (a * J + j) * m + i;
                if (b.pointwise_lower[i] <= tphi && tphi <= b.pointwise_upper[i])
                    out.pw_hit[k] = 1;
                if (!(b.lower[i] <= tphi && tphi <= b.upper[i])) all_in = false;
                if (!b.unbounded[i]) {
                    out.pw_width[k] = b.pointwise_upper[i] - b.pointwise_lower[i];
                    out.un_width[k] = b.upper[i] - b.lower[i];
                }
            }
        }
        out.all_in[a] = all_in ? 1 : 0;
    }
    return out;
}

// replication-level parallelism with one output slot per rep: the sequential
// reduction afterwards makes the report identical for any thread count
void run_reps(const StudySpec& spec, int n, double st, const KernelPair& pair,
              const KernelConstants& kc, Exec exec, bool with_bands, std::vector<RepOut>& out) {
    out.assign(spec.reps, RepOut{});
    Exec inner = spec.reps == 1 ? exec : Exec::serial;
    auto body = [&](int r) {
        try {
            out[r] = run_rep(spec, n, st, r, pair, kc, inner, with_bands);
        } catch (const std::exception&) {
            out[r] = RepOut{};
            out[r].status = 1;
        }
    };
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < spec.reps; ++r) body(r);
#else
        for (int r = 0; r < spec.reps; ++r) body(r);
#endif
    } else {
        for (int r = 0; r < spec.reps; ++r) body(r);
    }
}

StudyReport run_study_impl(const StudySpec& spec, Exec exec, bool with_bands) {
    spec.validate();
    auto study_start = std::chrono::steady_clock::now();
    KernelPair pair = make_default_kernels();
    KernelConstants kc = kernel_constants(pair);
    StudyReport report;
    report.spec = spec;

    std::vector<double> alphas = with_bands ? spec.alpha_list : std::vector<double>{0.0};
    for (int n : spec.n_list) {
        for (double st : spec.sigma_tilde_list) {
            auto cell_start = std::chrono::steady_clock::now();
            std::vector<RepOut> reps;
            run_reps(spec, n, st, pair, kc, exec, with_bands, reps);
            double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                           cell_start)
                                 .count();

            const RepOut* ref = nullptr;
            int n_ok = 0, n_miss = 0, n_err = 0;
            for (const RepOut& r : reps) {
                if (r.status == 0) {
                    ++n_ok;
                    if (!ref) ref = &r;
                } else if (r.status == 2) {
                    ++n_miss;
                } else {
                    ++n_err;
                }
            }

            SceneSpec scene0 = make_scene(spec.scenario, st, 0);
            std::size_t J = scene0.curves.size();
            std::size_t m = ref ? ref->x_grid.size() : 0;
            double sigma_true = scene0.noise.sd();

            // plug the true parameters into the sd formula, once per column
            std::vector<double> tsd(J * m, kNan);
            if (ref) {
                for (std::size_t j = 0; j < J; ++j) {
                    EdgeEstimate te;
                    te.x_grid = ref->x_grid;
                    te.h = ref->h;
                    te.n1 = ref->n1;
                    te.n2 = ref->n2;
                    te.phi_hat.resize(m);
                    te.psi_hat.resize(m);
                    te.tau_hat.resize(m);
                    for (std::size_t i = 0; i < m; ++i) {
                        double x = ref->x_grid[i];
                        te.phi_hat[i] = scene0.curves[j].phi(x);
                        te.psi_hat[i] = true_psi(scene0.curves[j], x);
                        te.tau_hat[i] = scene0.curves[j].tau(x);
                    }
                    VarianceComponents tc = variance_components(te, kc, sigma_true);
                    for (std::size_t i = 0; i < m; ++i)
                        tsd[j * m + i] = asymptotic_sd_phi(tc, static_cast<int>(i));
                }
            }

            // alpha-independent per-column statistics, shared by every alpha cell
            std::vector<double> rmse_x(m, 0.0), bias_x(m, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                double se_sum = 0.0;
                int se_cnt = 0;
                double bias_sum = 0.0;
                for (std::size_t j = 0; j < J; ++j) {
                    double sum = 0.0, sum2 = 0.0;
                    int cnt = 0;
                    for (const RepOut& r : reps) {
                        if (r.status != 0) continue;
                        double ph = r.phi_hat[j * m + i];
                        sum += ph;
                        sum2 += ph * ph;
                        ++cnt;
                        double sd = r.sd_hat[j * m + i];
                        if (!std::isnan(sd)) {
                            double e = sd - tsd[j * m + i];
                            se_sum += e * e;
                            ++se_cnt;
                        }
                    }
                    if (cnt >= 2) {
                        double mean = sum / cnt;
                        double var = (sum2 - cnt * mean * mean) / (cnt - 1);
                        double tphi = scene0.curves[j].phi(ref->x_grid[i]);
                        if (var > 0.0) bias_sum += std::abs(mean - tphi) / std::sqrt(var);
                    }
                }
                rmse_x[i] = se_cnt > 0 ? std::sqrt(se_sum / se_cnt) : 0.0;
                bias_x[i] = n_ok >= 2 ? bias_sum / J : 0.0;
            }

            auto tn_it = spec.t_n_table.find({n, st});
            double n_eff = ref ? std::sqrt(static_cast<double>(ref->n1) * ref->n2)
                               : static_cast<double>(n);
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                CellReport cell;
                cell.scenario = spec.scenario;
                cell.n = n;
                cell.sigma_tilde = st;
                cell.alpha = alphas[a];
                cell.t_n_used = !with_bands ? 0.0
                                : tn_it != spec.t_n_table.end()
                                    ? tn_it->second
                                    : 1.0 / std::sqrt(std::log(n_eff));
                cell.reps_ok = n_ok + n_miss;
                cell.reps_failed = n_err;
                cell.failed = n_err > 0.05 * spec.reps;
                cell.runtime_seconds = elapsed;
                cell.x_grid = ref ? ref->x_grid : std::vector<double>{};
                cell.rmse_sd_by_x = rmse_x;
                cell.bias_sd_ratio_by_x = bias_x;
                cell.coverage_pw_by_x.assign(m, 0.0);
                cell.width_pw_by_x.assign(m, 0.0);

                long long pwh = 0, pwt = 0, unb = 0;
                double pws = 0.0, uns = 0.0;
                long long pwc = 0, unc = 0;
                long long uh = 0, ut = 0;
                for (std::size_t i = 0; i < m && with_bands; ++i) {
                    long long hx = 0, tx = 0;
                    double wx = 0.0;
                    long long wc = 0;
                    for (const RepOut& r : reps) {
                        if (r.status != 0) continue;
                        for (std::size_t j = 0; j < J; ++j) {
                            std::size_t k = (a * J + j) * m + i;
                            hx += r.pw_hit[k];
                            ++tx;
                            if (!std::isnan(r.pw_width[k])) {
                                wx += r.pw_width[k];
                                ++wc;
                                uns += r.un_width[k];
                                ++unc;
                            } else {
                                ++unb;
                            }
                        }
                    }
                    cell.coverage_pw_by_x[i] = tx > 0 ? static_cast<double>(hx) / tx : 0.0;
                    cell.width_pw_by_x[i] = wc > 0 ? wx / wc : 0.0;
                    pwh += hx;
                    pwt += tx;
                    pws += wx;
                    pwc += wc;
                }
                for (const RepOut& r : reps) {
                    if (!with_bands || r.status == 1) continue;
                    ++ut;
                    if (r.status == 0 && r.all_in[a]) ++uh;
                }
                cell.coverage_pointwise = pwt > 0 ? static_cast<double>(pwh) / pwt : 0.0;
                cell.width_pointwise = pwc > 0 ? pws / pwc : 0.0;
                cell.coverage_uniform = ut > 0 ? static_cast<double>(uh) / ut : 0.0;
                cell.width_uniform = unc > 0 ? uns / unc : 0.0;
                cell.unbounded_strips = unb;
                report.cells.push_back(std::move(cell));
            }
        }
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - study_start).count();
    return report;
}

} // namespace

StudyReport run_study(const StudySpec& spec, Exec exec) { return run_study_impl(spec, exec, true); }

StudyReport rmse_sd_study(const StudySpec& spec, Exec exec) {
    return run_study_impl(spec, exec, false);
}

StudyReport bias_ratio_study(const StudySpec& spec, Exec exec) {
    return run_study_impl(spec, exec, false);
}

std::vector<QuantileCurves> tn_sensitivity(const StudySpec& spec, Exec exec) {
    spec.validate();
    if (spec.scenario == Scenario::multi)
        throw config_error("tn_sensitivity: single-edge scenarios only");
    KernelPair pair = make_default_kernels();
    KernelConstants kc = kernel_constants(pair);
    std::vector<QuantileCurves> out;
    for (int n : spec.n_list) {
        for (double st : spec.sigma_tilde_list) {
            QuantileCurves qc;
            qc.n = n;
            qc.sigma_tilde = st;
            std::vector<double> sups(spec.reps, kNan);
            std::vector<std::vector<double>> boots(spec.reps);
            Exec inner = spec.reps == 1 ? exec : Exec::serial;
            auto body = [&](int r) {
                try {
                    SceneSpec sc = make_scene(spec.scenario, st,
                                              derive_seed(spec.seed, kSceneTag, n, st, r));
                    ImageGrid grid = generate(sc, n);
                    double sig = estimate_sigma(grid);
                    EstimationConfig cfg;
                    cfg.h = spec.h_override;
                    EdgeEstimate est =
                        estimate_curve_tracked(grid, pair, cfg, TrackConfig{}, sig, inner);
                    VarianceComponents comp = variance_components(est, kc, sig);
                    sups[r] = sup_statistic(est, comp, sc.curves[0].phi);
                    BandConfig bc;
                    bc.n_bootstrap = spec.n_bootstrap;
                    bc.seed = derive_seed(spec.seed, kBootTag, n, st, r);
                    boots[r] = bootstrap_sup_quantile(grid, est, comp, bc, pair, inner)
                                   .sup_samples;
                } catch (const std::exception&) {
                    sups[r] = kNan;
                }
            };
            if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
                for (int r = 0; r < spec.reps; ++r) body(r);
#else
                for (int r = 0; r < spec.reps; ++r) body(r);
#endif
            } else {
                for (int r = 0; r < spec.reps; ++r) body(r);
            }
            std::vector<double> emp;
            std::vector<double> pool;
            for (int r = 0; r < spec.reps; ++r) {
                if (std::isnan(sups[r])) continue;
                emp.push_back(sups[r]);
                pool.insert(pool.end(), boots[r].begin(), boots[r].end());
            }
            if (!emp.empty()) {
                for (int l = 50; l <= 99; ++l) qc.levels.push_back(l / 100.0);
                for (double p : qc.levels) {
                    qc.empirical.push_back(empirical_quantile(emp, p));
                    qc.bootstrap.push_back(empirical_quantile(pool, p));
                }
            }
            out.push_back(std::move(qc));
        }
    }
    return out;
}

void write_study_csv(const StudyReport& report, std::ostream& os) {
    os << std::setprecision(9);
    os << "scenario,n,sigma_tilde,alpha,t_n,x,coverage_pw,width_pw,rmse_sd,bias_sd_ratio,"
          "coverage_pointwise,width_pointwise,coverage_uniform,width_uniform,"
          "unbounded_strips,reps_ok,reps_failed,cell_failed,runtime_seconds\n";
    for (const CellReport& c : report.cells) {
        for (std::size_t i = 0; i < c.x_grid.size(); ++i) {
            os << scenario_name(c.scenario) << ',' << c.n << ',' << c.sigma_tilde << ','
               << c.alpha << ',' << c.t_n_used << ',' << c.x_grid[i] << ','
               << c.coverage_pw_by_x[i] << ',' << c.width_pw_by_x[i] << ',' << c.rmse_sd_by_x[i]
               << ',' << c.bias_sd_ratio_by_x[i] << ',' << c.coverage_pointwise << ','
               << c.width_pointwise << ',' << c.coverage_uniform << ',' << c.width_uniform << ','
               << c.unbounded_strips << ',' << c.reps_ok << ',' << c.reps_failed << ','
               << (c.failed ? 1 : 0) << ',' << c.runtime_seconds << '\n';
        }
    }
}

void write_study_json(const StudyReport& report, std::ostream& os) {
    nlohmann::json spec;
    spec["scenario"] = scenario_name(report.spec.scenario);
    spec["n"] = report.spec.n_list;
    spec["sigma_tilde"] = report.spec.sigma_tilde_list;
    spec["alpha"] = report.spec.alpha_list;
    spec["reps"] = report.spec.reps;
    spec["n_bootstrap"] = report.spec.n_bootstrap;
    spec["h_override"] = report.spec.h_override;
    spec["seed"] = report.spec.seed;
    nlohmann::json tn = nlohmann::json::array();
    for (const auto& [key, val] : report.spec.t_n_table)
        tn.push_back({{"n", key.first}, {"sigma_tilde", key.second}, {"t_n", val}});
    spec["t_n_table"] = tn;

    nlohmann::json cells = nlohmann::json::array();
    for (const CellReport& c : report.cells) {
        nlohmann::json jc;
        jc["scenario"] = scenario_name(c.scenario);
        jc["n"] = c.n;
        jc["sigma_tilde"] = c.sigma_tilde;
        jc["alpha"] = c.alpha;
        jc["t_n"] = c.t_n_used;
        jc["reps_ok"] = c.reps_ok;
        jc["reps_failed"] = c.reps_failed;
        jc["cell_failed"] = c.failed;
        jc["coverage_pointwise"] = c.coverage_pointwise;
        jc["width_pointwise"] = c.width_pointwise;
        jc["coverage_uniform"] = c.coverage_uniform;
        jc["width_uniform"] = c.width_uniform;
        jc["unbounded_strips"] = c.unbounded_strips;
        jc["runtime_seconds"] = c.runtime_seconds;
        jc["x"] = c.x_grid;
        jc["coverage_pw_by_x"] = c.coverage_pw_by_x;
        jc["width_pw_by_x"] = c.width_pw_by_x;
        jc["rmse_sd_by_x"] = c.rmse_sd_by_x;
        jc["bias_sd_ratio_by_x"] = c.bias_sd_ratio_by_x;
        cells.push_back(std::move(jc));
    }
    nlohmann::json j;
    j["spec"] = std::move(spec);
    j["cells"] = std::move(cells);
    j["runtime_seconds"] = report.runtime_seconds;
    os << j.dump(2) << '\n';
}

void write_quantile_csv(const std::vector<QuantileCurves>& curves, std::ostream& os) {
    os << std::setprecision(9);
    os << "n,sigma_tilde,level,empirical,bootstrap\n";
    for (const QuantileCurves& qc : curves)
        for (std::size_t i = 0; i < qc.levels.size(); ++i)
            os << qc.n << ',' << qc.sigma_tilde << ',' << qc.levels[i] << ',' << qc.empirical[i]
               << ',' << qc.bootstrap[i] << '\n';
}

} // namespace edgeband
