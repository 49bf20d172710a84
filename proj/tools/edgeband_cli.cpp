// command-line front end: estimation, bands, multi-edge, simulation, checks
#include "CLI11.hpp"
#include "json.hpp"

#include "edgeband/confidence.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/estimator.hpp"
#include "edgeband/exec.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/multiedge.hpp"
#include "edgeband/numerics.hpp"
#include "edgeband/simulation.hpp"
#include "edgeband/variance.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace edgeband;

namespace {

struct CommonOpts {
    std::string input;
    std::string format = "auto";
    double h = 0.0;
    int ppw = 0;
    double alpha = 0.05;
    std::string tn = "auto";
    std::string target = "phi";
    int bootstrap = 4000;
    std::uint64_t seed = 0;
    std::vector<int> sigma_region;
    std::string out;
    bool json = false;
    int threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--threads", o.threads, "cap OpenMP workers");
    cmd->add_option("--seed", o.seed, "rng seed")->envname("EDGEBAND_SEED");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_flag("--json", o.json, "JSON output instead of CSV");
}

void add_input_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--input", o.input, "image path")->required();
    cmd->add_option("--format", o.format, "input format")
        ->check(CLI::IsMember({"auto", "pgm", "csv"}));
    auto* h = cmd->add_option("--h", o.h, "bandwidth")->check(CLI::PositiveNumber);
    auto* p = cmd->add_option("--points-per-window", o.ppw,
                              "pixels per kernel window, sets the default bandwidth")
                  ->check(CLI::PositiveNumber);
    h->excludes(p);
    p->excludes(h);
    cmd->add_option("--sigma-region", o.sigma_region,
                    "pixel rectangle x0,y0,x1,y1 (1-based, inclusive) for the noise estimate")
        ->delimiter(',')
        ->expected(4);
}

void add_band_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--alpha", o.alpha, "band level");
    cmd->add_option("--tn", o.tn, "slack t_n: a number or 'auto' (1/sqrt(ln n))");
    cmd->add_option("--bootstrap", o.bootstrap, "multiplier bootstrap replications");
}

ImageGrid load_input(const CommonOpts& o) {
    if (o.format == "csv") return load_image(o.input, ImageFormat::csv);
    if (o.format == "pgm") {
        std::ifstream f(o.input, std::ios::binary);
        char m[2] = {0, 0};
        f.read(m, 2);
        return load_image(o.input, m[1] == '5' ? ImageFormat::pgm_binary : ImageFormat::pgm_ascii);
    }
    return load_image(o.input);
}

EstimationConfig make_cfg(const CommonOpts& o, const ImageGrid& grid) {
    EstimationConfig cfg;
    if (o.h > 0.0)
        cfg.h = o.h;
    else if (o.ppw > 0)
        cfg.h = default_bandwidth(std::min(grid.n1, grid.n2), o.ppw);
    return cfg;
}

std::optional<PixelRect> sigma_region(const CommonOpts& o) {
    if (o.sigma_region.empty()) return std::nullopt;
    return PixelRect{o.sigma_region[0], o.sigma_region[2], o.sigma_region[1], o.sigma_region[3]};
}

void apply_tn(BandConfig& bc, const std::string& tn) {
    if (tn == "auto") {
        bc.tn_policy = TnPolicy::inv_sqrt_log;
        return;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tn, &used);
    } catch (const std::exception&) {
        throw config_error("--tn must be a number or 'auto'");
    }
    if (used != tn.size()) throw config_error("--tn must be a number or 'auto'");
    bc.tn_policy = TnPolicy::fixed;
    bc.tn_fixed = v;
}

BandTarget parse_target(const std::string& t) {
    if (t == "phi") return BandTarget::phi;
    if (t == "psi") return BandTarget::psi;
    return BandTarget::tau;
}

void emit(const CommonOpts& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw argument_error("cannot open output: " + o.out);
    f << text;
}

void cmd_estimate(const CommonOpts& o) {
    if (o.threads > 0) set_max_threads(o.threads);
    ImageGrid grid = load_input(o);
    KernelPair pair = make_default_kernels();
    EstimationConfig cfg = make_cfg(o, grid);
    double sig = estimate_sigma(grid, sigma_region(o));
    EdgeEstimate est = estimate_curve_tracked(grid, pair, cfg, TrackConfig{}, sig);
    std::ostringstream os;
    os << std::setprecision(9);
    if (o.json) {
        nlohmann::json j;
        j["h"] = est.h;
        j["n1"] = est.n1;
        j["n2"] = est.n2;
        j["sigma_hat"] = sig;
        j["x"] = est.x_grid;
        j["phi_hat"] = est.phi_hat;
        j["psi_hat"] = est.psi_hat;
        j["tau_hat"] = est.tau_hat;
        j["contrast"] = est.contrast_at_max;
        os << j.dump(2) << '\n';
    } else {
        os << "x,phi_hat,psi_hat,tau_hat,contrast\n";
        for (std::size_t i = 0; i < est.x_grid.size(); ++i)
            os << est.x_grid[i] << ',' << est.phi_hat[i] << ',' << est.psi_hat[i] << ','
               << est.tau_hat[i] << ',' << est.contrast_at_max[i] << '\n';
    }
    emit(o, os.str());
}

void cmd_bands(const CommonOpts& o) {
    if (o.threads > 0) set_max_threads(o.threads);
    ImageGrid grid = load_input(o);
    KernelPair pair = make_default_kernels();
    EstimationConfig cfg = make_cfg(o, grid);
    double sig = estimate_sigma(grid, sigma_region(o));
    EdgeEstimate est = estimate_curve_tracked(grid, pair, cfg, TrackConfig{}, sig);
    VarianceComponents comp = variance_components(est, pair, sig);
    BandConfig bc;
    bc.alpha = o.alpha;
    bc.n_bootstrap = o.bootstrap;
    bc.seed = o.seed;
    bc.target = parse_target(o.target);
    apply_tn(bc, o.tn);
    BandResult b = uniform_band(grid, est, comp, bc, pair);
    std::ostringstream os;
    os << std::setprecision(9);
    if (o.json) {
        nlohmann::json j;
        j["target"] = o.target;
        j["alpha"] = b.alpha;
        j["q_boot"] = b.quantile_boot;
        j["t_n"] = b.t_n_used;
        j["sigma_hat"] = comp.sigma_hat;
        j["x"] = b.x_grid;
        j["center"] = b.center;
        j["pw_lo"] = b.pointwise_lower;
        j["pw_hi"] = b.pointwise_upper;
        j["unif_lo"] = b.lower;
        j["unif_hi"] = b.upper;
        os << j.dump(2) << '\n';
    } else {
        os << "# target=" << o.target << " q_boot=" << b.quantile_boot << " t_n=" << b.t_n_used
           << " alpha=" << b.alpha << " sigma_hat=" << comp.sigma_hat << '\n';
        os << "x,center,pw_lo,pw_hi,unif_lo,unif_hi\n";
        for (std::size_t i = 0; i < b.x_grid.size(); ++i)
            os << b.x_grid[i] << ',' << b.center[i] << ',' << b.pointwise_lower[i] << ','
               << b.pointwise_upper[i] << ',' << b.lower[i] << ',' << b.upper[i] << '\n';
    }
    emit(o, os.str());
}

void cmd_multi(const CommonOpts& o, int max_curves, double separation) {
    if (o.threads > 0) set_max_threads(o.threads);
    ImageGrid grid = load_input(o);
    KernelPair pair = make_default_kernels();
    EstimationConfig cfg = make_cfg(o, grid);
    double sig = estimate_sigma(grid, sigma_region(o));
    MultiEdgeConfig mc;
    mc.max_curves = max_curves;
    mc.separation = separation;
    auto cands = detect_candidates(grid, pair, cfg, mc);
    MultiEdgeResult mr = estimate_multi(grid, pair, cfg, mc, cands);
    for (const std::string& w : mr.warnings) std::cerr << "warning: " << w << '\n';
    std::vector<VarianceComponents> comps;
    comps.reserve(mr.curves.size());
    for (const EdgeEstimate& e : mr.curves) comps.push_back(variance_components(e, pair, sig));
    BandConfig bc;
    bc.alpha = o.alpha;
    bc.n_bootstrap = o.bootstrap;
    bc.seed = o.seed;
    apply_tn(bc, o.tn);
    std::vector<BandResult> bands = bonferroni_bands(grid, mr.curves, comps, bc, pair);
    std::ostringstream os;
    os << std::setprecision(9);
    if (o.json) {
        nlohmann::json j;
        j["alpha"] = o.alpha;
        j["curves"] = nlohmann::json::array();
        j["sigma_hat"] = sig;
        for (std::size_t c = 0; c < bands.size(); ++c) {
            const BandResult& b = bands[c];
            nlohmann::json jc;
            jc["alpha_bonferroni"] = b.alpha;
            jc["q_boot"] = b.quantile_boot;
            jc["t_n"] = b.t_n_used;
            jc["x"] = b.x_grid;
            jc["center"] = b.center;
            jc["pw_lo"] = b.pointwise_lower;
            jc["pw_hi"] = b.pointwise_upper;
            jc["unif_lo"] = b.lower;
            jc["unif_hi"] = b.upper;
            j["curves"].push_back(std::move(jc));
        }
        j["warnings"] = mr.warnings;
        os << j.dump(2) << '\n';
    } else {
        os << "# alpha=" << o.alpha << " curves=" << bands.size() << " sigma_hat=" << sig << '\n';
        for (std::size_t c = 0; c < bands.size(); ++c)
            os << "# curve=" << c << " alpha_bonferroni=" << bands[c].alpha
               << " q_boot=" << bands[c].quantile_boot << " t_n=" << bands[c].t_n_used << '\n';
        os << "curve,x,center,pw_lo,pw_hi,unif_lo,unif_hi\n";
        for (std::size_t c = 0; c < bands.size(); ++c) {
            const BandResult& b = bands[c];
            for (std::size_t i = 0; i < b.x_grid.size(); ++i)
                os << c << ',' << b.x_grid[i] << ',' << b.center[i] << ','
                   << b.pointwise_lower[i] << ',' << b.pointwise_upper[i] << ',' << b.lower[i]
                   << ',' << b.upper[i] << '\n';
        }
    }
    emit(o, os.str());
}

struct SimulateOpts {
    std::string scenario = "phi1";
    std::vector<int> n_list{128};
    std::vector<double> sigma_list{0.5};
    std::vector<double> alpha_list{0.05};
    int reps = 100;
    int bootstrap = 2000; // desk-scale default, the paper grid is a flag away
    std::string study = "coverage";
};

void cmd_simulate(const CommonOpts& o, const SimulateOpts& so) {
    if (o.threads > 0) set_max_threads(o.threads);
    StudySpec spec;
    spec.scenario = so.scenario == "phi1"   ? Scenario::phi1
                    : so.scenario == "phi2" ? Scenario::phi2
                                            : Scenario::multi;
    spec.n_list = so.n_list;
    spec.sigma_tilde_list = so.sigma_list;
    spec.alpha_list = so.alpha_list;
    spec.reps = so.reps;
    spec.n_bootstrap = so.bootstrap;
    spec.h_override = o.h;
    spec.seed = o.seed;
    if (o.tn != "auto") {
        BandConfig probe;
        apply_tn(probe, o.tn); // reuse the numeric validation
        for (int n : spec.n_list)
            for (double st : spec.sigma_tilde_list) spec.t_n_table[{n, st}] = probe.tn_fixed;
    }
    std::ostringstream os;
    if (so.study == "tn") {
        std::vector<QuantileCurves> curves = tn_sensitivity(spec);
        if (o.json) {
            nlohmann::json j = nlohmann::json::array();
            for (const QuantileCurves& qc : curves)
                j.push_back({{"n", qc.n},
                             {"sigma_tilde", qc.sigma_tilde},
                             {"levels", qc.levels},
                             {"empirical", qc.empirical},
                             {"bootstrap", qc.bootstrap}});
            os << j.dump(2) << '\n';
        } else {
            write_quantile_csv(curves, os);
        }
    } else {
        StudyReport report = so.study == "rmse"   ? rmse_sd_study(spec)
                             : so.study == "bias" ? bias_ratio_study(spec)
                                                  : run_study(spec);
        if (o.json)
            write_study_json(report, os);
        else
            write_study_csv(report, os);
    }
    emit(o, os.str());
}

// numeric checks of the kernel assumptions plus the bandwidth admissibility range
void cmd_checks(const CommonOpts& o, int n, double eta, double c_upper) {
    KernelPair pair = make_default_kernels();
    std::ostringstream os;
    os << std::setprecision(12);

    double mass1 = integrate([&](double x) { return pair.k1.eval(x); }, -1.0, 1.0);
    double mass2 = integrate([&](double x) { return pair.k2.eval(x); }, 0.0, 1.0);
    double even_err = 0.0, odd_err = 0.0, support_err = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double x = -1.0 + 2.0 * i / 200.0;
        even_err = std::max(even_err, std::abs(pair.k1.eval(x) - pair.k1.eval(-x)));
        odd_err = std::max(odd_err, std::abs(pair.k2.eval(x) + pair.k2.eval(-x)));
    }
    for (double x : {-1.0, 1.0, -1.000001, 1.000001, -2.0, 2.0}) {
        support_err = std::max(support_err, std::abs(pair.k1.eval(x)));
        support_err = std::max(support_err, std::abs(pair.k2.eval(x)));
        support_err = std::max(support_err, std::abs(pair.k1.deriv1(x)));
        support_err = std::max(support_err, std::abs(pair.k2.deriv1(x)));
    }
    const double tol = 1e-8;
    auto line = [&](const std::string& name, double err) {
        os << (err < tol ? "ok  " : "FAIL") << ' ' << name << " (err " << err << ")\n";
    };
    line("K1 unit mass on [-1,1]", std::abs(mass1 - 1.0));
    line("K2 unit mass on [0,1]", std::abs(mass2 - 1.0));
    line("K1 even", even_err);
    line("K2 odd", odd_err);
    line("support and boundary smoothness", support_err);

    KernelConstants kc = kernel_constants(pair);
    os << "K2'(0) = " << kc.k2p0 << '\n';
    os << "int (K1' K2)^2 = " << kc.i_k1p_k2_sq << '\n';
    os << "int (K1 K2')^2 = " << kc.i_k1_k2p_sq << '\n';
    os << "int y^2 K1 = " << kc.i_y2_k1 << '\n';
    os << "VS_psi = " << kc.vs_psi << '\n';
    os << "VS_tau = " << kc.vs_tau << '\n';

    MomentReport mr = check_moment_assumption(pair);
    os << (mr.satisfied ? "ok  " : "note") << " odd-moment condition: int_0^1 x K2 = "
       << mr.moment << (mr.satisfied ? "" : " (nonzero: slope/height keep only the O(h) rate)")
       << '\n';

    double h = o.h > 0.0 ? o.h : default_bandwidth(n, o.ppw > 0 ? o.ppw : 100);
    double lo = std::pow(n, -0.5) * std::pow(std::log(n), eta);
    double hi = c_upper * std::pow(n, -1.0 / 3.0);
    bool ok = lo <= h && h <= hi;
    os << (ok ? "ok  " : "FAIL") << " bandwidth range: " << lo << " <= h=" << h
       << " <= " << hi << " (n=" << n << ", eta=" << eta << ", C=" << c_upper << ")\n";
    emit(o, os.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"jump curve estimation with uniform confidence bands"};
    app.require_subcommand(1);
    // --h is the bandwidth, so help has no short flag
    app.set_help_flag("--help", "print help");
    CommonOpts o;
    SimulateOpts so;
    int max_curves = 2;
    double separation = 0.0;
    int checks_n = 128;
    double checks_eta = 1.0, checks_c = 1.0;

    CLI::App* est = app.add_subcommand("estimate", "estimate the jump curve of an image");
    est->set_help_flag("--help", "print help");
    add_input_flags(est, o);
    add_common_flags(est, o);

    CLI::App* bands = app.add_subcommand("bands", "point-wise and uniform confidence bands");
    bands->set_help_flag("--help", "print help");
    add_input_flags(bands, o);
    add_band_flags(bands, o);
    bands->add_option("--target", o.target, "curve the band covers")
        ->check(CLI::IsMember({"phi", "psi", "tau"}));
    add_common_flags(bands, o);

    CLI::App* multi = app.add_subcommand("multi", "multi-edge detection with Bonferroni bands");
    multi->set_help_flag("--help", "print help");
    add_input_flags(multi, o);
    add_band_flags(multi, o);
    multi->add_option("--max-curves", max_curves, "maximum number of curves");
    multi->add_option("--separation", separation, "minimum curve separation (default h)");
    add_common_flags(multi, o);

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study of coverage and widths");
    sim->set_help_flag("--help", "print help");
    sim->add_option("--scenario", so.scenario, "benchmark scene")
        ->check(CLI::IsMember({"phi1", "phi2", "multi"}));
    sim->add_option("--n", so.n_list, "grid side lengths")->delimiter(',');
    sim->add_option("--sigma", so.sigma_list, "noise levels sigma_tilde")->delimiter(',');
    sim->add_option("--alpha", so.alpha_list, "band levels")->delimiter(',');
    sim->add_option("--reps", so.reps, "Monte Carlo replications");
    sim->add_option("--study", so.study, "which study to run")
        ->check(CLI::IsMember({"coverage", "rmse", "bias", "tn"}));
    sim->add_option("--h", o.h, "bandwidth override")->check(CLI::PositiveNumber);
    sim->add_option("--tn", o.tn, "slack t_n: a number or 'auto'");
    sim->add_option("--bootstrap", so.bootstrap, "multiplier bootstrap replications");
    add_common_flags(sim, o);

    CLI::App* checks = app.add_subcommand("checks", "kernel assumption and bandwidth checks");
    checks->set_help_flag("--help", "print help");
    checks->add_option("--n", checks_n, "grid side length for the bandwidth check");
    checks->add_option("--h", o.h, "bandwidth to check")->check(CLI::PositiveNumber);
    checks->add_option("--points-per-window", o.ppw, "pixels per kernel window");
    checks->add_option("--eta", checks_eta, "log exponent of the lower bandwidth bound");
    checks->add_option("--c-upper", checks_c, "constant of the upper bandwidth bound");
    add_common_flags(checks, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (est->parsed())
            cmd_estimate(o);
        else if (bands->parsed())
            cmd_bands(o);
        else if (multi->parsed())
            cmd_multi(o, max_curves, separation);
        else if (sim->parsed())
            cmd_simulate(o, so);
        else
            cmd_checks(o, checks_n, checks_eta, checks_c);
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const argument_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
