#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "edgeband/confidence.hpp"
#include "edgeband/contrast.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/estimator.hpp"
#include "edgeband/image.hpp"
#include "edgeband/kernels.hpp"
#include "edgeband/numerics.hpp"
#include "edgeband/scenes.hpp"
#include "edgeband/variance.hpp"

#include <cmath>

using namespace edgeband;

namespace {

struct Fixture {
    KernelPair pair = make_default_kernels();
    ImageGrid grid;
    EdgeEstimate est;
    VarianceComponents comp;
    double sigma = 0.0;

    explicit Fixture(int n = 64, double sigma_tilde = 0.5, std::uint64_t seed = 5) {
        SceneSpec s = scene_linear(sigma_tilde, seed);
        grid = generate(s, n);
        sigma = estimate_sigma(grid);
        EstimationConfig cfg;
        est = estimate_curve_tracked(grid, pair, cfg, TrackConfig{}, sigma);
        comp = variance_components(est, pair, sigma);
    }
};

} // namespace

TEST_CASE("band config validation and t_n resolution") {
    BandConfig ok;
    ok.validate();
    BandConfig bad = ok;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = ok;
    bad.n_bootstrap = 0;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad.n_bootstrap = 499; // spec floor
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = ok;
    bad.multiplier_scale = std::nan("");
    CHECK_THROWS_AS(bad.validate(), config_error);

    BandConfig fixed;
    fixed.tn_policy = TnPolicy::fixed;
    fixed.tn_fixed = 0.37;
    CHECK(fixed.resolve_tn(128.0) == 0.37);
    BandConfig aut;
    CHECK(aut.resolve_tn(128.0) == doctest::Approx(1.0 / std::sqrt(std::log(128.0))).epsilon(1e-14));
}

TEST_CASE("pointwise interval width follows the plug-in formula") {
    Fixture f;
    PointwiseCi ci05 = pointwise_ci(f.est, f.comp, 0.05);
    PointwiseCi ci01 = pointwise_ci(f.est, f.comp, 0.01);
    REQUIRE(ci05.lower.size() == f.est.x_grid.size());
    double r = normal_quantile(0.995) / normal_quantile(0.975);
    for (std::size_t i = 0; i < ci05.lower.size(); ++i) {
        if (ci05.unbounded[i]) continue;
        double half = f.comp.sigma_hat * std::sqrt(f.comp.vs_phi[i]) * normal_quantile(0.975) /
                      (f.est.n_eff() * std::abs(f.comp.vh_phi[i]));
        CHECK(ci05.upper[i] - f.est.phi_hat[i] == doctest::Approx(half).epsilon(1e-12));
        CHECK(f.est.phi_hat[i] - ci05.lower[i] == doctest::Approx(half).epsilon(1e-12));
        // width ratio across levels is the normal quantile ratio, exactly
        double w01 = ci01.upper[i] - ci01.lower[i], w05 = ci05.upper[i] - ci05.lower[i];
        CHECK(w01 / w05 == doctest::Approx(r).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pointwise_ci(f.est, f.comp, 0.0), config_error);
}

TEST_CASE("degenerate strips give unbounded intervals") {
    KernelPair pair = make_default_kernels();
    EdgeEstimate est;
    est.x_grid = {0.4, 0.6};
    est.phi_hat = {0.5, 0.5};
    est.psi_hat = {0.0, 0.0};
    est.tau_hat = {1.0, 0.0}; // second strip has no contrast
    est.contrast_at_max = est.tau_hat;
    est.h = 0.1;
    est.n1 = est.n2 = 64;
    VarianceComponents comp = variance_components(est, pair, 0.3);
    PointwiseCi ci = pointwise_ci(est, comp, 0.05);
    CHECK(!ci.unbounded[0]);
    CHECK(ci.unbounded[1] == 1);
    CHECK(std::isinf(ci.lower[1]));
    CHECK(std::isinf(ci.upper[1]));
}

TEST_CASE("zero multipliers collapse the bootstrap") {
    Fixture f;
    BandConfig cfg;
    cfg.n_bootstrap = 500;
    cfg.multiplier_scale = 0.0;
    SupQuantileResult r = bootstrap_sup_quantile(f.grid, f.est, f.comp, cfg, f.pair);
    REQUIRE(static_cast<int>(r.sup_samples.size()) == 500);
    for (double s : r.sup_samples) CHECK(s == 0.0);
    CHECK(r.quantile == 0.0);
}

TEST_CASE("bootstrap sup scales with |multiplier| and replays by seed") {
    Fixture f;
    BandConfig a;
    a.n_bootstrap = 503; // not a multiple of the block size on purpose
    a.seed = 33;
    SupQuantileResult ra = bootstrap_sup_quantile(f.grid, f.est, f.comp, a, f.pair);
    REQUIRE(ra.sup_samples.size() == 503);

    BandConfig b = a;
    b.multiplier_scale = 2.0;
    SupQuantileResult rb = bootstrap_sup_quantile(f.grid, f.est, f.comp, b, f.pair);
    for (std::size_t i = 0; i < 503; ++i)
        CHECK(rb.sup_samples[i] == doctest::Approx(2.0 * ra.sup_samples[i]).epsilon(1e-13));

    SupQuantileResult rc = bootstrap_sup_quantile(f.grid, f.est, f.comp, a, f.pair);
    CHECK(rc.sup_samples == ra.sup_samples);

    BandConfig d = a;
    d.seed = 34;
    SupQuantileResult rd = bootstrap_sup_quantile(f.grid, f.est, f.comp, d, f.pair);
    CHECK(rd.sup_samples != ra.sup_samples);

    // quantile is the inverted-cdf empirical quantile of the sup samples
    CHECK(ra.quantile == empirical_quantile(ra.sup_samples, 1.0 - a.alpha));

    // serial and parallel bootstrap agree bitwise
    SupQuantileResult rs = bootstrap_sup_quantile(f.grid, f.est, f.comp, a, f.pair, Exec::serial);
    CHECK(rs.sup_samples == ra.sup_samples);
}

TEST_CASE("bootstrap process has the standardized variance") {
    // single strip: sup |Z| = |Z|, so mean(sup^2) estimates Var Z, which by
    // construction equals the squared norm of the scaled score row
    KernelPair pair = make_default_kernels();
    ImageGrid grid = generate(scene_linear(0.5, 77), 128);
    EdgeEstimate est;
    est.x_grid = {0.5};
    est.phi_hat = {scene_linear_phi(0.5)};
    est.psi_hat = {scene_linear_psi(0.5)};
    est.tau_hat = {scene_tau(0.5)};
    est.contrast_at_max = est.tau_hat;
    est.h = 0.1;
    est.n1 = est.n2 = 128;
    VarianceComponents comp = variance_components(est, pair, 0.4);

    ContrastQuery q{0.5, est.phi_hat[0], est.psi_hat[0], est.h};
    ScoreWeights sw = score_weights(grid, pair, q, ScoreKind::location);
    double scale = 1.0 / (est.n_eff() * est.h * std::sqrt(comp.vs_phi[0]));
    double predicted = 0.0;
    for (double w : sw.weight) predicted += (scale * w) * (scale * w);
    // Riemann sum of the score kernel over the window approximates VS, so the
    // standardized variance is close to one
    CHECK(predicted == doctest::Approx(1.0).epsilon(0.12));

    BandConfig cfg;
    cfg.n_bootstrap = 4000;
    cfg.seed = 99;
    SupQuantileResult r = bootstrap_sup_quantile(grid, est, comp, cfg, pair);
    double m2 = 0.0;
    for (double s : r.sup_samples) m2 += s * s;
    m2 /= r.sup_samples.size();
    CHECK(m2 == doctest::Approx(predicted).epsilon(0.08));
}

TEST_CASE("uniform band nests the pointwise band and is monotone in alpha") {
    Fixture f;
    BandConfig cfg;
    cfg.n_bootstrap = 640;
    cfg.seed = 4;
    BandResult b05 = uniform_band(f.grid, f.est, f.comp, cfg, f.pair);
    BandConfig cfg01 = cfg;
    cfg01.alpha = 0.01;
    BandResult b01 = uniform_band(f.grid, f.est, f.comp, cfg01, f.pair);
    REQUIRE(b05.center.size() == f.est.x_grid.size());
    CHECK(b05.alpha == 0.05);
    CHECK(b05.t_n_used == doctest::Approx(cfg.resolve_tn(f.est.n_eff())).epsilon(1e-14));
    CHECK(b05.quantile_boot > 0.0);
    for (std::size_t i = 0; i < b05.center.size(); ++i) {
        CHECK(b05.center[i] == f.est.phi_hat[i]);
        if (b05.unbounded[i]) continue;
        // uniform contains pointwise
        CHECK(b05.lower[i] <= b05.pointwise_lower[i] + 1e-12);
        CHECK(b05.upper[i] >= b05.pointwise_upper[i] - 1e-12);
        // smaller alpha widens (same seed, same sup samples)
        CHECK(b01.lower[i] <= b05.lower[i] + 1e-12);
        CHECK(b01.upper[i] >= b05.upper[i] - 1e-12);
        // half width follows the formula
        double half = (1.0 + b05.t_n_used) * f.comp.sigma_hat * std::sqrt(f.comp.vs_phi[i]) *
                      b05.quantile_boot / (f.est.n_eff() * std::abs(f.comp.vh_phi[i]));
        CHECK(b05.upper[i] - b05.center[i] == doctest::Approx(half).epsilon(1e-12));
    }
}

TEST_CASE("slope and height bands use their own normalizations") {
    Fixture f;
    BandConfig cfg;
    cfg.n_bootstrap = 512;
    cfg.seed = 12;
    cfg.target = BandTarget::psi;
    BandResult bp = uniform_band(f.grid, f.est, f.comp, cfg, f.pair);
    cfg.target = BandTarget::tau;
    BandResult bt = uniform_band(f.grid, f.est, f.comp, cfg, f.pair);
    for (std::size_t i = 0; i < bp.center.size(); ++i) {
        CHECK(bp.center[i] == f.est.psi_hat[i]);
        CHECK(bt.center[i] == f.est.tau_hat[i]);
        if (!bp.unbounded[i]) {
            double half = (1.0 + bp.t_n_used) * f.comp.sigma_hat * std::sqrt(f.comp.vs_psi) *
                          bp.quantile_boot / (f.est.n_eff() * f.est.h * std::abs(f.comp.vh_psi[i]));
            CHECK(bp.upper[i] - bp.center[i] == doctest::Approx(half).epsilon(1e-12));
        }
        if (!bt.unbounded[i]) {
            double half = (1.0 + bt.t_n_used) * f.comp.sigma_hat * std::sqrt(f.comp.vs_tau) *
                          bt.quantile_boot / (f.est.n_eff() * f.est.h);
            CHECK(bt.upper[i] - bt.center[i] == doctest::Approx(half).epsilon(1e-12));
        }
    }
}

TEST_CASE("sup statistic is zero at the truth and tracks a shift") {
    Fixture f;
    // feed the estimate itself as the reference curve
    Pchip self(f.est.x_grid, f.est.phi_hat);
    CHECK(sup_statistic(f.est, f.comp, [&](double x) { return self(x); }) ==
          doctest::Approx(0.0).epsilon(1e-12));
    double delta = 0.01;
    double got = sup_statistic(f.est, f.comp, [&](double x) { return self(x) + delta; });
    double want = 0.0;
    for (std::size_t i = 0; i < f.est.x_grid.size(); ++i)
        want = std::max(want, f.est.n_eff() * std::abs(f.comp.vh_phi[i]) * delta /
                                  (f.comp.sigma_hat * std::sqrt(f.comp.vs_phi[i])));
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
}
