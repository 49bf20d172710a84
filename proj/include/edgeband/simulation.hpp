#pragma once

#include "edgeband/confidence.hpp"
#include "edgeband/exec.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace edgeband {

enum class Scenario { phi1, phi2, multi };

std::string scenario_name(Scenario s);

struct StudySpec {
    Scenario scenario = Scenario::phi1;
    std::vector<int> n_list{128};
    std::vector<double> sigma_tilde_list{0.5};
    std::vector<double> alpha_list{0.05};
    int reps = 100;
    int n_bootstrap = 2000;
    double h_override = 0.0; // 0: default bandwidth rule
    // (n, sigma_tilde) -> t_n; cells without an entry use 1/sqrt(ln n)
    std::map<std::pair<int, double>, double> t_n_table;
    std::uint64_t seed = 0;
    void validate() const;
};

struct CellReport {
    Scenario scenario{};
    int n = 0;
    double sigma_tilde = 0.0;
    double alpha = 0.0;
    double t_n_used = 0.0;
    int reps_ok = 0;
    int reps_failed = 0;
    bool failed = false; // > 5% of replications errored
    double coverage_pointwise = 0.0;
    double width_pointwise = 0.0;
    double coverage_uniform = 0.0;
    double width_uniform = 0.0;
    long long unbounded_strips = 0; // excluded from the width averages
    std::vector<double> x_grid;
    std::vector<double> coverage_pw_by_x;
    std::vector<double> width_pw_by_x;
    std::vector<double> rmse_sd_by_x;
    std::vector<double> bias_sd_ratio_by_x;
    double runtime_seconds = 0.0;
};

struct StudyReport {
    StudySpec spec;
    std::vector<CellReport> cells;
    double runtime_seconds = 0.0;
};

StudyReport run_study(const StudySpec& spec, Exec exec = Exec::parallel);

// RMSE of the plug-in sd against the true-parameter sd, per x
StudyReport rmse_sd_study(const StudySpec& spec, Exec exec = Exec::parallel);

// |mean(phi_hat) - phi| / sd(phi_hat) per x
StudyReport bias_ratio_study(const StudySpec& spec, Exec exec = Exec::parallel);

struct QuantileCurves {
    int n = 0;
    double sigma_tilde = 0.0;
    std::vector<double> levels;
    std::vector<double> empirical; // quantiles of the sup statistic over reps
    std::vector<double> bootstrap; // quantiles of the pooled bootstrap sups
};

std::vector<QuantileCurves> tn_sensitivity(const StudySpec& spec, Exec exec = Exec::parallel);

// one row per cell and design point
void write_study_csv(const StudyReport& report, std::ostream& os);
// nested mirror of the CSV
void write_study_json(const StudyReport& report, std::ostream& os);
void write_quantile_csv(const std::vector<QuantileCurves>& curves, std::ostream& os);

} // namespace edgeband
