#include "edgeband/scenes.hpp"

#include <cmath>

namespace edgeband {

namespace {

double smooth_part(double x, double y) {
    return std::sin(y * y) * std::cos((x - 0.5) * (x - 0.5));
}

} // namespace

double scene_tau(double x) {
    double s = std::sin(10.0 * x);
    return 0.3 * s * s + 0.5;
}

double scene_linear_phi(double x) { return 0.25 + 0.5 * x; }
double scene_parabolic_phi(double x) { return -(x - 0.5) * (x - 0.5) + 0.6; }

double scene_psi_of(double dphi_dx) { return std::atan(dphi_dx); }
double scene_linear_psi(double) { return std::atan(0.5); }
double scene_parabolic_psi(double x) { return std::atan(-2.0 * (x - 0.5)); }

SceneSpec scene_linear(double sigma_tilde, std::uint64_t seed) {
    SceneSpec s;
    s.smooth = smooth_part;
    s.curves.push_back({scene_linear_phi, scene_tau});
    s.noise = NoiseSpec{NoiseFamily::student_t, sigma_tilde, 10, seed};
    return s;
}

SceneSpec scene_parabolic(double sigma_tilde, std::uint64_t seed) {
    SceneSpec s;
    s.smooth = smooth_part;
    s.curves.push_back({scene_parabolic_phi, scene_tau});
    s.noise = NoiseSpec{NoiseFamily::student_t, sigma_tilde, 10, seed};
    return s;
}

SceneSpec scene_two_edges(double sigma_tilde, std::uint64_t seed) {
    SceneSpec s;
    s.smooth = smooth_part;
    auto tau_const = [](double) { return 1.5; };
    s.curves.push_back({[](double x) { return -(x - 0.5) * (x - 0.5) + 0.42; }, tau_const});
    s.curves.push_back({[](double x) { return -(x - 0.5) * (x - 0.5) + 0.84; }, tau_const});
    s.noise = NoiseSpec{NoiseFamily::student_t, sigma_tilde, 10, seed};
    return s;
}

} // namespace edgeband
