#pragma once
#include "edgeband/image.hpp"

#include <cstdint>

namespace edgeband {

// benchmark scenes: shared smooth part m(x,y) = sin(y^2) cos{(x-1/2)^2} and
// jump height tau(x) = 3 sin^2(10x)/10 + 1/2 unless noted

// linear edge phi(x) = 1/4 + x/2
SceneSpec scene_linear(double sigma_tilde, std::uint64_t seed);

// parabolic edge phi(x) = -(x-1/2)^2 + 3/5
SceneSpec scene_parabolic(double sigma_tilde, std::uint64_t seed);

// two parallel parabolic edges phi_a = -(x-1/2)^2 + 21/50, phi_b = phi_a + 21/50,
// constant height 3/2; noise sd 0.1 matches sigma_tilde = 0.1 sqrt(0.8)
SceneSpec scene_two_edges(double sigma_tilde, std::uint64_t seed);

// true curve values for the single-edge scenes
double scene_linear_phi(double x);
double scene_parabolic_phi(double x);
double scene_psi_of(double dphi_dx);
double scene_linear_psi(double x);
double scene_parabolic_psi(double x);
double scene_tau(double x);

} // namespace edgeband
