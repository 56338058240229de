#pragma once

// Valley pseudospin precession in a longitudinal magnetic field.
//
// A linearly excited exciton (theta = pi/2, phi = 0) evolves as
// (e^{-i W t/2}|K> + e^{i W t/2}|K'>)/sqrt(2) with W = g muB B / hbar, while
// its coherence decays as e^{-t/T2*}. Integrating the emission over time,
//
//   I(alpha) / T1 = 1/2 + (T2*/2T1) [1 + (W T2*)^2]^{-1/2} cos(phit - 2 alpha),
//   phit = arctan(W T2*),
//
// i.e. the B = 0 pattern rotated by phit/2 with reduced contrast. The sign
// follows W: g B > 0 rotates the pattern towards positive alpha.

#include <cstddef>

#include "valleyqt/qstate.hpp"

namespace valleyqt {

namespace constants {
// CODATA 2018
inline constexpr double kBohrMagneton = 9.2740100783e-24;  // J/T
inline constexpr double kHbar = 1.054571817e-34;           // J s
}  // namespace constants

struct FieldParams {
  double b_field = 0.0;    // T, signed
  double g_factor = -3.7;
  double t1 = 1.85e-12;       // s
  double t2_star = 0.37e-12;  // s

  void validate() const;
};

struct PrecessionResult {
  double omega = 0.0;           // rad/s
  double phi_tilde = 0.0;       // arctan(omega t2*)
  double rotation_angle = 0.0;  // phi_tilde / 2
  double contrast_factor = 1.0; // [1 + (omega t2*)^2]^{-1/2}
};

struct EquatorialEvolution {
  double phase = 0.0;      // azimuthal angle of the Bloch vector, W t
  double coherence = 0.5;  // |rho01| = e^{-t/T2*} / 2
};

/// g muB B / hbar
double larmor_frequency(const FieldParams& params);

PrecessionResult precession(const FieldParams& params);

/// Throws DomainError for t < 0.
EquatorialEvolution evolve_equatorial_state(double t, const FieldParams& params);

/// Density matrix at time t: equal populations, rho01 = coherence e^{-i phase}.
DensityMatrix equatorial_state_at(double t, const FieldParams& params);

/// Closed-form time-integrated pattern, normalized so B = 0 gives
/// [1 + (T2*/T1) cos(2 alpha)] / 2.
double integrated_pl_pattern(double alpha, const FieldParams& params);

struct IntegralCheck {
  double closed_form = 0.0;
  double numeric_quadrature = 0.0;
  double abs_diff = 0.0;
};

/// Composite Simpson quadrature of
///   (1/T1) int_0^{20 max(T1, T2*)} [e^{-t/T1} + e^{-t/T2*} cos(W t - 2 alpha)] / 2 dt
/// with `n_steps` (>= 1000) subintervals, compared with integrated_pl_pattern.
IntegralCheck verify_integral(double alpha, const FieldParams& params,
                              std::size_t n_steps = 100000);

}  // namespace valleyqt
