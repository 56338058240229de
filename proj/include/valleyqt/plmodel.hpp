#pragma once

// Forward model for polarization-resolved photoluminescence of a prepared
// valley qubit. Detected light has three parts: unpolarized thermal (I1),
// polarized thermal (I2) and PL (I3). Under a linear analyzer at angle alpha
//
//   I(alpha) = I3 [1 + v sin(theta) cos(phi - 2 alpha)] / 2 + I1 + I2
//
// with effective coherence visibility v = (T2*/T1) e^{-Gamma}. I2 enters as
// a constant offset independent of alpha. Circular analyzers see
//
//   I(sigma+-) = I1 + I2 + (1 +- cos(theta)) I3.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "valleyqt/qstate.hpp"

namespace valleyqt {

struct PhysicalParams {
  double t1 = 1.0;  // exciton population lifetime, s
  double t2 = std::numeric_limits<double>::infinity();  // valley coherence time, s
  double gamma = 0.0;  // off-diagonal suppression exponent
  double i1 = 0.0;     // unpolarized thermal weight
  double i2 = 0.0;     // polarized thermal weight
  double i3 = 1.0;     // PL weight
  std::optional<double> temperature_k;  // metadata only

  /// 1 / (1/T1 + 1/T2)
  double t2_star() const { return 1.0 / (1.0 / t1 + 1.0 / t2); }
  double coherence_ratio() const { return t2_star() / t1; }
  /// (T2*/T1) e^{-Gamma}
  double visibility() const;
  /// q_i = I_i / (I1 + I2 + I3)
  std::array<double, 3> fractions() const;
  double q3() const { return fractions()[2]; }

  void validate() const;

  /// T1 = 1, Gamma = 0 and T2 chosen so that T2*/T1 = v (T2 = inf for v = 1).
  static PhysicalParams from_visibility(double v, double i1 = 0.0, double i2 = 0.0,
                                        double i3 = 1.0);
};

struct NoiseSpec {
  enum class Kind { None, Poisson };
  Kind kind = Kind::None;
  /// Expected counts per unit model intensity.
  double exposure = 1e6;

  static NoiseSpec none() { return {}; }
  static NoiseSpec poisson(double exposure) { return {Kind::Poisson, exposure}; }
};

/// One angle-resolved scan plus the circular-basis pair.
struct PLScan {
  std::vector<double> angles;       // radians, strictly increasing
  std::vector<double> intensities;  // >= 0
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
  std::optional<PhysicalParams> params;
  std::optional<PureStateAngles> prepared;
  std::optional<std::uint64_t> seed;
  NoiseSpec noise;

  /// Throws DomainError on size mismatch, non-increasing angles or negative
  /// intensities.
  void validate() const;
};

struct CircularIntensities {
  double plus = 0.0;
  double minus = 0.0;
};

double ideal_intensity(const PureStateAngles& prepared, double alpha,
                       const PhysicalParams& params);

CircularIntensities circular_intensities(const PureStateAngles& prepared,
                                         const PhysicalParams& params);

/// eta_C = [I(s+) - I(s-)] / [I(s+) + I(s-)]
double circular_polarization(double sigma_plus, double sigma_minus);
double circular_polarization(const PLScan& scan);

/// eta_L = [I(X) - I(Y)] / [I(X) + I(Y)]
double linear_polarization(double i_x, double i_y);

/// (I_max - I_min) / (I_max + I_min) over the sampled points.
double scan_visibility(const PLScan& scan);

/// Deterministic for a fixed seed. With NoiseSpec::None the intensities are
/// exactly ideal_intensity; with Poisson each analyzer setting (and each
/// circular channel) draws counts with mean ideal * exposure.
PLScan synthesize_scan(const PureStateAngles& prepared, std::span<const double> angle_grid,
                       const PhysicalParams& params, const NoiseSpec& noise,
                       std::uint64_t seed);

/// Inclusive grid start, start+step, ... <= stop (degrees in, radians out).
std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg);

/// 0..360 degrees in 15 degree steps.
std::vector<double> default_angle_grid();

}  // namespace valleyqt
