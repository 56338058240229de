#include "valleyqt/plmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "valleyqt/errors.hpp"

namespace valleyqt {

double PhysicalParams::visibility() const {
  return coherence_ratio() * std::exp(-gamma);
}

std::array<double, 3> PhysicalParams::fractions() const {
  const double total = i1 + i2 + i3;
  return {i1 / total, i2 / total, i3 / total};
}

void PhysicalParams::validate() const {
  if (!(t1 > 0.0) || std::isinf(t1))
    throw DomainError(fmt::format("t1 must be positive and finite, got {}", t1));
  if (!(t2 > 0.0)) throw DomainError(fmt::format("t2 must be positive, got {}", t2));
  if (!(gamma >= 0.0) || std::isinf(gamma))
    throw DomainError(fmt::format("gamma must be >= 0, got {}", gamma));
  if (!(i1 >= 0.0 && i2 >= 0.0 && i3 >= 0.0))
    throw DomainError("intensity weights i1, i2, i3 must be >= 0");
  if (!(i1 + i2 + i3 > 0.0) || std::isinf(i1 + i2 + i3))
    throw DomainError("intensity weights must have a positive finite sum");
}

PhysicalParams PhysicalParams::from_visibility(double v, double i1, double i2, double i3) {
  if (!(v > 0.0 && v <= 1.0))
    throw DomainError(fmt::format("visibility must lie in (0, 1], got {}", v));
  PhysicalParams p;
  p.t1 = 1.0;
  p.t2 = v < 1.0 ? v / (1.0 - v) : std::numeric_limits<double>::infinity();
  p.i1 = i1;
  p.i2 = i2;
  p.i3 = i3;
  p.validate();
  return p;
}

void PLScan::validate() const {
  if (angles.size() != intensities.size())
    throw DomainError(fmt::format("scan has {} angles but {} intensities", angles.size(),
                                  intensities.size()));
  for (std::size_t k = 0; k < angles.size(); ++k) {
    if (!std::isfinite(angles[k])) throw DomainError("non-finite scan angle");
    if (k > 0 && !(angles[k] > angles[k - 1]))
      throw DomainError("scan angles must be strictly increasing");
    if (!(intensities[k] >= 0.0) || std::isinf(intensities[k]))
      throw DomainError(fmt::format("intensity #{} is negative or non-finite", k));
  }
  if (!(sigma_plus >= 0.0 && sigma_minus >= 0.0))
    throw DomainError("circular intensities must be >= 0");
  if (params) params->validate();
  if (prepared) prepared->validate();
}

double ideal_intensity(const PureStateAngles& prepared, double alpha,
                       const PhysicalParams& params) {
  const double coherence =
      params.visibility() * std::sin(prepared.theta) * std::cos(prepared.phi - 2.0 * alpha);
  return params.i3 * 0.5 * (1.0 + coherence) + params.i1 + params.i2;
}

CircularIntensities circular_intensities(const PureStateAngles& prepared,
                                         const PhysicalParams& params) {
  const double floor = params.i1 + params.i2;
  const double c = std::cos(prepared.theta);
  return {floor + (1.0 + c) * params.i3, floor + (1.0 - c) * params.i3};
}

double circular_polarization(double sigma_plus, double sigma_minus) {
  const double total = sigma_plus + sigma_minus;
  if (!(total > 0.0)) throw DomainError("circular polarization of zero total intensity");
  return (sigma_plus - sigma_minus) / total;
}

double circular_polarization(const PLScan& scan) {
  return circular_polarization(scan.sigma_plus, scan.sigma_minus);
}

double linear_polarization(double i_x, double i_y) {
  const double total = i_x + i_y;
  if (!(total > 0.0)) throw DomainError("linear polarization of zero total intensity");
  return (i_x - i_y) / total;
}

double scan_visibility(const PLScan& scan) {
  if (scan.intensities.empty()) throw DomainError("empty scan");
  const auto [lo, hi] = std::minmax_element(scan.intensities.begin(), scan.intensities.end());
  if (!(*hi + *lo > 0.0)) throw DomainError("scan visibility of zero intensity");
  return (*hi - *lo) / (*hi + *lo);
}

namespace {

double draw_counts(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

}  // namespace

PLScan synthesize_scan(const PureStateAngles& prepared, std::span<const double> angle_grid,
                       const PhysicalParams& params, const NoiseSpec& noise,
                       std::uint64_t seed) {
  prepared.validate();
  params.validate();
  if (angle_grid.size() < 4)
    throw DomainError(fmt::format("angle grid needs >= 4 points, got {}", angle_grid.size()));
  if (!(noise.exposure >= 0.0))
    throw DomainError(fmt::format("exposure scale must be >= 0, got {}", noise.exposure));

  PLScan scan;
  scan.angles.assign(angle_grid.begin(), angle_grid.end());
  scan.params = params;
  scan.prepared = prepared;
  scan.seed = seed;
  scan.noise = noise;

  scan.intensities.reserve(scan.angles.size());
  for (double alpha : scan.angles)
    scan.intensities.push_back(ideal_intensity(prepared, alpha, params));
  const auto circ = circular_intensities(prepared, params);
  scan.sigma_plus = circ.plus;
  scan.sigma_minus = circ.minus;

  if (noise.kind == NoiseSpec::Kind::Poisson) {
    std::mt19937_64 rng(seed);
    for (double& value : scan.intensities) value = draw_counts(rng, value * noise.exposure);
    scan.sigma_plus = draw_counts(rng, scan.sigma_plus * noise.exposure);
    scan.sigma_minus = draw_counts(rng, scan.sigma_minus * noise.exposure);
  }
  scan.validate();
  return scan;
}

std::vector<double> angle_grid_deg(double start_deg, double stop_deg, double step_deg) {
  if (!(step_deg > 0.0)) throw DomainError("grid step must be positive");
  if (!(stop_deg >= start_deg)) throw DomainError("grid stop must be >= start");
  const auto count =
      static_cast<std::size_t>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(count);
  for (std::size_t k = 0; k < count; ++k)
    grid.push_back(deg_to_rad(start_deg + static_cast<double>(k) * step_deg));
  return grid;
}

std::vector<double> default_angle_grid() { return angle_grid_deg(0.0, 360.0, 15.0); }

}  // namespace valleyqt
