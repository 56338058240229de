#include "valleyqt/tomography.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "valleyqt/errors.hpp"

namespace valleyqt {

namespace {

constexpr double kHermitianInputTolerance = 1e-9;
constexpr double kNegativeMinimumTolerance = 0.01;  // relative to the reference range

std::size_t distinct_folded_angles(std::span<const double> angles) {
  std::vector<double> folded;
  folded.reserve(angles.size());
  for (double a : angles) {
    double f = wrap_angle(a, kPi);
    if (kPi - f < 1e-9) f = 0.0;
    folded.push_back(f);
  }
  std::sort(folded.begin(), folded.end());
  std::size_t distinct = folded.empty() ? 0 : 1;
  for (std::size_t k = 1; k < folded.size(); ++k)
    if (folded[k] - folded[k - 1] > 1e-9) ++distinct;
  return distinct;
}

double det3(const std::array<std::array<double, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

bool relative_mismatch(double a, double b) {
  if (a == b) return false;  // covers matching infinities
  if (!std::isfinite(a) || !std::isfinite(b)) return true;
  return std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<std::string> metadata_warnings(const PLScan& scan, const PLScan& calibration) {
  std::vector<std::string> out;
  if (calibration.prepared && std::abs(calibration.prepared->theta - kPi / 2) > 1e-9)
    out.push_back(fmt::format("calibration scan prepared at theta = {:.4g} deg, expected 90",
                              rad_to_deg(calibration.prepared->theta)));
  if (!scan.params || !calibration.params) return out;
  const auto& a = *scan.params;
  const auto& b = *calibration.params;
  if (b.visibility() < 1.0 - 1e-12)
    out.push_back(fmt::format(
        "calibration visibility {} < 1: coherences are reported relative to it", b.visibility()));
  const std::array<std::pair<const char*, std::pair<double, double>>, 3> fields{{
      {"i1", {a.i1, b.i1}},
      {"i2", {a.i2, b.i2}},
      {"i3", {a.i3, b.i3}},
  }};
  for (const auto& [name, values] : fields)
    if (relative_mismatch(values.first, values.second))
      out.push_back(fmt::format("calibration {} = {} differs from scan {} = {}", name,
                                values.second, name, values.first));
  if (a.temperature_k != b.temperature_k)
    out.push_back("calibration temperature label differs from scan");
  return out;
}

}  // namespace

TrigFit fit_trig(std::span<const double> angles, std::span<const double> values) {
  if (angles.size() != values.size())
    throw FitError("angle and value counts differ");
  if (distinct_folded_angles(angles) < 3)
    throw FitError("rank-deficient design: need >= 3 distinct angles modulo pi");

  std::array<std::array<double, 3>, 3> normal{};
  std::array<double, 3> rhs{};
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const std::array<double, 3> row{1.0, std::cos(2.0 * angles[k]), std::sin(2.0 * angles[k])};
    for (int i = 0; i < 3; ++i) {
      rhs[i] += row[i] * values[k];
      for (int j = 0; j < 3; ++j) normal[i][j] += row[i] * row[j];
    }
  }

  const double det = det3(normal);
  const double n = static_cast<double>(angles.size());
  if (!(std::abs(det) > 1e-12 * n * n * n))
    throw FitError("rank-deficient design: normal matrix is singular");

  // Cramer's rule.
  std::array<double, 3> coeffs{};
  for (int col = 0; col < 3; ++col) {
    auto replaced = normal;
    for (int row = 0; row < 3; ++row) replaced[row][col] = rhs[row];
    coeffs[col] = det3(replaced) / det;
  }

  TrigFit fit{coeffs[0], coeffs[1], coeffs[2], 0.0};
  double sq = 0.0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double model = fit.offset + fit.cos_coeff * std::cos(2.0 * angles[k]) +
                         fit.sin_coeff * std::sin(2.0 * angles[k]);
    sq += (values[k] - model) * (values[k] - model);
  }
  fit.residual_rms = std::sqrt(sq / n);
  return fit;
}

Extrema scan_extrema(const PLScan& scan, ExtremaMethod method) {
  if (scan.intensities.empty()) throw CalibrationError("empty scan");
  if (method == ExtremaMethod::Sampled) {
    const auto [lo, hi] = std::minmax_element(scan.intensities.begin(), scan.intensities.end());
    return {*lo, *hi};
  }
  const TrigFit fit = fit_trig(scan.angles, scan.intensities);
  const double amplitude = std::hypot(fit.cos_coeff, fit.sin_coeff);
  return {fit.offset - amplitude, fit.offset + amplitude};
}

NormalizedScan normalize_scan(const PLScan& scan, const PLScan& calibration,
                              ExtremaMethod method) {
  scan.validate();
  calibration.validate();

  const Extrema ref = scan_extrema(calibration, method);
  if (!(ref.max > ref.min))
    throw CalibrationError("degenerate calibration: I_max equals I_min");
  // A full-contrast reference has a true minimum near zero, so the fitted
  // minimum of a noisy scan may dip slightly below it.
  if (ref.min < -kNegativeMinimumTolerance * (ref.max - ref.min))
    throw CalibrationError(fmt::format("calibration minimum {} is negative", ref.min));

  const Extrema own = scan_extrema(scan, method);
  if (!(own.max + own.min > 0.0)) throw CalibrationError("scan has zero intensity");

  NormalizedScan out;
  out.angles = scan.angles;
  out.reference = ref;
  out.ratio = (ref.max + ref.min) / (own.max + own.min);
  out.probabilities.reserve(scan.intensities.size());
  for (double intensity : scan.intensities)
    out.probabilities.push_back((out.ratio * intensity - ref.min) / (ref.max - ref.min));
  out.warnings = metadata_warnings(scan, calibration);
  return out;
}

NormalizedScan self_normalize_scan(const PLScan& scan, ExtremaMethod method) {
  scan.validate();
  const Extrema own = scan_extrema(scan, method);
  const double sum = own.max + own.min;
  if (!(sum > 0.0)) throw CalibrationError("scan has zero intensity");
  const double range = scan.sigma_plus + scan.sigma_minus - sum;
  if (!(range > 0.0))
    throw CalibrationError(fmt::format(
        "self-calibration: circular pair sum {} does not exceed linear extrema sum {}",
        scan.sigma_plus + scan.sigma_minus, sum));

  NormalizedScan out;
  out.angles = scan.angles;
  out.ratio = 1.0;
  out.reference = {0.5 * (sum - range), 0.5 * (sum + range)};
  out.probabilities.reserve(scan.intensities.size());
  for (double intensity : scan.intensities)
    out.probabilities.push_back((intensity - out.reference.min) / range);
  return out;
}

std::array<double, 2> DiagonalFit::retrieve(double eta_c) const {
  const double z = std::clamp(eta_c / q3, -1.0, 1.0);
  return {0.5 * (1.0 + z), 0.5 * (1.0 - z)};
}

DiagonalFit fit_diagonal(std::span<const EtaSample> samples) {
  bool distinct = false;
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& s : samples) {
    if (std::abs(s.cos_theta - samples.front().cos_theta) > 1e-12) distinct = true;
    sxy += s.cos_theta * s.eta_c;
    sxx += s.cos_theta * s.cos_theta;
  }
  if (!distinct || !(sxx > 0.0))
    throw FitError("rank-deficient regression: need >= 2 distinct cos(theta) values");

  DiagonalFit fit;
  fit.q3 = sxy / sxx;
  if (!(fit.q3 > 0.0))
    throw CalibrationError(fmt::format("regressed q3 = {} is not positive", fit.q3));
  double sq = 0.0;
  for (const auto& s : samples) {
    const double r = s.eta_c - fit.q3 * s.cos_theta;
    sq += r * r;
  }
  fit.residual_rms = std::sqrt(sq / static_cast<double>(samples.size()));
  return fit;
}

OffDiagonalFit fit_offdiagonal(const NormalizedScan& nscan) {
  std::vector<double> folded;
  folded.reserve(nscan.angles.size());
  for (double a : nscan.angles) folded.push_back(wrap_angle(a, kPi));
  const TrigFit fit = fit_trig(folded, nscan.probabilities);
  return {{fit.cos_coeff, fit.sin_coeff}, fit.offset, fit.residual_rms};
}

OffDiagonal decay_compensation(OffDiagonal fitted, double visibility) {
  if (!(visibility > 0.0 && visibility <= 1.0))
    throw DomainError(fmt::format("visibility must lie in (0, 1], got {}", visibility));
  return {fitted.re / visibility, fitted.im / visibility};
}

DensityMatrix physicality_projection(const ComplexMatrix2& raw) {
  if (const double defect = raw.hermitian_defect(); !(defect <= kHermitianInputTolerance))
    throw DomainError(fmt::format("cannot project non-Hermitian matrix (defect {:.3g})", defect));
  if (DensityMatrix::violations(raw).empty()) return DensityMatrix(raw);

  const HermitianEigen eig = hermitian_eigensystem(raw);
  const double l0 = std::max(0.0, eig.values[0]);
  const double l1 = std::max(0.0, eig.values[1]);
  const double total = l0 + l1;
  if (!(total > 0.0)) throw DomainError("cannot project: no positive eigenvalue");

  ComplexMatrix2 out = (l0 / total) * ComplexMatrix2::outer(eig.vectors[0], eig.vectors[0]) +
                       (l1 / total) * ComplexMatrix2::outer(eig.vectors[1], eig.vectors[1]);
  out(0, 0) = out(0, 0).real();
  out(1, 1) = out(1, 1).real();
  out(1, 0) = std::conj(out(0, 1));
  return DensityMatrix(out);
}

TomographyResult assemble_rho(std::array<double, 2> diag, OffDiagonal offdiag,
                              const std::optional<DensityMatrix>& target, double residual_rms) {
  const double sum = diag[0] + diag[1];
  if (!(sum > 0.0)) throw DomainError("diagonal elements sum to a non-positive value");
  if (std::abs(sum - 1.0) > 1e-9) {
    diag[0] /= sum;
    diag[1] /= sum;
  }

  const Complex off(offdiag.re, -offdiag.im);
  TomographyResult result;
  result.raw_rho = ComplexMatrix2{diag[0], off, std::conj(off), diag[1]};
  result.projection_applied = !DensityMatrix::violations(result.raw_rho).empty();
  result.rho = result.projection_applied ? physicality_projection(result.raw_rho)
                                         : DensityMatrix(result.raw_rho);
  result.residual_rms = residual_rms;
  result.visibility_estimate = 2.0 * std::hypot(offdiag.re, offdiag.im);
  if (target) result.fidelity_to_target = fidelity(result.rho, *target);
  return result;
}

TomographyResult reconstruct(const PLScan& scan, const PLScan* calibration,
                             const TomographyOptions& options) {
  scan.validate();
  double q3 = 0.0;
  if (options.q3)
    q3 = *options.q3;
  else if (scan.params)
    q3 = scan.params->q3();
  else
    throw ConfigError("q3 is required: pass it explicitly or provide scan params");
  if (!(q3 > 0.0 && q3 <= 1.0))
    throw CalibrationError(fmt::format("q3 must lie in (0, 1], got {}", q3));

  const DiagonalFit diagonal{q3, 0.0};
  const auto diag = diagonal.retrieve(circular_polarization(scan));

  NormalizedScan nscan = calibration ? normalize_scan(scan, *calibration, options.extrema)
                                     : self_normalize_scan(scan, options.extrema);

  const OffDiagonalFit fit = fit_offdiagonal(nscan);
  OffDiagonal offdiag = fit.value;
  if (options.compensate_visibility)
    offdiag = decay_compensation(offdiag, *options.compensate_visibility);

  std::optional<DensityMatrix> target;
  if (options.target) target = pure_state(*options.target);

  TomographyResult result = assemble_rho(diag, offdiag, target, fit.residual_rms);
  result.visibility_estimate = 2.0 * std::hypot(fit.value.re, fit.value.im);
  result.q3 = q3;
  result.compensated_visibility = options.compensate_visibility;
  result.warnings = std::move(nscan.warnings);
  return result;
}

}  // namespace valleyqt
