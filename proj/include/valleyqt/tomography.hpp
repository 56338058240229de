#pragma once

// Density-matrix reconstruction from PL scans.
//
//  * Diagonal: eta_C = q3 cos(theta), so rho00 = (1 + eta_C/q3)/2.
//  * Off-diagonal: the equatorial scan is normalized against a theta = pi/2
//    reference scan,
//        p(alpha) = (r I(alpha) - Ical_min) / (Ical_max - Ical_min),
//        r = (Ical_max + Ical_min) / (I_max + I_min),
//    then fitted to p = a + b cos(2 alpha) + c sin(2 alpha). With the qstate
//    convention rho01 = (1/2) sin(theta) e^{-i phi} we get Re rho01 = b and
//    rho01 = b - i c.
//
//    The reference sets unit contrast. A full-visibility reference gives the
//    emitting state (coherence scaled by v); decay_compensation then recovers
//    the prepared state. A reference sharing the scan's visibility cancels v
//    already, so no compensation applies in that case.
//  * The raw matrix is projected onto the physical set when needed.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valleyqt/plmodel.hpp"
#include "valleyqt/qstate.hpp"

namespace valleyqt {

/// How I_min / I_max of a scan are estimated.
enum class ExtremaMethod {
  /// a -+ sqrt(b^2 + c^2) from the least-squares sinusoid. Unbiased under
  /// counting noise and independent of whether the grid hits the extrema.
  Fitted,
  /// Raw smallest / largest sample.
  Sampled,
};

struct Extrema {
  double min = 0.0;
  double max = 0.0;
};

Extrema scan_extrema(const PLScan& scan, ExtremaMethod method);

struct NormalizedScan {
  std::vector<double> angles;
  std::vector<double> probabilities;  // unclamped
  Extrema reference;                  // theta = pi/2 calibration extrema
  double ratio = 1.0;                 // r
  std::vector<std::string> warnings;
};

/// Normalize `scan` against a theta = pi/2 reference scan. Throws
/// CalibrationError when the reference extrema are degenerate or the minimum is
/// negative by more than 1% of the range (noise tolerance). Intensity
/// scale mismatches and a reference visibility below 1 are reported as
/// warnings.
NormalizedScan normalize_scan(const PLScan& scan, const PLScan& calibration,
                              ExtremaMethod method = ExtremaMethod::Fitted);

/// Normalization without a reference scan, equivalent to a full-visibility
/// reference. Imax + Imin = 2(I1 + I2) + I3 for every theta and the circular
/// pair sums to 2(I1 + I2 + I3), so the unit-contrast range is
/// I3 = (I+ + I-) - (Imax + Imin) and p = (I - (Imax + Imin - I3)/2) / I3.
/// Throws CalibrationError when that range is not positive.
NormalizedScan self_normalize_scan(const PLScan& scan,
                                   ExtremaMethod method = ExtremaMethod::Fitted);

/// value ~ offset + cos_coeff cos(2 alpha) + sin_coeff sin(2 alpha)
struct TrigFit {
  double offset = 0.0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares via the closed-form 3x3 normal equations. Throws
/// FitError when fewer than three distinct angles (mod pi) are present.
TrigFit fit_trig(std::span<const double> angles, std::span<const double> values);

struct EtaSample {
  double cos_theta = 0.0;
  double eta_c = 0.0;
};

struct DiagonalFit {
  double q3 = 1.0;
  double residual_rms = 0.0;

  /// (rho00, rho11) = ((1 + eta/q3)/2, (1 - eta/q3)/2), clamped to [0, 1].
  std::array<double, 2> retrieve(double eta_c) const;
};

/// Through-origin regression eta_C = q3 cos(theta): q3 = sum(xy) / sum(x^2).
DiagonalFit fit_diagonal(std::span<const EtaSample> samples);

struct OffDiagonal {
  double re = 0.0;  // Re rho01
  double im = 0.0;  // -Im rho01
};

struct OffDiagonalFit {
  OffDiagonal value;
  double offset = 0.5;
  double residual_rms = 0.0;
};

/// Fit the normalized probabilities; angles are folded by period pi first.
OffDiagonalFit fit_offdiagonal(const NormalizedScan& nscan);

/// Divide the fitted coherence by the visibility v in (0, 1].
OffDiagonal decay_compensation(OffDiagonal fitted, double visibility);

/// Nearest density matrix: clip negative eigenvalues and renormalize the
/// trace. Returns the input untouched when it is already physical. Throws
/// DomainError for non-Hermitian input (defect above 1e-9).
DensityMatrix physicality_projection(const ComplexMatrix2& raw);

struct TomographyResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed();
  ComplexMatrix2 raw_rho;
  double residual_rms = 0.0;
  std::optional<double> fidelity_to_target;
  bool projection_applied = false;
  /// 2|rho01| of the fit before any compensation, i.e. sin(theta) e^{-Gamma}.
  double visibility_estimate = 0.0;

  std::optional<double> q3;
  std::optional<double> compensated_visibility;
  std::vector<std::string> warnings;
};

/// Combine diagonal and off-diagonal retrievals. Diagonals not summing to 1
/// within 1e-9 are renormalized.
TomographyResult assemble_rho(std::array<double, 2> diag, OffDiagonal offdiag,
                              const std::optional<DensityMatrix>& target = std::nullopt,
                              double residual_rms = 0.0);

struct TomographyOptions {
  /// Falls back to the scan's params when absent.
  std::optional<double> q3;
  /// Report the prepared state by dividing the coherence by this visibility.
  std::optional<double> compensate_visibility;
  std::optional<PureStateAngles> target;
  ExtremaMethod extrema = ExtremaMethod::Fitted;
};

/// Full single-scan pipeline. `calibration` may be null, in which case
/// self_normalize_scan is used.
TomographyResult reconstruct(const PLScan& scan, const PLScan* calibration,
                             const TomographyOptions& options);

}  // namespace valleyqt
