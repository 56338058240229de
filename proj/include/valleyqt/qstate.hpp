#pragma once

// Exact 2x2 linear algebra for a single valley qubit.
//
// Basis convention: index 0 is |K>, index 1 is |K'>. A pure state with Bloch
// angles (theta, phi) is cos(theta/2)|K> + sin(theta/2) e^{i phi}|K'>, so its
// density matrix has rho01 = <K|rho|K'> = (1/2) sin(theta) e^{-i phi}. Every
// module that reads or writes off-diagonal elements uses this convention.
//
// Eigenvalues and eigenvectors come from the closed-form characteristic
// polynomial; no iterative solver is involved.

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace valleyqt {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Tolerance for the Hermitian / unit-trace / PSD checks on density matrices.
inline constexpr double kStateTolerance = 1e-12;

class ComplexMatrix2 {
 public:
  constexpr ComplexMatrix2() = default;
  constexpr ComplexMatrix2(Complex m00, Complex m01, Complex m10, Complex m11)
      : e_{m00, m01, m10, m11} {}

  static constexpr ComplexMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr ComplexMatrix2 zero() { return {}; }
  /// |a><b|
  static ComplexMatrix2 outer(const std::array<Complex, 2>& a,
                              const std::array<Complex, 2>& b);

  constexpr Complex& operator()(int row, int col) { return e_[2 * row + col]; }
  constexpr const Complex& operator()(int row, int col) const {
    return e_[2 * row + col];
  }

  ComplexMatrix2 adjoint() const;
  Complex trace() const { return e_[0] + e_[3]; }
  Complex determinant() const { return e_[0] * e_[3] - e_[1] * e_[2]; }
  /// max |A - A^dagger| over entries.
  double hermitian_defect() const;

  ComplexMatrix2& operator+=(const ComplexMatrix2& o);
  ComplexMatrix2& operator-=(const ComplexMatrix2& o);
  ComplexMatrix2& operator*=(Complex s);

  friend ComplexMatrix2 operator+(ComplexMatrix2 a, const ComplexMatrix2& b) { return a += b; }
  friend ComplexMatrix2 operator-(ComplexMatrix2 a, const ComplexMatrix2& b) { return a -= b; }
  friend ComplexMatrix2 operator*(ComplexMatrix2 a, Complex s) { return a *= s; }
  friend ComplexMatrix2 operator*(Complex s, ComplexMatrix2 a) { return a *= s; }
  friend ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b);

  friend bool operator==(const ComplexMatrix2&, const ComplexMatrix2&) = default;

 private:
  std::array<Complex, 4> e_{};
};

/// Largest entrywise |a - b|.
double max_abs_diff(const ComplexMatrix2& a, const ComplexMatrix2& b);

/// Eigen-decomposition of a Hermitian 2x2 matrix. Values ascending; vectors[i]
/// is the normalized eigenvector for values[i]. Only the Hermitian part of the
/// input is used.
struct HermitianEigen {
  std::array<double, 2> values;
  std::array<std::array<Complex, 2>, 2> vectors;
};

HermitianEigen hermitian_eigensystem(const ComplexMatrix2& m);
std::array<double, 2> hermitian_eigenvalues(const ComplexMatrix2& m);

/// Qubit state: Hermitian, unit trace, PSD (all within kStateTolerance).
class DensityMatrix {
 public:
  /// Throws DomainError naming every violated invariant.
  explicit DensityMatrix(const ComplexMatrix2& m);

  /// Empty when `m` is a valid density matrix.
  static std::vector<std::string> violations(const ComplexMatrix2& m,
                                             double tol = kStateTolerance);

  static DensityMatrix maximally_mixed();
  /// rho = (I + x sx + y sy + z sz)/2, requires |r| <= 1.
  static DensityMatrix from_bloch(double x, double y, double z);

  const ComplexMatrix2& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }
  /// Ascending.
  std::array<double, 2> eigenvalues() const { return hermitian_eigenvalues(m_); }
  std::array<double, 3> bloch_vector() const;

 private:
  ComplexMatrix2 m_;
};

struct PureStateAngles {
  double theta = 0.0;  // [0, pi]
  double phi = 0.0;    // [0, 2pi)

  void validate() const;
};

/// Hermitian operator.
class Observable {
 public:
  /// Throws DomainError when max|A - A^dagger| exceeds kStateTolerance.
  explicit Observable(const ComplexMatrix2& m);
  const ComplexMatrix2& matrix() const { return m_; }

 private:
  ComplexMatrix2 m_;
};

/// |psi><psi| for cos(theta/2)|K> + sin(theta/2)e^{i phi}|K'>.
DensityMatrix pure_state(const PureStateAngles& angles);

/// Projector onto (|K> + e^{i 2 alpha}|K'>)/sqrt(2). Period pi in alpha.
Observable equatorial_projector(double alpha);

/// Pi_alpha - Pi_alpha^perp = 2 Pi_alpha - I; squares to identity.
Observable equatorial_observable(double alpha);

/// Tr(Pi_alpha rho).
double born_probability(const DensityMatrix& rho, double alpha);

/// Root fidelity Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), using the 2x2 identity
/// F = sqrt(Tr(rho1 rho2) + 2 sqrt(det rho1 det rho2)).
double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// In bits.
double von_neumann_entropy(const DensityMatrix& rho);

/// -p log2 p - (1-p) log2(1-p), zero at the endpoints.
double binary_entropy(double p);

/// Re Tr(obs rho).
double expectation(const Observable& obs, const DensityMatrix& rho);

/// Wrap an angle into [0, period).
double wrap_angle(double angle, double period);

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace valleyqt
