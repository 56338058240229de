#include "valleyqt/qstate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "valleyqt/errors.hpp"

namespace valleyqt {

ComplexMatrix2 ComplexMatrix2::outer(const std::array<Complex, 2>& a,
                                     const std::array<Complex, 2>& b) {
  return {a[0] * std::conj(b[0]), a[0] * std::conj(b[1]),
          a[1] * std::conj(b[0]), a[1] * std::conj(b[1])};
}

ComplexMatrix2 ComplexMatrix2::adjoint() const {
  return {std::conj(e_[0]), std::conj(e_[2]), std::conj(e_[1]), std::conj(e_[3])};
}

double ComplexMatrix2::hermitian_defect() const {
  return max_abs_diff(*this, adjoint());
}

ComplexMatrix2& ComplexMatrix2::operator+=(const ComplexMatrix2& o) {
  for (std::size_t i = 0; i < 4; ++i) e_[i] += o.e_[i];
  return *this;
}

ComplexMatrix2& ComplexMatrix2::operator-=(const ComplexMatrix2& o) {
  for (std::size_t i = 0; i < 4; ++i) e_[i] -= o.e_[i];
  return *this;
}

ComplexMatrix2& ComplexMatrix2::operator*=(Complex s) {
  for (auto& x : e_) x *= s;
  return *this;
}

ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
          a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

double max_abs_diff(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  double worst = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

namespace {

std::array<Complex, 2> normalized(std::array<Complex, 2> v) {
  const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
  return {v[0] / n, v[1] / n};
}

// Eigenvector of [[a, b], [conj b, d]] for eigenvalue lambda, b != 0. Both
// candidates solve the system; the longer one is better conditioned.
std::array<Complex, 2> eigenvector(double a, Complex b, double d, double lambda) {
  const std::array<Complex, 2> first{b, lambda - a};
  const std::array<Complex, 2> second{lambda - d, std::conj(b)};
  const double n1 = std::norm(first[0]) + std::norm(first[1]);
  const double n2 = std::norm(second[0]) + std::norm(second[1]);
  return normalized(n1 >= n2 ? first : second);
}

}  // namespace

HermitianEigen hermitian_eigensystem(const ComplexMatrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const Complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));

  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), std::abs(b));

  HermitianEigen out;
  out.values = {mean - radius, mean + radius};
  if (std::abs(b) == 0.0) {
    const std::array<Complex, 2> e0{1.0, 0.0};
    const std::array<Complex, 2> e1{0.0, 1.0};
    out.vectors = (a <= d) ? std::array{e0, e1} : std::array{e1, e0};
    return out;
  }
  out.vectors = {eigenvector(a, b, d, out.values[0]), eigenvector(a, b, d, out.values[1])};
  return out;
}

std::array<double, 2> hermitian_eigenvalues(const ComplexMatrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const Complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), std::abs(b));
  return {mean - radius, mean + radius};
}

// ---------------------------------------------------------------------------

std::vector<std::string> DensityMatrix::violations(const ComplexMatrix2& m, double tol) {
  std::vector<std::string> out;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) {
        out.push_back("non-finite entry");
        return out;
      }

  if (const double defect = m.hermitian_defect(); defect > tol)
    out.push_back(fmt::format("not Hermitian (max |rho - rho^dagger| = {:.3g})", defect));
  if (const double err = std::abs(m.trace() - 1.0); err > tol)
    out.push_back(fmt::format("trace not 1 (|Tr rho - 1| = {:.3g})", err));
  if (const double low = hermitian_eigenvalues(m)[0]; low < -tol)
    out.push_back(fmt::format("not positive semidefinite (min eigenvalue {:.3g})", low));
  return out;
}

DensityMatrix::DensityMatrix(const ComplexMatrix2& m) : m_(m) {
  const auto problems = violations(m);
  if (!problems.empty())
    throw DomainError(fmt::format("invalid density matrix: {}", fmt::join(problems, "; ")));
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(ComplexMatrix2{0.5, 0.0, 0.0, 0.5});
}

DensityMatrix DensityMatrix::from_bloch(double x, double y, double z) {
  if (x * x + y * y + z * z > 1.0 + 2 * kStateTolerance)
    throw DomainError("Bloch vector longer than 1");
  return DensityMatrix(ComplexMatrix2{0.5 * (1.0 + z), Complex(0.5 * x, -0.5 * y),
                                      Complex(0.5 * x, 0.5 * y), 0.5 * (1.0 - z)});
}

std::array<double, 3> DensityMatrix::bloch_vector() const {
  const Complex off = m_(0, 1);
  return {2.0 * off.real(), -2.0 * off.imag(), (m_(0, 0) - m_(1, 1)).real()};
}

void PureStateAngles::validate() const {
  if (!(theta >= 0.0 && theta <= kPi))
    throw DomainError(fmt::format("theta = {} rad outside [0, pi]", theta));
  if (!(phi >= 0.0 && phi < 2.0 * kPi))
    throw DomainError(fmt::format("phi = {} rad outside [0, 2pi)", phi));
}

Observable::Observable(const ComplexMatrix2& m) : m_(m) {
  if (const double defect = m.hermitian_defect(); !(defect <= kStateTolerance))
    throw DomainError(fmt::format("observable not Hermitian (defect {:.3g})", defect));
}

// ---------------------------------------------------------------------------

DensityMatrix pure_state(const PureStateAngles& angles) {
  angles.validate();
  const double c = std::cos(0.5 * angles.theta);
  const double s = std::sin(0.5 * angles.theta);
  const Complex off = std::polar(c * s, -angles.phi);
  return DensityMatrix(ComplexMatrix2{c * c, off, std::conj(off), s * s});
}

double wrap_angle(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0.0) r += period;
  return r >= period ? 0.0 : r;
}

Observable equatorial_projector(double alpha) {
  const Complex off = std::polar(0.5, -2.0 * wrap_angle(alpha, kPi));
  return Observable(ComplexMatrix2{0.5, off, std::conj(off), 0.5});
}

Observable equatorial_observable(double alpha) {
  return Observable(2.0 * equatorial_projector(alpha).matrix() - ComplexMatrix2::identity());
}

double born_probability(const DensityMatrix& rho, double alpha) {
  return (equatorial_projector(alpha).matrix() * rho.matrix()).trace().real();
}

double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  const double overlap = (rho1.matrix() * rho2.matrix()).trace().real();
  const double det1 = std::max(0.0, rho1.matrix().determinant().real());
  const double det2 = std::max(0.0, rho2.matrix().determinant().real());
  const double f = std::sqrt(std::max(0.0, overlap + 2.0 * std::sqrt(det1 * det2)));
  return std::min(f, 1.0);
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double lambda : rho.eigenvalues()) {
    if (lambda > 0.0) s -= lambda * std::log2(lambda);
  }
  return std::max(0.0, s);
}

double expectation(const Observable& obs, const DensityMatrix& rho) {
  return (obs.matrix() * rho.matrix()).trace().real();
}

}  // namespace valleyqt
