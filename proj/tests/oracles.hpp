#pragma once

// Independent reference computations for the tests. Nothing here calls the
// closed-form 2x2 routines under test: eigenproblems, matrix square roots and
// least squares go through Eigen, probabilities through trigonometric closed
// forms.

#include <cmath>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "valleyqt/qstate.hpp"

namespace oracle {

using Mat = Eigen::Matrix2cd;

inline Mat to_eigen(const valleyqt::ComplexMatrix2& m) {
  Mat out;
  out << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
  return out;
}

inline valleyqt::ComplexMatrix2 from_eigen(const Mat& m) {
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

inline Mat sqrt_psd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  const Eigen::Vector2d roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

/// Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) via explicit matrix square roots.
inline double fidelity(const valleyqt::ComplexMatrix2& rho1, const valleyqt::ComplexMatrix2& rho2) {
  const Mat s = sqrt_psd(to_eigen(rho1));
  const Mat inner = s * to_eigen(rho2) * s;
  Eigen::SelfAdjointEigenSolver<Mat> es(inner);
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

inline Eigen::Vector2d eigenvalues(const valleyqt::ComplexMatrix2& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(to_eigen(m));
  return es.eigenvalues();
}

inline double entropy_bits(const valleyqt::ComplexMatrix2& m) {
  double s = 0.0;
  for (double l : eigenvalues(m))
    if (l > 0.0) s -= l * std::log2(l);
  return s;
}

/// [1 + sin(theta) cos(phi - 2 alpha)] / 2
inline double born_closed_form(double theta, double phi, double alpha) {
  return 0.5 * (1.0 + std::sin(theta) * std::cos(phi - 2.0 * alpha));
}

inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// QR least squares of values ~ a + b cos(2 alpha) + c sin(2 alpha).
inline Eigen::Vector3d trig_lstsq(std::span<const double> angles, std::span<const double> values) {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(angles.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(angles.size()));
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(2.0 * angles[k]);
    design(i, 2) = std::sin(2.0 * angles[k]);
    rhs(i) = values[k];
  }
  return design.colPivHouseholderQr().solve(rhs);
}

/// Uniform in the Bloch ball (mixed states) or on the sphere (pure = true).
inline valleyqt::ComplexMatrix2 random_state(std::mt19937_64& rng, bool pure = false) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Eigen::Vector3d r(normal(rng), normal(rng), normal(rng));
  r.normalize();
  if (!pure) r *= std::cbrt(unit(rng));
  using C = std::complex<double>;
  return {0.5 * (1.0 + r.z()), C(0.5 * r.x(), -0.5 * r.y()), C(0.5 * r.x(), 0.5 * r.y()),
          0.5 * (1.0 - r.z())};
}

/// Haar-ish random SU(2) element times a phase, built from Euler angles.
inline Mat random_unitary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * valleyqt::kPi);
  const double a = angle(rng), b = angle(rng) / 2.0, c = angle(rng), g = angle(rng);
  Mat u;
  const auto phase = [](double x) { return std::polar(1.0, x); };
  u << std::cos(b) * phase(-(a + c) / 2.0), -std::sin(b) * phase(-(a - c) / 2.0),
      std::sin(b) * phase((a - c) / 2.0), std::cos(b) * phase((a + c) / 2.0);
  return u * phase(g);
}

}  // namespace oracle
