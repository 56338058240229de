#include "valleyqt/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "valleyqt/errors.hpp"

namespace valleyqt {

void FieldParams::validate() const {
  if (!std::isfinite(b_field)) throw DomainError("magnetic field must be finite");
  if (!std::isfinite(g_factor)) throw DomainError("g factor must be finite");
  if (!(t1 > 0.0) || std::isinf(t1))
    throw DomainError(fmt::format("t1 must be positive, got {}", t1));
  if (!(t2_star > 0.0) || std::isinf(t2_star))
    throw DomainError(fmt::format("t2_star must be positive, got {}", t2_star));
}

double larmor_frequency(const FieldParams& params) {
  return params.g_factor * constants::kBohrMagneton * params.b_field / constants::kHbar;
}

PrecessionResult precession(const FieldParams& params) {
  params.validate();
  PrecessionResult out;
  out.omega = larmor_frequency(params);
  const double x = out.omega * params.t2_star;
  out.phi_tilde = std::atan(x);
  out.rotation_angle = 0.5 * out.phi_tilde;
  out.contrast_factor = 1.0 / std::sqrt(1.0 + x * x);
  return out;
}

EquatorialEvolution evolve_equatorial_state(double t, const FieldParams& params) {
  params.validate();
  if (!(t >= 0.0)) throw DomainError(fmt::format("time must be >= 0, got {}", t));
  return {larmor_frequency(params) * t, 0.5 * std::exp(-t / params.t2_star)};
}

DensityMatrix equatorial_state_at(double t, const FieldParams& params) {
  const auto e = evolve_equatorial_state(t, params);
  const Complex off = std::polar(e.coherence, -e.phase);
  return DensityMatrix(ComplexMatrix2{0.5, off, std::conj(off), 0.5});
}

double integrated_pl_pattern(double alpha, const FieldParams& params) {
  const auto p = precession(params);
  return 0.5 + 0.5 * (params.t2_star / params.t1) * p.contrast_factor *
                   std::cos(p.phi_tilde - 2.0 * alpha);
}

IntegralCheck verify_integral(double alpha, const FieldParams& params, std::size_t n_steps) {
  params.validate();
  if (n_steps < 1000) throw DomainError("verify_integral needs n_steps >= 1000");
  if (n_steps % 2 != 0) ++n_steps;

  const double omega = larmor_frequency(params);
  const auto integrand = [&](double t) {
    return 0.5 * (std::exp(-t / params.t1) +
                  std::exp(-t / params.t2_star) * std::cos(omega * t - 2.0 * alpha));
  };

  const double upper = 20.0 * std::max(params.t1, params.t2_star);
  const double h = upper / static_cast<double>(n_steps);
  double sum = integrand(0.0) + integrand(upper);
  for (std::size_t k = 1; k < n_steps; ++k)
    sum += (k % 2 == 1 ? 4.0 : 2.0) * integrand(h * static_cast<double>(k));

  IntegralCheck out;
  out.numeric_quadrature = sum * h / 3.0 / params.t1;
  out.closed_form = integrated_pl_pattern(alpha, params);
  out.abs_diff = std::abs(out.closed_form - out.numeric_quadrature);
  return out;
}

}  // namespace valleyqt
