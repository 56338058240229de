#include "valleyqt/uncertainty.hpp"

#include <algorithm>
#include <cmath>

#include "valleyqt/errors.hpp"

namespace valleyqt {

double shannon_entropy_of_measurement(const DensityMatrix& rho, double alpha) {
  return binary_entropy(std::clamp(born_probability(rho, alpha), 0.0, 1.0));
}

double max_overlap(const Observable& r, const Observable& q) {
  const auto er = hermitian_eigensystem(r.matrix());
  const auto eq = hermitian_eigensystem(q.matrix());
  double c = 0.0;
  for (const auto& u : er.vectors)
    for (const auto& v : eq.vectors)
      c = std::max(c, std::norm(std::conj(u[0]) * v[0] + std::conj(u[1]) * v[1]));
  return std::min(c, 1.0);
}

double entropic_bound(const ObservablePair& pair) {
  return std::max(0.0, -std::log2(max_overlap(pair.r(), pair.q())));
}

EntropicTerms entropic_uncertainty(const DensityMatrix& rho, const ObservablePair& pair) {
  return {shannon_entropy_of_measurement(rho, pair.r_angle) +
              shannon_entropy_of_measurement(rho, pair.q_angle),
          entropic_bound(pair)};
}

double variance(const Observable& obs, const DensityMatrix& rho) {
  const ComplexMatrix2& a = obs.matrix();
  const double mean = expectation(obs, rho);
  const double second = (a * a * rho.matrix()).trace().real();
  return std::max(0.0, second - mean * mean);
}

RobertsonTerms robertson_uncertainty(const DensityMatrix& rho, const ObservablePair& pair) {
  const Observable r = pair.r();
  const Observable q = pair.q();
  const ComplexMatrix2 commutator = r.matrix() * q.matrix() - q.matrix() * r.matrix();
  return {std::sqrt(variance(r, rho) * variance(q, rho)),
          0.5 * std::abs((commutator * rho.matrix()).trace())};
}

double relative_entropy_of_coherence(const DensityMatrix& rho, double alpha) {
  return std::max(0.0, shannon_entropy_of_measurement(rho, alpha) - von_neumann_entropy(rho));
}

UncertaintyReport uncertainty_report(const DensityMatrix& rho, const ObservablePair& pair) {
  const auto ent = entropic_uncertainty(rho, pair);
  const auto rob = robertson_uncertainty(rho, pair);
  UncertaintyReport report;
  report.alpha = pair.q_angle;
  report.entropy_sum = ent.entropy_sum;
  report.entropic_bound = ent.bound;
  report.deviation_product = rob.deviation_product;
  report.robertson_bound = rob.bound;
  report.coherence_r = relative_entropy_of_coherence(rho, pair.r_angle);
  report.coherence_q = relative_entropy_of_coherence(rho, pair.q_angle);
  const double s = von_neumann_entropy(rho);
  report.coherence_bound = ent.bound + 2.0 * s;
  report.coherence_floor = ent.bound - s;
  return report;
}

std::vector<UncertaintyReport> uncertainty_sweep(const DensityMatrix& rho, double r_angle,
                                                 std::span<const double> alpha_grid) {
  if (alpha_grid.empty()) throw DomainError("uncertainty sweep needs a nonempty grid");
  std::vector<UncertaintyReport> out;
  out.reserve(alpha_grid.size());
  for (double alpha : alpha_grid) out.push_back(uncertainty_report(rho, {r_angle, alpha}));
  return out;
}

}  // namespace valleyqt
