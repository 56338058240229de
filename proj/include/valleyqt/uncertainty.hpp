#pragma once

// Uncertainty relations and coherence for pairs of equatorial observables
// R = Pi_r - Pi_r^perp and Q = Pi_q - Pi_q^perp. All entropies are in bits.
//
//   entropic:   H(R) + H(Q) >= log2(1/c),  c = max_jk |<r_j|q_k>|^2
//   Robertson:  dR dQ >= |<[R, Q]>| / 2
//   coherence:  C(R) + C(Q) >= log2(1/c) + 2 S(rho),  C(M) = S(M(rho)) - S(rho)
//
// The coherence form holds for pure states only. For mixed states the valid
// floor is log2(1/c) - S(rho) (from H(R) + H(Q) >= log2(1/c) + S(rho)); the
// report carries both.

#include <span>
#include <vector>

#include "valleyqt/qstate.hpp"

namespace valleyqt {

struct ObservablePair {
  double r_angle = 0.0;
  double q_angle = 0.0;

  Observable r() const { return equatorial_observable(r_angle); }
  Observable q() const { return equatorial_observable(q_angle); }
};

struct UncertaintyReport {
  double alpha = 0.0;  // q_angle of the pair
  double entropy_sum = 0.0;
  double entropic_bound = 0.0;
  double deviation_product = 0.0;
  double robertson_bound = 0.0;
  double coherence_r = 0.0;
  double coherence_q = 0.0;
  double coherence_bound = 0.0;  // log2(1/c) + 2 S(rho)
  double coherence_floor = 0.0;  // log2(1/c) - S(rho)

  double entropic_slack() const { return entropy_sum - entropic_bound; }
  double robertson_slack() const { return deviation_product - robertson_bound; }
  double coherence_slack() const { return coherence_r + coherence_q - coherence_bound; }
  double coherence_floor_slack() const { return coherence_r + coherence_q - coherence_floor; }
};

/// H_b(p) with p = Tr(Pi_alpha rho).
double shannon_entropy_of_measurement(const DensityMatrix& rho, double alpha);

/// max_jk |<r_j|q_k>|^2 over eigenvectors of two Hermitian operators.
double max_overlap(const Observable& r, const Observable& q);

/// log2(1/c) for the pair, from explicit eigenvectors.
double entropic_bound(const ObservablePair& pair);

struct EntropicTerms {
  double entropy_sum = 0.0;
  double bound = 0.0;
};
EntropicTerms entropic_uncertainty(const DensityMatrix& rho, const ObservablePair& pair);

/// Tr(A^2 rho) - Tr(A rho)^2.
double variance(const Observable& obs, const DensityMatrix& rho);

struct RobertsonTerms {
  double deviation_product = 0.0;
  double bound = 0.0;  // |Tr([R, Q] rho)| / 2 via the explicit commutator
};
RobertsonTerms robertson_uncertainty(const DensityMatrix& rho, const ObservablePair& pair);

/// H_b(p(alpha)) - S(rho); never negative.
double relative_entropy_of_coherence(const DensityMatrix& rho, double alpha);

UncertaintyReport uncertainty_report(const DensityMatrix& rho, const ObservablePair& pair);

/// One report per grid point, in grid order. Throws DomainError on an empty
/// grid.
std::vector<UncertaintyReport> uncertainty_sweep(const DensityMatrix& rho, double r_angle,
                                                 std::span<const double> alpha_grid);

}  // namespace valleyqt
