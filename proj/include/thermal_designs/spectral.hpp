#pragma once

#include <string>

#include "thermal_designs/hermitian.hpp"

namespace thermal_designs {

// Eigen-decomposition H = V diag(E) V^dagger, energies ascending and column m
// of `vectors` the eigenvector for energies[m].
struct Spectrum {
    RealVector energies;
    ComplexMatrix vectors;

    Eigen::Index dim() const { return energies.size(); }
    double gap() const { return dim() > 1 ? energies(1) - energies(0) : 0.0; }
};

struct GibbsWeights {
    double beta = 0.0;
    RealVector probs;   // nonincreasing, sums to 1
    double log_z = 0.0; // log tr exp(-beta H)
};

// Deterministic dense eigensolver. `provenance` is appended to the message of
// the NumericFailure thrown on non-convergence (e.g. "seed=7 sample=12").
Spectrum eig_hermitian(const HermitianMatrix& h, const std::string& provenance = {});

// Energies only, for callers that never need eigenvectors.
RealVector eigenvalues_hermitian(const HermitianMatrix& h, const std::string& provenance = {});

// max |H - V diag(E) V^dagger| / max |H|.
double reconstruction_residual(const HermitianMatrix& h, const Spectrum& s);

// Ground-state-shifted Boltzmann weights; safe for beta up to ~1e300.
GibbsWeights gibbs_weights(const RealVector& energies, double beta);
inline GibbsWeights gibbs_weights(const Spectrum& s, double beta) { return gibbs_weights(s.energies, beta); }

// V diag(p) V^dagger.
HermitianMatrix thermal_state(const Spectrum& s, double beta);
HermitianMatrix thermal_state(const Spectrum& s, const GibbsWeights& w);

// tr rho^m from the weights; exactly 1 for m = 1.
double purity_m(const RealVector& probs, int m);
double purity_m(const Spectrum& s, double beta, int m);

// <H>_beta = sum_m p_m E_m.
double internal_energy(const RealVector& energies, double beta);
inline double internal_energy(const Spectrum& s, double beta) { return internal_energy(s.energies, beta); }

// d/dbeta tr rho^m = m Z(m beta)/Z(beta)^m (<H>_beta - <H>_{m beta}); the
// partition-function ratio is evaluated as exp(log Z(m beta) - m log Z(beta)).
double purity_beta_derivative(const RealVector& energies, double beta, int m);
inline double purity_beta_derivative(const Spectrum& s, double beta, int m) {
    return purity_beta_derivative(s.energies, beta, m);
}

// log p_0(beta) = -log sum_j exp(-beta (E_j - E_0)).
double log_ground_probability(const RealVector& energies, double beta);

}  // namespace thermal_designs
