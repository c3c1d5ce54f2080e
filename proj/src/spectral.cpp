#include "thermal_designs/spectral.hpp"

#include <cmath>

#include "thermal_designs/errors.hpp"

namespace thermal_designs {

namespace {

void check_beta(double beta) {
    if (!std::isfinite(beta)) throw InvalidArgument("inverse temperature must be finite");
    if (beta < 0.0) throw InvalidArgument("inverse temperature must be >= 0, got " + std::to_string(beta));
}

std::string with_provenance(std::string msg, const std::string& provenance) {
    if (!provenance.empty()) msg += " (" + provenance + ")";
    return msg;
}

}  // namespace

Spectrum eig_hermitian(const HermitianMatrix& h, const std::string& provenance) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericFailure(with_provenance("Hermitian eigensolver did not converge", provenance));
    // Eigen already returns ascending eigenvalues.
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

RealVector eigenvalues_hermitian(const HermitianMatrix& h, const std::string& provenance) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericFailure(with_provenance("Hermitian eigensolver did not converge", provenance));
    return solver.eigenvalues();
}

double reconstruction_residual(const HermitianMatrix& h, const Spectrum& s) {
    const ComplexMatrix rebuilt = s.vectors * s.energies.cast<Complex>().asDiagonal() * s.vectors.adjoint();
    const double scale = h.matrix().cwiseAbs().maxCoeff();
    const double err = (h.matrix() - rebuilt).cwiseAbs().maxCoeff();
    return scale > 0.0 ? err / scale : err;
}

GibbsWeights gibbs_weights(const RealVector& energies, double beta) {
    check_beta(beta);
    if (energies.size() < 1) throw InvalidArgument("gibbs_weights: empty spectrum");
    const double e0 = energies(0);
    GibbsWeights w;
    w.beta = beta;
    w.probs.resize(energies.size());
    double z_shifted = 0.0;
    for (Eigen::Index m = 0; m < energies.size(); ++m) {
        w.probs(m) = std::exp(-beta * (energies(m) - e0));
        z_shifted += w.probs(m);
    }
    w.probs /= z_shifted;
    w.log_z = -beta * e0 + std::log(z_shifted);
    return w;
}

HermitianMatrix thermal_state(const Spectrum& s, const GibbsWeights& w) {
    if (w.probs.size() != s.dim()) throw InvalidArgument("thermal_state: weights do not match spectrum");
    const ComplexMatrix rho = s.vectors * w.probs.cast<Complex>().asDiagonal() * s.vectors.adjoint();
    return HermitianMatrix::from_upper(rho);
}

HermitianMatrix thermal_state(const Spectrum& s, double beta) { return thermal_state(s, gibbs_weights(s, beta)); }

double purity_m(const RealVector& probs, int m) {
    if (m < 1) throw InvalidArgument("purity order m must be >= 1");
    if (m == 1) return 1.0;
    double sum = 0.0;
    for (Eigen::Index j = 0; j < probs.size(); ++j) {
        const double p = probs(j);
        double pm = p;
        for (int r = 1; r < m; ++r) pm *= p;
        sum += pm;
    }
    return sum;
}

double purity_m(const Spectrum& s, double beta, int m) { return purity_m(gibbs_weights(s, beta).probs, m); }

double internal_energy(const RealVector& energies, double beta) {
    const GibbsWeights w = gibbs_weights(energies, beta);
    // Shifted by E_0 so that the sum involves only nonnegative terms.
    const double e0 = energies(0);
    double shifted = 0.0;
    for (Eigen::Index m = 0; m < energies.size(); ++m) shifted += w.probs(m) * (energies(m) - e0);
    return e0 + shifted;
}

double purity_beta_derivative(const RealVector& energies, double beta, int m) {
    check_beta(beta);
    if (m < 1) throw InvalidArgument("purity order m must be >= 1");
    if (m == 1 || beta == 0.0) return 0.0;
    const double mbeta = static_cast<double>(m) * beta;
    const GibbsWeights w1 = gibbs_weights(energies, beta);
    const GibbsWeights wm = gibbs_weights(energies, mbeta);
    const double ratio = std::exp(wm.log_z - static_cast<double>(m) * w1.log_z);

    const double e0 = energies(0);
    double u1 = 0.0, um = 0.0;
    for (Eigen::Index j = 0; j < energies.size(); ++j) {
        u1 += w1.probs(j) * (energies(j) - e0);
        um += wm.probs(j) * (energies(j) - e0);
    }
    const double value = static_cast<double>(m) * ratio * (u1 - um);
    if (!std::isfinite(value)) throw NumericFailure("purity_beta_derivative: non-finite result");
    // <H>_beta >= <H>_{m beta}; a negative value can only be round-off.
    return value > 0.0 ? value : 0.0;
}

double log_ground_probability(const RealVector& energies, double beta) {
    check_beta(beta);
    const double e0 = energies(0);
    double z_shifted = 0.0;
    for (Eigen::Index j = 0; j < energies.size(); ++j) z_shifted += std::exp(-beta * (energies(j) - e0));
    return -std::log(z_shifted);
}

}  // namespace thermal_designs
