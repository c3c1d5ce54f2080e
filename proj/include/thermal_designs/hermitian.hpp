#pragma once

#include <complex>

#include <Eigen/Dense>

namespace thermal_designs {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Dense Hermitian matrix. Hermiticity is exact: only the upper triangle is
// ever taken from the caller, the lower triangle is its conjugate mirror and
// the diagonal is real.
class HermitianMatrix {
  public:
    HermitianMatrix() = default;

    // Builds from the upper triangle (including the diagonal) of `upper`.
    // The strictly lower part of the argument is ignored.
    static HermitianMatrix from_upper(ComplexMatrix upper);

    static HermitianMatrix zero(Eigen::Index dim);
    static HermitianMatrix identity(Eigen::Index dim);
    static HermitianMatrix diagonal(const RealVector& diag);

    Eigen::Index dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    // Sums and real scalings keep the conjugate symmetry bit-exact.
    HermitianMatrix& operator+=(const HermitianMatrix& other);
    HermitianMatrix& operator*=(double scale);

    // max |H - H^dagger|; zero for every instance built through this class.
    double hermiticity_defect() const;

  private:
    explicit HermitianMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

}  // namespace thermal_designs
