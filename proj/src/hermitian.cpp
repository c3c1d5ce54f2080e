#include "thermal_designs/hermitian.hpp"

#include "thermal_designs/errors.hpp"

namespace thermal_designs {

HermitianMatrix HermitianMatrix::from_upper(ComplexMatrix upper) {
    if (upper.rows() != upper.cols() || upper.rows() < 1)
        throw InvalidArgument("Hermitian matrix must be square with dim >= 1");
    const Eigen::Index n = upper.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        upper(i, i) = Complex(upper(i, i).real(), 0.0);
        for (Eigen::Index j = i + 1; j < n; ++j) upper(j, i) = std::conj(upper(i, j));
    }
    return HermitianMatrix(std::move(upper));
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
    if (dim < 1) throw InvalidArgument("Hermitian matrix dimension must be >= 1");
    return HermitianMatrix(ComplexMatrix::Zero(dim, dim));
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
    if (dim < 1) throw InvalidArgument("Hermitian matrix dimension must be >= 1");
    return HermitianMatrix(ComplexMatrix::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::diagonal(const RealVector& diag) {
    if (diag.size() < 1) throw InvalidArgument("Hermitian matrix dimension must be >= 1");
    ComplexMatrix m = ComplexMatrix::Zero(diag.size(), diag.size());
    m.diagonal() = diag.cast<Complex>();
    return HermitianMatrix(std::move(m));
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
    if (other.dim() != dim()) throw InvalidArgument("Hermitian sum: dimension mismatch");
    m_ += other.m_;
    return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double scale) {
    m_ *= scale;
    return *this;
}

double HermitianMatrix::hermiticity_defect() const {
    if (m_.size() == 0) return 0.0;
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace thermal_designs
