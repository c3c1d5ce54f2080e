#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "thermal_designs/hermitian.hpp"

namespace thermal_designs {

inline constexpr long long kDefaultMemoryCap = 4096;  // max D^t for dense moment operators
inline constexpr int kMaxTensorPower = 20;            // 20! still fits in 64 bits

// C(D + t - 1, t); throws on overflow.
long long symmetric_dimension(long long D, int t);

// Throws CapacityError naming (D, t) when D^t exceeds `cap`.
void require_dense_capacity(long long D, int t, long long cap);
bool dense_feasible(long long D, int t, long long cap);

// ---------------------------------------------------------------------------
// Conjugacy classes of S_t.

struct CycleType {
    std::vector<int> parts;       // cycle lengths, nonincreasing, summing to t
    std::uint64_t multiplicity;   // number of permutations with these cycles

    // multiplicity / t!, computed without forming t!.
    double weight() const;
};

std::vector<CycleType> cycle_types(int t);

// ---------------------------------------------------------------------------
// Dense symmetric-subspace projector on (C^D)^{\otimes t}.

struct SymProjector {
    long long D = 0;
    int t = 0;
    long long d_sym = 0;
    Eigen::MatrixXd matrix;  // real symmetric, D^t x D^t
};

// Average of the tensor-factor permutation operators V_sigma. Entry (r, c) is
// the fraction of permutations mapping basis index c to r, i.e. 1/|orbit| when
// r is a rearrangement of c and 0 otherwise.
SymProjector build_sym_projector(long long D, int t, long long cap = kDefaultMemoryCap);

// ---------------------------------------------------------------------------
// Streaming mean of rho^{\otimes t} over samples, on the full D^t space.

class MomentAccumulator {
  public:
    MomentAccumulator(long long D, int t, long long cap = kDefaultMemoryCap);

    long long D() const { return D_; }
    int t() const { return t_; }
    std::uint64_t count() const { return count_; }
    const ComplexMatrix& mean() const { return mean_; }

    // mean += (rho^{\otimes t} - mean) / count.
    void accumulate(const HermitianMatrix& rho);
    // Weighted merge, as if `other`'s samples had been accumulated after ours.
    void merge(const MomentAccumulator& other);

    // 16-byte header ("TDMOMACC", u32 version, u32 reserved), then u64 D, t,
    // count and the row-major mean: all real parts, then all imaginary parts,
    // as little-endian IEEE doubles.
    void save(const std::filesystem::path& path) const;
    static MomentAccumulator load(const std::filesystem::path& path, long long cap = kDefaultMemoryCap);

  private:
    long long D_;
    int t_;
    std::uint64_t count_ = 0;
    ComplexMatrix mean_;
};

inline void accumulate_moment(MomentAccumulator& acc, const HermitianMatrix& rho) { acc.accumulate(rho); }

ComplexMatrix tensor_power(const ComplexMatrix& rho, int t);

// (1/2) || mean - Pi/d_sym ||_1.
double distance_trace_norm(const MomentAccumulator& acc, const SymProjector& proj);
// 1 - tr(mean Pi).
double distance_sym_overlap(const MomentAccumulator& acc, const SymProjector& proj);

// ---------------------------------------------------------------------------
// Purity-based estimators.

// tr(rho^{\otimes t} Pi) = sum over cycle types of weight * prod_c tr rho^{|c|}.
// `purities[m-1]` holds tr rho^m for m = 1..t.
double symmetric_overlap_from_purities(std::span<const double> purities, std::span<const CycleType> types);

// Rows are samples, column m-1 holds tr rho^m. Throws InvalidArgument for an
// empty table, fewer than t columns, or non-finite entries.
double distance_cycle_expansion(const Eigen::MatrixXd& purities, int t);

// 1 - mean(p0^t), with p0^t evaluated as exp(t log p0).
double ground_state_bound(std::span<const double> ground_probs, int t);

// ---------------------------------------------------------------------------
// Moments compressed onto the symmetric subspace.
//
// rho^{\otimes t} commutes with every V_sigma, so the moment operator splits
// into its block on Sym^t(C^D) and a positive block on the complement. Only
// the d_sym x d_sym symmetric block is stored; the trace-norm distance is
//   (1/2) (|| C - I/d_sym ||_1 + 1 - tr C),
// because the complement block is positive with trace 1 - tr C.

// Occupation-number basis of Sym^t(C^D): sorted index tuples, lexicographic.
class SymmetricBasis {
  public:
    SymmetricBasis(long long D, int t);

    long long D() const { return D_; }
    int t() const { return t_; }
    long long size() const { return static_cast<long long>(levels_.back().tuples.size()); }
    const std::vector<int>& tuple(long long index) const { return levels_.back().tuples[index]; }

    // <m| A^{\otimes t} |m'> = perm(A[m, m']) / sqrt(prod m_i! prod m'_j!),
    // evaluated by first-row permanent expansion over the levels s = 1..t.
    ComplexMatrix power(const ComplexMatrix& a) const;

  private:
    struct ColumnTerm {
        int value;
        int multiplicity;
        int rest;  // index of the tuple with one `value` removed, one level down
    };
    struct Level {
        std::vector<std::vector<int>> tuples;
        std::vector<int> first;                      // row expansion: leading index
        std::vector<int> rest;                       // ... and the remaining tuple
        std::vector<std::vector<ColumnTerm>> columns;
        std::vector<double> norm;                    // 1/sqrt(prod m_i!)
    };

    long long D_;
    int t_;
    std::vector<Level> levels_;  // levels_[s-1] holds tuples of size s
};

class SymmetricMoment {
  public:
    explicit SymmetricMoment(std::shared_ptr<const SymmetricBasis> basis);

    const SymmetricBasis& basis() const { return *basis_; }
    std::uint64_t count() const { return count_; }
    const ComplexMatrix& mean() const { return mean_; }

    void accumulate(const HermitianMatrix& rho);
    void merge(const SymmetricMoment& other);

    // Accumulator state from an externally computed mean of `count` samples.
    static SymmetricMoment from_mean(std::shared_ptr<const SymmetricBasis> basis, ComplexMatrix mean,
                                     std::uint64_t count);

    // Leave-out mean of `total` with this accumulator's samples removed.
    static ComplexMatrix complement_mean(const SymmetricMoment& total, const SymmetricMoment& part);

  private:
    std::shared_ptr<const SymmetricBasis> basis_;
    std::uint64_t count_ = 0;
    ComplexMatrix mean_;
};

// t = 2 only. Buffers the real parameter vectors of each state (real parts
// on and above the diagonal, imaginary parts below) and keeps their Gram
// matrix; finish() rebuilds the same block SymmetricMoment would hold.
class PairMoment {
  public:
    explicit PairMoment(long long D, Eigen::Index batch = 256);

    std::uint64_t count() const { return count_; }
    void accumulate(const HermitianMatrix& rho);
    SymmetricMoment finish(std::shared_ptr<const SymmetricBasis> basis);

  private:
    void flush();

    long long D_;
    std::uint64_t count_ = 0;
    Eigen::MatrixXd gram_;  // lower triangle only
    Eigen::MatrixXd pending_;
    Eigen::Index used_ = 0;
};

// Estimators from a symmetric block C (any d_sym x d_sym Hermitian moment).
double trace_norm_from_symmetric_block(const ComplexMatrix& block);
double sym_overlap_from_symmetric_block(const ComplexMatrix& block);
// tr(X Pi)/d_sym, the natural estimate of the symmetric-block eigenvalue.
double symmetric_block_eigenvalue_estimate(const ComplexMatrix& block);

// (1/2)(||A||_1 + |tr A|) for a Hermitian block difference A: the bound on
// the change of the trace-norm estimator when the symmetric block moves by A.
double symmetric_block_deviation(const ComplexMatrix& diff);

// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
double hermitian_trace_norm(const ComplexMatrix& a);

}  // namespace thermal_designs
