#include "thermal_designs/design.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "thermal_designs/ensembles.hpp"
#include "thermal_designs/errors.hpp"

namespace thermal_designs {

namespace {

void check_t(int t) {
    if (t < 1 || t > kMaxTensorPower)
        throw InvalidArgument("tensor power t must be in [1, " + std::to_string(kMaxTensorPower) + "], got " +
                              std::to_string(t));
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

long long symmetric_dimension(long long D, int t) {
    check_t(t);
    if (D < 1) throw InvalidArgument("base dimension must be >= 1");
    // C(D+t-1, t) built incrementally; each partial product is an integer.
    unsigned __int128 r = 1;
    for (int i = 1; i <= t; ++i) {
        r = r * static_cast<unsigned __int128>(D - 1 + i) / static_cast<unsigned __int128>(i);
        if (r > static_cast<unsigned __int128>(std::numeric_limits<long long>::max()))
            throw InvalidArgument("symmetric dimension overflows");
    }
    return static_cast<long long>(r);
}

bool dense_feasible(long long D, int t, long long cap) {
    long long size = 1;
    for (int i = 0; i < t; ++i) {
        if (size > cap / D) return false;
        size *= D;
    }
    return size <= cap;
}

void require_dense_capacity(long long D, int t, long long cap) {
    check_t(t);
    if (!dense_feasible(D, t, cap))
        throw CapacityError("dense moment operator for (D=" + std::to_string(D) + ", t=" + std::to_string(t) +
                                ") exceeds memory cap D^t <= " + std::to_string(cap),
                            D, t);
}

// ---------------------------------------------------------------------------

double CycleType::weight() const {
    // 1 / prod_m (m^{a_m} a_m!)
    double denom = 1.0;
    std::size_t i = 0;
    while (i < parts.size()) {
        std::size_t j = i;
        while (j < parts.size() && parts[j] == parts[i]) ++j;
        const int a = static_cast<int>(j - i);
        denom *= std::pow(static_cast<double>(parts[i]), a) * factorial(a);
        i = j;
    }
    return 1.0 / denom;
}

std::vector<CycleType> cycle_types(int t) {
    check_t(t);
    std::vector<CycleType> out;
    std::uint64_t t_factorial = 1;
    for (int i = 2; i <= t; ++i) t_factorial *= static_cast<std::uint64_t>(i);

    // Partitions in reverse lexicographic order, starting from [t].
    std::vector<int> p{t};
    while (true) {
        CycleType ct{p, 0};
        std::uint64_t denom = 1;
        std::size_t i = 0;
        while (i < p.size()) {
            std::size_t j = i;
            while (j < p.size() && p[j] == p[i]) ++j;
            for (std::size_t r = 0; r < j - i; ++r) denom *= static_cast<std::uint64_t>(p[i]) * (r + 1);
            i = j;
        }
        ct.multiplicity = t_factorial / denom;
        out.push_back(std::move(ct));

        // Next partition: find the rightmost part > 1.
        int rem = 0;
        while (!p.empty() && p.back() == 1) {
            rem += 1;
            p.pop_back();
        }
        if (p.empty()) break;
        const int v = p.back() - 1;
        p.back() = v;
        rem += 1;
        while (rem > v) {
            p.push_back(v);
            rem -= v;
        }
        if (rem > 0) p.push_back(rem);
    }
    return out;
}

// ---------------------------------------------------------------------------

SymProjector build_sym_projector(long long D, int t, long long cap) {
    require_dense_capacity(D, t, cap);
    const long long dim = checked_pow(D, t);
    SymProjector proj;
    proj.D = D;
    proj.t = t;
    proj.d_sym = symmetric_dimension(D, t);
    proj.matrix = Eigen::MatrixXd::Zero(dim, dim);

    // Group basis indices by their sorted digit tuple (the S_t orbit).
    std::map<std::vector<int>, std::vector<long long>> orbits;
    std::vector<int> digits(t);
    for (long long idx = 0; idx < dim; ++idx) {
        long long v = idx;
        for (int j = t - 1; j >= 0; --j) {
            digits[j] = static_cast<int>(v % D);
            v /= D;
        }
        std::vector<int> key = digits;
        std::sort(key.begin(), key.end());
        orbits[key].push_back(idx);
    }
    for (const auto& [_, members] : orbits) {
        const double w = 1.0 / static_cast<double>(members.size());
        for (long long r : members)
            for (long long c : members) proj.matrix(r, c) = w;
    }
    return proj;
}

// ---------------------------------------------------------------------------

ComplexMatrix tensor_power(const ComplexMatrix& rho, int t) {
    check_t(t);
    ComplexMatrix out = rho;
    for (int i = 1; i < t; ++i) out = Eigen::kroneckerProduct(out, rho).eval();
    return out;
}

MomentAccumulator::MomentAccumulator(long long D, int t, long long cap) : D_(D), t_(t) {
    if (D < 1) throw InvalidArgument("moment accumulator: D must be >= 1");
    require_dense_capacity(D, t, cap);
    const long long dim = checked_pow(D, t);
    mean_ = ComplexMatrix::Zero(dim, dim);
}

void MomentAccumulator::accumulate(const HermitianMatrix& rho) {
    if (rho.dim() != D_)
        throw InvalidArgument("moment accumulator: state dimension " + std::to_string(rho.dim()) +
                              " does not match D=" + std::to_string(D_));
    ++count_;
    const ComplexMatrix x = tensor_power(rho.matrix(), t_);
    mean_ += (x - mean_) / static_cast<double>(count_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.D_ != D_ || other.t_ != t_) throw InvalidArgument("moment accumulator: merge of mismatched (D, t)");
    if (other.count_ == 0) return;
    const std::uint64_t total = count_ + other.count_;
    mean_ += (other.mean_ - mean_) * (static_cast<double>(other.count_) / static_cast<double>(total));
    count_ = total;
}

namespace {

constexpr char kMagic[8] = {'T', 'D', 'M', 'O', 'M', 'A', 'C', 'C'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}
void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}
void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw InvalidArgument("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw InvalidArgument("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace

void MomentAccumulator::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw InvalidArgument("checkpoint: cannot open '" + path.string() + "' for writing");
    os.write(kMagic, 8);
    put_u32(os, kCheckpointVersion);
    put_u32(os, 0);
    put_u64(os, static_cast<std::uint64_t>(D_));
    put_u64(os, static_cast<std::uint64_t>(t_));
    put_u64(os, count_);
    const Eigen::Index n = mean_.rows();
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) put_f64(os, mean_(r, c).real());
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) put_f64(os, mean_(r, c).imag());
    if (!os) throw InvalidArgument("checkpoint: write to '" + path.string() + "' failed");
}

MomentAccumulator MomentAccumulator::load(const std::filesystem::path& path, long long cap) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("checkpoint: cannot open '" + path.string() + "'");
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw InvalidArgument("checkpoint: bad magic in '" + path.string() + "'");
    const std::uint32_t version = get_u32(is);
    if (version != kCheckpointVersion)
        throw InvalidArgument("checkpoint: unsupported version " + std::to_string(version));
    get_u32(is);
    const auto D = static_cast<long long>(get_u64(is));
    const auto t = static_cast<int>(get_u64(is));
    const std::uint64_t count = get_u64(is);
    MomentAccumulator acc(D, t, cap);
    acc.count_ = count;
    const Eigen::Index n = acc.mean_.rows();
    Eigen::MatrixXd re(n, n), im(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) re(r, c) = std::bit_cast<double>(get_u64(is));
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) im(r, c) = std::bit_cast<double>(get_u64(is));
    if (is.peek() != std::char_traits<char>::eof()) throw InvalidArgument("checkpoint: trailing bytes");
    acc.mean_.real() = re;
    acc.mean_.imag() = im;
    return acc;
}

double hermitian_trace_norm(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericFailure("trace norm: eigensolver did not converge");
    return solver.eigenvalues().cwiseAbs().sum();
}

double distance_trace_norm(const MomentAccumulator& acc, const SymProjector& proj) {
    if (acc.D() != proj.D || acc.t() != proj.t) throw InvalidArgument("distance: accumulator/projector mismatch");
    if (acc.count() == 0) throw InvalidArgument("distance: empty accumulator");
    const ComplexMatrix diff = acc.mean() - proj.matrix.cast<Complex>() / static_cast<double>(proj.d_sym);
    return 0.5 * hermitian_trace_norm(diff);
}

double distance_sym_overlap(const MomentAccumulator& acc, const SymProjector& proj) {
    if (acc.D() != proj.D || acc.t() != proj.t) throw InvalidArgument("distance: accumulator/projector mismatch");
    if (acc.count() == 0) throw InvalidArgument("distance: empty accumulator");
    // tr(M P) with P real symmetric: sum_rc Re M(r,c) P(r,c).
    return 1.0 - acc.mean().real().cwiseProduct(proj.matrix).sum();
}

// ---------------------------------------------------------------------------

double symmetric_overlap_from_purities(std::span<const double> purities, std::span<const CycleType> types) {
    double sum = 0.0;
    for (const CycleType& ct : types) {
        double prod = 1.0;
        for (int part : ct.parts) prod *= purities[static_cast<std::size_t>(part - 1)];
        sum += ct.weight() * prod;
    }
    return sum;
}

double distance_cycle_expansion(const Eigen::MatrixXd& purities, int t) {
    check_t(t);
    if (purities.rows() == 0) throw InvalidArgument("cycle expansion: empty purity table");
    if (purities.cols() < t)
        throw InvalidArgument("cycle expansion: purity table has " + std::to_string(purities.cols()) +
                              " columns, need tr rho^m for m = 1.." + std::to_string(t));
    if (!purities.leftCols(t).allFinite()) throw InvalidArgument("cycle expansion: missing purity entries");
    const auto types = cycle_types(t);
    std::vector<double> row(t);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < purities.rows(); ++i) {
        for (int m = 0; m < t; ++m) row[m] = purities(i, m);
        mean += (symmetric_overlap_from_purities(row, types) - mean) / static_cast<double>(i + 1);
    }
    return 1.0 - mean;
}

double ground_state_bound(std::span<const double> ground_probs, int t) {
    check_t(t);
    if (ground_probs.empty()) throw InvalidArgument("ground-state bound: no samples");
    double mean = 0.0;
    std::size_t i = 0;
    for (double p0 : ground_probs) {
        if (!(p0 >= 0.0 && p0 <= 1.0)) throw InvalidArgument("ground-state bound: p0 outside [0, 1]");
        const double pt = p0 > 0.0 ? std::exp(static_cast<double>(t) * std::log(p0)) : 0.0;
        mean += (pt - mean) / static_cast<double>(++i);
    }
    return 1.0 - mean;
}

// ---------------------------------------------------------------------------

SymmetricBasis::SymmetricBasis(long long D, int t) : D_(D), t_(t) {
    check_t(t);
    if (D < 1) throw InvalidArgument("symmetric basis: D must be >= 1");
    const long long dsym = symmetric_dimension(D, t);
    if (dsym > (1LL << 24)) throw CapacityError("symmetric basis too large", D, t);

    std::vector<std::map<std::vector<int>, int>> rank(t);
    levels_.resize(t);
    for (int s = 1; s <= t; ++s) {
        Level& lv = levels_[s - 1];
        // Nondecreasing tuples of length s in lexicographic order.
        std::vector<int> tup(s, 0);
        while (true) {
            rank[s - 1].emplace(tup, static_cast<int>(lv.tuples.size()));
            lv.tuples.push_back(tup);
            int pos = s - 1;
            while (pos >= 0 && tup[pos] == D - 1) --pos;
            if (pos < 0) break;
            ++tup[pos];
            for (int j = pos + 1; j < s; ++j) tup[j] = tup[pos];
        }
        const std::size_t count = lv.tuples.size();
        lv.first.resize(count);
        lv.rest.resize(count);
        lv.columns.resize(count);
        lv.norm.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& m = lv.tuples[i];
            double fact = 1.0;
            for (std::size_t a = 0; a < m.size();) {
                std::size_t b = a;
                while (b < m.size() && m[b] == m[a]) ++b;
                fact *= factorial(static_cast<int>(b - a));
                if (s > 1) {
                    std::vector<int> reduced = m;
                    reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(a));
                    lv.columns[i].push_back({m[a], static_cast<int>(b - a), rank[s - 2].at(reduced)});
                }
                a = b;
            }
            lv.norm[i] = 1.0 / std::sqrt(fact);
            lv.first[i] = m[0];
            if (s > 1) lv.rest[i] = rank[s - 2].at(std::vector<int>(m.begin() + 1, m.end()));
        }
    }
}

ComplexMatrix SymmetricBasis::power(const ComplexMatrix& a) const {
    if (a.rows() != D_ || a.cols() != D_) throw InvalidArgument("symmetric power: operator dimension mismatch");
    // Unnormalized permanents perm(A[m, m']) level by level.
    ComplexMatrix prev = a;
    for (int s = 2; s <= t_; ++s) {
        const Level& lv = levels_[s - 1];
        const auto n = static_cast<Eigen::Index>(lv.tuples.size());
        ComplexMatrix cur(n, n);
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto& terms = lv.columns[c];
            for (Eigen::Index r = 0; r < n; ++r) {
                const int row = lv.first[r];
                const int rest = lv.rest[r];
                Complex acc(0.0, 0.0);
                for (const ColumnTerm& term : terms)
                    acc += static_cast<double>(term.multiplicity) * a(row, term.value) * prev(rest, term.rest);
                cur(r, c) = acc;
            }
        }
        prev = std::move(cur);
    }
    const Level& top = levels_.back();
    const Eigen::Map<const RealVector> norm(top.norm.data(), static_cast<Eigen::Index>(top.norm.size()));
    return norm.cast<Complex>().asDiagonal() * prev * norm.cast<Complex>().asDiagonal();
}

SymmetricMoment::SymmetricMoment(std::shared_ptr<const SymmetricBasis> basis) : basis_(std::move(basis)) {
    if (!basis_) throw InvalidArgument("symmetric moment: null basis");
    mean_ = ComplexMatrix::Zero(basis_->size(), basis_->size());
}

void SymmetricMoment::accumulate(const HermitianMatrix& rho) {
    ++count_;
    mean_ += (basis_->power(rho.matrix()) - mean_) / static_cast<double>(count_);
}

void SymmetricMoment::merge(const SymmetricMoment& other) {
    if (other.basis_->D() != basis_->D() || other.basis_->t() != basis_->t())
        throw InvalidArgument("symmetric moment: merge of mismatched (D, t)");
    if (other.count_ == 0) return;
    const std::uint64_t total = count_ + other.count_;
    mean_ += (other.mean_ - mean_) * (static_cast<double>(other.count_) / static_cast<double>(total));
    count_ = total;
}

SymmetricMoment SymmetricMoment::from_mean(std::shared_ptr<const SymmetricBasis> basis, ComplexMatrix mean,
                                           std::uint64_t count) {
    SymmetricMoment m(std::move(basis));
    if (mean.rows() != m.mean_.rows() || mean.cols() != m.mean_.cols())
        throw InvalidArgument("symmetric moment: mean has the wrong shape");
    m.mean_ = std::move(mean);
    m.count_ = count;
    return m;
}

PairMoment::PairMoment(long long D, Eigen::Index batch) : D_(D) {
    if (D < 1) throw InvalidArgument("pair moment: D must be >= 1");
    if (batch < 1) throw InvalidArgument("pair moment: batch must be >= 1");
    gram_ = Eigen::MatrixXd::Zero(D * D, D * D);
    pending_.resize(D * D, batch);
}

void PairMoment::accumulate(const HermitianMatrix& rho) {
    const ComplexMatrix& a = rho.matrix();
    if (a.rows() != D_) throw InvalidArgument("pair moment: state dimension mismatch");
    if (used_ == pending_.cols()) flush();
    double* u = pending_.col(used_).data();
    for (long long c = 0; c < D_; ++c)
        for (long long r = 0; r < D_; ++r) u[r + c * D_] = r <= c ? a(r, c).real() : a(c, r).imag();
    ++used_;
    ++count_;
}

void PairMoment::flush() {
    if (used_ == 0) return;
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(pending_.leftCols(used_));
    used_ = 0;
}

SymmetricMoment PairMoment::finish(std::shared_ptr<const SymmetricBasis> basis) {
    if (!basis || basis->t() != 2 || basis->D() != D_) throw InvalidArgument("pair moment: basis must have t = 2");
    flush();
    const long long D = D_;
    const double inv = count_ ? 1.0 / static_cast<double>(count_) : 0.0;
    auto g = [&](long long p, long long q) { return p >= q ? gram_(p, q) : gram_(q, p); };
    // rho_ab = U(min, max) + i sgn(b - a) U(max, min)
    auto re = [D](long long a, long long b) { return std::min(a, b) + std::max(a, b) * D; };
    auto im = [D](long long a, long long b) { return std::max(a, b) + std::min(a, b) * D; };
    auto sg = [](long long a, long long b) { return a < b ? 1.0 : (a > b ? -1.0 : 0.0); };
    // sum over samples of rho_ab rho_cd
    auto m = [&](long long a, long long b, long long c, long long d) {
        const double s1 = sg(a, b), s2 = sg(c, d);
        double x = g(re(a, b), re(c, d));
        double y = 0.0;
        if (s1 != 0.0 && s2 != 0.0) x -= s1 * s2 * g(im(a, b), im(c, d));
        if (s2 != 0.0) y += s2 * g(re(a, b), im(c, d));
        if (s1 != 0.0) y += s1 * g(im(a, b), re(c, d));
        return Complex(x, y);
    };
    const long long n = basis->size();
    ComplexMatrix mean(n, n);
    for (long long p = 0; p < n; ++p) {
        const auto& row = basis->tuple(p);
        const long long i = row[0], j = row[1];
        const double ci = i == j ? std::sqrt(0.5) : 1.0;
        for (long long q = 0; q < n; ++q) {
            const auto& col = basis->tuple(q);
            const long long k = col[0], l = col[1];
            const double ck = k == l ? std::sqrt(0.5) : 1.0;
            mean(p, q) = (m(i, k, j, l) + m(i, l, j, k)) * (ci * ck * inv);
        }
    }
    gram_.setZero();
    const std::uint64_t count = count_;
    count_ = 0;
    return SymmetricMoment::from_mean(std::move(basis), std::move(mean), count);
}

ComplexMatrix SymmetricMoment::complement_mean(const SymmetricMoment& total, const SymmetricMoment& part) {
    if (part.count_ >= total.count_) throw InvalidArgument("symmetric moment: leave-out removes every sample");
    const double n = static_cast<double>(total.count_);
    const double k = static_cast<double>(part.count_);
    return (total.mean_ * n - part.mean_ * k) / (n - k);
}

double trace_norm_from_symmetric_block(const ComplexMatrix& block) {
    const auto d = block.rows();
    const ComplexMatrix diff = block - ComplexMatrix::Identity(d, d) / static_cast<double>(d);
    const double complement = 1.0 - block.trace().real();
    return 0.5 * (hermitian_trace_norm(diff) + complement);
}

double sym_overlap_from_symmetric_block(const ComplexMatrix& block) { return 1.0 - block.trace().real(); }

double symmetric_block_eigenvalue_estimate(const ComplexMatrix& block) {
    return block.trace().real() / static_cast<double>(block.rows());
}

double symmetric_block_deviation(const ComplexMatrix& diff) {
    return 0.5 * (hermitian_trace_norm(diff) + std::abs(diff.trace().real()));
}

}  // namespace thermal_designs
