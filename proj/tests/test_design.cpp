#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "support.hpp"
#include "thermal_designs/design.hpp"
#include "thermal_designs/ensembles.hpp"
#include "thermal_designs/errors.hpp"
#include "thermal_designs/spectral.hpp"

using namespace thermal_designs;

namespace {

std::vector<int> digits_of(long long idx, long long D, int t) {
    std::vector<int> d(t);
    for (int j = t - 1; j >= 0; --j) {
        d[j] = static_cast<int>(idx % D);
        idx /= D;
    }
    return d;
}

long long index_of(const std::vector<int>& d, long long D) {
    long long idx = 0;
    for (int x : d) idx = idx * D + x;
    return idx;
}

// (1/t!) sum over every sigma of the factor permutation V_sigma.
Eigen::MatrixXd projector_by_permutation_average(long long D, int t) {
    const long long dim = static_cast<long long>(std::pow(D, t));
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<int> sigma(t);
    std::iota(sigma.begin(), sigma.end(), 0);
    long long count = 0;
    do {
        for (long long c = 0; c < dim; ++c) {
            const auto in = digits_of(c, D, t);
            std::vector<int> out(t);
            for (int j = 0; j < t; ++j) out[j] = in[sigma[j]];
            p(index_of(out, D), c) += 1.0;
        }
        ++count;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return p / static_cast<double>(count);
}

// Isometry whose columns are the normalized symmetric vectors of the sorted tuples.
ComplexMatrix symmetric_isometry(const SymmetricBasis& basis) {
    const long long D = basis.D();
    const int t = basis.t();
    const long long dim = static_cast<long long>(std::pow(D, t));
    ComplexMatrix w = ComplexMatrix::Zero(dim, basis.size());
    for (long long j = 0; j < basis.size(); ++j) {
        std::vector<int> tup = basis.tuple(j);
        do {
            w(index_of(tup, D), j) = 1.0;
        } while (std::next_permutation(tup.begin(), tup.end()));
        w.col(j).normalize();
    }
    return w;
}

HermitianMatrix random_state(long long D, std::uint64_t seed, double beta) {
    Rng rng = substream(seed, 0, 0);
    return thermal_state(eig_hermitian(sample_gue(D, rng)), beta);
}

HermitianMatrix random_pure_state(long long D, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(D);
    for (auto& x : v) x = {g(rng), g(rng)};
    v.normalize();
    return HermitianMatrix::from_upper(v * v.adjoint());
}

std::filesystem::path write_checkpoint(const std::string& name, long long D, int t, std::uint64_t count,
                                       const ComplexMatrix& mean) {
    const auto path = support::scratch_dir() / name;
    std::ofstream os(path, std::ios::binary);
    auto u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    os.write("TDMOMACC", 8);
    for (std::uint32_t v : {1u, 0u})
        for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
    u64(static_cast<std::uint64_t>(D));
    u64(static_cast<std::uint64_t>(t));
    u64(count);
    for (Eigen::Index r = 0; r < mean.rows(); ++r)
        for (Eigen::Index c = 0; c < mean.cols(); ++c) u64(std::bit_cast<std::uint64_t>(mean(r, c).real()));
    for (Eigen::Index r = 0; r < mean.rows(); ++r)
        for (Eigen::Index c = 0; c < mean.cols(); ++c) u64(std::bit_cast<std::uint64_t>(mean(r, c).imag()));
    return path;
}

}  // namespace

TEST(CycleTypes, SmallCases) {
    auto as_pairs = [](int t) {
        std::map<std::vector<int>, std::uint64_t> m;
        for (const auto& c : cycle_types(t)) m[c.parts] = c.multiplicity;
        return m;
    };
    EXPECT_EQ(as_pairs(2), (std::map<std::vector<int>, std::uint64_t>{{{1, 1}, 1}, {{2}, 1}}));
    EXPECT_EQ(as_pairs(3), (std::map<std::vector<int>, std::uint64_t>{{{1, 1, 1}, 1}, {{2, 1}, 3}, {{3}, 2}}));
    EXPECT_EQ(as_pairs(4), (std::map<std::vector<int>, std::uint64_t>{
                               {{1, 1, 1, 1}, 1}, {{2, 1, 1}, 6}, {{2, 2}, 3}, {{3, 1}, 8}, {{4}, 6}}));
    EXPECT_EQ(cycle_types(1).size(), 1u);
}

TEST(CycleTypes, MultiplicitiesSumToFactorialAndMatchFormula) {
    const std::vector<std::size_t> partitions{1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176, 231, 297, 385, 490, 627};
    std::uint64_t fact = 1;
    for (int t = 1; t <= kMaxTensorPower; ++t) {
        fact *= static_cast<std::uint64_t>(t);
        const auto types = cycle_types(t);
        EXPECT_EQ(types.size(), partitions[t - 1]) << "t=" << t;
        std::uint64_t total = 0;
        double weight_total = 0.0;
        for (const auto& c : types) {
            EXPECT_EQ(std::accumulate(c.parts.begin(), c.parts.end(), 0), t);
            EXPECT_TRUE(std::is_sorted(c.parts.rbegin(), c.parts.rend()));
            total += c.multiplicity;
            weight_total += c.weight();
            EXPECT_NEAR(c.weight(), static_cast<double>(c.multiplicity) / static_cast<double>(fact),
                        1e-15 * c.weight() + 1e-300);
        }
        EXPECT_EQ(total, fact) << "t=" << t;
        EXPECT_NEAR(weight_total, 1.0, 1e-12);
    }
}

TEST(SymmetricDimension, Values) {
    EXPECT_EQ(symmetric_dimension(2, 2), 3);
    EXPECT_EQ(symmetric_dimension(4, 2), 10);
    EXPECT_EQ(symmetric_dimension(32, 3), 5984);
    EXPECT_EQ(symmetric_dimension(7, 1), 7);
    EXPECT_EQ(symmetric_dimension(4, 12), 455);
}

TEST(SymProjector, MatchesLiteralPermutationAverage) {
    for (auto [D, t] : {std::pair{2LL, 2}, {3LL, 3}, {2LL, 4}, {4LL, 2}, {3LL, 1}, {2LL, 5}}) {
        const SymProjector p = build_sym_projector(D, t);
        EXPECT_LE((p.matrix - projector_by_permutation_average(D, t)).cwiseAbs().maxCoeff(), 1e-15)
            << "D=" << D << " t=" << t;
    }
}

TEST(SymProjector, IdempotentWithSymmetricTrace) {
    for (long long D = 1; D <= 6; ++D)
        for (int t = 1; t <= 4; ++t) {
            if (!dense_feasible(D, t, 1296)) continue;
            const SymProjector p = build_sym_projector(D, t);
            EXPECT_LE((p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_NEAR(p.matrix.trace(), static_cast<double>(symmetric_dimension(D, t)), 1e-8);
            EXPECT_EQ(p.d_sym, symmetric_dimension(D, t));
        }
}

TEST(SymProjector, Examples) {
    const SymProjector p22 = build_sym_projector(2, 2);
    EXPECT_EQ(p22.d_sym, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p22.matrix);
    EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-15);
    EXPECT_NEAR(es.eigenvalues()(1), 1.0, 1e-15);
    EXPECT_EQ(build_sym_projector(5, 1).matrix, Eigen::MatrixXd::Identity(5, 5));
    EXPECT_DOUBLE_EQ(build_sym_projector(4, 2).matrix.trace(), 10.0);
}

TEST(SymProjector, CapacityErrorNamesDimensions) {
    try {
        build_sym_projector(8, 5);
        FAIL() << "expected CapacityError";
    } catch (const CapacityError& e) {
        EXPECT_EQ(e.base_dim(), 8);
        EXPECT_EQ(e.t(), 5);
        EXPECT_NE(std::string(e.what()).find("D=8, t=5"), std::string::npos);
    }
    EXPECT_NO_THROW(build_sym_projector(4, 6));
    EXPECT_THROW(build_sym_projector(4, 6, 1000), CapacityError);
    EXPECT_THROW(MomentAccumulator(32, 3), CapacityError);
}

TEST(MomentAccumulator, SingleAndRepeatedSamples) {
    const HermitianMatrix rho = random_state(3, 1, 0.9);
    const ComplexMatrix power = tensor_power(rho.matrix(), 2);
    MomentAccumulator acc(3, 2);
    accumulate_moment(acc, rho);
    EXPECT_EQ(acc.count(), 1u);
    EXPECT_EQ(acc.mean(), power);
    for (int i = 0; i < 9; ++i) acc.accumulate(rho);
    EXPECT_LE((acc.mean() - power).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(acc.accumulate(random_state(4, 1, 0.9)), InvalidArgument);
}

TEST(MomentAccumulator, TraceOnePositiveAndMergeConsistent) {
    MomentAccumulator all(3, 3), left(3, 3), right(3, 3);
    for (int i = 0; i < 25; ++i) {
        const HermitianMatrix rho = random_state(3, 100 + i, 0.2 * i);
        all.accumulate(rho);
        (i < 11 ? left : right).accumulate(rho);
        EXPECT_NEAR(all.mean().trace().real(), 1.0, 1e-8);
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(all.mean());
    EXPECT_GE(es.eigenvalues()(0), -1e-10);
    left.merge(right);
    EXPECT_EQ(left.count(), 25u);
    EXPECT_LE((left.mean() - all.mean()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MomentAccumulator, CheckpointRoundTripIsBitExact) {
    MomentAccumulator acc(2, 3);
    for (int i = 0; i < 7; ++i) acc.accumulate(random_state(2, 40 + i, 1.3));
    const auto path = support::scratch_dir() / "acc.bin";
    acc.save(path);
    EXPECT_EQ(std::filesystem::file_size(path), 16u + 24u + 2u * 64u * 8u);
    const MomentAccumulator back = MomentAccumulator::load(path);
    EXPECT_EQ(back.D(), 2);
    EXPECT_EQ(back.t(), 3);
    EXPECT_EQ(back.count(), 7u);
    EXPECT_EQ(back.mean(), acc.mean());
    // Independent writer of the documented layout produces the same bytes.
    const auto ours = write_checkpoint("acc_ref.bin", 2, 3, 7, acc.mean());
    EXPECT_EQ(support::slurp(ours), support::slurp(path));
}

TEST(MomentAccumulator, CheckpointRejectsCorruption) {
    MomentAccumulator acc(2, 2);
    acc.accumulate(random_state(2, 3, 0.5));
    const auto path = support::scratch_dir() / "bad.bin";
    acc.save(path);
    std::string bytes = support::slurp(path);

    std::ofstream(path, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    EXPECT_THROW(MomentAccumulator::load(path), InvalidArgument);
    std::ofstream(path, std::ios::binary) << bytes + "x";
    EXPECT_THROW(MomentAccumulator::load(path), InvalidArgument);
    std::string badmagic = bytes;
    badmagic[0] = 'X';
    std::ofstream(path, std::ios::binary) << badmagic;
    EXPECT_THROW(MomentAccumulator::load(path), InvalidArgument);
    std::string badversion = bytes;
    badversion[8] = 9;
    std::ofstream(path, std::ios::binary) << badversion;
    EXPECT_THROW(MomentAccumulator::load(path), InvalidArgument);
    EXPECT_THROW(MomentAccumulator::load(support::scratch_dir() / "missing.bin"), InvalidArgument);
}

TEST(Distances, HaarMomentGivesZero) {
    const SymProjector p = build_sym_projector(3, 2);
    const auto path = write_checkpoint("haar.bin", 3, 2, 1, p.matrix.cast<Complex>() / static_cast<double>(p.d_sym));
    const MomentAccumulator acc = MomentAccumulator::load(path);
    EXPECT_NEAR(distance_trace_norm(acc, p), 0.0, 1e-14);
    EXPECT_NEAR(distance_sym_overlap(acc, p), 0.0, 1e-14);
}

TEST(Distances, InfiniteTemperatureValue) {
    for (auto [D, t] : {std::pair{4LL, 2}, {2LL, 3}, {3LL, 3}, {8LL, 2}}) {
        const SymProjector p = build_sym_projector(D, t);
        MomentAccumulator acc(D, t);
        acc.accumulate(HermitianMatrix::identity(D) *= 1.0 / static_cast<double>(D));
        const double expect = 1.0 - static_cast<double>(p.d_sym) / std::pow(static_cast<double>(D), t);
        EXPECT_NEAR(distance_trace_norm(acc, p), expect, 1e-12);
        EXPECT_NEAR(distance_sym_overlap(acc, p), expect, 1e-12);
        Eigen::MatrixXd pur(1, t);
        for (int m = 1; m <= t; ++m) pur(0, m - 1) = std::pow(static_cast<double>(D), 1 - m);
        EXPECT_NEAR(distance_cycle_expansion(pur, t), expect, 1e-12);
    }
    const SymProjector p = build_sym_projector(4, 2);
    MomentAccumulator acc(4, 2);
    acc.accumulate(HermitianMatrix::identity(4) *= 0.25);
    EXPECT_NEAR(distance_trace_norm(acc, p), 0.375, 1e-15);
}

TEST(Distances, PureStatesLieInSymmetricSubspace) {
    std::mt19937_64 rng(17);
    for (auto [D, t] : {std::pair{2LL, 3}, {3LL, 2}, {4LL, 3}}) {
        const SymProjector p = build_sym_projector(D, t);
        MomentAccumulator acc(D, t);
        acc.accumulate(random_pure_state(D, rng));
        EXPECT_NEAR(1.0 - distance_sym_overlap(acc, p), 1.0, 1e-10);
    }
}

TEST(Distances, SandwichOnRandomAccumulators) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> beta(0.0, 5.0);
    for (int trial = 0; trial < 40; ++trial) {
        const long long D = 2 + trial % 3;
        const int t = 1 + trial % 3;
        const SymProjector p = build_sym_projector(D, t);
        MomentAccumulator acc(D, t);
        const int samples = 1 + trial % 5;
        for (int i = 0; i < samples; ++i)
            acc.accumulate(trial % 2 ? random_pure_state(D, rng) : random_state(D, 1000 * trial + i, beta(rng)));
        const double tn = distance_trace_norm(acc, p);
        const double so = distance_sym_overlap(acc, p);
        EXPECT_LE(so, tn + 1e-10);
        EXPECT_GE(so, -1e-10);
        EXPECT_LE(tn, 1.0 + 1e-10);
    }
}

TEST(Distances, CycleExpansionEqualsSymmetricOverlap) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> beta(0.0, 6.0);
    std::uniform_int_distribution<int> dim(2, 8), power(1, 3);
    for (int trial = 0; trial < 30; ++trial) {
        long long D = dim(rng);
        int t = power(rng);
        while (!dense_feasible(D, t, kDefaultMemoryCap)) --t;
        const double b = beta(rng);
        const SymProjector p = build_sym_projector(D, t);
        MomentAccumulator acc(D, t);
        Eigen::MatrixXd pur(20, t);
        for (int i = 0; i < 20; ++i) {
            Rng r = substream(trial, i, 0);
            const Spectrum s = eig_hermitian(sample_gue(D, r));
            acc.accumulate(thermal_state(s, b));
            for (int m = 1; m <= t; ++m) pur(i, m - 1) = purity_m(s, b, m);
        }
        EXPECT_NEAR(distance_cycle_expansion(pur, t), distance_sym_overlap(acc, p), 1e-10)
            << "D=" << D << " t=" << t << " beta=" << b;
    }
}

TEST(Distances, CycleExpansionErrors) {
    EXPECT_THROW(distance_cycle_expansion(Eigen::MatrixXd(0, 3), 2), InvalidArgument);
    EXPECT_THROW(distance_cycle_expansion(Eigen::MatrixXd::Ones(4, 1), 2), InvalidArgument);
    Eigen::MatrixXd holes = Eigen::MatrixXd::Ones(3, 2);
    holes(1, 1) = std::nan("");
    EXPECT_THROW(distance_cycle_expansion(holes, 2), InvalidArgument);
    EXPECT_NEAR(distance_cycle_expansion(Eigen::MatrixXd::Ones(5, 1), 1), 0.0, 1e-15);
}

TEST(GroundStateBound, Examples) {
    const std::vector<double> ones(10, 1.0), quarter(10, 0.25);
    EXPECT_EQ(ground_state_bound(ones, 7), 0.0);
    EXPECT_NEAR(ground_state_bound(quarter, 2), 0.9375, 1e-15);
    EXPECT_THROW(ground_state_bound(std::vector<double>{1.2}, 2), InvalidArgument);
    EXPECT_THROW(ground_state_bound(std::vector<double>{}, 2), InvalidArgument);
}

TEST(GroundStateBound, LargeBetaAsymptotics) {
    // Per Hamiltonian, 1 - p0^t ~ t sum_j exp(-(E_j - E_0) beta) once that sum is small.
    // Averaged over GUE the ratio does not tend to 1: the gap density vanishes
    // only like gap^2, so a fixed share of samples stays outside the regime. The
    // average obeys the one-sided bound 1 - p0^t <= t (1 - p0) instead.
    const int N = 4000;
    std::vector<Spectrum> spectra;
    for (int i = 0; i < N; ++i) {
        Rng r = substream(61, i, 0);
        spectra.push_back(eig_hermitian(sample_gue(4, r)));
    }
    for (auto [beta, t] : {std::pair{5.0, 8}, {8.0, 8}, {8.0, 12}}) {
        std::vector<double> p0;
        double asym_mean = 0.0;
        int in_regime = 0;
        for (const auto& s : spectra) {
            const double p = gibbs_weights(s, beta).probs(0);
            p0.push_back(p);
            double excited = 0.0;
            for (Eigen::Index j = 1; j < s.dim(); ++j) excited += std::exp(-(s.energies(j) - s.energies(0)) * beta);
            const double asym = t * excited;
            asym_mean += asym / N;
            if (asym < 0.1) {
                ++in_regime;
                EXPECT_NEAR(ground_state_bound(std::vector<double>{p}, t) / asym, 1.0, 0.10);
            }
        }
        EXPECT_GT(in_regime, N / 4);
        EXPECT_LE(ground_state_bound(p0, t), asym_mean);
    }
}

TEST(SymmetricBasis, PowerIsCompressedTensorPower) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (auto [D, t] : {std::pair{2LL, 2}, {3LL, 3}, {4LL, 2}, {2LL, 5}, {3LL, 1}}) {
        const SymmetricBasis basis(D, t);
        EXPECT_EQ(basis.size(), symmetric_dimension(D, t));
        const ComplexMatrix w = symmetric_isometry(basis);
        EXPECT_LE((w.adjoint() * w - ComplexMatrix::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff(), 1e-14);
        const SymProjector p = build_sym_projector(D, t);
        EXPECT_LE((w * w.adjoint() - p.matrix.cast<Complex>()).cwiseAbs().maxCoeff(), 1e-14);
        ComplexMatrix a(D, D);
        for (auto& x : a.reshaped()) x = {g(rng), g(rng)};
        const ComplexMatrix expect = w.adjoint() * tensor_power(a, t) * w;
        EXPECT_LE((basis.power(a) - expect).cwiseAbs().maxCoeff(), 1e-12) << "D=" << D << " t=" << t;
    }
}

TEST(SymmetricMoment, EstimatorsAgreeWithFullMoment) {
    for (auto [D, t] : {std::pair{4LL, 2}, {3LL, 3}, {2LL, 4}, {8LL, 2}}) {
        auto basis = std::make_shared<const SymmetricBasis>(D, t);
        const SymProjector p = build_sym_projector(D, t);
        for (double beta : {0.0, 0.4, 2.5}) {
            MomentAccumulator full(D, t);
            SymmetricMoment block(basis);
            for (int i = 0; i < 12; ++i) {
                const HermitianMatrix rho = random_state(D, 300 + i, beta);
                full.accumulate(rho);
                block.accumulate(rho);
            }
            EXPECT_NEAR(trace_norm_from_symmetric_block(block.mean()), distance_trace_norm(full, p), 1e-12);
            EXPECT_NEAR(sym_overlap_from_symmetric_block(block.mean()), distance_sym_overlap(full, p), 1e-12);
            const double lambda = symmetric_block_eigenvalue_estimate(block.mean());
            EXPECT_NEAR(lambda, (full.mean() * p.matrix.cast<Complex>()).trace().real() / p.d_sym, 1e-12);
        }
    }
}

TEST(SymmetricMoment, MergeAndLeaveOut) {
    auto basis = std::make_shared<const SymmetricBasis>(3, 2);
    SymmetricMoment all(basis), a(basis), b(basis);
    for (int i = 0; i < 10; ++i) {
        const HermitianMatrix rho = random_state(3, 900 + i, 1.0);
        all.accumulate(rho);
        (i < 4 ? a : b).accumulate(rho);
    }
    EXPECT_LE((SymmetricMoment::complement_mean(all, a) - b.mean()).cwiseAbs().maxCoeff(), 1e-14);
    a.merge(b);
    EXPECT_LE((a.mean() - all.mean()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_THROW(SymmetricMoment::complement_mean(all, all), InvalidArgument);
}

TEST(SymmetricMoment, DeviationBoundsEstimatorChange) {
    auto basis = std::make_shared<const SymmetricBasis>(3, 2);
    SymmetricMoment x(basis), y(basis);
    for (int i = 0; i < 6; ++i) x.accumulate(random_state(3, 10 + i, 0.7));
    for (int i = 0; i < 6; ++i) y.accumulate(random_state(3, 50 + i, 1.9));
    const double change = std::abs(trace_norm_from_symmetric_block(x.mean()) - trace_norm_from_symmetric_block(y.mean()));
    EXPECT_LE(change, symmetric_block_deviation(x.mean() - y.mean()) + 1e-15);
}

TEST(PairMoment, MatchesSymmetricMoment) {
    // batch 3 forces several flushes plus a partial one
    for (long long D : {1LL, 2LL, 5LL, 8LL}) {
        auto basis = std::make_shared<const SymmetricBasis>(D, 2);
        for (double beta : {0.0, 0.8, 4.0}) {
            SymmetricMoment ref(basis);
            PairMoment fast(D, 3);
            for (int i = 0; i < 11; ++i) {
                const HermitianMatrix rho = random_state(D, 70 + i, beta);
                ref.accumulate(rho);
                fast.accumulate(rho);
            }
            const SymmetricMoment got = fast.finish(basis);
            EXPECT_EQ(got.count(), 11u);
            EXPECT_LE((got.mean() - ref.mean()).cwiseAbs().maxCoeff(), 1e-13) << "D=" << D << " beta=" << beta;
            EXPECT_EQ(fast.count(), 0u);
        }
    }
}

TEST(PairMoment, Errors) {
    EXPECT_THROW(PairMoment(0), InvalidArgument);
    PairMoment m(3);
    EXPECT_THROW(m.accumulate(random_state(2, 1, 0.0)), InvalidArgument);
    EXPECT_THROW(m.finish(std::make_shared<const SymmetricBasis>(3, 3)), InvalidArgument);
    EXPECT_THROW(m.finish(std::make_shared<const SymmetricBasis>(4, 2)), InvalidArgument);
}
