#include <cmath>
#include <memory>

#include "parallel.hpp"
#include "thermal_designs/analysis.hpp"
#include "thermal_designs/errors.hpp"

namespace thermal_designs {

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::TraceNorm: return "trace_norm";
        case Estimator::SymOverlap: return "sym_overlap";
        case Estimator::Cycle: return "cycle";
        case Estimator::Bound: return "bound";
    }
    return "?";
}

Estimator estimator_from_string(const std::string& name) {
    if (name == "trace_norm") return Estimator::TraceNorm;
    if (name == "sym_overlap") return Estimator::SymOverlap;
    if (name == "cycle") return Estimator::Cycle;
    if (name == "bound") return Estimator::Bound;
    throw InvalidArgument("unknown estimator '" + name + "' (expected trace_norm, sym_overlap, cycle or bound)");
}

bool EstimatorSet::contains(Estimator e) const {
    switch (e) {
        case Estimator::TraceNorm: return trace_norm;
        case Estimator::SymOverlap: return sym_overlap;
        case Estimator::Cycle: return cycle;
        case Estimator::Bound: return bound;
    }
    return false;
}

EstimatorSet EstimatorSet::only(Estimator e) {
    EstimatorSet s = none();
    switch (e) {
        case Estimator::TraceNorm: s.trace_norm = true; break;
        case Estimator::SymOverlap: s.sym_overlap = true; break;
        case Estimator::Cycle: s.cycle = true; break;
        case Estimator::Bound: s.bound = true; break;
    }
    return s;
}

EstimatorSet feasible_estimators(long long D, int t, long long memory_cap) {
    const bool dense = dense_feasible(D, t, memory_cap);
    return {dense, dense, true, true};
}

BetaGrid BetaGrid::from_range(double start, double stop, double step) {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
        throw InvalidArgument("beta grid: non-finite bound");
    if (start < 0.0) throw InvalidArgument("beta grid: start must be >= 0");
    if (stop < start) throw InvalidArgument("beta grid is empty (stop < start)");
    BetaGrid g;
    g.start = start;
    if (stop == start) {
        g.step = step > 0.0 ? step : 1.0;
        g.count = 1;
        return g;
    }
    if (!(step > 0.0)) throw InvalidArgument("beta grid: step must be > 0");
    g.step = step;
    g.count = static_cast<std::int64_t>(std::llround((stop - start) / step)) + 1;
    // Do not overshoot stop by more than round-off.
    if (g.at(g.count - 1) > stop + 1e-9 * std::max(1.0, std::abs(stop))) --g.count;
    return g;
}

std::vector<double> BetaGrid::values() const {
    std::vector<double> v(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = at(i);
    return v;
}

std::optional<double> SweepRow::get(Estimator e) const {
    switch (e) {
        case Estimator::TraceNorm: return trace_norm;
        case Estimator::SymOverlap: return sym_overlap;
        case Estimator::Cycle: return cycle;
        case Estimator::Bound: return bound;
    }
    return std::nullopt;
}

std::vector<double> SweepResult::betas() const {
    std::vector<double> b;
    b.reserve(rows.size());
    for (const auto& r : rows) b.push_back(r.beta);
    return b;
}

std::vector<double> SweepResult::column(Estimator e) const {
    if (!estimators.contains(e)) throw InvalidArgument("sweep: estimator " + to_string(e) + " was not computed");
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(*r.get(e));
    return v;
}

std::vector<double> SweepResult::stderr_column() const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.stderr_proxy.value_or(0.0));
    return v;
}

namespace {

std::string provenance(const EnsembleSpec& spec, std::int64_t i) {
    return "seed=" + std::to_string(spec.seed) + " sample=" + std::to_string(i);
}

struct Blocks {
    int count;
    std::int64_t total;
    std::int64_t begin(int b) const { return total * b / count; }
    std::int64_t end(int b) const { return total * (b + 1) / count; }
    std::int64_t size(int b) const { return end(b) - begin(b); }
};

// Jackknife standard error of a sample mean from per-block means.
std::optional<double> jackknife_linear(const Blocks& blocks, std::span<const double> block_means, double full_mean) {
    if (blocks.count < 2) return std::nullopt;
    const double n = static_cast<double>(blocks.total);
    std::vector<double> loo(blocks.count);
    double avg = 0.0;
    for (int b = 0; b < blocks.count; ++b) {
        const double k = static_cast<double>(blocks.size(b));
        loo[b] = (n * full_mean - k * block_means[b]) / (n - k);
        avg += loo[b];
    }
    avg /= blocks.count;
    double ss = 0.0;
    for (double v : loo) ss += (v - avg) * (v - avg);
    return std::sqrt(ss * (blocks.count - 1) / blocks.count);
}

double block_mean(std::span<const double> values, const Blocks& blocks, int b) {
    double m = 0.0;
    std::int64_t k = 0;
    for (std::int64_t i = blocks.begin(b); i < blocks.end(b); ++i)
        m += (values[static_cast<std::size_t>(i)] - m) / static_cast<double>(++k);
    return m;
}

double ordered_mean(std::span<const double> values) {
    double m = 0.0;
    std::size_t k = 0;
    for (double v : values) m += (v - m) / static_cast<double>(++k);
    return m;
}

}  // namespace

std::vector<Spectrum> sample_spectra(const EnsembleSpec& spec, int threads) {
    spec.validate();
    std::vector<Spectrum> out(static_cast<std::size_t>(spec.samples));
    detail::parallel_for(spec.samples, threads, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] = eig_hermitian(sample_hamiltonian(spec, i), provenance(spec, i));
    });
    return out;
}

std::vector<RealVector> sample_energies(const EnsembleSpec& spec, int threads) {
    spec.validate();
    std::vector<RealVector> out(static_cast<std::size_t>(spec.samples));
    detail::parallel_for(spec.samples, threads, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] = eigenvalues_hermitian(sample_hamiltonian(spec, i), provenance(spec, i));
    });
    return out;
}

SweepResult run_sweep(const EnsembleSpec& spec, int t, const BetaGrid& grid, const SweepOptions& options) {
    spec.validate();
    if (t < 1 || t > kMaxTensorPower) throw InvalidArgument("sweep: t must be in [1, 20]");
    if (grid.count < 1) throw InvalidArgument("sweep: empty beta grid");
    if (grid.start < 0.0) throw InvalidArgument("sweep: beta grid must be nonnegative");
    if (grid.count > 1 && !(grid.step > 0.0)) throw InvalidArgument("sweep: beta grid step must be > 0");
    const EstimatorSet& est = options.estimators;
    if (est.empty()) throw InvalidArgument("sweep: no estimators requested");

    const long long D = spec.dim();
    const bool dense = est.trace_norm || est.sym_overlap;
    if (dense) require_dense_capacity(D, t, options.memory_cap);

    SweepResult result;
    result.spec = spec;
    result.t = t;
    result.grid = grid;
    result.estimators = est;

    const std::int64_t N = spec.samples;
    const Blocks blocks{static_cast<int>(std::min<std::int64_t>(std::max(options.jackknife_blocks, 1), N)), N};

    std::vector<Spectrum> spectra;
    std::vector<RealVector> energies;
    if (dense)
        spectra = sample_spectra(spec, options.threads);
    else
        energies = sample_energies(spec, options.threads);
    auto energies_of = [&](std::int64_t i) -> const RealVector& {
        return dense ? spectra[static_cast<std::size_t>(i)].energies : energies[static_cast<std::size_t>(i)];
    };

    std::shared_ptr<const SymmetricBasis> basis;
    if (dense) basis = std::make_shared<const SymmetricBasis>(D, t);
    const auto types = cycle_types(t);

    Eigen::MatrixXd purities;
    if (est.cycle) purities.resize(N, t);
    std::vector<double> overlap(static_cast<std::size_t>(N));
    std::vector<double> ground(static_cast<std::size_t>(N));

    for (std::int64_t g = 0; g < grid.count; ++g) {
        const double beta = grid.at(g);
        SweepRow row;
        row.beta = beta;

        std::vector<SymmetricMoment> partial;
        if (dense) partial.assign(static_cast<std::size_t>(blocks.count), SymmetricMoment(basis));

        detail::parallel_for(blocks.count, options.threads, [&](std::int64_t b) {
            std::vector<double> pur(static_cast<std::size_t>(t));
            std::optional<PairMoment> pairs;
            if (dense && t == 2) pairs.emplace(D, std::min<std::int64_t>(blocks.size(static_cast<int>(b)), 256));
            for (std::int64_t i = blocks.begin(static_cast<int>(b)); i < blocks.end(static_cast<int>(b)); ++i) {
                const GibbsWeights w = gibbs_weights(energies_of(i), beta);
                if (pairs)
                    pairs->accumulate(thermal_state(spectra[static_cast<std::size_t>(i)], w));
                else if (dense)
                    partial[static_cast<std::size_t>(b)].accumulate(
                        thermal_state(spectra[static_cast<std::size_t>(i)], w));
                if (est.cycle) {
                    for (int m = 1; m <= t; ++m) {
                        pur[static_cast<std::size_t>(m - 1)] = purity_m(w.probs, m);
                        purities(i, m - 1) = pur[static_cast<std::size_t>(m - 1)];
                    }
                    overlap[static_cast<std::size_t>(i)] = symmetric_overlap_from_purities(pur, types);
                }
                if (est.bound) ground[static_cast<std::size_t>(i)] = w.probs(0);
            }
            if (pairs) partial[static_cast<std::size_t>(b)] = pairs->finish(basis);
        });

        std::optional<SymmetricMoment> total;
        if (dense) {
            total.emplace(basis);
            for (const auto& p : partial) total->merge(p);
            if (est.trace_norm) row.trace_norm = trace_norm_from_symmetric_block(total->mean());
            if (est.sym_overlap) row.sym_overlap = sym_overlap_from_symmetric_block(total->mean());
        }
        if (est.cycle) row.cycle = distance_cycle_expansion(purities, t);
        if (est.bound) row.bound = ground_state_bound(ground, t);

        // Error proxy of the first requested estimator.
        if (blocks.count >= 2) {
            std::vector<double> means(static_cast<std::size_t>(blocks.count));
            if (est.trace_norm) {
                std::vector<double> dev(static_cast<std::size_t>(blocks.count));
                detail::parallel_for(blocks.count, options.threads, [&](std::int64_t b) {
                    const ComplexMatrix loo =
                        SymmetricMoment::complement_mean(*total, partial[static_cast<std::size_t>(b)]);
                    dev[static_cast<std::size_t>(b)] = symmetric_block_deviation(loo - total->mean());
                });
                double ss = 0.0;
                for (double v : dev) ss += v * v;
                row.stderr_proxy = std::sqrt(ss * (blocks.count - 1) / blocks.count);
            } else if (est.sym_overlap) {
                for (int b = 0; b < blocks.count; ++b)
                    means[static_cast<std::size_t>(b)] = partial[static_cast<std::size_t>(b)].mean().trace().real();
                row.stderr_proxy = jackknife_linear(blocks, means, total->mean().trace().real());
            } else if (est.cycle) {
                for (int b = 0; b < blocks.count; ++b)
                    means[static_cast<std::size_t>(b)] = block_mean(overlap, blocks, b);
                row.stderr_proxy = jackknife_linear(blocks, means, ordered_mean(overlap));
            } else {
                std::vector<double> pt(static_cast<std::size_t>(N));
                for (std::int64_t i = 0; i < N; ++i)
                    pt[static_cast<std::size_t>(i)] = std::exp(t * std::log(ground[static_cast<std::size_t>(i)]));
                for (int b = 0; b < blocks.count; ++b) means[static_cast<std::size_t>(b)] = block_mean(pt, blocks, b);
                row.stderr_proxy = jackknife_linear(blocks, means, ordered_mean(pt));
            }
        }
        result.rows.push_back(row);
    }
    return result;
}

}  // namespace thermal_designs
