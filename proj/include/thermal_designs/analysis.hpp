#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermal_designs/design.hpp"
#include "thermal_designs/ensembles.hpp"
#include "thermal_designs/spectral.hpp"

namespace thermal_designs {

enum class Estimator { TraceNorm, SymOverlap, Cycle, Bound };

std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

struct EstimatorSet {
    bool trace_norm = true;
    bool sym_overlap = true;
    bool cycle = true;
    bool bound = true;

    bool contains(Estimator e) const;
    bool empty() const { return !(trace_norm || sym_overlap || cycle || bound); }
    static EstimatorSet none() { return {false, false, false, false}; }
    static EstimatorSet only(Estimator e);
    bool operator==(const EstimatorSet&) const = default;
};

// trace_norm and sym_overlap need the dense D^t moment within the cap; the
// purity-based estimators are always available.
EstimatorSet feasible_estimators(long long D, int t, long long memory_cap);

// Uniform grid start, start + step, ..., count points.
struct BetaGrid {
    double start = 0.0;
    double step = 0.1;
    std::int64_t count = 1;

    // Points start + i*step for i = 0..round((stop-start)/step). Throws
    // InvalidArgument for an empty or negative grid.
    static BetaGrid from_range(double start, double stop, double step);
    double at(std::int64_t i) const { return start + static_cast<double>(i) * step; }
    std::vector<double> values() const;
};

struct SweepOptions {
    EstimatorSet estimators{};
    int threads = 1;
    long long memory_cap = kDefaultMemoryCap;
    int jackknife_blocks = 20;
};

struct SweepRow {
    double beta = 0.0;
    std::optional<double> trace_norm;
    std::optional<double> sym_overlap;
    std::optional<double> cycle;
    std::optional<double> bound;
    // Jackknife error of the first requested estimator, in the order above.
    // For trace_norm this is the jackknife RMS of the trace-distance bound
    // (1/2)(||dC||_1 + |tr dC|) on the leave-block-out symmetric moments.
    std::optional<double> stderr_proxy;

    std::optional<double> get(Estimator e) const;
};

struct SweepResult {
    EnsembleSpec spec;
    int t = 1;
    BetaGrid grid;
    EstimatorSet estimators;
    std::vector<SweepRow> rows;

    std::vector<double> betas() const;
    // Column of a requested estimator; throws if it was not computed.
    std::vector<double> column(Estimator e) const;
    std::vector<double> stderr_column() const;
};

// Samples and diagonalizes every Hamiltonian once, then evaluates all
// requested estimators at every grid point. Output is independent of
// `threads`: per-block partial means are merged in sample-index order.
SweepResult run_sweep(const EnsembleSpec& spec, int t, const BetaGrid& grid, const SweepOptions& options = {});

// Spectra for samples [0, spec.samples), diagonalized in parallel.
std::vector<Spectrum> sample_spectra(const EnsembleSpec& spec, int threads);
std::vector<RealVector> sample_energies(const EnsembleSpec& spec, int threads);

// ---------------------------------------------------------------------------
// Derivatives and the kink location.

// Central differences in the interior, one-sided at the endpoints.
std::vector<double> finite_difference(std::span<const double> betas, std::span<const double> values);

struct DerivativeCurve {
    std::vector<double> betas;
    std::optional<std::vector<double>> trace_norm;
    std::optional<std::vector<double>> sym_overlap;
    std::optional<std::vector<double>> cycle;
    std::optional<std::vector<double>> bound;

    const std::optional<std::vector<double>>& get(Estimator e) const;
};

DerivativeCurve numeric_derivative(const SweepResult& sweep);

struct KinkEstimate {
    double beta_c = 0.0;
    double fit_quality = 0.0;     // total squared residual of the two-piece fit
    double below_scale = 0.0;     // a in a*beta^2 below the kink
    double below_exponent = 0.0;  // free power-law fit |y| ~ beta^p below the kink
    double above_amplitude = 0.0; // b in b*exp(-c (beta - beta_c)) + d
    double above_rate = 0.0;      // c
    double above_offset = 0.0;    // d
};

// Grid search over candidate kinks: least-squares a*beta^2 on beta <= beta_c
// and b*exp(-c (beta - beta_c)) + d on beta >= beta_c. Needs >= 4 points per
// side; throws InvalidArgument otherwise.
KinkEstimate estimate_beta_c(std::span<const double> betas, std::span<const double> derivative);

// ---------------------------------------------------------------------------
// Large-beta behaviour of the global ensemble.

// Frozen per-sample spectra, so that 1 - mean(p0(beta)^t) is a deterministic
// nonincreasing function of beta.
class GroundStateBoundCurve {
  public:
    explicit GroundStateBoundCurve(std::vector<RealVector> energies);

    double operator()(double beta, int t) const;
    std::size_t samples() const { return energies_.size(); }
    long long dim() const;

  private:
    std::vector<RealVector> energies_;
};

struct ThresholdResult {
    double beta_star = 0.0;
    double temperature = 0.0;  // +infinity when the bound is already met at beta = 0
};

// Solves bound(beta*) = epsilon by bisection; T_eps = 1/beta*.
ThresholdResult threshold_temperature(const GroundStateBoundCurve& curve, int t, double epsilon);
// Samples the (global) ensemble and solves; local ensembles are rejected.
ThresholdResult threshold_temperature(const EnsembleSpec& spec, int t, double epsilon, int threads = 1);

struct ExponentialFit {
    double amplitude = 0.0;
    double rate = 0.0;
};

// Least-squares fit of log y = log A - c beta; every value must be positive.
ExponentialFit fit_exponential_decay(std::span<const double> betas, std::span<const double> values);

// ---------------------------------------------------------------------------
// Density of states.

struct DosReport {
    std::string reference;  // "semicircle" (global) or "gaussian" (local)
    std::vector<double> centers;
    std::vector<double> density;            // normalized histogram
    std::vector<double> reference_density;  // moment-matched reference at the centers
    double bin_width = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double excess_kurtosis = 0.0;
    double sup_deviation = 0.0;
};

// Pooled eigenvalue histogram over all samples of `spec`.
DosReport dos_diagnostics(const EnsembleSpec& spec, int bins, int threads = 1);
DosReport dos_from_eigenvalues(std::span<const double> pooled, int bins, bool semicircle_reference);

}  // namespace thermal_designs
