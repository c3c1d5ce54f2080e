#include <cmath>
#include <limits>
#include <sstream>

#include "thermal_designs/analysis.hpp"
#include "thermal_designs/errors.hpp"

namespace thermal_designs {

std::vector<double> finite_difference(std::span<const double> betas, std::span<const double> values) {
    const std::size_t n = betas.size();
    if (values.size() != n) throw InvalidArgument("derivative: beta and value columns differ in length");
    if (n < 3) throw InvalidArgument("derivative: need at least 3 rows, got " + std::to_string(n));
    std::vector<double> out(n);
    out[0] = (values[1] - values[0]) / (betas[1] - betas[0]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (values[i + 1] - values[i - 1]) / (betas[i + 1] - betas[i - 1]);
    out[n - 1] = (values[n - 1] - values[n - 2]) / (betas[n - 1] - betas[n - 2]);
    return out;
}

const std::optional<std::vector<double>>& DerivativeCurve::get(Estimator e) const {
    switch (e) {
        case Estimator::TraceNorm: return trace_norm;
        case Estimator::SymOverlap: return sym_overlap;
        case Estimator::Cycle: return cycle;
        case Estimator::Bound: break;
    }
    return bound;
}

DerivativeCurve numeric_derivative(const SweepResult& sweep) {
    if (sweep.rows.size() < 3)
        throw InvalidArgument("derivative: need at least 3 rows, got " + std::to_string(sweep.rows.size()));
    DerivativeCurve out;
    out.betas = sweep.betas();
    auto fill = [&](Estimator e, std::optional<std::vector<double>>& slot) {
        if (sweep.estimators.contains(e)) slot = finite_difference(out.betas, sweep.column(e));
    };
    fill(Estimator::TraceNorm, out.trace_norm);
    fill(Estimator::SymOverlap, out.sym_overlap);
    fill(Estimator::Cycle, out.cycle);
    fill(Estimator::Bound, out.bound);
    return out;
}

namespace {

struct ExpFit {
    double amplitude = 0.0, rate = 0.0, offset = 0.0, residual = std::numeric_limits<double>::infinity();
};

// y = b exp(-c (x - x0)) + d for fixed c: linear least squares in (b, d).
ExpFit fit_fixed_rate(std::span<const double> x, std::span<const double> y, double x0, double c) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = std::exp(-c * (x[static_cast<std::size_t>(i)] - x0));
        A(i, 1) = 1.0;
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
    ExpFit f;
    f.amplitude = coef(0);
    f.offset = coef(1);
    f.rate = c;
    f.residual = (A * coef - rhs).squaredNorm();
    return f;
}

// Rate scanned on a log grid, then refined by golden-section search.
ExpFit fit_shifted_exponential(std::span<const double> x, std::span<const double> y, double x0) {
    constexpr int kGrid = 160;
    const double log_lo = std::log(1e-2), log_hi = std::log(1e2);
    ExpFit best;
    int best_k = 0;
    for (int k = 0; k <= kGrid; ++k) {
        const double c = std::exp(log_lo + (log_hi - log_lo) * k / kGrid);
        const ExpFit f = fit_fixed_rate(x, y, x0, c);
        if (f.residual < best.residual) {
            best = f;
            best_k = k;
        }
    }
    double a = log_lo + (log_hi - log_lo) * std::max(best_k - 1, 0) / kGrid;
    double b = log_lo + (log_hi - log_lo) * std::min(best_k + 1, kGrid) / kGrid;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
        const double m1 = b - phi * (b - a), m2 = a + phi * (b - a);
        const ExpFit f1 = fit_fixed_rate(x, y, x0, std::exp(m1));
        const ExpFit f2 = fit_fixed_rate(x, y, x0, std::exp(m2));
        if (f1.residual < best.residual) best = f1;
        if (f2.residual < best.residual) best = f2;
        if (f1.residual < f2.residual)
            b = m2;
        else
            a = m1;
    }
    return best;
}

}  // namespace

KinkEstimate estimate_beta_c(std::span<const double> betas, std::span<const double> derivative) {
    const std::size_t n = betas.size();
    if (derivative.size() != n) throw InvalidArgument("kink: beta and derivative columns differ in length");
    constexpr std::size_t kMinSide = 4;
    if (n < 2 * kMinSide - 1)
        throw InvalidArgument("kink: need at least 4 points on each side of a candidate, got " + std::to_string(n) +
                              " points");

    KinkEstimate best;
    double best_residual = std::numeric_limits<double>::infinity();
    // Candidate knot j: below = [0, j], above = [j, n).
    for (std::size_t j = kMinSide - 1; j + kMinSide <= n; ++j) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i <= j; ++i) {
            const double b2 = betas[i] * betas[i];
            num += derivative[i] * b2;
            den += b2 * b2;
        }
        const double a = den > 0.0 ? num / den : 0.0;
        double below = 0.0;
        for (std::size_t i = 0; i <= j; ++i) {
            const double r = derivative[i] - a * betas[i] * betas[i];
            below += r * r;
        }
        const ExpFit above = fit_shifted_exponential(betas.subspan(j), derivative.subspan(j), betas[j]);
        const double total = below + above.residual;
        if (total < best_residual) {
            best_residual = total;
            best.beta_c = betas[j];
            best.fit_quality = total;
            best.below_scale = a;
            best.above_amplitude = above.amplitude;
            best.above_rate = above.rate;
            best.above_offset = above.offset;
        }
    }

    // Free power-law exponent on the below side: log|y| = log|a| + p log beta.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < n && betas[i] <= best.beta_c; ++i) {
        if (betas[i] <= 0.0 || derivative[i] == 0.0) continue;
        const double lx = std::log(betas[i]), ly = std::log(std::abs(derivative[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m >= 2 && m * sxx - sx * sx > 0.0) best.below_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return best;
}

ExponentialFit fit_exponential_decay(std::span<const double> betas, std::span<const double> values) {
    if (betas.size() != values.size() || betas.size() < 2)
        throw InvalidArgument("exponential fit: need at least two matching points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(values[i] > 0.0)) throw InvalidArgument("exponential fit: values must be positive");
        const double y = std::log(values[i]);
        sx += betas[i];
        sy += y;
        sxx += betas[i] * betas[i];
        sxy += betas[i] * y;
    }
    const double denom = m * sxx - sx * sx;
    if (!(denom > 0.0)) throw InvalidArgument("exponential fit: degenerate beta values");
    const double slope = (m * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / m;
    return {std::exp(intercept), -slope};
}

// ---------------------------------------------------------------------------

GroundStateBoundCurve::GroundStateBoundCurve(std::vector<RealVector> energies) : energies_(std::move(energies)) {
    if (energies_.empty()) throw InvalidArgument("ground-state bound: no samples");
}

long long GroundStateBoundCurve::dim() const { return energies_.front().size(); }

double GroundStateBoundCurve::operator()(double beta, int t) const {
    if (t < 1) throw InvalidArgument("ground-state bound: t must be >= 1");
    double mean = 0.0;
    std::size_t k = 0;
    for (const auto& e : energies_) {
        const double pt = std::exp(static_cast<double>(t) * log_ground_probability(e, beta));
        mean += (pt - mean) / static_cast<double>(++k);
    }
    return 1.0 - mean;
}

ThresholdResult threshold_temperature(const GroundStateBoundCurve& curve, int t, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("threshold: epsilon must lie in (0, 1)");
    const double at_zero = curve(0.0, t);
    if (epsilon >= at_zero) return {0.0, std::numeric_limits<double>::infinity()};

    constexpr double kMaxBeta = 1e6;
    double lo = 0.0, hi = 1.0;
    while (curve(hi, t) > epsilon) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxBeta) {
            std::ostringstream msg;
            msg << "threshold: epsilon=" << epsilon << " unreachable for t=" << t << " on beta in [0, " << kMaxBeta
                << "]; bound(0)=" << at_zero << ", bound(" << kMaxBeta << ")=" << curve(kMaxBeta, t);
            throw NumericFailure(msg.str());
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (curve(mid, t) > epsilon)
            lo = mid;
        else
            hi = mid;
    }
    const double beta_star = 0.5 * (lo + hi);
    return {beta_star, 1.0 / beta_star};
}

ThresholdResult threshold_temperature(const EnsembleSpec& spec, int t, double epsilon, int threads) {
    if (spec.kind != EnsembleKind::Global)
        throw InvalidArgument("threshold: only the global ensemble is supported");
    return threshold_temperature(GroundStateBoundCurve(sample_energies(spec, threads)), t, epsilon);
}

}  // namespace thermal_designs
