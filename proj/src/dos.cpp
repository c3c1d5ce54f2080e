#include <algorithm>
#include <cmath>
#include <numbers>

#include "thermal_designs/analysis.hpp"
#include "thermal_designs/errors.hpp"

namespace thermal_designs {

DosReport dos_from_eigenvalues(std::span<const double> pooled, int bins, bool semicircle_reference) {
    if (bins < 10) throw InvalidArgument("dos: need at least 10 bins, got " + std::to_string(bins));
    if (pooled.empty()) throw InvalidArgument("dos: no eigenvalues");

    DosReport rep;
    rep.reference = semicircle_reference ? "semicircle" : "gaussian";
    const double n = static_cast<double>(pooled.size());

    double mean = 0.0;
    for (double e : pooled) mean += e;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double e : pooled) {
        const double c2 = (e - mean) * (e - mean);
        m2 += c2;
        m4 += c2 * c2;
    }
    m2 /= n;
    m4 /= n;
    rep.mean = mean;
    rep.variance = m2;
    rep.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    const auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi <= lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    rep.bin_width = (hi - lo) / bins;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double e : pooled) {
        auto b = static_cast<long long>((e - lo) / rep.bin_width);
        b = std::clamp<long long>(b, 0, bins - 1);
        counts[static_cast<std::size_t>(b)] += 1.0;
    }

    const double sigma = std::sqrt(m2);
    const double radius = 2.0 * sigma;
    rep.centers.resize(static_cast<std::size_t>(bins));
    rep.density.resize(static_cast<std::size_t>(bins));
    rep.reference_density.resize(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        const auto i = static_cast<std::size_t>(b);
        const double x = lo + (b + 0.5) * rep.bin_width;
        rep.centers[i] = x;
        rep.density[i] = counts[i] / (n * rep.bin_width);
        double ref = 0.0;
        if (sigma > 0.0) {
            const double u = x - mean;
            if (semicircle_reference) {
                if (std::abs(u) < radius)
                    ref = 2.0 / (std::numbers::pi * radius * radius) * std::sqrt(radius * radius - u * u);
            } else {
                ref = std::exp(-0.5 * u * u / m2) / (sigma * std::sqrt(2.0 * std::numbers::pi));
            }
        }
        rep.reference_density[i] = ref;
        rep.sup_deviation = std::max(rep.sup_deviation, std::abs(rep.density[i] - ref));
    }
    return rep;
}

DosReport dos_diagnostics(const EnsembleSpec& spec, int bins, int threads) {
    if (bins < 10) throw InvalidArgument("dos: need at least 10 bins, got " + std::to_string(bins));
    const auto energies = sample_energies(spec, threads);
    std::vector<double> pooled;
    pooled.reserve(energies.size() * static_cast<std::size_t>(spec.dim()));
    for (const auto& e : energies) pooled.insert(pooled.end(), e.data(), e.data() + e.size());
    return dos_from_eigenvalues(pooled, bins, spec.kind == EnsembleKind::Global);
}

}  // namespace thermal_designs
