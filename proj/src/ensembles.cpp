#include "thermal_designs/ensembles.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "thermal_designs/errors.hpp"

namespace thermal_designs {

namespace {

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

long long checked_pow(long long base, int exponent) {
    if (exponent < 0) throw InvalidArgument("negative exponent");
    long long r = 1;
    for (int i = 0; i < exponent; ++i) {
        if (base != 0 && r > std::numeric_limits<long long>::max() / base)
            throw InvalidArgument("dimension " + std::to_string(base) + "^" + std::to_string(exponent) +
                                  " overflows");
        r *= base;
    }
    return r;
}

long long EnsembleSpec::dim() const { return checked_pow(d, n); }

void EnsembleSpec::validate() const {
    if (n < 1) throw InvalidArgument("ensemble: n must be >= 1, got " + std::to_string(n));
    if (d < 2) throw InvalidArgument("ensemble: d must be >= 2, got " + std::to_string(d));
    if (samples < 1) throw InvalidArgument("ensemble: samples must be >= 1");
    if (kind == EnsembleKind::Local && (k < 1 || k > n))
        throw InvalidArgument("ensemble: locality k=" + std::to_string(k) + " outside [1, n=" +
                              std::to_string(n) + "]");
    // Matrices are dense; refuse dimensions that cannot be indexed sanely.
    if (dim() > (1LL << 20)) throw InvalidArgument("ensemble: dimension d^n too large for dense storage");
}

std::string to_string(EnsembleKind kind) { return kind == EnsembleKind::Global ? "global" : "local"; }

std::string to_string(InteractionGraph graph) { return graph == InteractionGraph::Line ? "line" : "complete"; }

EnsembleSpec ensemble_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidArgument("ensemble: expected a JSON object");
    static const std::set<std::string> known{"kind", "n", "d", "k", "graph", "seed", "samples"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw InvalidArgument("ensemble: unknown key '" + key + "'");

    auto require = [&](const char* key) -> const nlohmann::json& {
        if (!j.contains(key)) throw InvalidArgument(std::string("ensemble: missing key '") + key + "'");
        return j.at(key);
    };
    auto as_int = [](const nlohmann::json& v, const char* key) -> long long {
        if (!v.is_number_integer())
            throw InvalidArgument(std::string("ensemble: '") + key + "' must be an integer");
        return v.get<long long>();
    };

    EnsembleSpec spec;
    const auto& kind = require("kind");
    if (kind == "global")
        spec.kind = EnsembleKind::Global;
    else if (kind == "local")
        spec.kind = EnsembleKind::Local;
    else
        throw InvalidArgument("ensemble: kind must be \"global\" or \"local\"");

    spec.n = static_cast<int>(as_int(require("n"), "n"));
    spec.d = static_cast<int>(as_int(require("d"), "d"));
    const auto& seed = require("seed");
    if (!seed.is_number_integer()) throw InvalidArgument("ensemble: 'seed' must be an integer");
    spec.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>()
                                          : static_cast<std::uint64_t>(seed.get<std::int64_t>());
    spec.samples = as_int(require("samples"), "samples");

    if (spec.kind == EnsembleKind::Local) {
        spec.k = static_cast<int>(as_int(require("k"), "k"));
        const auto& graph = require("graph");
        if (graph == "line")
            spec.graph = InteractionGraph::Line;
        else if (graph == "complete")
            spec.graph = InteractionGraph::Complete;
        else
            throw InvalidArgument("ensemble: graph must be \"line\" or \"complete\"");
    } else {
        // Accepted for symmetry with the local schema but not used.
        if (j.contains("k")) as_int(j.at("k"), "k");
        if (j.contains("graph") && j.at("graph") != "line" && j.at("graph") != "complete")
            throw InvalidArgument("ensemble: graph must be \"line\" or \"complete\"");
    }
    spec.validate();
    return spec;
}

nlohmann::json ensemble_to_json(const EnsembleSpec& spec) {
    nlohmann::json j;
    j["kind"] = to_string(spec.kind);
    j["n"] = spec.n;
    j["d"] = spec.d;
    if (spec.kind == EnsembleKind::Local) {
        j["k"] = spec.k;
        j["graph"] = to_string(spec.graph);
    }
    j["seed"] = spec.seed;
    j["samples"] = spec.samples;
    return j;
}

Rng substream(std::uint64_t master_seed, std::uint64_t sample, std::uint64_t term) {
    std::seed_seq seq{lo32(master_seed), hi32(master_seed), lo32(sample),
                      hi32(sample),      lo32(term),        hi32(term)};
    return Rng(seq);
}

HermitianMatrix sample_gue(Eigen::Index L, Rng& rng) {
    if (L < 1) throw InvalidArgument("sample_gue: dimension must be >= 1");
    const double diag_sd = 1.0 / std::sqrt(static_cast<double>(L));
    const double off_sd = 1.0 / std::sqrt(2.0 * static_cast<double>(L));
    std::normal_distribution<double> normal(0.0, 1.0);

    ComplexMatrix upper = ComplexMatrix::Zero(L, L);
    for (Eigen::Index i = 0; i < L; ++i) {
        upper(i, i) = Complex(diag_sd * normal(rng), 0.0);
        for (Eigen::Index j = i + 1; j < L; ++j) {
            const double re = off_sd * normal(rng);
            const double im = off_sd * normal(rng);
            upper(i, j) = Complex(re, im);
        }
    }
    return HermitianMatrix::from_upper(std::move(upper));
}

std::vector<SiteSet> interaction_sets(int n, int k, InteractionGraph graph) {
    if (n < 1) throw InvalidArgument("interaction_sets: n must be >= 1");
    if (k < 1 || k > n)
        throw InvalidArgument("interaction_sets: invalid locality k=" + std::to_string(k) +
                              " for n=" + std::to_string(n));
    std::vector<SiteSet> sets;
    if (graph == InteractionGraph::Line) {
        for (int start = 0; start + k <= n; ++start) {
            SiteSet s(k);
            for (int j = 0; j < k; ++j) s[j] = start + j;
            sets.push_back(std::move(s));
        }
        return sets;
    }
    // Lexicographic enumeration of k-subsets.
    SiteSet s(k);
    for (int j = 0; j < k; ++j) s[j] = j;
    while (true) {
        sets.push_back(s);
        int pos = k - 1;
        while (pos >= 0 && s[pos] == n - k + pos) --pos;
        if (pos < 0) break;
        ++s[pos];
        for (int j = pos + 1; j < k; ++j) s[j] = s[j - 1] + 1;
    }
    return sets;
}

HermitianMatrix embed_local_term(const HermitianMatrix& h, const SiteSet& sites, int n, int d) {
    if (n < 1 || d < 2) throw InvalidArgument("embed_local_term: need n >= 1 and d >= 2");
    const int k = static_cast<int>(sites.size());
    if (k < 1 || k > n) throw InvalidArgument("embed_local_term: invalid site set size");
    std::vector<bool> used(n, false);
    for (int s : sites) {
        if (s < 0 || s >= n || used[s]) throw InvalidArgument("embed_local_term: sites must be distinct and < n");
        used[s] = true;
    }
    const long long local_dim = checked_pow(d, k);
    if (h.dim() != local_dim)
        throw InvalidArgument("embed_local_term: term dimension " + std::to_string(h.dim()) +
                              " does not match d^k = " + std::to_string(local_dim));

    const long long full_dim = checked_pow(d, n);
    std::vector<int> rest_sites;
    for (int s = 0; s < n; ++s)
        if (!used[s]) rest_sites.push_back(s);

    // Place value of each site in the full index (site 0 most significant).
    std::vector<long long> weight(n);
    for (int s = 0; s < n; ++s) weight[s] = checked_pow(d, n - 1 - s);

    auto spread = [&](long long value, const std::vector<int>& where) {
        long long idx = 0;
        for (int j = static_cast<int>(where.size()) - 1; j >= 0; --j) {
            idx += (value % d) * weight[where[j]];
            value /= d;
        }
        return idx;
    };

    std::vector<long long> local_offset(local_dim);
    for (long long a = 0; a < local_dim; ++a) local_offset[a] = spread(a, sites);

    ComplexMatrix out = ComplexMatrix::Zero(full_dim, full_dim);
    const long long rest_dim = full_dim / local_dim;
    for (long long r = 0; r < rest_dim; ++r) {
        const long long base = spread(r, rest_sites);
        for (long long a = 0; a < local_dim; ++a)
            for (long long b = 0; b < local_dim; ++b)
                out(base + local_offset[a], base + local_offset[b]) = h(a, b);
    }
    return HermitianMatrix::from_upper(std::move(out));
}

HermitianMatrix sample_hamiltonian(const EnsembleSpec& spec, std::int64_t index) {
    spec.validate();
    if (index < 0 || index >= spec.samples)
        throw InvalidArgument("sample_hamiltonian: index " + std::to_string(index) + " outside [0, samples)");
    const auto sample = static_cast<std::uint64_t>(index);
    if (spec.kind == EnsembleKind::Global) {
        Rng rng = substream(spec.seed, sample, 0);
        return sample_gue(spec.dim(), rng);
    }
    const auto sets = interaction_sets(spec.n, spec.k, spec.graph);
    const long long local_dim = checked_pow(spec.d, spec.k);
    HermitianMatrix total = HermitianMatrix::zero(spec.dim());
    for (std::size_t e = 0; e < sets.size(); ++e) {
        Rng rng = substream(spec.seed, sample, e);
        total += embed_local_term(sample_gue(local_dim, rng), sets[e], spec.n, spec.d);
    }
    return total;
}

}  // namespace thermal_designs
