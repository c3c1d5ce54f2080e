#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermal_designs/hermitian.hpp"

namespace thermal_designs {

enum class EnsembleKind { Global, Local };
enum class InteractionGraph { Line, Complete };

// Full description of a random-Hamiltonian ensemble. For the global kind the
// Hamiltonian is a single GUE(d^n) draw and `k`/`graph` are unused.
struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::Global;
    int n = 1;
    int d = 2;
    int k = 1;
    InteractionGraph graph = InteractionGraph::Line;
    std::uint64_t seed = 0;
    std::int64_t samples = 1;

    // Total Hilbert-space dimension d^n.
    long long dim() const;
    // Throws InvalidArgument describing the first violated constraint.
    void validate() const;

    bool operator==(const EnsembleSpec&) const = default;
};

// JSON keys: kind ("global"|"local"), n, d, k, graph ("line"|"complete"),
// seed, samples. Unknown keys are rejected; k and graph are required for the
// local kind only.
EnsembleSpec ensemble_from_json(const nlohmann::json& j);
nlohmann::json ensemble_to_json(const EnsembleSpec& spec);

std::string to_string(EnsembleKind kind);
std::string to_string(InteractionGraph graph);

// Integer power with overflow detection (throws InvalidArgument).
long long checked_pow(long long base, int exponent);

using Rng = std::mt19937_64;

// Substream for (master seed, sample index, term index). The key words are
// mixed through std::seed_seq, so every stream is a pure function of the key
// and independent of the order in which streams are created.
Rng substream(std::uint64_t master_seed, std::uint64_t sample, std::uint64_t term);

// GUE(L): density proportional to exp(-(L/2) tr H^2). Diagonal entries have
// variance 1/L, real and imaginary parts of off-diagonal entries 1/(2L).
HermitianMatrix sample_gue(Eigen::Index L, Rng& rng);

using SiteSet = std::vector<int>;

// Line: the n-k+1 windows of k consecutive sites. Complete: every size-k
// subset in lexicographic order.
std::vector<SiteSet> interaction_sets(int n, int k, InteractionGraph graph);

// h acting on the sites in `sites` (in that order) and identity elsewhere.
// Site 0 is the most significant digit of the basis index.
HermitianMatrix embed_local_term(const HermitianMatrix& h, const SiteSet& sites, int n, int d);

// Deterministic in (spec, index). Local terms are summed unrescaled; term e
// of sample i is drawn from substream(seed, i, e).
HermitianMatrix sample_hamiltonian(const EnsembleSpec& spec, std::int64_t index);

}  // namespace thermal_designs
