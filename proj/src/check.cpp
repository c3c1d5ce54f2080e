#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>

#include "thermal_designs/commands.hpp"
#include "thermal_designs/errors.hpp"

namespace thermal_designs {

namespace {

struct Checker {
    std::ostream& log;
    int failures = 0;

    void run(const std::string& name, const std::function<std::string()>& body) {
        std::string detail;
        bool ok = false;
        try {
            detail = body();
            ok = detail.empty() || detail.front() != '!';
            if (!ok) detail.erase(0, 1);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        log << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) log << "  (" << detail << ")";
        log << '\n';
        failures += ok ? 0 : 1;
    }
};

// Detail strings prefixed with '!' mark a failure.
std::string verdict(bool ok, const std::string& detail) { return (ok ? "" : "!") + detail; }

std::string num(double v) { return format_number(v); }

}  // namespace

int cmd_check(std::ostream& log, int threads) {
    Checker c{log};

    c.run("hamiltonians are hermitian", [] {
        double worst = 0.0;
        for (const EnsembleSpec& s : {EnsembleSpec{EnsembleKind::Global, 3, 2, 1, InteractionGraph::Line, 5, 4},
                                      EnsembleSpec{EnsembleKind::Local, 3, 2, 2, InteractionGraph::Complete, 5, 4}})
            for (std::int64_t i = 0; i < s.samples; ++i) worst = std::max(worst, sample_hamiltonian(s, i).hermiticity_defect());
        return verdict(worst == 0.0, "max defect " + num(worst));
    });

    c.run("eigendecomposition reconstructs H", [] {
        const EnsembleSpec s{EnsembleKind::Local, 4, 2, 2, InteractionGraph::Line, 11, 3};
        double worst = 0.0;
        for (std::int64_t i = 0; i < s.samples; ++i) {
            const HermitianMatrix h = sample_hamiltonian(s, i);
            worst = std::max(worst, reconstruction_residual(h, eig_hermitian(h)));
        }
        return verdict(worst <= 1e-10, "max residual " + num(worst));
    });

    c.run("purity derivative matches finite differences", [] {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> beta_dist(0.1, 4.0);
        std::uniform_int_distribution<int> m_dist(2, 6);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const EnsembleSpec s{EnsembleKind::Global, 3, 2, 1, InteractionGraph::Line, 100u + trial, 1};
            const Spectrum sp = eig_hermitian(sample_hamiltonian(s, 0));
            const double beta = beta_dist(rng);
            const int m = m_dist(rng);
            const double h = 1e-5;
            const double fd = (purity_m(sp, beta + h, m) - purity_m(sp, beta - h, m)) / (2 * h);
            const double an = purity_beta_derivative(sp, beta, m);
            worst = std::max(worst, std::abs(an - fd) / std::max(std::abs(fd), 1e-12));
        }
        return verdict(worst <= 1e-6, "max relative error " + num(worst));
    });

    c.run("projector is an orthogonal projector of rank d_sym", [] {
        const SymProjector p = build_sym_projector(3, 3);
        const double idem = (p.matrix * p.matrix - p.matrix).cwiseAbs().maxCoeff();
        const double tr = p.matrix.trace();
        return verdict(idem <= 1e-12 && std::abs(tr - 10.0) <= 1e-12, "idempotency " + num(idem) + ", trace " + num(tr));
    });

    c.run("beta = 0 value equals 1 - d_sym/D^t", [threads] {
        const EnsembleSpec s{EnsembleKind::Global, 2, 2, 1, InteractionGraph::Line, 1, 8};
        SweepOptions o;
        o.threads = threads;
        const SweepResult r = run_sweep(s, 2, BetaGrid{0.0, 0.1, 1}, o);
        double worst = 0.0;
        for (Estimator e : {Estimator::TraceNorm, Estimator::SymOverlap, Estimator::Cycle})
            worst = std::max(worst, std::abs(*r.rows[0].get(e) - 0.375));
        const double bound_dev = std::abs(*r.rows[0].bound - 0.9375);
        return verdict(worst <= 1e-6 && bound_dev <= 1e-12, "max deviation " + num(worst) + ", bound " + num(bound_dev));
    });

    c.run("cycle expansion equals symmetric overlap; full and compressed moments agree", [threads] {
        double worst_cycle = 0.0, worst_block = 0.0, worst_sandwich = 0.0;
        for (int t = 2; t <= 3; ++t) {
            const EnsembleSpec s{EnsembleKind::Local, 2, 2, 1, InteractionGraph::Line, 40u + t, 30};
            const SymProjector proj = build_sym_projector(4, t);
            const auto spectra = sample_spectra(s, threads);
            for (double beta : {0.3, 1.7}) {
                MomentAccumulator acc(4, t);
                Eigen::MatrixXd pur(static_cast<Eigen::Index>(spectra.size()), t);
                for (std::size_t i = 0; i < spectra.size(); ++i) {
                    acc.accumulate(thermal_state(spectra[i], beta));
                    const auto w = gibbs_weights(spectra[i], beta);
                    for (int m = 1; m <= t; ++m) pur(static_cast<Eigen::Index>(i), m - 1) = purity_m(w.probs, m);
                }
                const SweepResult r = run_sweep(s, t, BetaGrid{beta, 0.1, 1}, SweepOptions{.threads = threads});
                const SweepRow& row = r.rows[0];
                worst_cycle = std::max(worst_cycle, std::abs(distance_cycle_expansion(pur, t) - distance_sym_overlap(acc, proj)));
                worst_block = std::max(worst_block, std::abs(*row.trace_norm - distance_trace_norm(acc, proj)));
                worst_sandwich = std::max(worst_sandwich, *row.sym_overlap - *row.trace_norm);
            }
        }
        return verdict(worst_cycle <= 1e-10 && worst_block <= 1e-10 && worst_sandwich <= 1e-10,
                       "cycle " + num(worst_cycle) + ", block " + num(worst_block) + ", sandwich " + num(worst_sandwich));
    });

    c.run("thermal states are a 1-design", [threads] {
        const EnsembleSpec s{EnsembleKind::Local, 3, 2, 2, InteractionGraph::Line, 3, 400};
        SweepOptions o;
        o.threads = threads;
        o.estimators = EstimatorSet::only(Estimator::TraceNorm);
        const SweepResult r = run_sweep(s, 1, BetaGrid{0.5, 1.5, 2}, o);
        bool ok = true;
        std::string detail;
        for (const SweepRow& row : r.rows) {
            ok = ok && *row.trace_norm <= 5.0 * *row.stderr_proxy;
            detail += "T=" + num(*row.trace_norm) + " se=" + num(*row.stderr_proxy) + " ";
        }
        return verdict(ok, detail);
    });

    c.run("sweeps do not depend on the thread count", [threads] {
        const EnsembleSpec s{EnsembleKind::Local, 3, 2, 2, InteractionGraph::Line, 9, 60};
        const BetaGrid g{0.0, 0.5, 4};
        const SweepResult a = run_sweep(s, 2, g, SweepOptions{.threads = 1});
        const SweepResult b = run_sweep(s, 2, g, SweepOptions{.threads = std::max(threads, 3)});
        RunConfig cfg;
        cfg.ensemble = s;
        return verdict(format_csv(sweep_table(a, cfg)) == format_csv(sweep_table(b, cfg)), "");
    });

    c.run("threshold temperature decreases with t", [threads] {
        const GroundStateBoundCurve curve(
            sample_energies(EnsembleSpec{EnsembleKind::Global, 2, 2, 1, InteractionGraph::Line, 4, 200}, threads));
        double prev = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (int t : {4, 8, 16}) {
            const double temp = threshold_temperature(curve, t, 0.2).temperature;
            ok = ok && temp <= prev;
            prev = temp;
        }
        return verdict(ok, "");
    });

    log << (c.failures == 0 ? "all checks passed" : std::to_string(c.failures) + " check(s) failed") << '\n';
    return c.failures;
}

}  // namespace thermal_designs
