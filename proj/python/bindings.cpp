#include <cmath>
#include <limits>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermal_designs/analysis.hpp"
#include "thermal_designs/commands.hpp"
#include "thermal_designs/errors.hpp"

namespace py = pybind11;
using namespace thermal_designs;

namespace {

EnsembleSpec make_spec(const std::string& kind, int n, int d, int k, const std::string& graph, std::uint64_t seed,
                       std::int64_t samples) {
    EnsembleSpec s;
    if (kind == "global")
        s.kind = EnsembleKind::Global;
    else if (kind == "local")
        s.kind = EnsembleKind::Local;
    else
        throw InvalidArgument("kind must be 'global' or 'local'");
    if (graph == "line")
        s.graph = InteractionGraph::Line;
    else if (graph == "complete")
        s.graph = InteractionGraph::Complete;
    else
        throw InvalidArgument("graph must be 'line' or 'complete'");
    s.n = n;
    s.d = d;
    s.k = k;
    s.seed = seed;
    s.samples = samples;
    s.validate();
    return s;
}

EstimatorSet estimator_set(const std::vector<std::string>& names) {
    if (names.empty()) return EstimatorSet{};
    EstimatorSet e = EstimatorSet::none();
    for (const auto& name : names) {
        switch (estimator_from_string(name)) {
            case Estimator::TraceNorm: e.trace_norm = true; break;
            case Estimator::SymOverlap: e.sym_overlap = true; break;
            case Estimator::Cycle: e.cycle = true; break;
            case Estimator::Bound: e.bound = true; break;
        }
    }
    return e;
}

// Missing values become NaN.
std::vector<double> column(const std::vector<SweepRow>& rows, std::optional<double> SweepRow::*field) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const SweepRow& r : rows) out.push_back((r.*field).value_or(std::numeric_limits<double>::quiet_NaN()));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Thermal-state design distances for random Hamiltonian ensembles";

    static py::exception<CapacityError> capacity_error(m, "CapacityError", PyExc_MemoryError);
    static py::exception<NumericFailure> numeric_failure(m, "NumericFailure", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const CapacityError& e) {
            PyErr_SetString(capacity_error.ptr(), e.what());
        } catch (const NumericFailure& e) {
            PyErr_SetString(numeric_failure.ptr(), e.what());
        } catch (const InvalidArgument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<EnsembleSpec>(m, "EnsembleSpec")
        .def(py::init(&make_spec), py::arg("kind") = "global", py::arg("n") = 1, py::arg("d") = 2, py::arg("k") = 1,
             py::arg("graph") = "line", py::arg("seed") = 0, py::arg("samples") = 1)
        .def_property_readonly("kind", [](const EnsembleSpec& s) { return to_string(s.kind); })
        .def_property_readonly("graph", [](const EnsembleSpec& s) { return to_string(s.graph); })
        .def_readonly("n", &EnsembleSpec::n)
        .def_readonly("d", &EnsembleSpec::d)
        .def_readonly("k", &EnsembleSpec::k)
        .def_readonly("seed", &EnsembleSpec::seed)
        .def_readonly("samples", &EnsembleSpec::samples)
        .def_property_readonly("dim", &EnsembleSpec::dim)
        .def("__repr__", [](const EnsembleSpec& s) { return "EnsembleSpec(" + ensemble_to_json(s).dump() + ")"; });

    m.def("sample_hamiltonian",
          [](const EnsembleSpec& s, std::int64_t index) { return sample_hamiltonian(s, index).matrix(); },
          py::arg("spec"), py::arg("index"));
    m.def("sample_energies", &sample_energies, py::arg("spec"), py::arg("threads") = 1);
    m.def("interaction_sets",
          [](int n, int k, const std::string& graph) {
              return interaction_sets(n, k, graph == "complete" ? InteractionGraph::Complete : InteractionGraph::Line);
          },
          py::arg("n"), py::arg("k"), py::arg("graph") = "line");

    m.def("gibbs_weights", [](const RealVector& e, double beta) { return gibbs_weights(e, beta).probs; },
          py::arg("energies"), py::arg("beta"));
    m.def("purity", [](const RealVector& e, double beta, int m_) { return purity_m(gibbs_weights(e, beta).probs, m_); },
          py::arg("energies"), py::arg("beta"), py::arg("m"));
    m.def("purity_beta_derivative", py::overload_cast<const RealVector&, double, int>(&purity_beta_derivative),
          py::arg("energies"), py::arg("beta"), py::arg("m"));
    m.def("internal_energy", py::overload_cast<const RealVector&, double>(&internal_energy), py::arg("energies"),
          py::arg("beta"));

    m.def("symmetric_dimension", &symmetric_dimension, py::arg("D"), py::arg("t"));
    m.def("cycle_types",
          [](int t) {
              std::vector<std::pair<std::vector<int>, std::uint64_t>> out;
              for (const CycleType& c : cycle_types(t)) out.emplace_back(c.parts, c.multiplicity);
              return out;
          },
          py::arg("t"));
    m.def("ground_state_bound",
          [](const std::vector<double>& p0, int t) { return ground_state_bound(p0, t); }, py::arg("ground_probs"),
          py::arg("t"));

    m.def("run_sweep",
          [](const EnsembleSpec& s, int t, double start, double stop, double step,
             const std::vector<std::string>& estimators, int threads, long long memory_cap) {
              SweepOptions o;
              o.estimators = estimator_set(estimators);
              o.threads = threads;
              o.memory_cap = memory_cap;
              SweepResult r;
              {
                  py::gil_scoped_release release;
                  r = run_sweep(s, t, BetaGrid::from_range(start, stop, step), o);
              }
              py::dict out;
              out["beta"] = r.betas();
              out["trace_norm"] = column(r.rows, &SweepRow::trace_norm);
              out["sym_overlap"] = column(r.rows, &SweepRow::sym_overlap);
              out["cycle"] = column(r.rows, &SweepRow::cycle);
              out["bound"] = column(r.rows, &SweepRow::bound);
              out["stderr"] = column(r.rows, &SweepRow::stderr_proxy);
              return out;
          },
          py::arg("spec"), py::arg("t"), py::arg("start"), py::arg("stop"), py::arg("step"),
          py::arg("estimators") = std::vector<std::string>{}, py::arg("threads") = 1,
          py::arg("memory_cap") = kDefaultMemoryCap);

    m.def("estimate_beta_c",
          [](const std::vector<double>& betas, const std::vector<double>& derivative) {
              const KinkEstimate k = estimate_beta_c(betas, derivative);
              py::dict out;
              out["beta_c"] = k.beta_c;
              out["fit_quality"] = k.fit_quality;
              out["below_scale"] = k.below_scale;
              out["below_exponent"] = k.below_exponent;
              out["above_amplitude"] = k.above_amplitude;
              out["above_rate"] = k.above_rate;
              out["above_offset"] = k.above_offset;
              return out;
          },
          py::arg("betas"), py::arg("derivative"));

    m.def("threshold_temperature",
          [](const EnsembleSpec& s, int t, double epsilon, int threads) {
              const ThresholdResult r = threshold_temperature(s, t, epsilon, threads);
              return py::make_tuple(r.beta_star, r.temperature);
          },
          py::arg("spec"), py::arg("t"), py::arg("epsilon"), py::arg("threads") = 1);

    m.def("dos",
          [](const EnsembleSpec& s, int bins, int threads) {
              const DosReport r = dos_diagnostics(s, bins, threads);
              py::dict out;
              out["reference"] = r.reference;
              out["centers"] = r.centers;
              out["density"] = r.density;
              out["reference_density"] = r.reference_density;
              out["mean"] = r.mean;
              out["variance"] = r.variance;
              out["excess_kurtosis"] = r.excess_kurtosis;
              out["sup_deviation"] = r.sup_deviation;
              return out;
          },
          py::arg("spec"), py::arg("bins") = 50, py::arg("threads") = 1);
}
