#include "thermal_designs/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "thermal_designs/errors.hpp"

namespace thermal_designs {

using nlohmann::json;

namespace {

const std::vector<std::string> kSweepHeader{"beta", "trace_norm", "sym_overlap", "cycle", "bound", "stderr"};
constexpr Estimator kEstimatorOrder[] = {Estimator::TraceNorm, Estimator::SymOverlap, Estimator::Cycle,
                                         Estimator::Bound};

int json_int(const json& v, const char* key) {
    if (!v.is_number_integer()) throw InvalidArgument(std::string("config: '") + key + "' must be an integer");
    return v.get<int>();
}

double json_number(const json& v, const char* key) {
    if (!v.is_number()) throw InvalidArgument(std::string("config: '") + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("config: expected a JSON object");
    static const std::set<std::string> known{"ensemble", "t",          "beta_grid", "estimators", "output",
                                             "threads",  "memory_cap", "t_list",    "epsilons",   "bins"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw InvalidArgument("config: unknown key '" + key + "'");
    if (!j.contains("ensemble")) throw InvalidArgument("config: missing key 'ensemble'");

    RunConfig c;
    c.ensemble = ensemble_from_json(j.at("ensemble"));
    if (j.contains("t")) c.t = json_int(j.at("t"), "t");
    if (j.contains("beta_grid")) {
        const json& g = j.at("beta_grid");
        if (!g.is_object()) throw InvalidArgument("config: 'beta_grid' must be an object");
        for (const auto& [key, _] : g.items())
            if (key != "start" && key != "stop" && key != "step")
                throw InvalidArgument("config: unknown beta_grid key '" + key + "'");
        BetaRange r;
        if (!g.contains("start") || !g.contains("stop"))
            throw InvalidArgument("config: beta_grid needs 'start' and 'stop'");
        r.start = json_number(g.at("start"), "beta_grid.start");
        r.stop = json_number(g.at("stop"), "beta_grid.stop");
        if (g.contains("step")) r.step = json_number(g.at("step"), "beta_grid.step");
        c.beta_grid = r;
    }
    if (j.contains("estimators")) {
        const json& e = j.at("estimators");
        if (!e.is_array()) throw InvalidArgument("config: 'estimators' must be an array");
        EstimatorSet set = EstimatorSet::none();
        for (const auto& name : e) {
            if (!name.is_string()) throw InvalidArgument("config: estimator names must be strings");
            switch (estimator_from_string(name.get<std::string>())) {
                case Estimator::TraceNorm: set.trace_norm = true; break;
                case Estimator::SymOverlap: set.sym_overlap = true; break;
                case Estimator::Cycle: set.cycle = true; break;
                case Estimator::Bound: set.bound = true; break;
            }
        }
        c.estimators = set;
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw InvalidArgument("config: 'output' must be a string");
        c.output = j.at("output").get<std::string>();
    }
    if (j.contains("threads")) c.threads = json_int(j.at("threads"), "threads");
    if (j.contains("memory_cap")) {
        if (!j.at("memory_cap").is_number_integer()) throw InvalidArgument("config: 'memory_cap' must be an integer");
        c.memory_cap = j.at("memory_cap").get<long long>();
        if (c.memory_cap < 1) throw InvalidArgument("config: 'memory_cap' must be >= 1");
    }
    if (j.contains("t_list")) {
        if (!j.at("t_list").is_array()) throw InvalidArgument("config: 't_list' must be an array");
        for (const auto& v : j.at("t_list")) c.t_list.push_back(json_int(v, "t_list"));
    }
    if (j.contains("epsilons")) {
        if (!j.at("epsilons").is_array()) throw InvalidArgument("config: 'epsilons' must be an array");
        for (const auto& v : j.at("epsilons")) c.epsilons.push_back(json_number(v, "epsilons"));
    }
    if (j.contains("bins")) c.bins = json_int(j.at("bins"), "bins");
    if (c.t && (*c.t < 1 || *c.t > kMaxTensorPower)) throw InvalidArgument("config: t must be in [1, 20]");
    if (c.threads && *c.threads < 1) throw InvalidArgument("config: threads must be >= 1");
    return c;
}

json run_config_to_json(const RunConfig& c) {
    json j;
    j["ensemble"] = ensemble_to_json(c.ensemble);
    if (c.t) j["t"] = *c.t;
    if (c.beta_grid) j["beta_grid"] = {{"start", c.beta_grid->start}, {"stop", c.beta_grid->stop}, {"step", c.beta_grid->step}};
    if (c.estimators) {
        json names = json::array();
        for (Estimator e : kEstimatorOrder)
            if (c.estimators->contains(e)) names.push_back(to_string(e));
        j["estimators"] = names;
    }
    if (c.output) j["output"] = c.output->string();
    if (c.threads) j["threads"] = *c.threads;
    j["memory_cap"] = c.memory_cap;
    if (!c.t_list.empty()) j["t_list"] = c.t_list;
    if (!c.epsilons.empty()) j["epsilons"] = c.epsilons;
    if (c.bins) j["bins"] = *c.bins;
    return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("config: cannot open '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidArgument("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

int resolve_threads(std::optional<int> flag, const RunConfig& config) {
    if (flag) {
        if (*flag < 1) throw InvalidArgument("--threads must be >= 1");
        return *flag;
    }
    if (const char* env = std::getenv("THERMAL_DESIGNS_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1) throw InvalidArgument("THERMAL_DESIGNS_THREADS must be a positive integer");
        return static_cast<int>(v);
    }
    return config.threads.value_or(1);
}

std::string feasibility_report(long long D, int t, long long memory_cap) {
    const EstimatorSet f = feasible_estimators(D, t, memory_cap);
    std::ostringstream s;
    s << "(D=" << D << ", t=" << t << ", memory_cap=" << memory_cap << "): feasible estimators:";
    for (Estimator e : kEstimatorOrder)
        if (f.contains(e)) s << ' ' << to_string(e);
    if (!f.trace_norm) s << "; trace_norm and sym_overlap need D^t <= memory_cap";
    return s.str();
}

EstimatorSet resolve_estimators(const RunConfig& config) {
    if (!config.t) throw InvalidArgument("config: 't' is required");
    const long long D = config.ensemble.dim();
    const EstimatorSet feasible = feasible_estimators(D, *config.t, config.memory_cap);
    if (!config.estimators) return feasible;
    const EstimatorSet& want = *config.estimators;
    if (want.empty()) throw InvalidArgument("config: 'estimators' is empty");
    if ((want.trace_norm && !feasible.trace_norm) || (want.sym_overlap && !feasible.sym_overlap))
        throw CapacityError("capacity: requested estimators exceed the memory cap " +
                                feasibility_report(D, *config.t, config.memory_cap),
                            D, *config.t);
    return want;
}

CsvTable sweep_table(const SweepResult& sweep, const RunConfig& config) {
    CsvTable table;
    table.header = kSweepHeader;
    for (const SweepRow& r : sweep.rows)
        table.rows.push_back({r.beta, r.trace_norm, r.sym_overlap, r.cycle, r.bound, r.stderr_proxy});

    // Everything that determines the numbers, and nothing else (no threads or
    // output path), so reruns are byte-identical.
    RunConfig recorded;
    recorded.ensemble = sweep.spec;
    recorded.t = sweep.t;
    recorded.beta_grid = config.beta_grid;
    recorded.estimators = sweep.estimators;
    recorded.memory_cap = config.memory_cap;
    table.comments.push_back("config: " + run_config_to_json(recorded).dump());
    table.comments.push_back("seed: " + std::to_string(sweep.spec.seed));
    table.comments.push_back("samples: " + std::to_string(sweep.spec.samples));
    table.comments.push_back("dimension: " + std::to_string(sweep.spec.dim()));
    table.comments.push_back("t: " + std::to_string(sweep.t));
    table.comments.push_back("stderr: jackknife over " +
                             std::to_string(std::min<std::int64_t>(20, sweep.spec.samples)) + " sample blocks");
    return table;
}

SweepResult cmd_sweep(const RunConfig& config, int threads) {
    if (!config.t) throw InvalidArgument("sweep: config needs 't'");
    if (!config.beta_grid) throw InvalidArgument("sweep: config needs 'beta_grid'");
    if (!config.output) throw InvalidArgument("sweep: no output path (set 'output' or --output)");
    const BetaGrid grid = BetaGrid::from_range(config.beta_grid->start, config.beta_grid->stop, config.beta_grid->step);
    SweepOptions opts;
    opts.estimators = resolve_estimators(config);
    opts.threads = threads;
    opts.memory_cap = config.memory_cap;
    // Fail on an unwritable destination before doing any work.
    {
        std::ofstream probe(*config.output, std::ios::app);
        if (!probe) throw InvalidArgument("sweep: cannot write '" + config.output->string() + "'");
    }
    std::error_code ec;
    const bool existed_before = std::filesystem::file_size(*config.output, ec) > 0 && !ec;
    try {
        SweepResult sweep = run_sweep(config.ensemble, *config.t, grid, opts);
        write_text_file(*config.output, format_csv(sweep_table(sweep, config)));
        return sweep;
    } catch (...) {
        if (!existed_before) std::filesystem::remove(*config.output, ec);
        throw;
    }
}

CsvTable derivative_table(const CsvTable& in) {
    if (in.header != kSweepHeader)
        throw InvalidArgument("derivative: input header is not beta,trace_norm,sym_overlap,cycle,bound,stderr");
    if (in.rows.size() < 3)
        throw InvalidArgument("derivative: need at least 3 rows, got " + std::to_string(in.rows.size()));
    std::vector<double> betas;
    for (std::size_t i = 0; i < in.rows.size(); ++i) {
        if (!in.rows[i][0]) throw InvalidArgument("derivative: data row " + std::to_string(i + 1) + " has no beta");
        betas.push_back(*in.rows[i][0]);
    }

    CsvTable out;
    out.header = kSweepHeader;
    out.rows.assign(in.rows.size(), std::vector<std::optional<double>>(kSweepHeader.size()));
    for (std::size_t i = 0; i < betas.size(); ++i) out.rows[i][0] = betas[i];

    std::optional<std::size_t> kink_column;
    for (std::size_t col = 1; col <= 4; ++col) {
        std::size_t present = 0;
        for (const auto& r : in.rows) present += r[col].has_value();
        if (present == 0) continue;
        if (present != in.rows.size())
            throw InvalidArgument("derivative: column '" + in.header[col] + "' is only partially filled");
        std::vector<double> values;
        for (const auto& r : in.rows) values.push_back(*r[col]);
        const auto d = finite_difference(betas, values);
        for (std::size_t i = 0; i < d.size(); ++i) out.rows[i][col] = d[i];
        if (!kink_column) kink_column = col;
    }

    out.comments = in.comments;
    out.comments.push_back("derivative: central differences in beta, one-sided at the endpoints");
    if (!kink_column) {
        out.comments.push_back("kink: unavailable (no estimator columns)");
        return out;
    }
    std::vector<double> deriv;
    for (const auto& r : out.rows) deriv.push_back(*r[*kink_column]);
    out.comments.push_back("kink_estimator: " + in.header[*kink_column]);
    try {
        const KinkEstimate k = estimate_beta_c(betas, deriv);
        out.comments.push_back("beta_c: " + format_number(k.beta_c));
        out.comments.push_back("kink_fit_residual: " + format_number(k.fit_quality));
        out.comments.push_back("kink_below_scale: " + format_number(k.below_scale));
        out.comments.push_back("kink_below_exponent: " + format_number(k.below_exponent));
        out.comments.push_back("kink_above_amplitude: " + format_number(k.above_amplitude));
        out.comments.push_back("kink_above_rate: " + format_number(k.above_rate));
        out.comments.push_back("kink_above_offset: " + format_number(k.above_offset));
    } catch (const InvalidArgument& e) {
        out.comments.push_back(std::string("kink: unavailable (") + e.what() + ")");
    }
    return out;
}

void cmd_derivative(const std::filesystem::path& input, const std::filesystem::path& output) {
    write_text_file(output, format_csv(derivative_table(read_csv(input))));
}

CsvTable threshold_table(const RunConfig& config, const std::vector<int>& t_list, const std::vector<double>& epsilons,
                         int threads) {
    if (config.ensemble.kind != EnsembleKind::Global)
        throw InvalidArgument("threshold: unsupported ensemble (only \"global\" is supported)");
    if (t_list.empty() || epsilons.empty()) throw InvalidArgument("threshold: need at least one t and one epsilon");
    for (int t : t_list)
        if (t < 1 || t > kMaxTensorPower) throw InvalidArgument("threshold: t must be in [1, 20]");
    for (double e : epsilons)
        if (!(e > 0.0 && e < 1.0)) throw InvalidArgument("threshold: epsilon must lie in (0, 1)");

    const GroundStateBoundCurve curve(sample_energies(config.ensemble, threads));
    CsvTable table;
    table.header = {"t", "epsilon", "beta_star", "temperature"};
    for (int t : t_list)
        for (double eps : epsilons) {
            const ThresholdResult r = threshold_temperature(curve, t, eps);
            table.rows.push_back({static_cast<double>(t), eps, r.beta_star, r.temperature});
        }
    RunConfig recorded;
    recorded.ensemble = config.ensemble;
    table.comments.push_back("config: " + run_config_to_json(recorded).dump());
    table.comments.push_back("seed: " + std::to_string(config.ensemble.seed));
    table.comments.push_back("objective: ground-state bound 1 - mean(p0^t) = epsilon, temperature = 1/beta_star");
    return table;
}

void cmd_threshold(const RunConfig& config, const std::vector<int>& t_list, const std::vector<double>& epsilons,
                   const std::filesystem::path& output, int threads) {
    write_text_file(output, format_csv(threshold_table(config, t_list, epsilons, threads)));
}

CsvTable dos_table(const RunConfig& config, int bins, int threads) {
    const DosReport rep = dos_diagnostics(config.ensemble, bins, threads);
    CsvTable table;
    table.header = {"bin_center", "density", "reference_density"};
    for (std::size_t i = 0; i < rep.centers.size(); ++i)
        table.rows.push_back({rep.centers[i], rep.density[i], rep.reference_density[i]});
    RunConfig recorded;
    recorded.ensemble = config.ensemble;
    table.comments.push_back("config: " + run_config_to_json(recorded).dump());
    table.comments.push_back("seed: " + std::to_string(config.ensemble.seed));
    table.comments.push_back("reference: " + rep.reference);
    table.comments.push_back("mean: " + format_number(rep.mean));
    table.comments.push_back("variance: " + format_number(rep.variance));
    table.comments.push_back("excess_kurtosis: " + format_number(rep.excess_kurtosis));
    table.comments.push_back("sup_deviation: " + format_number(rep.sup_deviation));
    return table;
}

void cmd_dos(const RunConfig& config, int bins, const std::filesystem::path& output, int threads) {
    write_text_file(output, format_csv(dos_table(config, bins, threads)));
}

}  // namespace thermal_designs
