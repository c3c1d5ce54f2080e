#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermal_designs/commands.hpp"
#include "thermal_designs/errors.hpp"

using namespace thermal_designs;

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> samples;
    std::optional<int> threads;
    std::string output;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "override ensemble.seed");
    cmd->add_option("--samples", o.samples, "override ensemble.samples");
    cmd->add_option("--threads", o.threads, "worker threads");
    cmd->add_option("-o,--output", o.output, "output CSV path");
}

RunConfig load(const Overrides& o) {
    RunConfig cfg = load_run_config(o.config);
    if (o.seed) cfg.ensemble.seed = *o.seed;
    if (o.samples) cfg.ensemble.samples = *o.samples;
    if (!o.output.empty()) cfg.output = o.output;
    cfg.ensemble.validate();
    return cfg;
}

std::filesystem::path output_of(const RunConfig& cfg, const char* cmd) {
    if (!cfg.output) throw InvalidArgument(std::string(cmd) + ": no output path (set 'output' or --output)");
    return *cfg.output;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal-state t-design distances for random Hamiltonian ensembles"};
    app.require_subcommand(1);

    Overrides sweep_o, thr_o, dos_o;
    auto* sweep = app.add_subcommand("sweep", "design distance over a beta grid");
    add_common(sweep, sweep_o);

    std::string deriv_in, deriv_out;
    auto* deriv = app.add_subcommand("derivative", "beta-derivative of a sweep CSV with kink estimate");
    deriv->add_option("-i,--input", deriv_in, "sweep CSV")->required();
    deriv->add_option("-o,--output", deriv_out, "output CSV")->required();

    std::vector<int> t_list;
    std::vector<double> epsilons;
    auto* thr = app.add_subcommand("threshold", "threshold temperatures of the global ensemble");
    add_common(thr, thr_o);
    thr->add_option("--t-list", t_list, "tensor powers (overrides config t_list)")->delimiter(',');
    thr->add_option("--epsilon", epsilons, "accuracies (overrides config epsilons)")->delimiter(',');

    std::optional<int> bins;
    auto* dos = app.add_subcommand("dos", "pooled density of states");
    add_common(dos, dos_o);
    dos->add_option("--bins", bins, "histogram bins (overrides config bins)");

    std::optional<int> check_threads;
    auto* check = app.add_subcommand("check", "reduced-scale invariant self-test");
    check->add_option("--threads", check_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sweep) {
            const RunConfig cfg = load(sweep_o);
            cmd_sweep(cfg, resolve_threads(sweep_o.threads, cfg));
        } else if (*deriv) {
            cmd_derivative(deriv_in, deriv_out);
        } else if (*thr) {
            const RunConfig cfg = load(thr_o);
            cmd_threshold(cfg, t_list.empty() ? cfg.t_list : t_list, epsilons.empty() ? cfg.epsilons : epsilons,
                          output_of(cfg, "threshold"), resolve_threads(thr_o.threads, cfg));
        } else if (*dos) {
            const RunConfig cfg = load(dos_o);
            const int b = bins ? *bins : cfg.bins.value_or(50);
            cmd_dos(cfg, b, output_of(cfg, "dos"), resolve_threads(dos_o.threads, cfg));
        } else if (*check) {
            return cmd_check(std::cout, resolve_threads(check_threads, RunConfig{})) == 0 ? kExitOk : kExitNumeric;
        }
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCapacity;
    } catch (const NumericFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
