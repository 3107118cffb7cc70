// Command-line front end: analytic queries, parameter sweeps, simulation.

#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "twoatom/sweep.hpp"

using namespace twoatom;

namespace {

int run_sweep_cmd(const std::string& config_path, int jobs, const std::string& out_override) {
    SweepConfig cfg = SweepConfig::from_file(config_path);
    if (!out_override.empty()) cfg.output = out_override;
    if (cfg.output.empty()) throw DomainError("no output path: set 'output' in the config or pass --out");
    const auto rows = run_sweep(cfg, Execution::Parallel, jobs);
    std::ofstream out(cfg.output);
    if (!out) throw DomainError("cannot write " + cfg.output);
    write_sweep_csv(out, cfg, rows);
    std::cout << sweep_summary_json(cfg, rows) << '\n';
    for (const auto& r : rows)
        for (const auto& w : r.warnings) std::cerr << "warning (r=" << r.r << "): " << w << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fluorescence statistics of two dipole-interacting three-level atoms"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    int jobs = 0;
    auto* sweep = app.add_subcommand("sweep", "grid sweep over the atomic distance, CSV output");
    sweep->add_option("config", config_path, "key=value config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--jobs", jobs, "worker threads (default: all)");
    sweep->add_option("--out", out_path, "CSV output path (overrides config)");

    ModelParams p;
    double re_c3 = 0.0, im_c3 = 0.0;
    auto* rates = app.add_subcommand("rates", "transition rates for one parameter point (JSON)");
    rates->add_option("--a3", p.a3, "strong-transition decay rate")->capture_default_str();
    rates->add_option("--omega2", p.omega2, "weak Rabi frequency")->capture_default_str();
    rates->add_option("--omega3", p.omega3, "strong Rabi frequency")->capture_default_str();
    rates->add_option("--delta2", p.delta2, "weak-laser detuning")->capture_default_str();
    rates->add_option("--re-c3", re_c3, "Re C3")->capture_default_str();
    rates->add_option("--im-c3", im_c3, "Im C3")->capture_default_str();

    std::string crit_config;
    auto* crit = app.add_subcommand("critical-detunings", "detunings where Re C3 coefficients vanish (JSON)");
    crit->add_option("config", crit_config, "key=value config file")->required()->check(CLI::ExistingFile);

    std::string spec_config;
    double spec_r = 1.0;
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the Bloch generator without weak laser");
    spectrum->add_option("config", spec_config, "key=value config file")->required()->check(CLI::ExistingFile);
    spectrum->add_option("--r", spec_r, "atomic distance in wavelengths")->capture_default_str();

    std::string sim_config, sim_out;
    double sim_r = 1.0;
    std::uint64_t sim_stream = 0;
    auto* simulate = app.add_subcommand("simulate", "one quantum-jump trajectory, emission record output");
    simulate->add_option("config", sim_config, "key=value config file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--r", sim_r, "atomic distance in wavelengths")->capture_default_str();
    simulate->add_option("--stream", sim_stream, "random stream index")->capture_default_str();
    simulate->add_option("--out", sim_out, "emission record path")->required();

    std::string cls_in, cls_out;
    double cls_w = 114.0;
    int cls_k = 4;
    auto* classify = app.add_subcommand("classify", "emission record -> period sequence");
    classify->add_option("record", cls_in, "emission record file")->required()->check(CLI::ExistingFile);
    classify->add_option("--config", sim_config, "config with omega3/a3 for default thresholds")->check(CLI::ExistingFile);
    classify->add_option("--dt-w", cls_w, "averaging window")->capture_default_str();
    classify->add_option("--k", cls_k, "grid points per window")->capture_default_str();
    classify->add_option("--out", cls_out, "period sequence path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::cout << std::setprecision(12);
        if (*sweep) return run_sweep_cmd(config_path, jobs, out_path);
        if (*rates) {
            std::cout << rates_json(p, DipoleCoupling::from_c3({re_c3, im_c3})) << '\n';
            return 0;
        }
        if (*crit) {
            const SweepConfig cfg = SweepConfig::from_file(crit_config);
            std::cout << critical_detunings_json(cfg.params, cfg.dt_dj) << '\n';
            return 0;
        }
        if (*spectrum) {
            const SweepConfig cfg = SweepConfig::from_file(spec_config);
            const auto ev = l0_spectrum(cfg.params, compute_c3({spec_r, cfg.theta3, 1.0}, cfg.params.a3));
            for (Eigen::Index i = 0; i < ev.size(); ++i) std::cout << ev(i).real() << ' ' << ev(i).imag() << '\n';
            return 0;
        }
        if (*simulate) {
            const SweepConfig cfg = SweepConfig::from_file(sim_config);
            TrajectoryConfig tc;
            tc.params = cfg.params;
            tc.coupling = compute_c3({sim_r, cfg.theta3, 1.0}, cfg.params.a3);
            tc.total_time = cfg.total_time;
            tc.dt = cfg.dt;
            tc.seed = cfg.seed;
            const EmissionRecord rec = TrajectoryEngine(tc).run(sim_stream);
            std::ofstream out(sim_out);
            write_emissions(out, rec);
            std::cout << "{\"emissions\":" << rec.emissions.size() << ",\"total_time\":" << rec.total_time << "}\n";
            return 0;
        }
        if (*classify) {
            ModelParams mp;
            if (!sim_config.empty()) mp = SweepConfig::from_file(sim_config).params;
            std::ifstream in(cls_in);
            const EmissionRecord rec = read_emissions(in);
            const PeriodSequence seq = classify_periods(intensity_trace(rec, cls_w, cls_k), ClassifierConfig::defaults(mp));
            std::ofstream out(cls_out);
            write_periods(out, seq);
            std::cout << "{\"periods\":" << seq.size() << "}\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
