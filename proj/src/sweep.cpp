#include "twoatom/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace twoatom {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != v.size() || v.empty()) throw DomainError(fmt::format("config: '{}' expects a number, got '{}'", key, v));
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw DomainError(fmt::format("config: '{}' expects an integer, got '{}'", key, v));
    return static_cast<long>(x);
}

std::string num(double x) { return std::isfinite(x) ? fmt::format("{:.10g}", x) : "nan"; }

}  // namespace

std::string_view sweep_mode_name(SweepMode m) {
    switch (m) {
        case SweepMode::Analytic: return "analytic";
        case SweepMode::TelegraphMc: return "telegraph-mc";
        case SweepMode::FullMc: return "full-mc";
    }
    return "?";
}

SweepConfig SweepConfig::parse(std::istream& in) {
    SweepConfig c;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DomainError(fmt::format("config line {}: expected key=value", line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string v = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw DomainError(fmt::format("config: duplicate key '{}'", key));

        if (key == "a3") c.params.a3 = to_double(key, v);
        else if (key == "omega2") c.params.omega2 = to_double(key, v);
        else if (key == "omega3") c.params.omega3 = to_double(key, v);
        else if (key == "delta2") c.params.delta2 = to_double(key, v);
        else if (key == "theta3") c.theta3 = to_double(key, v);
        else if (key == "r_min") c.r_min = to_double(key, v);
        else if (key == "r_max") c.r_max = to_double(key, v);
        else if (key == "r_steps") c.r_steps = static_cast<int>(to_long(key, v));
        else if (key == "dt_w") c.dt_w = to_double(key, v);
        else if (key == "dt_dj") c.dt_dj = to_double(key, v);
        else if (key == "cutoff_fraction") c.cutoff_fraction = to_double(key, v);
        else if (key == "total_time") c.total_time = to_double(key, v);
        else if (key == "trajectories") c.trajectories = static_cast<int>(to_long(key, v));
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_long(key, v));
        else if (key == "output") c.output = v;
        else if (key == "dt") c.dt = to_double(key, v);
        else if (key == "grid_divisor") c.grid_divisor = static_cast<int>(to_long(key, v));
        else if (key == "hysteresis") c.hysteresis = static_cast<int>(to_long(key, v));
        else if (key == "band_fraction") c.band_fraction = to_double(key, v);
        else if (key == "mode") {
            if (v == "analytic") c.mode = SweepMode::Analytic;
            else if (v == "telegraph-mc") c.mode = SweepMode::TelegraphMc;
            else if (v == "full-mc") c.mode = SweepMode::FullMc;
            else throw DomainError(fmt::format("config: unknown mode '{}'", v));
        } else {
            throw DomainError(fmt::format("config: unknown key '{}'", key));
        }
    }
    if (c.mode != SweepMode::Analytic)
        for (const char* k : {"total_time", "trajectories", "seed"})
            if (!seen.count(k))
                throw DomainError(fmt::format("config: mode {} requires '{}'", sweep_mode_name(c.mode), k));
    c.validate();
    return c;
}

SweepConfig SweepConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError(fmt::format("cannot open config file '{}'", path));
    return parse(in);
}

void SweepConfig::validate() const {
    params.validate();
    Geometry{r_min, theta3, 1.0}.validate();
    if (r_steps < 1) throw DomainError("r_steps must be at least 1");
    if (r_steps > 1 && !(r_max > r_min)) throw DomainError("r grid must be strictly increasing (r_max > r_min)");
    TelegraphModel{TransitionRates{1, 1, 1, 1}, dt_dj, dt_w, cutoff_fraction}.validate();
    if (mode != SweepMode::Analytic) {
        if (!(total_time > 0.0)) throw DomainError("total_time must be positive");
        if (trajectories < 1) throw DomainError("trajectories must be at least 1");
    }
    if (mode == SweepMode::FullMc) {
        if (grid_divisor < 4) throw DomainError("grid_divisor must be at least 4");
        ClassifierConfig cc = ClassifierConfig::defaults(params);
        cc.hysteresis = hysteresis;
        cc.band_fraction = band_fraction;
        cc.validate();
    }
}

std::vector<double> SweepConfig::r_grid() const {
    std::vector<double> r(r_steps);
    for (int i = 0; i < r_steps; ++i)
        r[i] = r_steps == 1 ? r_min : r_min + (r_max - r_min) * i / (r_steps - 1);
    return r;
}

namespace {

SweepRow analytic_row(const SweepConfig& cfg, double r) {
    SweepRow row;
    row.r = r;
    row.untrusted = distance_untrusted(r);
    const DipoleCoupling coupling = compute_c3({r, cfg.theta3, 1.0}, cfg.params.a3);
    row.c3 = coupling.c3;
    row.exact = rates_exact(cfg.params, coupling);
    try {
        row.first_order = rates_first_order(cfg.params, coupling);
        row.stats_source = "first_order";
    } catch (const PoleError& e) {
        row.stats_source = "exact";
        row.warnings.push_back(e.what());
    }
    const TransitionRates& src = row.first_order ? *row.first_order : row.exact;
    try {
        row.stats = window_corrected_statistics({src, cfg.dt_dj, cfg.dt_w, cfg.cutoff_fraction});
        for (auto& w : row.stats.warnings) row.warnings.push_back(w);
    } catch (const DomainError& e) {
        row.untrusted = true;
        row.warnings.push_back(e.what());
    }
    return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, Execution exec, int jobs) {
    cfg.validate();
    const std::vector<double> grid = cfg.r_grid();
    std::vector<SweepRow> rows(grid.size());
    for_each_index(static_cast<long>(grid.size()), exec, jobs, [&](long i) { rows[i] = analytic_row(cfg, grid[i]); });

    if (cfg.mode == SweepMode::Analytic) return rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SweepRow& row = rows[i];
        const std::uint64_t seed = cfg.seed * 1'000'003ULL + i;
        if (cfg.mode == SweepMode::TelegraphMc) {
            const TransitionRates& src = row.first_order ? *row.first_order : row.exact;
            const auto seqs = telegraph_batch(src, cfg.total_time, seed, cfg.trajectories, exec, jobs);
            row.mc = estimate_statistics(seqs, cfg.dt_dj, 0.0);
        } else {
            TrajectoryConfig tc;
            tc.params = cfg.params;
            tc.coupling = DipoleCoupling::from_c3(row.c3);
            tc.total_time = cfg.total_time;
            tc.dt = cfg.dt;
            tc.seed = seed;
            ClassifierConfig cc = ClassifierConfig::defaults(cfg.params);
            cc.hysteresis = cfg.hysteresis;
            cc.band_fraction = cfg.band_fraction;
            const auto records = emission_batch(tc, cfg.trajectories, exec, jobs);
            const auto seqs = classify_batch(records, cfg.dt_w, cfg.grid_divisor, cc, exec, jobs);
            row.mc = estimate_statistics(seqs, cfg.dt_dj, cc.effective_cutoff(cfg.dt_w, cfg.grid_divisor));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
    const bool mc = cfg.mode != SweepMode::Analytic;
    out << fmt::format("# schema={} mode={}\n", kSweepSchema, sweep_mode_name(cfg.mode));
    std::vector<std::string> head{"r",         "re_c3",     "im_c3",     "untrusted", "stats_source",
                                  "p01_first", "p10_first", "p12_first", "p21_first", "p01_exact",
                                  "p10_exact", "p12_exact", "p21_exact", "t0",        "t1",
                                  "t2",        "t0_cor",    "t1_cor",    "t2_cor",    "n0",
                                  "n1",        "n2",        "n2_cor",    "n_dj",      "n_dj_cor"};
    if (mc)
        for (const char* h : {"mc_periods", "mc_t0", "mc_t0_se", "mc_t1", "mc_t1_se", "mc_t2", "mc_t2_se",
                              "mc_n0", "mc_n0_se", "mc_n1", "mc_n1_se", "mc_n2", "mc_n2_se", "mc_n_dj",
                              "mc_n_dj_se", "mc_dj_up", "mc_dj_down", "mc_p01", "mc_p01_se", "mc_p10",
                              "mc_p10_se", "mc_p12", "mc_p12_se", "mc_p21", "mc_p21_se"})
            head.emplace_back(h);
    for (std::size_t i = 0; i < head.size(); ++i) out << (i ? "," : "") << head[i];
    out << '\n';

    for (const SweepRow& row : rows) {
        std::vector<std::string> f{num(row.r), num(row.c3.real()), num(row.c3.imag()),
                                   row.untrusted ? "1" : "0", row.stats_source};
        if (row.first_order) {
            for (double x : {row.first_order->p01, row.first_order->p10, row.first_order->p12, row.first_order->p21})
                f.push_back(num(x));
        } else {
            for (int k = 0; k < 4; ++k) f.emplace_back("");
        }
        const auto& s = row.stats;
        for (double x : {row.exact.p01, row.exact.p10, row.exact.p12, row.exact.p21, s.t0, s.t1, s.t2,
                         s.t0_cor, s.t1_cor, s.t2_cor, s.n0, s.n1, s.n2, s.n2_cor, s.n_dj, s.n_dj_cor})
            f.push_back(num(x));
        if (mc) {
            if (row.mc) {
                const auto& m = *row.mc;
                f.push_back(std::to_string(m.periods[0] + m.periods[1] + m.periods[2]));
                for (int k = 0; k < 3; ++k) {
                    f.push_back(num(m.t[k]));
                    f.push_back(num(m.t_se[k]));
                }
                for (int k = 0; k < 3; ++k) {
                    f.push_back(num(m.n[k]));
                    f.push_back(num(m.n_se[k]));
                }
                f.push_back(num(m.n_dj));
                f.push_back(num(m.n_dj_se));
                f.push_back(std::to_string(m.double_jumps.up));
                f.push_back(std::to_string(m.double_jumps.down));
                const auto& p = m.corrected_rates;
                const auto& e = m.corrected_se;
                for (auto [v, se] : {std::pair{p.p01, e.p01}, {p.p10, e.p10}, {p.p12, e.p12}, {p.p21, e.p21}}) {
                    f.push_back(num(v));
                    f.push_back(num(se));
                }
            } else {
                for (int k = 0; k < 25; ++k) f.emplace_back("");
            }
        }
        for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i];
        out << '\n';
    }
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson: need two equally long series");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double modulation_depth(const std::vector<double>& v) {
    if (v.empty()) throw DomainError("modulation_depth: empty series");
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (!(*hi > 0.0)) throw DomainError("modulation_depth: series must have a positive maximum");
    return (*hi - *lo) / *hi;
}

std::string sweep_summary_json(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
    nlohmann::json j;
    j["schema"] = kSweepSchema;
    j["mode"] = sweep_mode_name(cfg.mode);
    j["rows"] = rows.size();
    j["output"] = cfg.output;
    long untrusted = 0, warnings = 0, exact_rows = 0;
    std::vector<double> rc, ndj, t1, t2;
    for (const auto& r : rows) {
        untrusted += r.untrusted;
        warnings += static_cast<long>(r.warnings.size());
        exact_rows += r.stats_source == "exact";
        rc.push_back(r.c3.real());
        ndj.push_back(r.stats.n_dj);
        t1.push_back(r.stats.t1);
        t2.push_back(r.stats.t2);
    }
    j["untrusted_rows"] = untrusted;
    j["warnings"] = warnings;
    j["rows_using_exact_rates"] = exact_rows;
    if (rows.size() >= 3) {
        j["corr_n_dj_re_c3"] = pearson(ndj, rc);
        j["corr_t1_re_c3"] = pearson(t1, rc);
        j["corr_t2_re_c3"] = pearson(t2, rc);
        j["n_dj_modulation"] = modulation_depth(ndj);
    }
    return j.dump();
}

std::string critical_detunings_json(const ModelParams& params, double dt_dj) {
    nlohmann::json j;
    j["a3"] = params.a3;
    j["omega3"] = params.omega3;
    for (CriticalQuantity q : {CriticalQuantity::P12, CriticalQuantity::P21, CriticalQuantity::DoubleJump,
                               CriticalQuantity::T1, CriticalQuantity::T2}) {
        const std::string name(critical_quantity_name(q));
        try {
            j[name] = critical_detuning(params, q, dt_dj);
        } catch (const NotFoundError& e) {
            j[name] = nullptr;
            j["errors"][name] = e.what();
        }
    }
    return j.dump();
}

std::string rates_json(const ModelParams& params, const DipoleCoupling& coupling) {
    nlohmann::json j;
    auto put = [](const TransitionRates& r) {
        return nlohmann::json{{"p01", r.p01}, {"p10", r.p10}, {"p12", r.p12}, {"p21", r.p21}};
    };
    j["exact"] = put(rates_exact(params, coupling));
    try {
        j["first_order"] = put(rates_first_order(params, coupling));
    } catch (const PoleError& e) {
        j["first_order"] = nullptr;
        j["pole"] = e.what();
    }
    const auto w = params.regime_warnings();
    if (!w.empty()) j["warnings"] = w;
    return j.dump();
}

}  // namespace twoatom
