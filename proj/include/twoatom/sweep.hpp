#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "twoatom/ensemble.hpp"

namespace twoatom {

enum class SweepMode { Analytic, TelegraphMc, FullMc };

std::string_view sweep_mode_name(SweepMode m);

/// Flat key=value configuration ('#' starts a comment).
struct SweepConfig {
    ModelParams params;
    double theta3 = std::numbers::pi / 2.0;
    double r_min = 0.75;
    double r_max = 10.0;
    int r_steps = 100;
    double dt_w = 114.0;
    double dt_dj = 160.0;
    double cutoff_fraction = 2.0 / 3.0;
    SweepMode mode = SweepMode::Analytic;
    double total_time = 1e7;  // per sequence / trajectory
    int trajectories = 1;     // sequences or trajectories per r point
    std::uint64_t seed = 1;
    std::string output;       // empty: stdout is not used for CSV, see CLI
    // full-MC only
    double dt = 0.01;
    int grid_divisor = 4;
    int hysteresis = 2;
    double band_fraction = 0.5;

    static SweepConfig parse(std::istream& in);
    static SweepConfig from_file(const std::string& path);

    /// Throws DomainError for inconsistent settings.
    void validate() const;
    [[nodiscard]] std::vector<double> r_grid() const;
};

struct SweepRow {
    double r = 0.0;
    Complex c3;
    std::optional<TransitionRates> first_order;  // empty at a pole
    TransitionRates exact;
    std::string stats_source;  // which rates feed the telegraph columns
    TelegraphStatistics stats;  // ideal + window-corrected
    bool untrusted = false;
    std::optional<EstimatedStatistics> mc;
    std::vector<std::string> warnings;
};

std::vector<SweepRow> run_sweep(const SweepConfig& config, Execution exec = Execution::Parallel,
                                int jobs = 0);

inline constexpr const char* kSweepSchema = "twoatom-sweep/1";

/// Schema tag line, header row, one row per r in grid order; 10 significant digits.
void write_sweep_csv(std::ostream& out, const SweepConfig& config, const std::vector<SweepRow>& rows);

/// One JSON object summarizing the sweep.
std::string sweep_summary_json(const SweepConfig& config, const std::vector<SweepRow>& rows);

/// All critical detunings as a JSON object; entries that do not exist carry
/// null plus an error string.
std::string critical_detunings_json(const ModelParams& params, double dt_dj);

/// Exact and first-order rates for one parameter point as JSON.
std::string rates_json(const ModelParams& params, const DipoleCoupling& coupling);

/// Peak-to-trough difference relative to the peak, (max - min) / max.
double modulation_depth(const std::vector<double>& v);

/// Pearson correlation of two equally long series.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace twoatom
