#include "twoatom/telegraph_stats.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "twoatom/rng.hpp"

namespace twoatom {

namespace {

void require_positive(const TransitionRates& r) {
    if (!r.all_positive())
        throw DomainError(fmt::format("telegraph rates must be positive (p01={}, p10={}, p12={}, p21={})",
                                      r.p01, r.p10, r.p12, r.p21));
}

// Downward double-jump rate for a given rate of double-intensity periods.
double down_rate(const TransitionRates& r, double n2, double dt_dj) {
    const double k = r.p10 + r.p12;
    return n2 * r.p10 / k * -std::expm1(-k * dt_dj);
}

double up_rate(const TransitionRates& r, double n0, double dt_dj) {
    const double k = r.p10 + r.p12;
    return n0 * r.p12 / k * -std::expm1(-k * dt_dj);
}

}  // namespace

void TelegraphModel::validate() const {
    require_positive(rates);
    if (!(dt_w > 0.0)) throw DomainError("averaging window must be positive");
    if (!(dt_dj > dt_w))
        throw DomainError(fmt::format("double-jump window {} must exceed the averaging window {}", dt_dj, dt_w));
    if (!(cutoff_fraction >= 0.5 && cutoff_fraction <= 0.8))
        throw DomainError(fmt::format("cutoff fraction {} outside [0.5, 0.8]", cutoff_fraction));
}

TelegraphStatistics ideal_statistics(const TransitionRates& r, double dt_dj) {
    require_positive(r);
    if (!(dt_dj >= 0.0)) throw DomainError("double-jump window must be non-negative");
    TelegraphStatistics s;
    const double k = r.p10 + r.p12;
    const double big_s = r.p01 * r.p21 + r.p21 * r.p10 + r.p01 * r.p12;
    s.t0 = 1.0 / r.p01;
    s.t1 = 1.0 / k;
    s.t2 = 1.0 / r.p21;
    s.n0 = r.p01 * r.p21 * r.p10 / big_s;
    s.n2 = r.p01 * r.p21 * r.p12 / big_s;
    s.n1 = (1.0 - s.n0 * s.t0 - s.n2 * s.t2) / s.t1;
    s.n_dj_down = down_rate(r, s.n2, dt_dj);
    s.n_dj_up = up_rate(r, s.n0, dt_dj);
    s.n_dj = s.n_dj_up + s.n_dj_down;
    s.n_dj_linear = 2.0 * r.p01 * r.p10 * r.p12 * r.p21 / big_s * dt_dj;

    s.dtau = 0.0;
    s.n2_cor = s.n2;
    s.t0_cor = s.t0;
    s.t1_cor = s.t1;
    s.t2_cor = s.t2;
    s.n_dj_cor = s.n_dj;
    return s;
}

TelegraphStatistics window_corrected_statistics(const TelegraphModel& model) {
    model.validate();
    const TransitionRates& r = model.rates;
    TelegraphStatistics s = ideal_statistics(r, model.dt_dj);
    const double dtau = model.dtau();
    const double k = r.p10 + r.p12;
    s.dtau = dtau;
    s.n2_cor = s.n2 * std::exp(-r.p21 * dtau);
    // Up and down rates are equal in the telegraph model, so the corrected
    // combined rate is twice the corrected downward rate.
    s.n_dj_cor = 2.0 * down_rate(r, s.n2_cor, model.dt_dj);
    s.t0_cor = s.t0 + dtau * (1.0 + r.p10 / r.p01);
    s.t1_cor = s.t1 + dtau * (1.0 + (r.p01 * r.p10 + r.p12 * r.p21) / (k * k));
    s.t2_cor = s.t2 + dtau * (1.0 + r.p12 / r.p21);
    const double durations[3] = {s.t0, s.t1, s.t2};
    for (int i = 0; i < 3; ++i)
        if (dtau / durations[i] >= 0.2)
            s.warnings.push_back(fmt::format(
                "cutoff {:.4g} is not small against T{} = {:.4g}; corrections unreliable", dtau, i,
                durations[i]));
    return s;
}

double recorded_single_density(const TransitionRates& r, double dtau, double t) {
    const TelegraphStatistics s = ideal_statistics(r, 0.0);
    const double l0 = 1.0 / s.t0, l1 = 1.0 / s.t1, l2 = 1.0 / s.t2;
    const double short_rate = s.n0 * -std::expm1(-l0 * dtau) + s.n2 * -std::expm1(-l2 * dtau);
    return (s.n1 * l1 + short_rate * (l1 * l1 * t - 2.0 * l1)) * std::exp(-l1 * t);
}

double recorded_single_rate(const TransitionRates& r, double dtau) {
    const TelegraphStatistics s = ideal_statistics(r, 0.0);
    const double l0 = 1.0 / s.t0, l1 = 1.0 / s.t1, l2 = 1.0 / s.t2;
    const double short_rate = s.n0 * -std::expm1(-l0 * dtau) + s.n2 * -std::expm1(-l2 * dtau);
    return std::exp(-l1 * dtau) * (s.n1 + short_rate * (l1 * dtau - 1.0));
}

PeriodSequence simulate_telegraph(const TransitionRates& r, double total_time, std::uint64_t seed,
                                  std::uint64_t stream) {
    require_positive(r);
    if (!(total_time > 0.0)) throw DomainError("total time must be positive");
    Philox4x32 rng(seed, stream);
    const TelegraphStatistics s = ideal_statistics(r, 0.0);
    const double k = r.p10 + r.p12;
    const double branch_down = r.p10 / k;

    int level;
    const double u = rng.uniform();
    const double occ0 = s.n0 * s.t0, occ1 = s.n1 * s.t1;
    level = u < occ0 ? 0 : (u < occ0 + occ1 ? 1 : 2);

    PeriodSequence seq;
    double t = 0.0;
    while (t < total_time) {
        const double mean = level == 0 ? s.t0 : (level == 1 ? s.t1 : s.t2);
        double d = rng.exponential(mean);
        if (t + d > total_time) d = total_time - t;
        seq.push_back({level, t, d});
        t += d;
        if (level == 1)
            level = rng.uniform() < branch_down ? 0 : 2;
        else
            level = 1;
    }
    return seq;
}

DoubleJumpCounts count_double_jumps(const PeriodSequence& seq, double dt_dj) {
    DoubleJumpCounts c;
    for (std::size_t i = 1; i < seq.size(); ++i) {
        const int from = seq[i - 1].level;
        const int to = seq[i].level;
        if (from == 0 && to == 2) ++c.up;
        if (from == 2 && to == 0) ++c.down;
        if (i + 1 < seq.size() && to == 1 && seq[i].duration < dt_dj) {
            const int next = seq[i + 1].level;
            if (from == 0 && next == 2) ++c.up;
            if (from == 2 && next == 0) ++c.down;
        }
    }
    return c;
}

PeriodSequence censor_sequence(const PeriodSequence& seq, double dtau) {
    if (seq.empty()) return {};
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (seq[i].duration >= dtau) kept.push_back(i);
    if (kept.empty()) return {};

    PeriodSequence out;
    double carry = 0.0;
    // Time before the first kept period goes to it.
    for (std::size_t j = 0; j < kept.front(); ++j) carry += seq[j].duration;
    for (std::size_t n = 0; n < kept.size(); ++n) {
        const std::size_t i = kept[n];
        const std::size_t next = n + 1 < kept.size() ? kept[n + 1] : seq.size();
        double gap = 0.0;
        for (std::size_t j = i + 1; j < next; ++j) gap += seq[j].duration;
        const bool last = n + 1 == kept.size();
        const double d = seq[i].duration + carry + (last ? gap : 0.5 * gap);
        carry = last ? 0.0 : 0.5 * gap;
        if (!out.empty() && out.back().level == seq[i].level)
            out.back().duration += d;
        else
            out.push_back({seq[i].level, out.empty() ? seq.front().start : out.back().end(), d});
    }
    return out;
}

void write_periods(std::ostream& out, const PeriodSequence& seq) {
    for (const Period& p : seq) out << fmt::format("{} {:.12g} {:.12g}\n", p.level, p.start, p.duration);
}

PeriodSequence read_periods(std::istream& in) {
    PeriodSequence seq;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Period p;
        if (!(ss >> p.level >> p.start >> p.duration))
            throw DomainError(fmt::format("malformed period line: '{}'", line));
        if (p.level < 0 || p.level > 2) throw DomainError("period level must be 0, 1 or 2");
        seq.push_back(p);
    }
    return seq;
}

}  // namespace twoatom
