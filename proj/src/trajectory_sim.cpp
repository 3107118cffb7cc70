#include "twoatom/trajectory_sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "twoatom/rng.hpp"

namespace twoatom {

namespace {

const Complex kI{0.0, 1.0};

}  // namespace

void TrajectoryConfig::validate() const {
    params.validate();
    if (!(total_time > 0.0)) throw DomainError("total_time must be positive");
    const double limit = 0.05 / std::max(params.a3, params.omega3);
    if (!(dt > 0.0 && dt <= limit * (1 + 1e-12)))
        throw DomainError(fmt::format("dt={} outside (0, {}]", dt, limit));
    if (std::abs(initial.norm() - 1.0) > 1e-12) throw DomainError("initial state must be normalized");
    build_operators(params, coupling).require_physical_channels();
}

// ------------------------------------------------------------------ engine

TrajectoryEngine::TrajectoryEngine(TrajectoryConfig config)
    : cfg_(std::move(config)), ops_(build_operators(cfg_.params, cfg_.coupling)) {
    cfg_.validate();
    ops_.require_physical_channels();
    h_ = ops_.h_cond();
    table_ = make_table(cfg_.dt);
}

TrajectoryEngine::StepTable TrajectoryEngine::make_table(double h) const {
    StepTable t;
    t.h = h;
    for (int k = 0; k <= kHalvings; ++k) {
        const Matrix9c gen = (-kI * h / std::ldexp(1.0, k)) * h_;
        t.u[k] = gen.exp();
    }
    return t;
}

EmissionRecord TrajectoryEngine::run(std::uint64_t stream) const {
    return evolve(stream, nullptr, nullptr, false);
}

EmissionRecord TrajectoryEngine::run(std::uint64_t stream, const std::vector<double>& checkpoints,
                                     std::vector<Vector9c>& states) const {
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw DomainError("checkpoints must be sorted");
    for (double c : checkpoints)
        if (c < 0.0 || c > cfg_.total_time) throw DomainError("checkpoint outside [0, total_time]");
    return evolve(stream, &checkpoints, &states, false);
}

double TrajectoryEngine::first_emission_time(std::uint64_t stream) const {
    const EmissionRecord rec = evolve(stream, nullptr, nullptr, true);
    return rec.emissions.empty() ? std::numeric_limits<double>::infinity() : rec.emissions.front().time;
}

EmissionRecord TrajectoryEngine::evolve(std::uint64_t stream, const std::vector<double>* checkpoints,
                                        std::vector<Vector9c>* states, bool stop_at_first) const {
    Philox4x32 rng(cfg_.seed, stream);
    const Matrix9c rp = ops_.rplus.cast<Complex>();
    const Matrix9c rm = ops_.rminus.cast<Complex>();

    EmissionRecord rec;
    rec.total_time = cfg_.total_time;
    if (states) states->clear();
    std::size_t next_cp = 0;

    Vector9c psi = cfg_.initial;
    double norm2 = 1.0;
    double u = rng.uniform();
    double t = 0.0;
    const double end = cfg_.total_time;
    StepTable last;  // for the final, shorter step

    // Checkpoint states are side computations from the state at t, so the
    // trajectory itself does not depend on the checkpoints.
    auto record_checkpoints = [&](const Vector9c& from, double t_from, double upto) {
        while (checkpoints && next_cp < checkpoints->size() && (*checkpoints)[next_cp] <= upto) {
            const double gap = (*checkpoints)[next_cp] - t_from;
            const Vector9c s = gap > 0.0 ? Vector9c(((-kI * gap) * h_).exp() * from) : from;
            states->push_back(s / s.norm());
            ++next_cp;
        }
    };
    record_checkpoints(psi, t, t);

    while (t < end) {
        const bool full = t + cfg_.dt <= end;
        const double h = full ? cfg_.dt : end - t;
        if (!full && last.h != h) last = make_table(h);
        const StepTable& tab = full ? table_ : last;

        Vector9c next = tab.u[0] * psi;
        double next_norm2 = next.squaredNorm();
        if (next_norm2 > norm2 * (1.0 + 1e-9))
            throw NumericalError(fmt::format("norm increased during step at t={}", t));

        if (next_norm2 > u) {
            const double target = full ? t + cfg_.dt : end;
            record_checkpoints(psi, t, target);
            psi = next;
            norm2 = next_norm2;
            t = target;
            continue;
        }

        // Norm crosses u inside this step: locate by successive halving.
        const Vector9c start = psi;
        const double t_start = t;
        double sub = h;
        for (int k = 1; k <= kHalvings; ++k) {
            sub *= 0.5;
            const Vector9c trial = tab.u[k] * psi;
            const double trial_norm2 = trial.squaredNorm();
            if (trial_norm2 > u) {
                psi = trial;
                norm2 = trial_norm2;
                t += sub;
            }
        }
        psi = tab.u[kHalvings] * psi;
        t += sub;
        record_checkpoints(start, t_start, std::nextafter(t, -1.0));

        const Vector9c jp = rp * psi;
        const Vector9c jm = rm * psi;
        const double wp = ops_.gamma_plus * jp.squaredNorm();
        const double wm = ops_.gamma_minus * jm.squaredNorm();
        if (!(wp + wm > 0.0)) throw NumericalError("norm decayed without an emission channel");
        const bool plus = rng.uniform() * (wp + wm) < wp;
        psi = plus ? jp : jm;
        psi /= psi.norm();
        norm2 = 1.0;
        rec.emissions.push_back({t, plus ? Channel::Plus : Channel::Minus});
        if (stop_at_first) return rec;
        u = rng.uniform();
        record_checkpoints(psi, t, t);
    }
    record_checkpoints(psi, t, t);
    return rec;
}

EmissionRecord run_trajectory(const TrajectoryConfig& config) {
    return TrajectoryEngine(config).run(0);
}

void write_emissions(std::ostream& out, const EmissionRecord& rec) {
    out << fmt::format("# total_time={:.17g}\n", rec.total_time);
    for (const Emission& e : rec.emissions)
        out << fmt::format("{:.17g} {}\n", e.time, e.channel == Channel::Plus ? '+' : '-');
}

EmissionRecord read_emissions(std::istream& in) {
    EmissionRecord rec;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# total_time=", 0) != 0)
        throw DomainError("emission record: missing '# total_time=' header");
    rec.total_time = std::stod(line.substr(13));
    double last = -1.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Emission e;
        char ch = 0;
        if (!(ss >> e.time >> ch) || (ch != '+' && ch != '-'))
            throw DomainError(fmt::format("emission record: malformed line '{}'", line));
        if (!(e.time > last) || e.time > rec.total_time)
            throw DomainError("emission record: times must increase within [0, total_time]");
        e.channel = ch == '+' ? Channel::Plus : Channel::Minus;
        last = e.time;
        rec.emissions.push_back(e);
    }
    return rec;
}

// ------------------------------------------------------- window and classifier

IntensityTrace intensity_trace(const EmissionRecord& rec, double dt_w, int k) {
    if (!(dt_w > 0.0)) throw DomainError("window must be positive");
    if (k < 4) throw DomainError("grid divisor must be at least 4");
    IntensityTrace tr;
    tr.dt_w = dt_w;
    tr.k = k;
    const double step = dt_w / k;
    const auto& em = rec.emissions;
    std::size_t lo = 0, hi = 0;
    for (long i = 0;; ++i) {
        const double g = i * step;
        if (g > rec.total_time - dt_w) break;
        while (lo < em.size() && em[lo].time < g) ++lo;
        while (hi < em.size() && em[hi].time < g + dt_w) ++hi;
        tr.times.push_back(g);
        tr.values.push_back(static_cast<double>(hi - lo) / dt_w);
    }
    return tr;
}

double single_light_rate(const ModelParams& p) {
    return p.a3 * p.omega3 * p.omega3 / (p.a3 * p.a3 + 2 * p.omega3 * p.omega3);
}

ClassifierConfig ClassifierConfig::defaults(const ModelParams& params) {
    const double i1 = single_light_rate(params);
    return {0.5 * i1, 1.5 * i1, 2, 0.5};
}

ClassifierConfig ClassifierConfig::no_hysteresis(const ModelParams& params) {
    ClassifierConfig c = defaults(params);
    c.hysteresis = 1;
    c.band_fraction = 1.0;
    return c;
}

void ClassifierConfig::validate() const {
    if (!(t1 > 0.0 && t1 < t2)) throw DomainError(fmt::format("thresholds out of order: {} {}", t1, t2));
    if (hysteresis < 1) throw DomainError("hysteresis must be at least 1");
    if (!(band_fraction > 0.0 && band_fraction <= 1.0)) throw DomainError("band fraction must be in (0, 1]");
}

double ClassifierConfig::effective_cutoff(double dt_w, int k) const {
    return (1.0 - 0.5 * band_fraction) * dt_w + (hysteresis - 1) * dt_w / k;
}

PeriodSequence classify_periods(const IntensityTrace& trace, const ClassifierConfig& cfg) {
    cfg.validate();
    const auto& v = trace.values;
    if (v.empty()) return {};
    const double c1 = 0.5 * (cfg.t1 + cfg.t2);
    const double c2 = cfg.t2 + (cfg.t2 - c1);
    const double inf = std::numeric_limits<double>::infinity();
    const double lo[3] = {-inf, c1 - cfg.band_fraction * (c1 - cfg.t1), c2 - cfg.band_fraction * (c2 - cfg.t2)};
    const double hi[3] = {cfg.band_fraction * cfg.t1, c1 + cfg.band_fraction * (cfg.t2 - c1), inf};

    auto decision = [&](double x) { return x < cfg.t1 ? 0 : (x < cfg.t2 ? 1 : 2); };
    auto band = [&](double x) {
        for (int l = 0; l < 3; ++l)
            if (x >= lo[l] && x <= hi[l]) return l;
        return -1;
    };

    const double step = trace.step();
    const double shift = 0.5 * trace.dt_w;  // window centre
    auto boundary_time = [&](std::size_t i) {
        return i == 0 ? trace.times[0] + shift : trace.times[i] + shift - 0.5 * step;
    };

    std::vector<int> levels{decision(v[0])};
    std::vector<std::size_t> starts{0};
    int current = levels[0];
    int candidate = -1;
    int run = 0;
    std::size_t last_cross = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (decision(v[i]) != decision(v[i - 1])) last_cross = i;
        const int b = band(v[i]);
        if (b < 0 || b == current) {
            run = 0;
            candidate = -1;
            continue;
        }
        if (b == candidate) {
            ++run;
        } else {
            candidate = b;
            run = 1;
        }
        if (run >= cfg.hysteresis) {
            current = b;
            levels.push_back(b);
            starts.push_back(last_cross);
            run = 0;
            candidate = -1;
        }
    }

    PeriodSequence seq;
    const double end = trace.times.back() + shift;
    for (std::size_t n = 0; n < levels.size(); ++n) {
        const double s = boundary_time(starts[n]);
        const double e = n + 1 < levels.size() ? boundary_time(starts[n + 1]) : end;
        seq.push_back({levels[n], s, e - s});
    }
    return seq;
}

// ----------------------------------------------------------------- estimation

namespace {

struct Tally {
    double sum[3] = {0, 0, 0};
    double sum_sq[3] = {0, 0, 0};
    long count[3] = {0, 0, 0};
    long n10 = 0, n12 = 0;

    void add(const Tally& o, double sign = 1.0) {
        for (int i = 0; i < 3; ++i) {
            sum[i] += sign * o.sum[i];
            sum_sq[i] += sign * o.sum_sq[i];
            count[i] += static_cast<long>(sign) * o.count[i];
        }
        n10 += static_cast<long>(sign) * o.n10;
        n12 += static_cast<long>(sign) * o.n12;
    }
};

struct RatePair {
    TransitionRates naive;
    TransitionRates corrected;
};

RatePair rates_from_tally(const Tally& t, double cutoff) {
    for (int i = 0; i < 3; ++i)
        if (t.count[i] == 0) throw EstimationError(fmt::format("no periods of level {}", i));
    if (t.n10 + t.n12 == 0) throw EstimationError("no transitions out of level 1");
    const double tc[3] = {t.sum[0] / t.count[0], t.sum[1] / t.count[1], t.sum[2] / t.count[2]};
    const double b = static_cast<double>(t.n10) / static_cast<double>(t.n10 + t.n12);
    RatePair out;
    out.naive = {1.0 / tc[0], b / tc[1], (1 - b) / tc[1], 1.0 / tc[2], RateProvenance::ExactSolve};
    if (cutoff <= 0.0) {
        out.corrected = out.naive;
        return out;
    }
    for (double x : tc)
        if (x <= cutoff) throw EstimationError("mean duration below the censoring cutoff");
    double k = 1.0 / tc[1], p01 = 0, p21 = 0;
    for (int it = 0; it < 500; ++it) {
        p01 = (1 + cutoff * b * k) / (tc[0] - cutoff);
        p21 = (1 + cutoff * (1 - b) * k) / (tc[2] - cutoff);
        const double k_new = (1 + cutoff * (p01 * b + (1 - b) * p21)) / (tc[1] - cutoff);
        const bool done = std::abs(k_new - k) <= 1e-15 * k;
        k = k_new;
        if (done) break;
    }
    out.corrected = {p01, b * k, (1 - b) * k, p21, RateProvenance::ExactSolve};
    return out;
}

}  // namespace

EstimatedStatistics estimate_statistics(const std::vector<PeriodSequence>& sequences, double dt_dj,
                                        double cutoff, int jackknife_blocks) {
    // Trimmed periods of all sequences in order, with their successor level.
    struct Item {
        int level;
        double duration;
        int next;  // -1: none inside the trimmed range
    };
    std::vector<Item> items;
    EstimatedStatistics est;
    for (const PeriodSequence& seq : sequences) {
        if (seq.size() < 3) continue;
        const PeriodSequence inner(seq.begin() + 1, seq.end() - 1);
        for (std::size_t i = 0; i < inner.size(); ++i) {
            items.push_back({inner[i].level, inner[i].duration, i + 1 < inner.size() ? inner[i + 1].level : -1});
            est.observed_time += inner[i].duration;
        }
        const DoubleJumpCounts dj = count_double_jumps(inner, dt_dj);
        est.double_jumps.up += dj.up;
        est.double_jumps.down += dj.down;
    }
    if (items.size() < 100)
        throw EstimationError(fmt::format("only {} complete periods; at least 100 needed", items.size()));

    const int blocks = std::max(2, jackknife_blocks);
    std::vector<Tally> block(blocks);
    Tally all;
    for (std::size_t i = 0; i < items.size(); ++i) {
        Tally& b = block[i * blocks / items.size()];
        const Item& it = items[i];
        b.sum[it.level] += it.duration;
        b.sum_sq[it.level] += it.duration * it.duration;
        ++b.count[it.level];
        if (it.level == 1 && it.next == 0) ++b.n10;
        if (it.level == 1 && it.next == 2) ++b.n12;
    }
    for (const Tally& b : block) all.add(b);

    for (int i = 0; i < 3; ++i) {
        const long c = all.count[i];
        est.periods[i] = c;
        if (c == 0) continue;
        est.t[i] = all.sum[i] / c;
        const double var = c > 1 ? (all.sum_sq[i] - c * est.t[i] * est.t[i]) / (c - 1) : 0.0;
        est.t_se[i] = std::sqrt(std::max(var, 0.0) / c);
        est.n[i] = c / est.observed_time;
        est.n_se[i] = std::sqrt(static_cast<double>(c)) / est.observed_time;
    }
    est.transitions_10 = all.n10;
    est.transitions_12 = all.n12;
    est.n_dj = est.double_jumps.total() / est.observed_time;
    est.n_dj_se = std::sqrt(static_cast<double>(est.double_jumps.total())) / est.observed_time;
    est.cutoff = cutoff;

    const RatePair full = rates_from_tally(all, cutoff);
    est.naive_rates = full.naive;
    est.corrected_rates = full.corrected;

    // Delete-one-block jackknife of the corrected rates.
    std::vector<TransitionRates> loo;
    for (int b = 0; b < blocks; ++b) {
        Tally t = all;
        t.add(block[b], -1.0);
        try {
            loo.push_back(rates_from_tally(t, cutoff).corrected);
        } catch (const EstimationError&) {
        }
    }
    if (loo.size() >= 2) {
        auto jack = [&](double TransitionRates::*field) {
            double mean = 0.0;
            for (const auto& r : loo) mean += r.*field;
            mean /= loo.size();
            double ss = 0.0;
            for (const auto& r : loo) ss += (r.*field - mean) * (r.*field - mean);
            const double m = static_cast<double>(loo.size());
            return std::sqrt((m - 1) / m * ss);
        };
        est.corrected_se = {jack(&TransitionRates::p01), jack(&TransitionRates::p10),
                            jack(&TransitionRates::p12), jack(&TransitionRates::p21),
                            RateProvenance::ExactSolve};
    }
    return est;
}

}  // namespace twoatom
