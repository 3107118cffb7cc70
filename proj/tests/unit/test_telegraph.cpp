#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "twoatom/rng.hpp"
#include "twoatom/telegraph_stats.hpp"

using namespace twoatom;

namespace {

const TransitionRates kReferenceRates{8e-4, 2.0 / 7500, 4e-4, 1.6e-3 / 3};

double mean_duration(const PeriodSequence& seq, int level) {
    double sum = 0;
    long n = 0;
    // first and last periods are truncated
    for (std::size_t i = 1; i + 1 < seq.size(); ++i)
        if (seq[i].level == level) {
            sum += seq[i].duration;
            ++n;
        }
    return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
    const auto zero = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
    CHECK(zero == Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto ones = Philox4x32::bijection({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
    CHECK(ones == Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    const auto pi = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                          {0xa4093822u, 0x299f31d0u});
    CHECK(pi == Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("philox streams") {
    Philox4x32 a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 16; ++i) {
        const auto x = a();
        CHECK(x == b());
        differ_c |= x != c();
        differ_d |= x != d();
    }
    CHECK(differ_c);
    CHECK(differ_d);

    Philox4x32 u(1, 0);
    double sum = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = u.uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        sum += x;
    }
    CHECK(std::abs(sum / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
}

TEST_CASE("ideal statistics at the reference rates") {
    const TelegraphStatistics s = ideal_statistics(kReferenceRates, 160.0);
    CHECK(s.t0 == doctest::Approx(1250.0).epsilon(1e-12));
    CHECK(s.t1 == doctest::Approx(1500.0).epsilon(1e-12));
    CHECK(s.t2 == doctest::Approx(1875.0).epsilon(1e-12));
    CHECK(s.n0 == doctest::Approx(1.28e-4).epsilon(1e-12));
    CHECK(s.n1 == doctest::Approx(3.2e-4).epsilon(1e-12));
    CHECK(s.n2 == doctest::Approx(1.92e-4).epsilon(1e-12));
    CHECK(s.n_dj == doctest::Approx(1.5540444446e-5).epsilon(1e-9));
    CHECK(s.n_dj_linear == doctest::Approx(1.6384e-5).epsilon(1e-12));
    CHECK(s.n_dj_up == doctest::Approx(s.n_dj_down).epsilon(1e-12));
    CHECK(std::abs(s.sum_rule() - 1.0) < 1e-12);
}

TEST_CASE("telegraph invariants over random rates") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-5.0, -2.0);
    for (int i = 0; i < 500; ++i) {
        const TransitionRates r{std::pow(10.0, u(gen)), std::pow(10.0, u(gen)), std::pow(10.0, u(gen)),
                                std::pow(10.0, u(gen))};
        const TelegraphStatistics s = ideal_statistics(r, 160.0);
        CHECK(std::abs(s.sum_rule() - 1.0) < 1e-12);
        CHECK(s.n_dj_up == doctest::Approx(s.n_dj_down).epsilon(1e-12));
        CHECK(s.n0 + s.n2 <= s.n1 * (1 + 1e-12));
        // growing the window only adds double jumps, up to the linear bound
        const TelegraphStatistics w = ideal_statistics(r, 320.0);
        CHECK(w.n_dj > s.n_dj);
        CHECK(s.n_dj <= s.n_dj_linear * (1 + 1e-12));
    }
    CHECK_THROWS_AS(ideal_statistics({1e-4, 0.0, 1e-4, 1e-4}, 160.0), DomainError);
    CHECK_THROWS_AS(ideal_statistics(kReferenceRates, -1.0), DomainError);
}

TEST_CASE("window corrections") {
    TelegraphModel m{kReferenceRates, 160.0, 114.0};
    const TelegraphStatistics s = window_corrected_statistics(m);
    const double dtau = 76.0;
    CHECK(s.dtau == doctest::Approx(dtau));
    CHECK(s.t0_cor == doctest::Approx(1250.0 + dtau * (1 + 1.0 / 3)));
    CHECK(s.t2_cor == doctest::Approx(1875.0 + dtau * (1 + 0.75)));
    CHECK(s.n2_cor == doctest::Approx(s.n2 * std::exp(-kReferenceRates.p21 * dtau)));
    CHECK(s.warnings.empty());
    CHECK(s.t1_cor > s.t1);

    m.dt_w = 500.0;
    m.dt_dj = 600.0;
    CHECK_FALSE(window_corrected_statistics(m).warnings.empty());
    m.dt_dj = 400.0;
    CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("recorded single-period density integrates to its rate") {
    for (double dtau : {0.0, 50.0, 164.7}) {
        // trapezoid on [dtau, dtau + 40000]
        const int n = 400000;
        const double h = 40000.0 / n;
        double sum = 0;
        for (int i = 0; i <= n; ++i) {
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            sum += w * recorded_single_density(kReferenceRates, dtau, dtau + i * h);
        }
        CHECK(sum * h == doctest::Approx(recorded_single_rate(kReferenceRates, dtau)).epsilon(1e-6));
    }
    const TelegraphStatistics s = ideal_statistics(kReferenceRates, 160.0);
    CHECK(recorded_single_rate(kReferenceRates, 0.0) == doctest::Approx(s.n1).epsilon(1e-12));
}

TEST_CASE("double-jump counting") {
    const PeriodSequence seq{{0, 0, 100}, {1, 100, 50}, {2, 150, 300}, {1, 450, 200},
                             {0, 650, 100}, {1, 750, 10}, {0, 760, 5}, {2, 765, 40},
                             {1, 805, 30}, {0, 835, 10}};
    const DoubleJumpCounts c = count_double_jumps(seq, 160.0);
    // 0->1(50)->2 up; 2->1(200)->0 too slow; 0->1(10)->0 not a jump; 0->2 direct up;
    // 2->1(30)->0 down.
    CHECK(c.up == 2);
    CHECK(c.down == 1);
    CHECK(c.total() == 3);
    CHECK(count_double_jumps({}, 160.0).total() == 0);
}

TEST_CASE("simulated telegraph signal matches the ideal statistics") {
    const double total = 2e7;
    const PeriodSequence seq = simulate_telegraph(kReferenceRates, total, 9);
    double covered = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        covered += seq[i].duration;
        if (i > 0) {
            REQUIRE(seq[i].level != seq[i - 1].level);
            REQUIRE(std::abs(seq[i].start - seq[i - 1].end()) < 1e-6);
            REQUIRE(std::abs(seq[i].level - seq[i - 1].level) == 1);
        }
    }
    CHECK(covered == doctest::Approx(total).epsilon(1e-12));
    const TelegraphStatistics s = ideal_statistics(kReferenceRates, 160.0);
    CHECK(mean_duration(seq, 0) == doctest::Approx(s.t0).epsilon(0.05));
    CHECK(mean_duration(seq, 1) == doctest::Approx(s.t1).epsilon(0.05));
    CHECK(mean_duration(seq, 2) == doctest::Approx(s.t2).epsilon(0.05));
    CHECK(simulate_telegraph(kReferenceRates, 1e5, 9) == simulate_telegraph(kReferenceRates, 1e5, 9));
    CHECK_FALSE(simulate_telegraph(kReferenceRates, 1e5, 9, 0) == simulate_telegraph(kReferenceRates, 1e5, 9, 1));
}

TEST_CASE("censoring") {
    const PeriodSequence seq{{0, 0, 100}, {1, 100, 10}, {0, 110, 50}, {1, 160, 200}, {2, 360, 4}, {1, 364, 96}};
    const PeriodSequence out = censor_sequence(seq, 20.0);
    REQUIRE(out.size() == 2);
    CHECK(out[0].level == 0);
    CHECK(out[0].duration == doctest::Approx(160.0));
    CHECK(out[1].level == 1);
    CHECK(out[1].start == doctest::Approx(160.0));
    CHECK(out[1].duration == doctest::Approx(300.0));
    CHECK(censor_sequence(seq, 0.0) == seq);

    // Against the first-order corrections at small dtau / T_i.
    const double dtau = 2.0 / 3.0 * 247.0;
    const PeriodSequence cen = censor_sequence(simulate_telegraph(kReferenceRates, 2e8, 21), dtau);
    const TelegraphStatistics th = window_corrected_statistics({kReferenceRates, 400.0, 247.0});
    CHECK(mean_duration(cen, 0) == doctest::Approx(th.t0_cor).epsilon(0.05));
    CHECK(mean_duration(cen, 1) == doctest::Approx(th.t1_cor).epsilon(0.05));
    CHECK(mean_duration(cen, 2) == doctest::Approx(th.t2_cor).epsilon(0.05));
}

TEST_CASE("period text round trip") {
    const PeriodSequence seq = simulate_telegraph(kReferenceRates, 1e5, 3);
    std::stringstream ss;
    write_periods(ss, seq);
    const PeriodSequence back = read_periods(ss);
    REQUIRE(back.size() == seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(back[i].level == seq[i].level);
        CHECK(back[i].duration == doctest::Approx(seq[i].duration).epsilon(1e-11));
    }
    std::stringstream bad("3 0 1\n");
    CHECK_THROWS_AS(read_periods(bad), DomainError);
}
