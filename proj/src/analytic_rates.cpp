#include "twoatom/analytic_rates.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "twoatom/telegraph_stats.hpp"

namespace twoatom {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const Complex kI{0.0, 1.0};

using D = Dicke;

}  // namespace

std::string_view provenance_name(RateProvenance p) {
    return p == RateProvenance::FirstOrderC3 ? "first_order" : "exact";
}

const std::array<std::pair<Dicke, Dicke>, 8>& coherence_order() {
    static const std::array<std::pair<Dicke, Dicke>, 8> order{{{D::s12, D::g},
                                                               {D::s12, D::s13},
                                                               {D::s12, D::e3},
                                                               {D::s23, D::g},
                                                               {D::s23, D::s13},
                                                               {D::s23, D::e3},
                                                               {D::a12, D::a13},
                                                               {D::a23, D::a13}}};
    return order;
}

Matrix8c coherence_matrix_transcribed(const ModelParams& params, const DipoleCoupling& coupling) {
    const double a = params.a3;
    const double w = params.omega3;
    const double rc = coupling.c3.real();
    const Complex cs = std::conj(coupling.c3);
    const Complex iw2 = kI * w / kSqrt2;  // i Omega3 / sqrt2
    const Complex iwh = kI * w / 2.0;     // i Omega3 / 2
    Matrix8c m = Matrix8c::Zero();
    // clang-format off
    m.row(0) << 0.0, -iw2, 0.0, iwh, -(a + rc) / kSqrt2, 0.0, 0.0, (rc - a) / kSqrt2;
    m.row(1) << -iw2, (a + cs) / 2.0, -iw2, 0.0, iwh, -(a + rc) / kSqrt2, 0.0, 0.0;
    m.row(2) << 0.0, -iw2, a, 0.0, 0.0, iwh, 0.0, 0.0;
    m.row(3) << iwh, 0.0, 0.0, a / 2.0, -iw2, 0.0, 0.0, 0.0;
    m.row(4) << 0.0, iwh, 0.0, -iw2, a + cs / 2.0, -iw2, 0.0, 0.0;
    m.row(5) << 0.0, 0.0, iwh, 0.0, -iw2, 1.5 * a, 0.0, 0.0;
    m.row(6) << 0.0, 0.0, 0.0, 0.0, 0.0, -(a - rc) / kSqrt2, (a - cs) / 2.0, -iwh;
    m.row(7) << 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -iwh, a - cs / 2.0;
    // clang-format on
    return m;
}

Matrix8c coherence_matrix_regenerated(const ModelParams& params, const DipoleCoupling& coupling) {
    ModelParams p = params;
    p.delta2 = 0.0;
    p.omega2 = 0.0;
    const DickeOperators ops = build_operators(p, coupling);
    const Matrix9c h0 = ops.h0;
    const Matrix9c h0_dag = h0.adjoint();
    const auto& order = coherence_order();
    // Row (x0, y0), column (x, y):
    //   0 = ... - i <x0|H0|x> rho_{x y0} + i rho_{x0 y} <y|H0^dag|y0>
    //       + sum_pm gamma_pm <x0|R|x> rho_{xy} <y|R^T|y0>
    // and A collects minus the coefficients.
    Matrix8c m = Matrix8c::Zero();
    for (int r = 0; r < 8; ++r) {
        const int x0 = idx(order[r].first);
        const int y0 = idx(order[r].second);
        for (int c = 0; c < 8; ++c) {
            const int x = idx(order[c].first);
            const int y = idx(order[c].second);
            Complex coeff = 0.0;
            if (y == y0) coeff += -kI * h0(x0, x);
            if (x == x0) coeff += kI * h0_dag(y, y0);
            coeff += ops.gamma_plus * ops.rplus(x0, x) * ops.rplus(y0, y);
            coeff += ops.gamma_minus * ops.rminus(x0, x) * ops.rminus(y0, y);
            m(r, c) = -coeff;
        }
    }
    return m;
}

Vector8c drive_inner(const ModelParams& params) {
    const double a = params.a3;
    const double w = params.omega3;
    const Complex pre = kI * params.omega2 * w / (4.0 * (a * a + 2 * w * w));
    Vector8c v;
    v << kSqrt2 * (w * w + a * a) / w, kI * a, 0.0, -kI * kSqrt2 * a, w, 0.0, -kI * a, w;
    return pre * v;
}

Vector8c drive_outer(const ModelParams& params, const DipoleCoupling& coupling) {
    const double a = params.a3;
    const double w = params.omega3;
    const double rc = coupling.c3.real();
    const double ic = coupling.c3.imag();
    const double a2 = a * a, w2 = w * w;
    const double den = kSqrt2 * (4 * w2 * w2 + 4 * w2 * a2 + a2 * rc * rc + 2 * a2 * a * rc +
                                 a2 * ic * ic + a2 * a2);
    Vector8c v;
    v << w2 * w2 + 2 * w2 * a2 + a2 * rc * rc + 2 * a2 * a * rc + a2 * ic * ic + a2 * a2,
        kI * w * kSqrt2 * a * (a2 + a * rc + kI * ic * a + w2),
        -w2 * (a + rc + kI * ic) * a,
        kI * w * a * (-w2 - a2 - a * rc + kI * ic * a),
        w2 * (w2 + 2 * a2) / kSqrt2,
        kI * w2 * w * a,
        0.0,
        w2 * w2 / kSqrt2;
    return -kI * params.omega2 / den * v;
}

CoherenceSystem coherence_system(const ModelParams& params, const DipoleCoupling& coupling,
                                 DriveKind kind) {
    params.validate();
    CoherenceSystem sys;
    sys.a_matrix = coherence_matrix_transcribed(params, coupling);
    sys.drive = kind == DriveKind::Inner ? drive_inner(params) : drive_outer(params, coupling);
    sys.delta2 = params.delta2;
    return sys;
}

Vector8c solve_coherences(const ModelParams& params, const DipoleCoupling& coupling,
                          DriveKind kind) {
    const CoherenceSystem sys = coherence_system(params, coupling, kind);
    const Matrix8c lhs = sys.lhs();
    Eigen::JacobiSVD<Matrix8c> svd(lhs);
    const auto& sv = svd.singularValues();
    const double inv_cond = sv(7) / sv(0);
    if (!(inv_cond >= 1e-8))
        throw RegimeError(fmt::format("coherence system ill-conditioned (cond = {:.3g})", 1.0 / inv_cond));
    const Vector8c x = lhs.partialPivLu().solve(sys.drive);
    const double resid = (lhs * x - sys.drive).norm();
    if (resid > 1e-10 * std::max(sys.drive.norm(), 1e-300) && sys.drive.norm() > 0)
        throw NumericalError(fmt::format("coherence solve residual {:.3g}", resid));
    return x;
}

std::pair<Complex, Complex> solve_e2_coherences(const ModelParams& params, SubspaceId initial) {
    params.validate();
    const double a = params.a3;
    const double w = params.omega3;
    const double d = params.delta2;
    const double w2 = params.omega2;
    Eigen::Vector2cd b = Eigen::Vector2cd::Zero();
    switch (initial) {
        case SubspaceId::Outer:
            return {0.0, 0.0};
        case SubspaceId::Dark:
            b << -kI * w2 / kSqrt2, 0.0;
            break;
        case SubspaceId::Inner: {
            const DensityMatrix rho0 = quasi_stationary_state(SubspaceId::Inner, params, DipoleCoupling::none());
            b << kI * w2 / kSqrt2 * rho0(idx(D::s12), idx(D::s12)),
                kI * w2 / kSqrt2 * rho0(idx(D::s23), idx(D::s12));
            break;
        }
    }
    // Equations of motion of <s12|rho|e2>, <s23|rho|e2> without the weak laser.
    Eigen::Matrix2cd m;
    m << -kI * d, -kI * w / 2.0, -kI * w / 2.0, -(a / 2.0 + kI * d);
    const Eigen::Vector2cd c = m.partialPivLu().solve(-b);
    return {c(0), c(1)};
}

double rates_pole_denominator(const ModelParams& p) {
    const double d2 = p.delta2 * p.delta2;
    const double w2 = p.omega3 * p.omega3;
    return w2 * w2 - 8 * d2 * w2 + 4 * p.a3 * p.a3 * d2 + 16 * d2 * d2;
}

namespace {

// Numerators of the Re C3 coefficients of p12 and p21.
double p12_coefficient_numerator(double a, double w, double d) {
    const double d2 = d * d;
    return w * w * w * w - 4 * a * a * d2 - 16 * d2 * d2;
}

double p21_coefficient_numerator(double a, double w, double d) {
    const double a2 = a * a, w2 = w * w, d2 = d * d;
    const double a4 = a2 * a2, w4 = w2 * w2, d4 = d2 * d2;
    return a4 * w4 + 4 * a2 * w4 * w2 - 12 * a2 * d2 * w4 - 64 * a2 * d4 * d2 - 4 * a4 * a2 * d2 -
           32 * a4 * d4 - 64 * d4 * w4 + 16 * d2 * w4 * w2;
}

}  // namespace

TransitionRates rates_first_order(const ModelParams& params, const DipoleCoupling& coupling) {
    params.validate();
    const double a = params.a3;
    const double w = params.omega3;
    const double d = params.delta2;
    const double rc = coupling.c3.real();
    const double s = params.omega2 * params.omega2;
    const double w2 = w * w;
    const double dd = a * a + 2 * w2;
    const double den = rates_pole_denominator(params);
    if (std::abs(den) < 1e-9)
        throw PoleError(fmt::format("first-order rates singular at delta2={} (denominator {:.3g})", d, den));

    TransitionRates r;
    r.provenance = RateProvenance::FirstOrderC3;
    r.p01 = 2 * s * a * w2 / den;
    r.p10 = s * a * w2 * (a * a + 4 * d * d) / (dd * den);
    r.p12 = s * (a * w2 / den + rc * 2 * a * a * w2 * p12_coefficient_numerator(a, w, d) /
                                    (dd * den * den));
    r.p21 = s * (2 * a * w2 * (a * a + 4 * d * d) / (den * dd) +
                 rc * 4 * a * a * w2 * p21_coefficient_numerator(a, w, d) / (dd * dd * dd * den * den));
    return r;
}

TransitionRates rates_exact(const ModelParams& params, const DipoleCoupling& coupling) {
    params.validate();
    const double w2 = params.omega2;
    auto outer_flux = [](const Vector8c& x) { return (kSqrt2 * x(0) + x(4) + x(7)).imag(); };
    TransitionRates r;
    r.provenance = RateProvenance::ExactSolve;
    r.p12 = w2 * outer_flux(solve_coherences(params, coupling, DriveKind::Inner));
    r.p21 = -w2 * outer_flux(solve_coherences(params, coupling, DriveKind::Outer));
    r.p10 = kSqrt2 * w2 * solve_e2_coherences(params, SubspaceId::Inner).first.imag();
    r.p01 = -kSqrt2 * w2 * solve_e2_coherences(params, SubspaceId::Dark).first.imag();
    return r;
}

// ------------------------------------------------------- critical detunings

std::string_view critical_quantity_name(CriticalQuantity q) {
    switch (q) {
        case CriticalQuantity::P12: return "p12";
        case CriticalQuantity::P21: return "p21";
        case CriticalQuantity::DoubleJump: return "double_jump";
        case CriticalQuantity::T1: return "t1";
        case CriticalQuantity::T2: return "t2";
    }
    return "?";
}

double re_c3_coefficient(const ModelParams& params,
                         const std::function<double(const TransitionRates&)>& quantity,
                         double step) {
    const double up = quantity(rates_first_order(params, DipoleCoupling::from_c3({step, 0.0})));
    const double down = quantity(rates_first_order(params, DipoleCoupling::from_c3({-step, 0.0})));
    return (up - down) / (2 * step);
}

double p12_critical_detuning_closed_form(const ModelParams& params) {
    // 16 x^2 + 4 A^2 x - Omega3^4 = 0 with x = delta2^2.
    const double a2 = params.a3 * params.a3;
    const double w4 = std::pow(params.omega3, 4);
    const double x = (-4 * a2 + std::sqrt(16 * a2 * a2 + 64 * w4)) / 32.0;
    return std::sqrt(x);
}

double critical_detuning(const ModelParams& params, CriticalQuantity which, double dt_dj) {
    params.validate();
    const double a = params.a3;
    const double w = params.omega3;
    std::function<double(double)> f;
    switch (which) {
        case CriticalQuantity::P12:
            f = [=](double d) { return p12_coefficient_numerator(a, w, d); };
            break;
        case CriticalQuantity::P21:
            f = [=](double d) { return p21_coefficient_numerator(a, w, d); };
            break;
        default: {
            std::function<double(const TransitionRates&)> q;
            if (which == CriticalQuantity::DoubleJump)
                q = [dt_dj](const TransitionRates& r) { return ideal_statistics(r, dt_dj).n_dj; };
            else if (which == CriticalQuantity::T1)
                q = [](const TransitionRates& r) { return 1.0 / (r.p10 + r.p12); };
            else
                q = [](const TransitionRates& r) { return 1.0 / r.p21; };
            // Scale-free in omega2; evaluate at a fixed small value.
            const ModelParams base = params.with_omega2(0.01 * params.a3);
            f = [=](double d) {
                ModelParams p = base;
                p.delta2 = d;
                return re_c3_coefficient(p, q);
            };
        }
    }

    const double hi_end = 2.0 * a;
    constexpr int kScan = 2000;
    double lo = 0.0;
    double f_lo = f(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double hi = hi_end * i / kScan;
        const double f_hi = f(hi);
        if (f_lo == 0.0) return lo;
        if ((f_lo < 0) != (f_hi < 0)) {
            double l = lo, h = hi, fl = f_lo;
            for (int it = 0; it < 200 && h - l > 0.0; ++it) {
                const double mid = 0.5 * (l + h);
                if (mid <= l || mid >= h) break;
                const double fm = f(mid);
                if (fm == 0.0) return mid;
                if ((fm < 0) == (fl < 0)) {
                    l = mid;
                    fl = fm;
                } else {
                    h = mid;
                }
            }
            return 0.5 * (l + h);
        }
        lo = hi;
        f_lo = f_hi;
    }
    throw NotFoundError(fmt::format("no sign change of the Re C3 coefficient of {} in [0, {}]",
                                    critical_quantity_name(which), hi_end));
}

}  // namespace twoatom
