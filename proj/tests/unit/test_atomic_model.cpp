#include <doctest.h>

#include <sstream>

#include "twoatom/atomic_model.hpp"

using namespace twoatom;
using D = Dicke;

namespace {

Matrix9c random_hermitian_psd(unsigned seed) {
    std::srand(seed);
    const Matrix9c a = Matrix9c::Random();
    Matrix9c rho = a * a.adjoint();
    return rho / rho.trace();
}

}  // namespace

TEST_CASE("coupling constant: near and far field") {
    const auto c1 = compute_c3({1.0, std::numbers::pi / 2, 1.0});
    CHECK(c1.c3.real() == doctest::Approx(0.0379954).epsilon(1e-5));
    CHECK(c1.c3.imag() == doctest::Approx(-0.2326853).epsilon(1e-5));
    CHECK(c1.c2 == Complex(0.0, 0.0));

    CHECK(std::abs(compute_c3({1e6, std::numbers::pi / 2, 1.0}).c3) < 1e-5);

    // Beyond three quarters of a wavelength the coupling stays moderate; the
    // 0.2 A3 level is only reached from r ~ 1.19 on (|C3(1)| = 0.236).
    for (double r = 0.76; r < 20.0; r += 0.01) CHECK(std::abs(compute_c3({r}).c3) < 0.32);
    for (double r = 1.19; r < 20.0; r += 0.01) CHECK(std::abs(compute_c3({r}).c3) < 0.2);
    CHECK(std::abs(compute_c3({1.0}).c3) == doctest::Approx(0.2357669).epsilon(1e-5));

    // |C3| r stays bounded and enveloped by c / r beyond one wavelength.
    for (double r = 1.0; r < 50.0; r += 0.05) CHECK(std::abs(compute_c3({r}).c3) * r < 0.3);

    CHECK_THROWS_AS(compute_c3({0.0}), DomainError);
    CHECK_THROWS_AS(compute_c3({-1.0}), DomainError);
    CHECK_THROWS_AS(compute_c3({1.0, 4.0}), DomainError);
}

TEST_CASE("coupling constant: near-field divergence") {
    // For r -> 0 the level shift diverges as (3/2)(1 - 3cos^2)/x^3 while the
    // collective decay correction Re C3 tends to A3.
    const double r = 0.01;
    const double x = 2 * std::numbers::pi * r;
    const auto c = compute_c3({r});
    CHECK(c.c3.imag() == doctest::Approx(1.5 / (x * x * x)).epsilon(1e-2));
    CHECK(c.c3.real() == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("parameter validation") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.regime_warnings().empty());
    p.a2 = 0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.delta3 = 0.1;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.omega3 = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.omega2 = -1e-3;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.omega2 = 0.03;  // > 0.1 omega3^2 / a3 = 0.025
    CHECK(p.regime_warnings().size() == 1);
    p.omega2 = 0.2;
    CHECK(p.regime_warnings().size() == 2);
}

TEST_CASE("jump operators match the explicit Dicke-basis forms") {
    const auto ops = build_operators({}, DipoleCoupling::none());
    const double h = 1.0 / std::numbers::sqrt2;
    Matrix9d rp = Matrix9d::Zero(), rm = Matrix9d::Zero();
    rp(idx(D::g), idx(D::s13)) = 1;
    rp(idx(D::s13), idx(D::e3)) = 1;
    rp(idx(D::s12), idx(D::s23)) = h;
    rp(idx(D::a12), idx(D::a23)) = -h;
    rm(idx(D::g), idx(D::a13)) = 1;
    rm(idx(D::a13), idx(D::e3)) = 1;
    rm(idx(D::s12), idx(D::a23)) = h;
    rm(idx(D::a12), idx(D::s23)) = h;
    CHECK((ops.rplus - rp).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((ops.rminus - rm).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("operator structure") {
    const DipoleCoupling c = DipoleCoupling::from_c3({0.1, -0.2});
    ModelParams p;
    p.delta2 = 0.3;
    const auto ops = build_operators(p, c);
    CHECK((ops.h1 - ops.h1.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(ops.gamma_plus + ops.gamma_minus == doctest::Approx(2 * p.a3));
    CHECK(ops.gamma_plus == doctest::Approx(1.1));

    // Atom interchange: H and R+ even, R- odd.
    const Matrix9c swap = atom_swap().cast<Complex>();
    CHECK((swap * ops.h0 * swap - ops.h0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((swap * ops.h1 * swap - ops.h1).cwiseAbs().maxCoeff() < 1e-15);
    const Matrix9d sw = atom_swap();
    CHECK((sw * ops.rplus * sw - ops.rplus).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((sw * ops.rminus * sw + ops.rminus).cwiseAbs().maxCoeff() < 1e-15);

    // h0 does not depend on omega2, h1 not on omega3, delta2, C3.
    ModelParams q = p;
    q.omega2 = 0.05;
    const auto ops_q = build_operators(q, c);
    CHECK((ops_q.h0 - ops.h0).cwiseAbs().maxCoeff() == 0.0);
    ModelParams s = q;
    s.omega3 = 0.7;
    s.delta2 = -0.1;
    CHECK((build_operators(s, DipoleCoupling::none()).h1 - ops_q.h1).cwiseAbs().maxCoeff() == 0.0);

    CHECK(build_operators(p.with_omega2(0.0), c).h1.isZero());
}

TEST_CASE("decay rates of the anti-Hermitian part") {
    auto decay = [](const DickeOperators& ops, D s) {
        return -2.0 * ops.h0(idx(s), idx(s)).imag();
    };
    const auto zero = build_operators({}, DipoleCoupling::none());
    CHECK(-0.5 * decay(zero, D::s13) == doctest::Approx(-0.5));
    CHECK(decay(zero, D::s13) == doctest::Approx(decay(zero, D::a13)));
    const auto strong = build_operators({}, DipoleCoupling::from_c3({0.999999, 0.0}));
    CHECK(decay(strong, D::a13) < 1e-5);
    CHECK(decay(strong, D::s13) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("reset map") {
    const DipoleCoupling c = DipoleCoupling::from_c3({0.1, 0.3});
    const auto ops = build_operators({}, c);
    Matrix9c e2 = Matrix9c::Zero();
    e2(idx(D::e2), idx(D::e2)) = 1;
    CHECK(reset_map(ops, e2).isZero());

    const auto ops0 = build_operators({}, DipoleCoupling::none());
    Matrix9c e3 = Matrix9c::Zero();
    e3(idx(D::e3), idx(D::e3)) = 1;
    const Matrix9c out = reset_map(ops0, e3);
    CHECK(out.trace().real() == doctest::Approx(2.0));
    CHECK(out(idx(D::s13), idx(D::s13)).real() == doctest::Approx(1.0));
    CHECK(out(idx(D::a13), idx(D::a13)).real() == doctest::Approx(1.0));

    Matrix9c s13 = Matrix9c::Zero();
    s13(idx(D::s13), idx(D::s13)) = 1;
    const Matrix9c g = reset_map(ops, s13);
    CHECK(g(idx(D::g), idx(D::g)).real() == doctest::Approx(1.1));
    CHECK(g.trace().real() == doctest::Approx(1.1));

    // Positivity and emission-rate identity on random states.
    for (unsigned seed = 1; seed <= 20; ++seed) {
        const Matrix9c rho = random_hermitian_psd(seed);
        const Matrix9c r = reset_map(ops, rho);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Matrix9c> es(r);
        CHECK(es.eigenvalues().minCoeff() > -1e-14);
        // Tr R(rho) = i Tr[(H - H^dag) rho]
        const Matrix9c h = ops.h_cond();
        const Complex loss = Complex(0, 1) * ((h - h.adjoint()) * rho).trace();
        CHECK(std::abs(loss - r.trace()) < 1e-13);
    }
}

TEST_CASE("unphysical channel rate is flagged") {
    const auto ops = build_operators({}, DipoleCoupling::from_c3({1.5, 0.0}));
    CHECK_FALSE(ops.channels_physical());
    CHECK_THROWS_AS(ops.require_physical_channels(), RegimeError);
}

TEST_CASE("product basis helpers") {
    const Matrix9c u = dicke_to_product();
    CHECK((u.adjoint() * u - Matrix9c::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(lowering_13(2), DomainError);
}

TEST_CASE("matrix text dump round trip") {
    const auto ops = build_operators({}, compute_c3({1.3}));
    std::stringstream ss;
    write_matrix(ss, ops.h0);
    const Matrix9c back = read_matrix(ss);
    CHECK((back - ops.h0).cwiseAbs().maxCoeff() == 0.0);
    std::stringstream bad("1,0 2,0\n");
    CHECK_THROWS_AS(read_matrix(bad), DomainError);
}
