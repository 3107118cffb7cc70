#include "twoatom/bloch_engine.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace twoatom {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const Complex kI{0.0, 1.0};

Eigen::MatrixXcd kron(const Matrix9c& a, const Matrix9c& b) {
    Eigen::MatrixXcd k(kSuperDim, kSuperDim);
    for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) k.block(i * kDim, j * kDim, kDim, kDim) = a(i, j) * b;
    return k;
}

double max_abs(const Matrix9c& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::VectorXcd vectorize(const Matrix9c& rho) {
    Eigen::VectorXcd v(kSuperDim);
    for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) v(i * kDim + j) = rho(i, j);
    return v;
}

Matrix9c unvectorize(const Eigen::VectorXcd& v) {
    if (v.size() != kSuperDim) throw DomainError("unvectorize: expected 81 components");
    Matrix9c m;
    for (int i = 0; i < kDim; ++i)
        for (int j = 0; j < kDim; ++j) m(i, j) = v(i * kDim + j);
    return m;
}

const std::vector<Dicke>& subspace_states(SubspaceId sub) {
    static const std::vector<Dicke> dark{Dicke::e2};
    static const std::vector<Dicke> inner{Dicke::s12, Dicke::a12, Dicke::s23, Dicke::a23};
    static const std::vector<Dicke> outer{Dicke::g, Dicke::s13, Dicke::a13, Dicke::e3};
    switch (sub) {
        case SubspaceId::Dark: return dark;
        case SubspaceId::Inner: return inner;
        case SubspaceId::Outer: return outer;
    }
    throw DomainError("unknown subspace");
}

Matrix9d subspace_projector(SubspaceId sub) {
    Matrix9d p = Matrix9d::Zero();
    for (Dicke s : subspace_states(sub)) p(idx(s), idx(s)) = 1.0;
    return p;
}

void check_density_matrix(const Matrix9c& rho, double herm_tol, double trace_tol, double eig_tol) {
    const double herm = max_abs(rho - rho.adjoint());
    if (herm > herm_tol) throw DomainError(fmt::format("density matrix not Hermitian ({:.3g})", herm));
    const Complex tr = rho.trace();
    if (std::abs(tr - 1.0) > trace_tol)
        throw DomainError(fmt::format("density matrix trace {} != 1", tr.real()));
    Eigen::SelfAdjointEigenSolver<Matrix9c> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -eig_tol)
        throw DomainError(
            fmt::format("density matrix has negative eigenvalue {}", es.eigenvalues().minCoeff()));
}

// ---------------------------------------------------------------- generator

BlochGenerator::BlochGenerator(DickeOperators ops)
    : ops_(std::move(ops)), rp_(ops_.rplus.cast<Complex>()), rm_(ops_.rminus.cast<Complex>()) {}

BlochGenerator::BlochGenerator(const ModelParams& params, const DipoleCoupling& coupling)
    : BlochGenerator(build_operators(params, coupling)) {}

Matrix9c BlochGenerator::apply_l0(const Matrix9c& rho) const {
    const Matrix9c& h = ops_.h0;
    return -kI * (h * rho - rho * h.adjoint()) +
           ops_.gamma_plus * (rp_ * rho * rp_.transpose()) +
           ops_.gamma_minus * (rm_ * rho * rm_.transpose());
}

Matrix9c BlochGenerator::apply_omega2(const Matrix9c& rho) const {
    const Matrix9c& h = ops_.h1;
    return -kI * (h * rho - rho * h);
}

Matrix9c BlochGenerator::apply(const Matrix9c& rho) const {
    const Matrix9c h = ops_.h_cond();
    return -kI * (h * rho - rho * h.adjoint()) +
           ops_.gamma_plus * (rp_ * rho * rp_.transpose()) +
           ops_.gamma_minus * (rm_ * rho * rm_.transpose());
}

SuperOperator BlochGenerator::superop_l0() const {
    const Matrix9c id = Matrix9c::Identity();
    const Matrix9c& h = ops_.h0;
    // vec(A X B) = kron(A, B^T) vec(X) for row-major vec.
    SuperOperator l = -kI * kron(h, id) + kI * kron(id, h.conjugate());
    l += ops_.gamma_plus * kron(rp_, rp_) + ops_.gamma_minus * kron(rm_, rm_);
    return l;
}

SuperOperator BlochGenerator::superop_omega2() const {
    const Matrix9c id = Matrix9c::Identity();
    const Matrix9c& h = ops_.h1;
    return -kI * kron(h, id) + kI * kron(id, h.transpose());
}

SuperOperator BlochGenerator::superop() const { return superop_l0() + superop_omega2(); }

// ------------------------------------------------------ quasi-stationary states

DensityMatrix outer_state_closed_form(const ModelParams& params, const DipoleCoupling& coupling,
                                      bool printed_reading) {
    params.validate();
    using D = Dicke;
    const double a = params.a3;
    const double w = params.omega3;
    const Complex c = coupling.c3;
    Matrix9c m = Matrix9c::Zero();
    const double w2 = w * w;
    const double w4 = w2 * w2;
    m(idx(D::g), idx(D::g)) = (a * a + w2) * (a * a + w2) + a * a * std::norm(c) + 2 * a * a * a * c.real();
    const Complex inner_factor = a * a + (printed_reading ? w4 : w2) + a * c;
    m(idx(D::g), idx(D::s13)) = kI * kSqrt2 * a * w * inner_factor;
    m(idx(D::g), idx(D::e3)) = -a * w2 * (a + c);
    m(idx(D::s13), idx(D::s13)) = w2 * (2 * a * a + w2);
    m(idx(D::e3), idx(D::e3)) = w4;
    m(idx(D::a13), idx(D::a13)) = w4;
    m(idx(D::s13), idx(D::e3)) = kI * kSqrt2 * a * w2 * w;
    for (auto [i, j] : {std::pair{D::g, D::s13}, {D::g, D::e3}, {D::s13, D::e3}})
        m(idx(j), idx(i)) = std::conj(m(idx(i), idx(j)));
    const Complex tr = m.trace();
    if (!(std::abs(tr) > 0.0)) throw NumericalError("outer closed form has zero trace");
    return m / tr;
}

DensityMatrix quasi_stationary_state(SubspaceId sub, const ModelParams& params,
                                     const DipoleCoupling& coupling) {
    params.validate();
    using D = Dicke;
    DensityMatrix rho = DensityMatrix::Zero();
    switch (sub) {
        case SubspaceId::Dark:
            rho(idx(D::e2), idx(D::e2)) = 1.0;
            break;
        case SubspaceId::Inner: {
            // Each atom pair behaves as one atom in level 2 and one atom driven
            // on the strong transition; the weights are that atom's steady state.
            const double a = params.a3;
            const double w = params.omega3;
            const double den = a * a + 2 * w * w;
            const double lower = 0.5 * (a * a + w * w) / den;
            const double upper = 0.5 * w * w / den;
            const Complex coh = 0.5 * kI * w * a / den;
            rho(idx(D::s12), idx(D::s12)) = lower;
            rho(idx(D::a12), idx(D::a12)) = lower;
            rho(idx(D::s23), idx(D::s23)) = upper;
            rho(idx(D::a23), idx(D::a23)) = upper;
            rho(idx(D::s12), idx(D::s23)) = coh;
            rho(idx(D::s23), idx(D::s12)) = std::conj(coh);
            rho(idx(D::a12), idx(D::a23)) = -coh;
            rho(idx(D::a23), idx(D::a12)) = -std::conj(coh);
            break;
        }
        case SubspaceId::Outer:
            rho = outer_state_closed_form(params, coupling, false);
            break;
    }
    const BlochGenerator gen(params.with_omega2(0.0), coupling);
    const double resid = max_abs(gen.apply_l0(rho));
    if (resid > 1e-10)
        throw NumericalError(fmt::format("quasi-stationary residual {:.3g} exceeds 1e-10", resid));
    return rho;
}

DensityMatrix subspace_null_state(SubspaceId sub, const ModelParams& params,
                                  const DipoleCoupling& coupling) {
    const BlochGenerator gen(params.with_omega2(0.0), coupling);
    const SuperOperator l0 = gen.superop_l0();
    const auto& states = subspace_states(sub);
    const int n = static_cast<int>(states.size());
    std::vector<int> sel;
    for (Dicke i : states)
        for (Dicke j : states) sel.push_back(idx(i) * kDim + idx(j));
    Eigen::MatrixXcd restricted(n * n, n * n);
    for (int r = 0; r < n * n; ++r)
        for (int c = 0; c < n * n; ++c) restricted(r, c) = l0(sel[r], sel[c]);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(restricted, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (n > 1 && sv(n * n - 2) < 1e-10 * sv(0))
        throw NumericalError("null space of the restricted generator is degenerate");
    const Eigen::VectorXcd v = svd.matrixV().col(n * n - 1);
    Matrix9c m = Matrix9c::Zero();
    for (int k = 0; k < n * n; ++k) m(sel[k] / kDim, sel[k] % kDim) = v(k);
    return m / m.trace();
}

// ------------------------------------------------------------ perturbation

KernelProjector kernel_projector(const SuperOperator& l, double sv_threshold) {
    const int n = static_cast<int>(l.rows());
    Eigen::JacobiSVD<Eigen::MatrixXcd> right(l, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = right.singularValues();
    int k = 0;
    while (k < n && sv(n - 1 - k) < sv_threshold) ++k;
    KernelProjector out;
    out.dim = k;
    if (k == 0) {
        out.p = SuperOperator::Zero(n, n);
        return out;
    }
    // Right null vectors are the trailing columns of V, left null vectors the
    // trailing columns of U.
    const Eigen::MatrixXcd v = right.matrixV().rightCols(k);
    const Eigen::MatrixXcd w = right.matrixU().rightCols(k);
    const Eigen::MatrixXcd overlap = w.adjoint() * v;
    out.p = v * overlap.fullPivLu().solve(w.adjoint());
    return out;
}

Matrix9c perturbed_state(SubspaceId sub, const ModelParams& params, const DipoleCoupling& coupling) {
    const BlochGenerator gen(params, coupling);
    const DensityMatrix rho0 = quasi_stationary_state(sub, params, coupling);
    if (params.omega2 == 0.0) return Matrix9c::Zero();

    const SuperOperator l0 = gen.superop_l0();
    const KernelProjector proj = kernel_projector(l0);
    const Eigen::VectorXcd b = vectorize(gen.apply_omega2(rho0));
    const double leak = (proj.p * b).cwiseAbs().maxCoeff();
    if (leak > 1e-8)
        throw NumericalError(fmt::format("drive has kernel component {:.3g}", leak));

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(l0);
    cod.setThreshold(1e-9 / std::max(1.0, l0.cwiseAbs().maxCoeff()));
    Eigen::VectorXcd x = -cod.solve(b);
    x -= proj.p * x;
    const double resid = (l0 * x + b).cwiseAbs().maxCoeff();
    if (resid > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff()))
        throw NumericalError(fmt::format("resolvent solve residual {:.3g}", resid));
    return unvectorize(x);
}

// ------------------------------------------------------------- propagation

DensityMatrix propagate(const DensityMatrix& rho, double t, const BlochGenerator& gen,
                        const PropagateOptions& opt) {
    if (!(t >= 0.0)) throw DomainError("propagation time must be non-negative");
    if (t == 0.0) return rho;

    // Dormand-Prince 5(4) coefficients.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

    Matrix9c y = rho;
    Matrix9c k1 = gen.apply(y);
    double time = 0.0;
    double h = std::min(opt.initial_step, t);
    long steps = 0;
    while (time < t) {
        if (++steps > opt.max_steps) throw NumericalError("propagate: step budget exhausted");
        if (time + h > t) h = t - time;
        const Matrix9c k2 = gen.apply(y + h * (a21 * k1));
        const Matrix9c k3 = gen.apply(y + h * (a31 * k1 + a32 * k2));
        const Matrix9c k4 = gen.apply(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Matrix9c k5 = gen.apply(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Matrix9c k6 =
            gen.apply(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Matrix9c y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Matrix9c k7 = gen.apply(y5);
        const Matrix9c err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double norm = 0.0;
        for (int i = 0; i < kDim; ++i)
            for (int j = 0; j < kDim; ++j) {
                const double scale =
                    opt.atol + opt.rtol * std::max(std::abs(y(i, j)), std::abs(y5(i, j)));
                norm = std::max(norm, std::abs(err(i, j)) / scale);
            }

        if (norm <= 1.0) {
            time += h;
            y = 0.5 * (y5 + y5.adjoint());
            k1 = gen.apply(y);
        }
        const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
        h *= factor;
        if (h < opt.min_step && time < t)
            throw NumericalError(fmt::format("propagate: step size underflow at t={}", time));
    }
    return y;
}

Eigen::VectorXcd l0_spectrum(const ModelParams& params, const DipoleCoupling& coupling) {
    const BlochGenerator gen(params.with_omega2(0.0), coupling);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(gen.superop_l0(), false);
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(),
              [](const Complex& x, const Complex& y) { return x.real() > y.real(); });
    return ev;
}

PopulationRates population_derivatives(const BlochGenerator& gen, const DensityMatrix& rho) {
    const Matrix9c d = gen.apply(rho);
    auto pop = [&](SubspaceId sub) {
        double s = 0.0;
        for (Dicke st : subspace_states(sub)) s += d(idx(st), idx(st)).real();
        return s;
    };
    return {pop(SubspaceId::Dark), pop(SubspaceId::Inner), pop(SubspaceId::Outer)};
}

PopulationRates population_derivatives_from_coherences(double omega2, const DensityMatrix& rho) {
    using D = Dicke;
    PopulationRates out;
    out.dark = kSqrt2 * omega2 * rho(idx(D::s12), idx(D::e2)).imag();
    out.outer = omega2 * (kSqrt2 * rho(idx(D::s12), idx(D::g)) + rho(idx(D::s23), idx(D::s13)) +
                          rho(idx(D::a23), idx(D::a13)))
                             .imag();
    out.inner = -out.dark - out.outer;
    return out;
}

}  // namespace twoatom
