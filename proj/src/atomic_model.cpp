#include "twoatom/atomic_model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace twoatom {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const Complex kI{0.0, 1.0};

int product_index(int level_a, int level_b) { return 3 * (level_a - 1) + (level_b - 1); }

template <typename M>
void add_outer(M& m, Dicke row, Dicke col, typename M::Scalar value) {
    m(idx(row), idx(col)) += value;
}

}  // namespace

void ModelParams::validate() const {
    if (!(a3 > 0.0)) throw DomainError("a3 must be positive");
    if (!(omega3 > 0.0)) throw DomainError("omega3 must be positive");
    if (!(omega2 >= 0.0)) throw DomainError("omega2 must be non-negative");
    if (a2 != 0.0) throw DomainError("a2 is fixed to 0 (metastable level 2)");
    if (delta3 != 0.0) throw DomainError("delta3 is fixed to 0");
    if (!std::isfinite(delta2)) throw DomainError("delta2 must be finite");
}

std::vector<std::string> ModelParams::regime_warnings() const {
    std::vector<std::string> out;
    if (omega2 > 0.1 * omega3)
        out.push_back(fmt::format("omega2={} exceeds 0.1*omega3={}", omega2, 0.1 * omega3));
    if (omega2 > 0.1 * omega3 * omega3 / a3)
        out.push_back(fmt::format("omega2={} exceeds 0.1*omega3^2/a3={}", omega2,
                                  0.1 * omega3 * omega3 / a3));
    return out;
}

void Geometry::validate() const {
    if (!(r > 0.0)) throw DomainError("atomic distance r must be positive");
    if (!(theta3 >= 0.0 && theta3 <= std::numbers::pi))
        throw DomainError("theta3 must lie in [0, pi]");
    if (!(lambda31 > 0.0)) throw DomainError("lambda31 must be positive");
}

DipoleCoupling compute_c3(const Geometry& geometry, double a3) {
    geometry.validate();
    const double x = 2.0 * std::numbers::pi / geometry.lambda31 * geometry.r;
    const double cos2 = std::cos(geometry.theta3) * std::cos(geometry.theta3);
    const Complex far = (1.0 - cos2) / (kI * x);
    const Complex near = (1.0 / (x * x) - 1.0 / (kI * x * x * x)) * (1.0 - 3.0 * cos2);
    const Complex c3 = 1.5 * a3 * std::exp(kI * x) * (far + near);
    return DipoleCoupling::from_c3(c3);
}

Matrix9c dicke_to_product() {
    Matrix9c u = Matrix9c::Zero();
    const double h = 1.0 / kSqrt2;
    auto sym = [&](Dicke d, int j, int k) {
        u(product_index(j, k), idx(d)) = h;
        u(product_index(k, j), idx(d)) = h;
    };
    auto anti = [&](Dicke d, int j, int k) {
        u(product_index(j, k), idx(d)) = -kI * h;
        u(product_index(k, j), idx(d)) = kI * h;
    };
    u(product_index(1, 1), idx(Dicke::g)) = 1.0;
    u(product_index(2, 2), idx(Dicke::e2)) = 1.0;
    u(product_index(3, 3), idx(Dicke::e3)) = 1.0;
    sym(Dicke::s12, 1, 2);
    sym(Dicke::s13, 1, 3);
    sym(Dicke::s23, 2, 3);
    anti(Dicke::a12, 1, 2);
    anti(Dicke::a13, 1, 3);
    anti(Dicke::a23, 2, 3);
    return u;
}

Matrix9c lowering_13(int atom) {
    if (atom != 0 && atom != 1) throw DomainError("atom index must be 0 or 1");
    Matrix9c s = Matrix9c::Zero();
    for (int other = 1; other <= 3; ++other) {
        if (atom == 0)
            s(product_index(1, other), product_index(3, other)) = 1.0;
        else
            s(product_index(other, 1), product_index(other, 3)) = 1.0;
    }
    return s;
}

namespace {

// The antisymmetric channel picks up a global phase i from the a_jk
// convention; it is removed so both channel matrices are real.
Matrix9d to_dicke_real(const Matrix9c& product_op, Complex phase) {
    const Matrix9c u = dicke_to_product();
    const Matrix9c m = phase * (u.adjoint() * product_op * u);
    if (m.imag().cwiseAbs().maxCoeff() > 1e-14)
        throw NumericalError("channel operator is not real in the Dicke basis");
    return m.real();
}

}  // namespace

DickeOperators build_operators(const ModelParams& params, const DipoleCoupling& coupling) {
    params.validate();
    using D = Dicke;
    DickeOperators ops;
    const double a3 = params.a3;
    const double w3 = params.omega3;
    const double w2 = params.omega2;
    const double d2 = params.delta2;
    const Complex c3 = coupling.c3;

    const Matrix9c s_a = lowering_13(0);
    const Matrix9c s_b = lowering_13(1);
    ops.rplus = to_dicke_real((s_a + s_b) / kSqrt2, 1.0);
    ops.rminus = to_dicke_real((s_a - s_b) / kSqrt2, -kI);
    ops.gamma_plus = a3 + c3.real();
    ops.gamma_minus = a3 - c3.real();

    // Decay and level shifts: (1/2i)[...].
    Matrix9c decay = Matrix9c::Zero();
    add_outer(decay, D::s23, D::s23, Complex(a3));
    add_outer(decay, D::a23, D::a23, Complex(a3));
    add_outer(decay, D::s13, D::s13, a3 + c3);
    add_outer(decay, D::a13, D::a13, a3 - c3);
    add_outer(decay, D::e3, D::e3, Complex(2.0 * a3));
    ops.h0 = decay / (2.0 * kI);

    Matrix9c drive3 = Matrix9c::Zero();
    add_outer(drive3, D::g, D::s13, Complex(kSqrt2 * w3));
    add_outer(drive3, D::s13, D::e3, Complex(kSqrt2 * w3));
    add_outer(drive3, D::s12, D::s23, Complex(w3));
    add_outer(drive3, D::a12, D::a23, Complex(-w3));
    ops.h0 += 0.5 * (drive3 + drive3.adjoint());

    add_outer(ops.h0, D::e2, D::e2, Complex(-2.0 * d2));
    for (D s : {D::s12, D::a12, D::s23, D::a23}) add_outer(ops.h0, s, s, Complex(-d2));

    Matrix9c drive2 = Matrix9c::Zero();
    add_outer(drive2, D::g, D::s12, Complex(kSqrt2 * w2));
    add_outer(drive2, D::s12, D::e2, Complex(kSqrt2 * w2));
    add_outer(drive2, D::s13, D::s23, Complex(w2));
    add_outer(drive2, D::a13, D::a23, Complex(w2));
    ops.h1 = 0.5 * (drive2 + drive2.adjoint());
    return ops;
}

void DickeOperators::require_physical_channels() const {
    if (!channels_physical())
        throw RegimeError(fmt::format(
            "negative emission channel rate (gamma+={}, gamma-={}): |Re C3| > A3",
            gamma_plus, gamma_minus));
}

Matrix9c reset_map(const DickeOperators& ops, const Matrix9c& rho) {
    const Matrix9c rp = ops.rplus.cast<Complex>();
    const Matrix9c rm = ops.rminus.cast<Complex>();
    return ops.gamma_plus * (rp * rho * rp.transpose()) +
           ops.gamma_minus * (rm * rho * rm.transpose());
}

Matrix9d atom_swap() {
    Matrix9d p = Matrix9d::Identity();
    for (Dicke a : {Dicke::a12, Dicke::a13, Dicke::a23}) p(idx(a), idx(a)) = -1.0;
    return p;
}

void write_matrix(std::ostream& out, const Matrix9c& m) {
    for (int i = 0; i < kDim; ++i) {
        for (int j = 0; j < kDim; ++j) {
            if (j) out << ' ';
            out << fmt::format("{:.17g},{:.17g}", m(i, j).real(), m(i, j).imag());
        }
        out << '\n';
    }
}

Matrix9c read_matrix(std::istream& in) {
    Matrix9c m;
    std::string line;
    for (int i = 0; i < kDim; ++i) {
        if (!std::getline(in, line)) throw DomainError("matrix dump: missing row");
        std::istringstream row(line);
        for (int j = 0; j < kDim; ++j) {
            std::string cell;
            if (!(row >> cell)) throw DomainError("matrix dump: missing entry");
            const auto comma = cell.find(',');
            if (comma == std::string::npos) throw DomainError("matrix dump: expected re,im");
            m(i, j) = Complex(std::stod(cell.substr(0, comma)), std::stod(cell.substr(comma + 1)));
        }
    }
    return m;
}

}  // namespace twoatom
