#pragma once

#include <iosfwd>
#include <numbers>
#include <string>
#include <vector>

#include "twoatom/types.hpp"

namespace twoatom {

// All rates and frequencies are in units of A3, times in 1/A3, distances in
// units of lambda31 unless stated otherwise.
struct ModelParams {
    double a3 = 1.0;
    double omega2 = 0.01;
    double omega3 = 0.5;
    double delta2 = 0.0;
    double delta3 = 0.0;  // fixed
    double a2 = 0.0;      // fixed

    /// Throws DomainError when a hard invariant is violated.
    void validate() const;

    /// Soft checks of the weak-driving regime; empty when everything is fine.
    [[nodiscard]] std::vector<std::string> regime_warnings() const;

    /// Same parameters with a different weak Rabi frequency.
    [[nodiscard]] ModelParams with_omega2(double w) const {
        ModelParams p = *this;
        p.omega2 = w;
        return p;
    }
};

struct Geometry {
    double r = 1.0;
    double theta3 = std::numbers::pi / 2.0;
    double lambda31 = 1.0;

    void validate() const;
};

struct DipoleCoupling {
    Complex c3{0.0, 0.0};
    Complex c2{0.0, 0.0};  // always zero for a metastable level 2

    static DipoleCoupling none() { return {}; }
    static DipoleCoupling from_c3(Complex c) { return {c, {0.0, 0.0}}; }
};

/// Complex dipole-dipole coupling constant of the strong 1-3 transition.
/// Diverges as r^-3 for r -> 0 and decays as 1/r in the far field.
DipoleCoupling compute_c3(const Geometry& geometry, double a3 = 1.0);

/// Operators of the two-atom system in the Dicke basis (hbar = 1).
///
/// The no-emission evolution is generated by h0 + h1, photon emissions by the
/// two channels sqrt(gamma_plus) R+ and sqrt(gamma_minus) R-.  R+ collects the
/// symmetric and R- the antisymmetric combination of the single-atom lowering
/// operators on the 3-1 transition.
struct DickeOperators {
    Matrix9c h0 = Matrix9c::Zero();
    Matrix9c h1 = Matrix9c::Zero();
    Matrix9d rplus = Matrix9d::Zero();
    Matrix9d rminus = Matrix9d::Zero();
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;

    [[nodiscard]] Matrix9c h_cond() const { return h0 + h1; }

    /// Both emission channels carry a non-negative rate.
    [[nodiscard]] bool channels_physical() const {
        return gamma_plus >= 0.0 && gamma_minus >= 0.0;
    }

    /// Throws RegimeError unless channels_physical().
    void require_physical_channels() const;
};

DickeOperators build_operators(const ModelParams& params, const DipoleCoupling& coupling);

/// gamma+ R+ rho R+^dag + gamma- R- rho R-^dag.  Its trace is the photon
/// emission rate out of rho.
Matrix9c reset_map(const DickeOperators& ops, const Matrix9c& rho);

/// Atom interchange in the Dicke basis: symmetric states even, antisymmetric odd.
Matrix9d atom_swap();

// Product-basis helpers.  Product index = 3*(level_A - 1) + (level_B - 1).

/// Columns are the Dicke states expanded in the product basis
/// (phase convention i|a_jk> = (|jk> - |kj>)/sqrt2).
Matrix9c dicke_to_product();

/// Single-atom lowering operator |1><3| acting on atom 0 (A) or 1 (B).
Matrix9c lowering_13(int atom);

/// Plain-text dump: one matrix row per line, entries "re,im" separated by a
/// single space, 17 significant digits.
void write_matrix(std::ostream& out, const Matrix9c& m);
Matrix9c read_matrix(std::istream& in);

}  // namespace twoatom
