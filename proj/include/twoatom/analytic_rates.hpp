#pragma once

#include <array>
#include <functional>
#include <string_view>
#include <utility>

#include "twoatom/atomic_model.hpp"
#include "twoatom/bloch_engine.hpp"

namespace twoatom {

using Matrix8c = Eigen::Matrix<Complex, 8, 8>;
using Vector8c = Eigen::Matrix<Complex, 8, 1>;

enum class RateProvenance { FirstOrderC3, ExactSolve };

/// Rates between intensity periods (0 dark, 1 single, 2 double), units of A3.
/// Direct 0<->2 transitions vanish and are not stored.
struct TransitionRates {
    double p01 = 0.0;
    double p10 = 0.0;
    double p12 = 0.0;
    double p21 = 0.0;
    RateProvenance provenance = RateProvenance::ExactSolve;

    [[nodiscard]] bool all_positive() const { return p01 > 0 && p10 > 0 && p12 > 0 && p21 > 0; }
};

std::string_view provenance_name(RateProvenance p);

/// Inner-outer coherences entering the rates, in solve order.
const std::array<std::pair<Dicke, Dicke>, 8>& coherence_order();

enum class DriveKind { Inner, Outer };

/// (A - i delta2) rho~ = drive, for rho1 started in the inner or outer subspace.
struct CoherenceSystem {
    Matrix8c a_matrix;
    Vector8c drive;
    double delta2 = 0.0;

    [[nodiscard]] Matrix8c lhs() const {
        return a_matrix - Complex(0.0, delta2) * Matrix8c::Identity();
    }
};

/// Coherence matrix as transcribed from its published closed form.
Matrix8c coherence_matrix_transcribed(const ModelParams& params, const DipoleCoupling& coupling);

/// Matrix A rebuilt element by element from <x|H0|x'>, <y|H0^dag|y'> and the
/// R+/R- matrix elements; no superoperator involved.
Matrix8c coherence_matrix_regenerated(const ModelParams& params, const DipoleCoupling& coupling);

Vector8c drive_inner(const ModelParams& params);
Vector8c drive_outer(const ModelParams& params, const DipoleCoupling& coupling);

CoherenceSystem coherence_system(const ModelParams& params, const DipoleCoupling& coupling,
                                 DriveKind kind);

/// Solves the 8x8 system.  Throws RegimeError when the matrix is
/// ill-conditioned (1/cond < 1e-8) and NumericalError on a bad residual.
Vector8c solve_coherences(const ModelParams& params, const DipoleCoupling& coupling,
                          DriveKind kind);

/// (<s12|rho1|e2>, <s23|rho1|e2>) for rho1 started in the given subspace.
/// Independent of C3; zero for the outer subspace.
std::pair<Complex, Complex> solve_e2_coherences(const ModelParams& params, SubspaceId initial);

/// Omega3^4 - 8 D^2 Omega3^2 + 4 A^2 D^2 + 16 D^4 (D = delta2); the closed
/// forms for p12 and p21 are singular where it vanishes.
double rates_pole_denominator(const ModelParams& params);

/// Closed forms, first order in Re C3.  Throws PoleError near the pole.
TransitionRates rates_first_order(const ModelParams& params, const DipoleCoupling& coupling);

/// Exact in C3 (second order in Omega2) from the linear solves.
TransitionRates rates_exact(const ModelParams& params, const DipoleCoupling& coupling);

/// The model is not expected to hold below ~0.5 wavelengths.
inline bool distance_untrusted(double r) { return r < 0.5; }

enum class CriticalQuantity { P12, P21, DoubleJump, T1, T2 };

std::string_view critical_quantity_name(CriticalQuantity q);

/// Derivative of a rate functional with respect to Re C3 at C3 = 0, as a
/// function of delta2 (central difference on the first-order rates).
double re_c3_coefficient(const ModelParams& params,
                         const std::function<double(const TransitionRates&)>& quantity,
                         double step = 1e-4);

/// Smallest delta2 in [0, 2 A3] where the Re C3 coefficient of the chosen
/// quantity changes sign.  p12 and p21 use their closed-form numerators,
/// the telegraph quantities a numerical coefficient.  Throws NotFoundError.
double critical_detuning(const ModelParams& params, CriticalQuantity which, double dt_dj = 160.0);

/// Closed-form root of Omega3^4 - 4 A^2 D^2 - 16 D^4.
double p12_critical_detuning_closed_form(const ModelParams& params);

}  // namespace twoatom
