#pragma once

#include <vector>

#include <Eigen/Dense>

#include "twoatom/atomic_model.hpp"

namespace twoatom {

using DensityMatrix = Matrix9c;
using SuperOperator = Eigen::MatrixXcd;  // 81 x 81, row-major vectorization

inline constexpr int kSuperDim = kDim * kDim;

/// Row-major vectorization: vec(rho)[9*i + j] = rho(i, j).
Eigen::VectorXcd vectorize(const Matrix9c& rho);
Matrix9c unvectorize(const Eigen::VectorXcd& v);

/// Intensity subspaces; the enumerator value is the intensity level.
enum class SubspaceId : int { Dark = 0, Inner = 1, Outer = 2 };

const std::vector<Dicke>& subspace_states(SubspaceId sub);
/// Diagonal projector onto a subspace.
Matrix9d subspace_projector(SubspaceId sub);

/// Throws DomainError unless rho is Hermitian, unit-trace and positive
/// semidefinite within the given tolerances.
void check_density_matrix(const Matrix9c& rho, double herm_tol = 1e-12,
                          double trace_tol = 1e-12, double eig_tol = 1e-10);

/// L(rho) = -i (H rho - rho H^dag) + gamma+ R+ rho R+^T + gamma- R- rho R-^T,
/// split into the part without the weak laser (L0) and the commutator with
/// h1 (L_omega2).  Immutable; safe to share between threads.
class BlochGenerator {
public:
    explicit BlochGenerator(DickeOperators ops);
    BlochGenerator(const ModelParams& params, const DipoleCoupling& coupling);

    [[nodiscard]] Matrix9c apply(const Matrix9c& rho) const;
    [[nodiscard]] Matrix9c apply_l0(const Matrix9c& rho) const;
    [[nodiscard]] Matrix9c apply_omega2(const Matrix9c& rho) const;

    [[nodiscard]] SuperOperator superop() const;
    [[nodiscard]] SuperOperator superop_l0() const;
    [[nodiscard]] SuperOperator superop_omega2() const;

    [[nodiscard]] const DickeOperators& operators() const { return ops_; }

private:
    DickeOperators ops_;
    Matrix9c rp_, rm_;
};

/// Zero-order equilibrium inside one subspace (trace 1, L0 rho = 0).
DensityMatrix quasi_stationary_state(SubspaceId sub, const ModelParams& params,
                                     const DipoleCoupling& coupling);

/// Outer-subspace state from the closed form with the g-s13 coherence factor
/// either A^2 + Omega3^2 + A C (correct) or A^2 + Omega3^4 + A C (as printed).
DensityMatrix outer_state_closed_form(const ModelParams& params, const DipoleCoupling& coupling,
                                      bool printed_reading);

/// Null space of L0 restricted to matrices supported on one subspace,
/// normalized to trace 1.  Independent check of the closed forms.  Throws
/// NumericalError when that null space is not one-dimensional.
DensityMatrix subspace_null_state(SubspaceId sub, const ModelParams& params,
                                  const DipoleCoupling& coupling);

/// Spectral projector onto the kernel of a superoperator,
/// P = V (W^H V)^-1 W^H with V, W right and left null vectors.
struct KernelProjector {
    SuperOperator p;
    int dim = 0;
};
KernelProjector kernel_projector(const SuperOperator& l, double sv_threshold = 1e-9);

/// First-order correction rho1 = -L0^+ L_omega2 rho0 with the kernel
/// component of L0 removed.  Trace 0, linear in omega2.
Matrix9c perturbed_state(SubspaceId sub, const ModelParams& params, const DipoleCoupling& coupling);

struct PropagateOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double initial_step = 0.01;
    double min_step = 1e-12;
    long max_steps = 50'000'000;
};

/// rho(t) = exp(L t) rho(0), adaptive Dormand-Prince 5(4).
DensityMatrix propagate(const DensityMatrix& rho, double t, const BlochGenerator& gen,
                        const PropagateOptions& opt = {});

/// Eigenvalues of L0 sorted by decreasing real part.
Eigen::VectorXcd l0_spectrum(const ModelParams& params, const DipoleCoupling& coupling);

/// Time derivatives of the subspace populations, Tr[P_sub L(rho)].
struct PopulationRates {
    double dark = 0.0;
    double inner = 0.0;
    double outer = 0.0;
};
PopulationRates population_derivatives(const BlochGenerator& gen, const DensityMatrix& rho);

/// Same derivatives written through the weak-laser coherences only:
///   d/dt P_dark  = sqrt2 Omega2 Im rho(s12, e2)
///   d/dt P_outer = Omega2 Im[sqrt2 rho(s12, g) + rho(s23, s13) + rho(a23, a13)]
PopulationRates population_derivatives_from_coherences(double omega2, const DensityMatrix& rho);

}  // namespace twoatom
