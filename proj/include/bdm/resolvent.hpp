#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "bdm/bdmap.hpp"
#include "bdm/core.hpp"
#include "bdm/odecore.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"

namespace bdm {

enum class GreenSide { Below, Diagonal, Above };  // x < xp, x == xp, x > xp

struct GreenEval {
    cplx value{0.0};
    cplx z{0.0};
    double x{0.0};
    double xp{0.0};
    GreenSide side{GreenSide::Diagonal};
};

// psi- solves the equation with psi-(0) = -sin theta0, psi-'(0) = cos theta0;
// psi+ with psi+(R) = -sin thetaR, psi+'(R) = -cos thetaR. Their Wronskian
// psi+ psi-' - psi+' psi- equals Delta(z, R, theta0, thetaR), and
// G(x, x') = psi-(min) psi+(max) / Delta. Each solution is integrated away from
// the endpoint where it is anchored, over all nodes in one sweep.
class GreenKernel {
public:
    GreenKernel(const PotentialSpec& V, const AnglePair& pair, cplx z, std::vector<double> nodes,
                double tol = kDefaultTol);

    [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] cplx z() const noexcept { return z_; }
    [[nodiscard]] const AnglePair& angles() const noexcept { return pair_; }
    [[nodiscard]] ScaledValue delta() const noexcept { return delta_; }

    [[nodiscard]] cplx value(std::size_t i, std::size_t j) const;
    [[nodiscard]] GreenEval eval(std::size_t i, std::size_t j) const;

    // psi-(x_i) psi+(x_j) / Delta for every i, j: the x < x' branch continued
    // across the diagonal, with its exact partial derivatives.
    [[nodiscard]] cplx wedge(std::size_t i, std::size_t j) const;
    [[nodiscard]] cplx wedge_d1(std::size_t i, std::size_t j) const;
    [[nodiscard]] cplx wedge_d2(std::size_t i, std::size_t j) const;
    [[nodiscard]] cplx wedge_d12(std::size_t i, std::size_t j) const;

    // psi+(x_i)/Delta and psi-(x_i)/Delta with derivatives.
    [[nodiscard]] CauchyData plus_over_delta(std::size_t i) const;
    [[nodiscard]] CauchyData minus_over_delta(std::size_t i) const;

    // psi+ at 0 and psi- at R (unscaled; may overflow only for enormous |z|).
    [[nodiscard]] CauchyData psi_plus_at_0() const;
    [[nodiscard]] CauchyData psi_minus_at_R() const;

private:
    [[nodiscard]] cplx combine(cplx a, int ea, cplx b, int eb) const;

    std::vector<double> nodes_;
    cplx z_;
    AnglePair pair_;
    std::vector<ScaledSolution> minus_;
    std::vector<ScaledSolution> plus_;
    ScaledSolution plus_0_;
    ScaledSolution minus_R_;
    ScaledValue delta_;
};

[[nodiscard]] GreenEval green(const PotentialSpec& V, const AnglePair& pair, cplx z, double x, double xp,
                              double tol = kDefaultTol);

// factor * 2^exp2 * u(x), u the solution with Cauchy data `anchor`.
struct SolutionTerm {
    std::shared_ptr<const PotentialSpec> V;
    cplx z{0.0};
    double tol{kDefaultTol};
    CauchyData anchor;
    cplx factor{0.0};
    int exp2{0};
};

// A finite sum of solution terms, evaluated along one sweep per term.
class FunctionEvaluator {
public:
    FunctionEvaluator() = default;
    explicit FunctionEvaluator(std::vector<SolutionTerm> terms) : terms_(std::move(terms)) {}

    // Values and derivatives at xs.
    [[nodiscard]] std::vector<CauchyData> eval(std::span<const double> xs) const;
    [[nodiscard]] cplx operator()(double x) const;
    [[nodiscard]] BoundaryValues boundary_values(double R) const;

    [[nodiscard]] const std::vector<SolutionTerm>& terms() const noexcept { return terms_; }

private:
    std::vector<SolutionTerm> terms_;
};

// Row kernels of gamma_{theta'} (H_theta - z)^{-1}:
// k1 = sin(theta0' - theta0) psi+ / Delta, k2 = sin(thetaR' - thetaR) psi- / Delta.
struct ResolventRows {
    FunctionEvaluator k1;
    FunctionEvaluator k2;
    cplx c0{0.0};  // normalizing constants in the u+- form, when u+- exist
    cplx cR{0.0};
    // Largest relative gap between the two alternative forms of c0 and of cR,
    // over the forms whose denominators are not small.
    double form_spread{0.0};
    bool basis_checked{false};
};

[[nodiscard]] ResolventRows gamma_resolvent_rows(const PotentialSpec& V, const AnglePair& pair,
                                                 const AnglePair& primed, cplx z, double tol = kDefaultTol);

// x -> (1/W)([cos theta0' u-(0) + sin theta0' u-'(0)] v1 u+(x)
//          + [cos thetaR' u+(R) - sin thetaR' u+'(R)] v2 u-(x)),
// written with psi+- so that no u+- normalization is needed.
[[nodiscard]] FunctionEvaluator adjoint_trace_kernel(const PotentialSpec& V, const AnglePair& pair,
                                                     const AnglePair& primed, cplx z, std::array<cplx, 2> v,
                                                     double tol = kDefaultTol);

// sum_{j,k} left_j(x) coupling(j,k) right_k(x').
struct RankTwoKernel {
    std::array<FunctionEvaluator, 2> left;
    Mat2 coupling;
    std::array<FunctionEvaluator, 2> right;

    [[nodiscard]] cplx operator()(double x, double xp) const;
    // Values on xs x xps, row-major.
    [[nodiscard]] std::vector<cplx> grid(std::span<const double> xs, std::span<const double> xps) const;
};

enum class KreinCase { BothChanged, RightChanged, LeftChanged, Unchanged };

struct KreinKernel {
    RankTwoKernel kernel;
    KreinCase which{KreinCase::Unchanged};
};

// Correction with G_{theta'} = G_theta - correction. An angle counts as
// changed when it moves by a nonzero amount mod pi.
[[nodiscard]] KreinKernel krein_kernel(const PotentialSpec& V, const AnglePair& pair, const AnglePair& primed,
                                       cplx z, double tol = kDefaultTol);

struct KreinValue {
    cplx value{0.0};
    KreinCase which{KreinCase::Unchanged};
};

[[nodiscard]] KreinValue krein_correction(const PotentialSpec& V, const AnglePair& pair, const AnglePair& primed,
                                          cplx z, double x, double xp, double tol = kDefaultTol);

}  // namespace bdm
