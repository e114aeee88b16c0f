#pragma once

#include <span>
#include <vector>

#include "bdm/core.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"

namespace bdm {

struct CauchyData {
    cplx u{0.0};
    cplx du{0.0};
    double x{0.0};
};

// A solution column stored as (u, u') * 2^exp2. Rescaling by powers of two is
// exact, so long propagations at large |z| neither overflow nor lose bits.
struct ScaledSolution {
    cplx u{0.0};
    cplx du{0.0};
    int exp2{0};
};

// A complex number stored as value * 2^exp2.
struct ScaledValue {
    cplx value{0.0};
    int exp2{0};

    [[nodiscard]] double log_abs() const;
    [[nodiscard]] cplx unscaled() const;
};

[[nodiscard]] cplx ldexp(cplx v, int e);

// theta, phi with their derivatives at x. True values are the stored fields
// times 2^exp2; exp2 is zero unless the values would not fit in a double.
struct FundamentalEval {
    cplx theta{1.0};
    cplx dtheta{0.0};
    cplx phi{0.0};
    cplx dphi{1.0};
    cplx z{0.0};
    double x{0.0};
    int exp2{0};

    // theta phi' - theta' phi of the true values, divided by 4^exp2.
    [[nodiscard]] cplx scaled_wronskian() const { return theta * dphi - dtheta * phi; }
};

// Adaptive Dormand-Prince 5(4) propagation of -u'' + V u = z u. Potential
// breakpoints are forced step boundaries. The error test uses
// atol = rtol = tol/20 on the state (u, u'/kappa) of each column after the
// column has been rescaled to unit size, kappa = max(1, sqrt(|z| + max|V|)).
// One instance serves one thread.
class Propagator {
public:
    Propagator(const PotentialSpec& V, cplx z, double tol);

    // Moves all columns from x = from to x = to (either direction).
    void advance(std::span<ScaledSolution> cols, double from, double to);

    [[nodiscard]] long steps_taken() const noexcept { return steps_; }
    [[nodiscard]] cplx z() const noexcept { return z_; }
    [[nodiscard]] const PotentialSpec& potential() const noexcept { return *V_; }

private:
    void integrate_piece(std::span<ScaledSolution> cols, double t0, double t1, const Segment& seg);

    const PotentialSpec* V_;
    cplx z_;
    double tol_;
    double kappa_;
    double h_{0.0};
    long steps_{0};
};

[[nodiscard]] CauchyData propagate(const PotentialSpec& V, cplx z, const CauchyData& from, double to_x,
                                   double tol = kDefaultTol);

// Solution data at each of xs, starting from `from`; xs may lie on both sides.
[[nodiscard]] std::vector<CauchyData> propagate_many(const PotentialSpec& V, cplx z, const CauchyData& from,
                                                     std::span<const double> xs, double tol = kDefaultTol);

// As propagate_many, keeping the power-of-two scale of each result.
[[nodiscard]] std::vector<ScaledSolution> sweep(const PotentialSpec& V, cplx z, const CauchyData& from,
                                                std::span<const double> xs, double tol = kDefaultTol);

[[nodiscard]] FundamentalEval fundamental_system(const PotentialSpec& V, cplx z, double x,
                                                 double tol = kDefaultTol);

// Delta(z, R, theta0, thetaR) from a fundamental system evaluated at x = R.
[[nodiscard]] ScaledValue char_det_scaled(const FundamentalEval& at_R, cplx theta0, cplx thetaR);

[[nodiscard]] cplx char_det(const PotentialSpec& V, cplx z, cplx theta0, cplx thetaR, double tol = kDefaultTol);

// |Delta| < 1e-12 max(1,|z|)^{1/2} exp(Im(sqrt z) R).
[[nodiscard]] bool char_det_negligible(const ScaledValue& delta, cplx z, double R);

struct BasisEndpoints {
    CauchyData uminus_at_0;
    CauchyData uminus_at_R;
    CauchyData uplus_at_0;
    CauchyData uplus_at_R;
    cplx z{0.0};
    AnglePair angles;
};

[[nodiscard]] BasisEndpoints basis_endpoints(const FundamentalEval& at_R, const AnglePair& pair);
[[nodiscard]] BasisEndpoints basis_endpoints(const PotentialSpec& V, cplx z, cplx theta0, cplx thetaR,
                                             double tol = kDefaultTol);

// W = u+ u-' - u+' u-, evaluated at x = 0 and cross-checked at x = R and
// against both boundary factorizations.
[[nodiscard]] cplx wronskian(const BasisEndpoints& basis);

}  // namespace bdm
