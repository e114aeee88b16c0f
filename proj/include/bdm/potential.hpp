#pragma once

#include <variant>
#include <vector>

#include "bdm/core.hpp"

namespace bdm {

struct ZeroPotential {};

// Constant value values[i] on [breakpoints[i-1], breakpoints[i]).
struct PiecewiseConstant {
    std::vector<double> breakpoints;
    std::vector<cplx> values;
};

// Piecewise-linear interpolation of values on grid, grid covering [0, R].
struct Sampled {
    std::vector<double> grid;
    std::vector<cplx> values;
};

// A stretch of [0, R] on which V is linear: V(a) = va, V(b) = vb.
struct Segment {
    double a;
    double b;
    cplx va;
    cplx vb;
};

class PotentialSpec {
public:
    using Rep = std::variant<ZeroPotential, PiecewiseConstant, Sampled>;

    // Throws DomainError when the invariants of the representation fail.
    PotentialSpec(double R, Rep rep);

    [[nodiscard]] static PotentialSpec zero(double R) { return {R, ZeroPotential{}}; }
    [[nodiscard]] static PotentialSpec piecewise_constant(double R, std::vector<double> breakpoints,
                                                          std::vector<cplx> values)
    {
        return {R, PiecewiseConstant{std::move(breakpoints), std::move(values)}};
    }
    [[nodiscard]] static PotentialSpec sampled(double R, std::vector<double> grid, std::vector<cplx> values)
    {
        return {R, Sampled{std::move(grid), std::move(values)}};
    }

    [[nodiscard]] double R() const noexcept { return R_; }
    [[nodiscard]] const Rep& rep() const noexcept { return rep_; }
    [[nodiscard]] bool is_zero() const { return std::holds_alternative<ZeroPotential>(rep_); }
    [[nodiscard]] bool is_real() const;

    // Linear pieces covering [0, R] from left to right.
    [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }

    [[nodiscard]] double max_abs() const;
    [[nodiscard]] double min_real() const;
    [[nodiscard]] double l1_norm() const;

private:
    double R_;
    Rep rep_;
    std::vector<Segment> segments_;
};

// V(x); at a breakpoint the right limit is returned.
[[nodiscard]] cplx eval_potential(const PotentialSpec& V, double x);

// sin(sqrt(z) s)/sqrt(z) and cos(sqrt(z) s), both multiplied by exp(-log_scale).
// log_scale is nonzero only when Im(sqrt(z)) s is large enough to threaten overflow.
struct FreeTrig {
    cplx sinc;
    cplx cos;
    double log_scale;
};

[[nodiscard]] FreeTrig free_trig(cplx z, double s);

// Closed forms of the free problem. f and g carry a factor sqrt(z); the
// *_reduced variants return f/sqrt(z), g/sqrt(z) times exp(-log_scale).
[[nodiscard]] cplx closed_form_f(cplx z, double s, cplx alpha, cplx beta);
[[nodiscard]] cplx closed_form_g(cplx z, double s, cplx alpha, cplx beta);
[[nodiscard]] cplx closed_form_f_reduced(const FreeTrig& t, cplx z, cplx alpha, cplx beta);
[[nodiscard]] cplx closed_form_g_reduced(const FreeTrig& t, cplx z, cplx alpha, cplx beta);

// Robin-to-Robin map of V = 0.
[[nodiscard]] Mat2 oracle_bdmap_zero(cplx z, double R, cplx theta0, cplx thetaR);

// Green's function of V = 0 with Robin conditions (theta0, thetaR).
[[nodiscard]] cplx oracle_green_zero(cplx z, double R, cplx theta0, cplx thetaR, double x, double xp);

// Propagator of (u, u') from a to b for a piecewise-constant (or zero) potential.
[[nodiscard]] Mat2 transfer_matrix_piecewise(const PotentialSpec& V, cplx z, double a, double b);

}  // namespace bdm
