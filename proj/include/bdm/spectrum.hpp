#pragma once

#include <vector>

#include "bdm/core.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"

namespace bdm {

struct Rect {
    double re_lo{0.0};
    double re_hi{0.0};
    double im_lo{0.0};
    double im_hi{0.0};

    [[nodiscard]] bool contains(cplx z, double slack = 0.0) const
    {
        return z.real() >= re_lo - slack && z.real() <= re_hi + slack && z.imag() >= im_lo - slack &&
               z.imag() <= im_hi + slack;
    }
    [[nodiscard]] cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    [[nodiscard]] double diameter() const { return std::hypot(re_hi - re_lo, im_hi - im_lo); }
};

// Residuals are |Delta(lambda)| / (max(1,|lambda|)^{1/2} exp(Im(sqrt lambda) R)).
// multiplicities[i] > 1 marks a cluster that could not be split.
struct SpectrumResult {
    std::vector<cplx> eigenvalues;
    std::vector<double> residuals;
    std::vector<int> multiplicities;
    Rect window;
};

// Every eigenvalue of the self-adjoint problem lies above this value.
[[nodiscard]] double eigenvalue_lower_bound(const PotentialSpec& V, const AnglePair& pair);

// Number of eigenvalues strictly below E (real V and angles), from the Pruefer
// angle of the solution satisfying the left boundary condition.
[[nodiscard]] int count_below(const PotentialSpec& V, const AnglePair& pair, double E, double tol = kDefaultTol);

// Zeros of Delta inside rect from the winding number of Delta along its boundary.
// ContourHit if Delta nearly vanishes on the boundary.
[[nodiscard]] int count_zeros(const PotentialSpec& V, const AnglePair& pair, const Rect& rect,
                              double tol = kDefaultTol);

// The n_max lowest eigenvalues in ascending order. Cross-checked against the
// argument-principle count on a box around them (SearchFailure on mismatch).
[[nodiscard]] SpectrumResult eig_selfadjoint(const PotentialSpec& V, const AnglePair& pair, int n_max,
                                             double tol = kDefaultTol);

// All zeros of Delta inside rect, sorted by real then imaginary part.
[[nodiscard]] SpectrumResult eig_rectangle(const PotentialSpec& V, const AnglePair& pair, const Rect& rect,
                                           double tol = kDefaultTol);

}  // namespace bdm
