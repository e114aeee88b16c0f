#pragma once

// Random problem data shared by the module tests.

#include "bdm/core.hpp"
#include "bdm/potential.hpp"
#include "bdm/traces.hpp"
#include "oracle.hpp"

namespace fixtures {

using bdm::cplx;

inline bdm::PotentialSpec random_piecewise(oracle::Gen& g, double R, double vmax, double vimag)
{
    const double b1 = g.uniform(0.1, 0.45) * R;
    const double b2 = g.uniform(0.55, 0.9) * R;
    return bdm::PotentialSpec::piecewise_constant(R, {b1, b2},
                                                  {g.cuniform(-vmax, vmax, -vimag, vimag),
                                                   g.cuniform(-vmax, vmax, -vimag, vimag),
                                                   g.cuniform(-vmax, vmax, -vimag, vimag)});
}

// Piecewise-linear V on an 9-point uniform grid.
inline bdm::PotentialSpec random_sampled(oracle::Gen& g, double R, double vmax, double vimag)
{
    std::vector<double> grid;
    std::vector<cplx> vals;
    for (int i = 0; i <= 8; ++i) {
        grid.push_back(R * i / 8.0);
        vals.push_back(g.cuniform(-vmax, vmax, -vimag, vimag));
    }
    grid.back() = R;
    return bdm::PotentialSpec::sampled(R, grid, vals);
}

// Smooth bump a * sin^2(pi x / R) sampled on 65 points; L1 norm a R / 2.
inline bdm::PotentialSpec bump(double R, double a)
{
    std::vector<double> grid;
    std::vector<cplx> vals;
    for (int i = 0; i <= 64; ++i) {
        const double x = R * i / 64.0;
        grid.push_back(x);
        const double s = std::sin(bdm::kPi * x / R);
        vals.emplace_back(a * s * s);
    }
    grid.back() = R;
    return bdm::PotentialSpec::sampled(R, grid, vals);
}

inline bdm::AnglePair random_pair(oracle::Gen& g, double im)
{
    return {g.cuniform(0.0, 2.0 * bdm::kPi, -im, im), g.cuniform(0.0, 2.0 * bdm::kPi, -im, im)};
}

// Real angle pair whose entries stay at least `gap` away from 0 mod pi
// relative to `ref`.
inline bdm::AnglePair real_pair_away(oracle::Gen& g, const bdm::AnglePair& ref, double gap)
{
    auto pick = [&](cplx r) {
        for (;;) {
            const double t = g.uniform(0.0, 2.0 * bdm::kPi);
            if (std::abs(std::sin(t - r.real())) > gap) return t;
        }
    };
    return {pick(ref.theta0), pick(ref.thetaR)};
}

inline oracle::M2 to_m2(const bdm::Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

inline double rel_diff(const bdm::Mat2& a, const bdm::Mat2& b)
{
    return bdm::max_abs(a - b) / std::max(bdm::max_abs(b), 1e-300);
}

}  // namespace fixtures
