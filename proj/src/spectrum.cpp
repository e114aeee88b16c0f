#include "bdm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "bdm/odecore.hpp"

namespace bdm {

namespace {

class DeltaFn {
public:
    DeltaFn(const PotentialSpec& V, const AnglePair& pair, double tol) : V_(V), pair_(pair), tol_(tol) {}

    [[nodiscard]] ScaledValue operator()(cplx z) const
    {
        return char_det_scaled(fundamental_system(V_, z, V_.R(), tol_), pair_.theta0, pair_.thetaR);
    }

    // Delta(z) / Delta'(z) with a central difference of step 1e-6 max(1,|z|).
    [[nodiscard]] cplx newton_ratio(cplx z, const ScaledValue& d0) const
    {
        const double h = 1e-6 * std::max(1.0, std::abs(z));
        const ScaledValue p = (*this)(z + h);
        const ScaledValue m = (*this)(z - h);
        const cplx dp = ldexp(p.value, p.exp2 - d0.exp2);
        const cplx dm = ldexp(m.value, m.exp2 - d0.exp2);
        const cplx deriv = (dp - dm) / (2.0 * h);
        if (deriv == cplx(0.0)) return 0.0;
        return d0.value / deriv;
    }

    [[nodiscard]] double residual(cplx z) const
    {
        const ScaledValue d = (*this)(z);
        if (d.value == cplx(0.0)) return 0.0;
        const double log_scale = 0.5 * std::log(std::max(1.0, std::abs(z))) + sqrt_branch(z).imag() * V_.R();
        return std::exp(d.log_abs() - log_scale);
    }

    [[nodiscard]] double R() const { return V_.R(); }

private:
    const PotentialSpec& V_;
    AnglePair pair_;
    double tol_;
};

double wrap_pi(double a)
{
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

// Angle representative in [lo, lo + pi).
double mod_pi(double a, double lo)
{
    double r = std::fmod(a - lo, kPi);
    if (r < 0.0) r += kPi;
    return lo + r;
}

// Argument increment of Delta along [z1, z2], refined until each piece turns
// by less than 1 rad and the two halves agree with the whole. The winding
// number only needs the phase to ~0.1 rad, so contours integrate at tolerance
// kContourTol or the caller's, whichever is looser.
constexpr double kContourTol = 1e-6;

class ArgTracker {
public:
    ArgTracker(const DeltaFn& delta, double inflation) : delta_(delta), inflation_(inflation) {}

    [[nodiscard]] ScaledValue eval(cplx z) const
    {
        const ScaledValue d = delta_(z);
        const double floor =
            std::log(1e-7) + 0.5 * std::log(std::max(1.0, std::abs(z))) + sqrt_branch(z).imag() * delta_.R();
        if (d.value == cplx(0.0) || d.log_abs() < floor) {
            throw ContourHit(inflation_, "Delta nearly vanishes on the contour near z = (" + std::to_string(z.real()) +
                                             ", " + std::to_string(z.imag()) + ")");
        }
        return d;
    }

    [[nodiscard]] double edge(cplx a, cplx b) const
    {
        // Initial pieces: two per expected half-oscillation of sin(sqrt(z) R).
        const double turns = delta_.R() * std::abs(sqrt_branch(b) - sqrt_branch(a)) / kPi;
        const int n = 8 + static_cast<int>(std::ceil(2.0 * turns));
        double total = 0.0;
        cplx z1 = a;
        ScaledValue d1 = eval(a);
        for (int i = 1; i <= n; ++i) {
            const cplx z2 = a + (b - a) * (static_cast<double>(i) / n);
            const ScaledValue d2 = eval(z2);
            total += piece(z1, d1, z2, d2, 0);
            z1 = z2;
            d1 = d2;
        }
        return total;
    }

    [[nodiscard]] double winding(const Rect& r) const
    {
        const cplx c1{r.re_lo, r.im_lo}, c2{r.re_hi, r.im_lo}, c3{r.re_hi, r.im_hi}, c4{r.re_lo, r.im_hi};
        return (edge(c1, c2) + edge(c2, c3) + edge(c3, c4) + edge(c4, c1)) / (2.0 * kPi);
    }

private:
    [[nodiscard]] double piece(cplx z1, const ScaledValue& d1, cplx z2, const ScaledValue& d2, int depth) const
    {
        const double whole = std::arg(d2.value / d1.value);
        const cplx zm = 0.5 * (z1 + z2);
        const ScaledValue dm = eval(zm);
        const double a1 = std::arg(dm.value / d1.value);
        const double a2 = std::arg(d2.value / dm.value);
        if (std::abs(a1) < 1.0 && std::abs(a2) < 1.0 && std::abs(wrap_pi(a1 + a2 - whole)) < 1e-3) return a1 + a2;
        if (depth > 40) throw ContourHit(inflation_, "argument tracking did not resolve along the contour");
        return piece(z1, d1, zm, dm, depth + 1) + piece(zm, dm, z2, d2, depth + 1);
    }

    const DeltaFn& delta_;
    double inflation_;
};

int rounded_winding(double w)
{
    const double r = std::round(w);
    if (std::abs(w - r) > 0.1 || r < 0.0) {
        throw SearchFailure("winding number " + std::to_string(w) + " is not a non-negative integer");
    }
    return static_cast<int>(r);
}

double cluster_tol(cplx z) { return 1e-8 * std::max(1.0, std::abs(z)); }

double default_inflation(const Rect& r) { return 1e-3 * std::max(1.0, r.diameter()); }

// Safeguarded Newton on a real bracket [a, b] where Delta changes sign.
double polish_real(const DeltaFn& delta, double a, double b)
{
    auto sign_at = [&](double x) { return delta(x).value.real() < 0.0 ? -1 : 1; };
    const int sa = sign_at(a);
    double x = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const ScaledValue d = delta(x);
        if (d.value.real() == 0.0) return x;
        const int sx = d.value.real() < 0.0 ? -1 : 1;
        if (sx == sa) a = x;
        else b = x;
        const double width_tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
        if (b - a < width_tol) return 0.5 * (a + b);
        const double step = delta.newton_ratio(x, d).real();
        const double xn = x - step;
        if (std::isfinite(xn) && xn > a && xn < b) {
            if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x))) return xn;
            x = xn;
        } else {
            x = 0.5 * (a + b);
        }
    }
    return x;
}

struct NewtonOutcome {
    bool converged{false};
    cplx z;
};

NewtonOutcome newton_complex(const DeltaFn& delta, cplx z)
{
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 60; ++it) {
        const ScaledValue d = delta(z);
        if (d.value == cplx(0.0)) return {true, z};
        const cplx step = delta.newton_ratio(z, d);
        if (!std::isfinite(std::abs(step))) return {false, z};
        z -= step;
        const double s = std::abs(step);
        if (s < 1e-13 * std::max(1.0, std::abs(z))) return {true, z};
        // Stalled at the noise floor of Delta.
        if (it > 8 && s >= last && s < 1e-9 * std::max(1.0, std::abs(z))) return {true, z};
        last = s;
    }
    return {false, z};
}

struct Found {
    cplx z;
    int multiplicity;
};

class RectangleSearch {
public:
    RectangleSearch(const DeltaFn& delta, const DeltaFn& contour) : delta_(delta), contour_(contour) {}

    void run(const Rect& cell, int count, int depth)
    {
        if (count == 0) return;
        if (count == 1) {
            const NewtonOutcome n = newton_complex(delta_, cell.center());
            if (n.converged && cell.contains(n.z, cluster_tol(n.z))) {
                found_.push_back({n.z, 1});
                return;
            }
        }
        if (cell.diameter() < cluster_tol(cell.center()) || depth > 60) {
            const NewtonOutcome n = newton_complex(delta_, cell.center());
            found_.push_back({cell.contains(n.z, cell.diameter()) ? n.z : cell.center(), count});
            return;
        }
        for (const double f : {0.5, 0.4937, 0.5371, 0.4613, 0.5789}) {
            std::array<Rect, 4> kids;
            std::array<int, 4> counts{};
            try {
                kids = split(cell, f);
                int sum = 0;
                for (std::size_t i = 0; i < 4; ++i) {
                    counts[i] = rounded_winding(ArgTracker(contour_, 0.0).winding(kids[i]));
                    sum += counts[i];
                }
                if (sum != count) continue;
            } catch (const ContourHit&) {
                continue;
            } catch (const SearchFailure&) {
                continue;
            }
            for (std::size_t i = 0; i < 4; ++i) run(kids[i], counts[i], depth + 1);
            return;
        }
        throw SearchFailure("could not subdivide a cell holding " + std::to_string(count) + " zeros");
    }

    [[nodiscard]] std::vector<Found> take() { return std::move(found_); }

private:
    static std::array<Rect, 4> split(const Rect& r, double f)
    {
        const double xm = r.re_lo + f * (r.re_hi - r.re_lo);
        const double ym = r.im_lo + (1.0 - f) * (r.im_hi - r.im_lo);
        return {Rect{r.re_lo, xm, r.im_lo, ym}, Rect{xm, r.re_hi, r.im_lo, ym}, Rect{r.re_lo, xm, ym, r.im_hi},
                Rect{xm, r.re_hi, ym, r.im_hi}};
    }

    const DeltaFn& delta_;
    const DeltaFn& contour_;
    std::vector<Found> found_;
};

void check_rect(const Rect& r)
{
    if (!(r.re_lo < r.re_hi) || !(r.im_lo < r.im_hi) || !std::isfinite(r.re_lo) || !std::isfinite(r.re_hi) ||
        !std::isfinite(r.im_lo) || !std::isfinite(r.im_hi)) {
        throw DomainError("rectangle needs finite re_lo < re_hi and im_lo < im_hi");
    }
}

void check_selfadjoint(const PotentialSpec& V, const AnglePair& pair)
{
    if (!V.is_real()) throw DomainError("self-adjoint search needs a real potential");
    if (!pair.is_real()) throw DomainError("self-adjoint search needs real boundary angles");
}

}  // namespace

double eigenvalue_lower_bound(const PotentialSpec& V, const AnglePair& pair)
{
    // The form is  int |u'|^2 + V|u|^2 - cot(thetaR)|u(R)|^2 - cot(theta0)|u(0)|^2;
    // |u(x_end)|^2 <= eps ||u'||^2 + (1/R + 1/eps) ||u||^2 with eps = 1/(2 kappa)
    // absorbs both boundary terms.
    auto cot_part = [](cplx t) {
        const double s = std::sin(t.real());
        if (is_dirichlet_angle(t)) return 0.0;
        return std::max(0.0, std::cos(t.real()) / s);
    };
    const double kappa = std::max(cot_part(pair.theta0), cot_part(pair.thetaR));
    return V.min_real() - 4.0 * kappa * kappa - 2.0 * kappa / V.R() - 1.0;
}

int count_below(const PotentialSpec& V, const AnglePair& pair, double E, double tol)
{
    check_selfadjoint(V, pair);
    if (E <= eigenvalue_lower_bound(V, pair)) return 0;
    const double R = V.R();
    const double k = std::sqrt(std::max(std::abs(E) + V.max_abs(), 1.0));
    // The scaled angle turns by at most 2k per unit length; keep each step below 1 rad.
    const int n = 2 + static_cast<int>(std::ceil(2.0 * k * R));
    std::vector<double> xs(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) xs[static_cast<std::size_t>(i)] = R * static_cast<double>(i) / n;
    xs.back() = R;

    const double t0 = pair.theta0.real();
    const double tR = pair.thetaR.real();
    const CauchyData start{-std::sin(t0), std::cos(t0), 0.0};
    const auto sol = sweep(V, E, start, xs, tol);

    const double a0 = std::atan2(start.u.real(), start.du.real() / k);
    double prev = a0;
    double total = 0.0;
    for (std::size_t i = 1; i < sol.size(); ++i) {
        const double a = std::atan2(sol[i].u.real(), sol[i].du.real() / k);
        total += wrap_pi(a - prev);
        prev = a;
    }
    const double theta_R = mod_pi(a0, 0.0) + total;
    double beta = mod_pi(std::atan2(std::sin(tR), std::cos(tR) / k), 0.0);
    if (beta <= 0.0) beta += kPi;
    if (!(theta_R > beta)) return 0;
    return static_cast<int>(std::ceil((theta_R - beta) / kPi - 1e-12));
}

int count_zeros(const PotentialSpec& V, const AnglePair& pair, const Rect& rect, double tol)
{
    check_rect(rect);
    const DeltaFn delta(V, pair, std::max(tol, kContourTol));
    return rounded_winding(ArgTracker(delta, default_inflation(rect)).winding(rect));
}

SpectrumResult eig_selfadjoint(const PotentialSpec& V, const AnglePair& pair, int n_max, double tol)
{
    check_selfadjoint(V, pair);
    if (n_max <= 0) throw DomainError("n_max must be positive");
    const double R = V.R();
    const DeltaFn delta(V, pair, tol);

    // Index offset from the free problem: Dirichlet ends push the j-th level up by
    // half a step each, so guess_j = ((j + s) pi / R)^2 + mean(V).
    const int dirichlet_ends = (is_dirichlet_angle(pair.theta0) ? 1 : 0) + (is_dirichlet_angle(pair.thetaR) ? 1 : 0);
    const double s = 0.5 * dirichlet_ends;
    double vmean = 0.0;
    for (const Segment& seg : V.segments()) vmean += 0.5 * (seg.b - seg.a) * (seg.va + seg.vb).real();
    vmean /= R;
    auto guess = [&](double j) {
        const double w = (j + s) * kPi / R;
        return w * w + vmean;
    };
    auto count = [&](double E) { return count_below(V, pair, E, tol); };

    const double lo = eigenvalue_lower_bound(V, pair);
    double hi = guess(n_max) + V.max_abs() + 1.0;
    int n_hi = count(hi);
    while (n_hi < n_max) {
        hi = 2.0 * hi + 10.0;
        n_hi = count(hi);
    }

    std::vector<std::array<double, 2>> brackets(static_cast<std::size_t>(n_max));
    std::function<void(double, int, double, int)> isolate = [&](double a, int na, double b, int nb) {
        if (na >= n_max || nb == na) return;
        if (nb - na == 1) {
            brackets[static_cast<std::size_t>(na)] = {a, b};
            return;
        }
        if (b - a < 1e-13 * std::max(1.0, std::abs(a))) {
            throw SearchFailure("eigenvalues " + std::to_string(na) + ".." + std::to_string(nb - 1) +
                                " could not be separated");
        }
        const int j = (na + nb) / 2;
        double m = guess(j - 0.5);
        if (!(m > a && m < b)) m = 0.5 * (a + b);
        const int nm = count(m);
        if (nm == na || nm == nb) {
            // The guess missed; fall back to bisection for this interval.
            const double mid = 0.5 * (a + b);
            if (mid != m) {
                const int nmid = count(mid);
                isolate(a, na, mid, nmid);
                isolate(mid, nmid, b, nb);
                return;
            }
        }
        isolate(a, na, m, nm);
        isolate(m, nm, b, nb);
    };
    isolate(lo, 0, hi, n_hi);

    SpectrumResult out;
    for (const auto& br : brackets) {
        const double ev = polish_real(delta, br[0], br[1]);
        out.eigenvalues.emplace_back(ev, 0.0);
        out.residuals.push_back(delta.residual(ev));
        out.multiplicities.push_back(1);
    }

    // Independent count on a box around the located eigenvalues.
    const double first = out.eigenvalues.front().real();
    const double last = out.eigenvalues.back().real();
    const double top = 0.5 * (last + brackets.back()[1]);
    const double bottom = first - 1.0 - 0.1 * std::abs(first);
    // Tall enough that Im(sqrt z) R is about 2 at the top, where arg Delta then turns smoothly.
    const double height = std::max(1.0, 4.0 * std::sqrt(std::max(1.0, std::abs(top))) / R);
    out.window = Rect{bottom, top, -height, height};
    const int winding = count_zeros(V, pair, out.window, tol);
    if (winding != n_max) {
        throw SearchFailure("bracketing found " + std::to_string(n_max) + " eigenvalues but the contour count is " +
                            std::to_string(winding));
    }
    return out;
}

SpectrumResult eig_rectangle(const PotentialSpec& V, const AnglePair& pair, const Rect& rect, double tol)
{
    check_rect(rect);
    const DeltaFn delta(V, pair, tol);
    const DeltaFn contour(V, pair, std::max(tol, kContourTol));
    const int total = rounded_winding(ArgTracker(contour, default_inflation(rect)).winding(rect));

    RectangleSearch search(delta, contour);
    search.run(rect, total, 0);
    std::vector<Found> found = search.take();
    std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });

    SpectrumResult out;
    out.window = rect;
    for (const Found& f : found) {
        if (!out.eigenvalues.empty() && std::abs(out.eigenvalues.back() - f.z) < cluster_tol(f.z)) {
            out.multiplicities.back() += f.multiplicity;
            continue;
        }
        out.eigenvalues.push_back(f.z);
        out.residuals.push_back(delta.residual(f.z));
        out.multiplicities.push_back(f.multiplicity);
    }
    return out;
}

}  // namespace bdm
