#include "bdm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "bdm/bdmap.hpp"
#include "bdm/lft.hpp"
#include "bdm/resolvent.hpp"
#include "bdm/weyl.hpp"

#ifndef BDM_VERSION
#define BDM_VERSION "0.0.0"
#endif

namespace bdm::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed)
{
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) config_fail("unknown key '" + key + "' in " + where);
    }
}

double get_number(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) config_fail("missing '" + key + "' in " + where);
    const json& v = obj.at(key);
    if (!v.is_number()) config_fail("'" + key + "' in " + where + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_fail("'" + key + "' in " + where + " must be finite");
    return d;
}

double get_number_or(const json& obj, const std::string& key, const std::string& where, double fallback)
{
    return obj.contains(key) ? get_number(obj, key, where) : fallback;
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.contains(key)) config_fail("missing '" + key + "' in " + where);
    const json& v = obj.at(key);
    if (!v.is_array()) config_fail("'" + key + "' in " + where + " must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) config_fail("'" + key + "' in " + where + " must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

PotentialSpec build_potential(double R, const PotentialInput& in)
{
    std::vector<cplx> values;
    for (std::size_t i = 0; i < in.values_re.size(); ++i) values.emplace_back(in.values_re[i], in.values_im[i]);
    try {
        if (in.type == "zero") return PotentialSpec::zero(R);
        if (in.type == "piecewise_constant") return PotentialSpec::piecewise_constant(R, in.nodes, values);
        return PotentialSpec::sampled(R, in.nodes, values);
    } catch (const DomainError& e) {
        config_fail(std::string("potential: ") + e.what());
    }
}

PotentialInput parse_potential(const json& p)
{
    if (!p.is_object()) config_fail("'potential' must be an object");
    check_keys(p, "potential", {"type", "breakpoints", "grid", "values_re", "values_im"});
    if (!p.contains("type") || !p.at("type").is_string()) config_fail("potential needs a string 'type'");
    PotentialInput in;
    in.type = p.at("type").get<std::string>();
    if (in.type == "zero") {
        if (p.size() != 1) config_fail("a zero potential takes no further keys");
        return in;
    }
    if (in.type == "piecewise_constant") {
        in.nodes = p.contains("breakpoints") ? get_numbers(p, "breakpoints", "potential") : std::vector<double>{};
        if (p.contains("grid")) config_fail("piecewise_constant uses 'breakpoints', not 'grid'");
    } else if (in.type == "sampled") {
        if (p.contains("grid") && p.contains("breakpoints")) config_fail("give either 'grid' or 'breakpoints'");
        in.nodes = get_numbers(p, p.contains("grid") ? "grid" : "breakpoints", "potential");
    } else {
        config_fail("unknown potential type '" + in.type + "'");
    }
    in.values_re = get_numbers(p, "values_re", "potential");
    in.values_im = p.contains("values_im") ? get_numbers(p, "values_im", "potential")
                                           : std::vector<double>(in.values_re.size(), 0.0);
    if (in.values_im.size() != in.values_re.size()) config_fail("values_re and values_im differ in length");
    return in;
}

AnglePair parse_angles(const json& t, const std::string& where)
{
    if (!t.is_object()) config_fail("'" + where + "' must be an object");
    check_keys(t, where, {"theta0_re", "theta0_im", "thetaR_re", "thetaR_im"});
    const cplx t0(get_number(t, "theta0_re", where), get_number_or(t, "theta0_im", where, 0.0));
    const cplx tR(get_number(t, "thetaR_re", where), get_number_or(t, "thetaR_im", where, 0.0));
    return {t0, tR};
}

json angles_json(const AnglePair& p)
{
    return {{"theta0_re", p.theta0.real()},
            {"theta0_im", p.theta0.imag()},
            {"thetaR_re", p.thetaR.real()},
            {"thetaR_im", p.thetaR.imag()}};
}

cplx parse_z_entry(const json& e)
{
    if (e.is_number()) return e.get<double>();
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    config_fail("z_grid entries are numbers or [re, im] pairs");
}

cplx parse_z_flag(const std::string& s)
{
    std::istringstream is(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(is >> re)) config_fail("cannot read z value '" + s + "'");
    if (is >> comma) {
        if (comma != ',' || !(is >> im)) config_fail("z values are 're' or 're,im', got '" + s + "'");
    }
    std::string rest;
    if (is >> rest) config_fail("trailing characters in z value '" + s + "'");
    return {re, im};
}

Rect parse_rect_values(const std::vector<double>& v)
{
    if (v.size() != 4) config_fail("a rectangle is [re_lo, re_hi, im_lo, im_hi]");
    const Rect r{v[0], v[1], v[2], v[3]};
    if (!(r.re_lo < r.re_hi) || !(r.im_lo < r.im_hi)) config_fail("rectangle needs re_lo < re_hi and im_lo < im_hi");
    return r;
}

Rect parse_rect_flag(const std::string& s)
{
    std::vector<double> v;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            config_fail("cannot read rectangle '" + s + "'");
        }
    }
    return parse_rect_values(v);
}

// ---------------------------------------------------------------------------
// Output helpers

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);  // no "-0" cells
    return buf;
}

std::string cnum(cplx v) { return num(v.real()) + "," + num(v.imag()); }

std::string mat_cells(const Mat2& m)
{
    return cnum(m(0, 0)) + "," + cnum(m(0, 1)) + "," + cnum(m(1, 0)) + "," + cnum(m(1, 1));
}

const char* kMatHeader = "11_re,{0}11_im,{0}12_re,{0}12_im,{0}21_re,{0}21_im,{0}22_re,{0}22_im";

std::string mat_header(const std::string& sym)
{
    std::string h = sym + kMatHeader;
    for (std::size_t pos = h.find("{0}"); pos != std::string::npos; pos = h.find("{0}")) h.replace(pos, 3, sym);
    return h;
}

// Evaluates fn(0..n-1) on up to `jobs` threads; results and the first failure
// (by index) are reported in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& fn)
{
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Verification suite

const cplx kVerifyPoints[] = {cplx(0.0, 1.0), cplx(-2.0, 0.5), cplx(5.0, 3.0), cplx(20.0, 1.0)};

AnglePair third_pair(const AnglePair& p) { return {p.theta0 + 0.7, p.thetaR + 1.3}; }

bool invertible_quad(const AngleQuad& q)
{
    return std::abs(std::sin(q.primed.theta0 - q.base.theta0)) > 1e-8 &&
           std::abs(std::sin(q.primed.thetaR - q.base.thetaR)) > 1e-8;
}

VerifyRow upper(std::string name, double value, double threshold)
{
    return {std::move(name), value, threshold, false, value < threshold, ""};
}

VerifyRow skipped(std::string name, double threshold, std::string why, bool lower = false)
{
    return {std::move(name), 0.0, threshold, lower, true, "skipped: " + std::move(why)};
}

VerifyRow row_group_laws(const PotentialSpec& V, const AngleQuad& q, double tol)
{
    const AnglePair t1 = q.base, t2 = q.primed, t3 = third_pair(q.base);
    double worst = 0.0;
    for (const cplx z : kVerifyPoints) {
        const FundamentalEval f = fundamental_system(V, z, V.R(), tol);
        const Mat2 a11 = bdmap_from_fundamental(f, {t1, t1}).matrix;
        const Mat2 a12 = bdmap_from_fundamental(f, {t1, t2}).matrix;
        const Mat2 a23 = bdmap_from_fundamental(f, {t2, t3}).matrix;
        const Mat2 a13 = bdmap_from_fundamental(f, {t1, t3}).matrix;
        const Mat2 a21 = bdmap_from_fundamental(f, {t2, t1}).matrix;
        worst = std::max(worst, max_abs(a11 - Mat2::identity()));
        worst = std::max(worst, max_abs(a23 * a12 - a13) / (max_abs(a23) * max_abs(a12)));
        worst = std::max(worst, max_abs(a21 * a12 - Mat2::identity()) / (max_abs(a21) * max_abs(a12)));
    }
    return upper("group laws (identity, composition, inverse)", worst, 1e-9);
}

VerifyRow row_symmetry(const PotentialSpec& V, const AnglePair& p, double tol)
{
    double worst = 0.0;
    for (const cplx z : kVerifyPoints) {
        const Mat2 m = bdmap_robin(V, p, z, tol).matrix;
        const double scale = max_abs(m);
        worst = std::max(worst, std::abs(m(0, 1) - m(1, 0)) / scale);
        worst = std::max(worst, std::abs(m(0, 0) - m_plus(V, p.theta0, p.thetaR, z, tol)) / scale);
        worst = std::max(worst, std::abs(m(1, 1) + m_minus(V, p.theta0, p.thetaR, z, tol)) / scale);
    }
    return upper("Robin map symmetry, diagonal = (m+, -m-)", worst, 1e-9);
}

VerifyRow row_adjoint_trace(const PotentialSpec& V, const AngleQuad& q, double tol)
{
    double worst = 0.0;
    for (const cplx z : kVerifyPoints) {
        const Mat2 LS = bdmap_general(V, q, z, tol).matrix * diag_sin(q);
        const double scale = std::max(max_abs(LS), 1e-300);
        for (int col = 0; col < 2; ++col) {
            std::array<cplx, 2> v{0.0, 0.0};
            v[static_cast<std::size_t>(col)] = 1.0;
            const auto F = adjoint_trace_kernel(V, q.base, q.primed, z, v, tol);
            const auto tr = trace_gamma(q.primed, F.boundary_values(V.R()));
            worst = std::max({worst, std::abs(tr[0] - LS(0, col)) / scale, std::abs(tr[1] - LS(1, col)) / scale});
        }
    }
    return upper("Lambda S = trace of the adjoint resolvent kernel", worst, 1e-8);
}

VerifyRow row_lft(const PotentialSpec& V, const AngleQuad& q, double tol)
{
    const AngleQuad ref = robin_quad(third_pair(q.base));
    double worst = 0.0;
    for (const cplx z : kVerifyPoints) {
        const LftReport r = verify_lft_relation(V, q, ref, z, tol);
        worst = std::max({worst, r.theorem, r.s_form, r.robin_form, r.dirichlet_form});
    }
    return upper("linear fractional relations between maps", worst, 1e-8);
}

VerifyRow row_connector(const AngleQuad& q)
{
    AngleQuad qa = q;
    if (!q.is_real() || !invertible_quad(q)) qa = robin_quad(AnglePair(q.base.theta0.real(), q.base.thetaR.real()));
    const AnglePair t3 = third_pair(qa.base);
    const AngleQuad qb = robin_quad(AnglePair(t3.theta0.real(), t3.thetaR.real()));
    const Block4 A = connector(qa, qb);
    const double scale = std::max(1.0, max_abs(A) * max_abs(A));
    return upper("connector matrices preserve J4", in_class_A4(A).residual / scale, 1e-12);
}

VerifyRow row_positivity(const PotentialSpec& V, const AngleQuad& q, double tol)
{
    const std::string name = "Herglotz positivity of Im(Lambda S)";
    if (!V.is_real()) return skipped(name, 0.0, "complex potential", true);
    if (!q.is_real()) return skipped(name, 0.0, "complex angles", true);
    if (!invertible_quad(q)) return skipped(name, 0.0, "an angle difference is 0 mod pi", true);
    double lowest = std::numeric_limits<double>::infinity();
    for (const cplx z : kVerifyPoints) lowest = std::min(lowest, hermitian_eigenvalues(herglotz_imag(V, q, z, tol))[0]);
    return {name, lowest, 0.0, true, lowest > 0.0, "smallest eigenvalue"};
}

double krein_residual(const PotentialSpec& V, const AnglePair& p, const AnglePair& q, cplx z, double tol)
{
    std::vector<double> xs;
    for (int i = 0; i < 7; ++i) xs.push_back(V.R() * i / 6.0);
    const GreenKernel g(V, p, z, xs, tol);
    const GreenKernel gp(V, q, z, xs, tol);
    const auto corr = krein_kernel(V, p, q, z, tol).kernel.grid(xs, xs);
    double res = 0.0, scale = 1e-300;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const cplx lhs = gp.value(i, j);
            res = std::max(res, std::abs(lhs - (g.value(i, j) - corr[i * xs.size() + j])));
            scale = std::max(scale, std::abs(lhs));
        }
    }
    return res / scale;
}

VerifyRow row_krein(const PotentialSpec& V, const AnglePair& p, double tol)
{
    const AnglePair t3 = third_pair(p);
    double worst = 0.0;
    for (const cplx z : kVerifyPoints) {
        worst = std::max(worst, krein_residual(V, p, t3, z, tol));
        worst = std::max(worst, krein_residual(V, p, {p.theta0, t3.thetaR}, z, tol));
        worst = std::max(worst, krein_residual(V, p, {t3.theta0, p.thetaR}, z, tol));
    }
    return upper("Krein formula for the resolvent difference", worst, 1e-7);
}

std::vector<VerifyRow> rows_weyl(const PotentialSpec& V, const AnglePair& p, double x0, double alpha, double tol)
{
    double links = 0.0, det = 0.0;
    for (const cplx z : kVerifyPoints) {
        links = std::max(links, green_link_check(V, p, z, tol).max_residual());
        const LinkReport w = wt_link_check(V, p, z, x0, alpha, 1e-4, tol);
        for (const LinkResidual& item : w.items) {
            if (item.skipped) continue;
            if (item.name == "det Malpha = -1/4") det = std::max(det, item.residual);
            else links = std::max(links, item.residual);
        }
    }
    return {upper("Green's function links to m-functions and M_alpha", links, 1e-6),
            upper("det M_alpha = -1/4", det, 1e-10)};
}

VerifyRow row_asymptotics(const PotentialSpec& V, const AnglePair& p, double t, double bound, double tol)
{
    const cplx z(0.0, t);
    const Mat2 m = bdmap_robin(V, p, z, tol).matrix;
    const Mat2 ref = asymptotic_reference(p, z, V.R());
    const double err = std::max(std::abs(m(0, 0) / ref(0, 0) - 1.0), std::abs(m(1, 1) / ref(1, 1) - 1.0));
    return upper("high-energy diagonal asymptotics at z = i " + num(t), err, bound);
}

// ---------------------------------------------------------------------------
// Subcommands

struct Common {
    std::string config;
    std::string out_path;
    std::optional<double> tol;
    int jobs{1};
};

struct Options {
    std::optional<int> n;
    std::string rect;
    std::vector<std::string> z;
    std::optional<int> nx;
    std::optional<double> x0;
    std::optional<double> alpha;
};

std::vector<cplx> z_values(const Options& o, const ProblemConfig& cfg)
{
    std::vector<cplx> zs;
    if (!o.z.empty()) {
        for (const auto& s : o.z) zs.push_back(parse_z_flag(s));
    } else {
        zs = cfg.z_grid();
    }
    if (zs.empty()) config_fail("no z values: give --z or z_grid");
    return zs;
}

void emit_header(std::ostream& os, const std::string& columns) { os << "# bdm " << version() << "\n" << columns << "\n"; }

void cmd_eig(std::ostream& os, const ProblemConfig& cfg, const Options& o, double tol)
{
    std::optional<Rect> rect = cfg.rect;
    if (!o.rect.empty()) rect = parse_rect_flag(o.rect);
    const bool selfadjoint = cfg.potential.is_real() && cfg.angles.is_real();
    SpectrumResult r;
    if (rect) {
        r = eig_rectangle(cfg.potential, cfg.angles, *rect, tol);
    } else {
        if (!selfadjoint) config_fail("complex data: eig needs a rectangle (--rect or 'rect')");
        r = eig_selfadjoint(cfg.potential, cfg.angles, o.n.value_or(cfg.n.value_or(10)), tol);
    }
    emit_header(os, "index,re,im,residual,multiplicity");
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
        os << i << "," << cnum(r.eigenvalues[i]) << "," << num(r.residuals[i]) << "," << r.multiplicities[i] << "\n";
    }
}

void cmd_map(std::ostream& os, const ProblemConfig& cfg, const Options& o, double tol, int jobs)
{
    const auto zs = z_values(o, cfg);
    const AngleQuad q = cfg.quad();
    const auto maps = parallel_map<Mat2>(zs.size(), jobs,
                                         [&](std::size_t i) { return bdmap_general(cfg.potential, q, zs[i], tol).matrix; });
    emit_header(os, "index,z_re,z_im," + mat_header("L"));
    for (std::size_t i = 0; i < zs.size(); ++i) os << i << "," << cnum(zs[i]) << "," << mat_cells(maps[i]) << "\n";
}

void cmd_green(std::ostream& os, const ProblemConfig& cfg, const Options& o, double tol, int jobs)
{
    const auto zs = z_values(o, cfg);
    std::vector<double> xs = cfg.x_grid;
    if (o.nx || xs.empty()) {
        const int nx = o.nx.value_or(5);
        if (nx < 2) config_fail("--nx must be at least 2");
        xs.clear();
        for (int i = 0; i < nx; ++i) xs.push_back(cfg.R * i / (nx - 1));
    }
    const auto values = parallel_map<std::vector<cplx>>(zs.size(), jobs, [&](std::size_t k) {
        const GreenKernel g(cfg.potential, cfg.angles, zs[k], xs, tol);
        std::vector<cplx> v;
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < xs.size(); ++j) v.push_back(g.value(i, j));
        return v;
    });
    emit_header(os, "z_index,z_re,z_im,x,xp,G_re,G_im");
    for (std::size_t k = 0; k < zs.size(); ++k) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = 0; j < xs.size(); ++j) {
                os << k << "," << cnum(zs[k]) << "," << num(xs[i]) << "," << num(xs[j]) << ","
                   << cnum(values[k][i * xs.size() + j]) << "\n";
            }
        }
    }
}

void cmd_measure(std::ostream& os, const ProblemConfig& cfg, const Options& o, double tol, int jobs)
{
    if (!cfg.potential.is_real() || !cfg.angles.is_real()) config_fail("measure needs a real potential and real angles");
    const AngleQuad q = cfg.quad();
    const auto levels = eig_selfadjoint(cfg.potential, cfg.angles, o.n.value_or(cfg.n.value_or(5)), tol);
    const auto masses = parallel_map<PointMass>(levels.eigenvalues.size(), jobs, [&](std::size_t i) {
        return measure_point_mass(cfg.potential, q, levels.eigenvalues[i].real(), {1e-3, 1e-4, 1e-5}, tol);
    });
    emit_header(os, "index,lambda," + mat_header("J") + ",spread");
    for (std::size_t i = 0; i < masses.size(); ++i) {
        os << i << "," << num(levels.eigenvalues[i].real()) << "," << mat_cells(masses[i].jump) << ","
           << num(masses[i].spread) << "\n";
    }
}

void cmd_wtm(std::ostream& os, const ProblemConfig& cfg, const Options& o, double tol, int jobs)
{
    const auto zs = z_values(o, cfg);
    const double x0 = o.x0.value_or(cfg.x0.value_or(0.5 * cfg.R));
    const double alpha = o.alpha.value_or(cfg.alpha.value_or(0.0));
    const auto ms = parallel_map<Mat2>(zs.size(), jobs, [&](std::size_t i) {
        return wt_matrix(cfg.potential, zs[i], x0, cfg.angles, alpha, tol).matrix;
    });
    emit_header(os, "index,z_re,z_im," + mat_header("M"));
    for (std::size_t i = 0; i < zs.size(); ++i) os << i << "," << cnum(zs[i]) << "," << mat_cells(ms[i]) << "\n";
}

bool cmd_verify(std::ostream& os, const ProblemConfig& cfg, double tol, int jobs)
{
    const auto rows = verify_suite(cfg, tol, jobs);
    std::size_t width = 8;
    for (const auto& r : rows) width = std::max(width, r.identity.size());
    os << "# bdm " << version() << "\n";
    os << std::left << std::setw(static_cast<int>(width)) << "identity" << "  " << std::setw(24) << "value"
       << "  " << std::setw(12) << "threshold" << "  status\n";
    bool all = true;
    for (const auto& r : rows) {
        all = all && r.passed;
        char thr_buf[32];
        std::snprintf(thr_buf, sizeof thr_buf, "%s %g", r.lower_bound ? ">" : "<", r.threshold);
        const std::string thr = thr_buf;
        os << std::setw(static_cast<int>(width)) << r.identity << "  " << std::setw(24) << num(r.value) << "  "
           << std::setw(12) << thr << "  " << (r.passed ? "PASS" : "FAIL");
        if (!r.note.empty()) os << "  (" << r.note << ")";
        os << "\n";
    }
    return all;
}

}  // namespace

std::vector<cplx> ProblemConfig::z_grid() const
{
    if (!z_rect) return z_points;
    std::vector<cplx> out;
    const ZRect& r = *z_rect;
    auto at = [](double lo, double hi, int n, int i) { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); };
    for (int j = 0; j < r.n_im; ++j)
        for (int i = 0; i < r.n_re; ++i) out.emplace_back(at(r.re_lo, r.re_hi, r.n_re, i), at(r.im_lo, r.im_hi, r.n_im, j));
    return out;
}

AngleQuad ProblemConfig::quad() const
{
    if (primed) return {angles, *primed};
    return robin_quad(angles);
}

ProblemConfig parse_config(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        config_fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) config_fail("top level must be an object");
    check_keys(j, "config",
               {"R", "potential", "theta", "theta_prime", "tol", "z_grid", "n", "rect", "x_grid", "x0", "alpha"});

    ProblemConfig cfg;
    cfg.R = get_number(j, "R", "config");
    if (!(cfg.R > 0.0)) config_fail("R must be positive");
    if (!j.contains("potential")) config_fail("missing 'potential'");
    cfg.potential_input = parse_potential(j.at("potential"));
    cfg.potential = build_potential(cfg.R, cfg.potential_input);
    if (!j.contains("theta")) config_fail("missing 'theta'");
    cfg.angles = parse_angles(j.at("theta"), "theta");
    if (j.contains("theta_prime")) cfg.primed = parse_angles(j.at("theta_prime"), "theta_prime");

    if (j.contains("tol")) {
        const double t = get_number(j, "tol", "config");
        if (!(t > 0.0 && t <= 1e-2)) config_fail("tol must lie in (0, 1e-2]");
        cfg.tol = t;
    }
    if (j.contains("z_grid")) {
        const json& zg = j.at("z_grid");
        if (zg.is_array()) {
            for (const json& e : zg) cfg.z_points.push_back(parse_z_entry(e));
        } else if (zg.is_object()) {
            check_keys(zg, "z_grid", {"re_lo", "re_hi", "n_re", "im_lo", "im_hi", "n_im"});
            ZRect r;
            r.re_lo = get_number(zg, "re_lo", "z_grid");
            r.re_hi = get_number_or(zg, "re_hi", "z_grid", r.re_lo);
            r.im_lo = get_number(zg, "im_lo", "z_grid");
            r.im_hi = get_number_or(zg, "im_hi", "z_grid", r.im_lo);
            for (auto [key, field] : {std::pair{"n_re", &r.n_re}, std::pair{"n_im", &r.n_im}}) {
                if (!zg.contains(key)) continue;
                if (!zg.at(key).is_number_integer() || zg.at(key).get<int>() < 1) {
                    config_fail(std::string("'") + key + "' must be a positive integer");
                }
                *field = zg.at(key).get<int>();
            }
            cfg.z_rect = r;
        } else {
            config_fail("z_grid must be an array or a rectangle object");
        }
    }
    if (j.contains("n")) {
        if (!j.at("n").is_number_integer() || j.at("n").get<int>() < 1) config_fail("'n' must be a positive integer");
        cfg.n = j.at("n").get<int>();
    }
    if (j.contains("rect")) cfg.rect = parse_rect_values(get_numbers(j, "rect", "config"));
    if (j.contains("x_grid")) {
        cfg.x_grid = get_numbers(j, "x_grid", "config");
        for (double x : cfg.x_grid)
            if (!(x >= 0.0 && x <= cfg.R)) config_fail("x_grid points must lie in [0, R]");
    }
    if (j.contains("x0")) {
        cfg.x0 = get_number(j, "x0", "config");
        if (!(*cfg.x0 > 0.0 && *cfg.x0 < cfg.R)) config_fail("x0 must lie in (0, R)");
    }
    if (j.contains("alpha")) {
        cfg.alpha = get_number(j, "alpha", "config");
        if (!(*cfg.alpha >= 0.0 && *cfg.alpha < kPi)) config_fail("alpha must lie in [0, pi)");
    }
    return cfg;
}

ProblemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) config_fail("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ProblemConfig& cfg)
{
    json j;
    j["R"] = cfg.R;
    json p{{"type", cfg.potential_input.type}};
    if (cfg.potential_input.type != "zero") {
        p[cfg.potential_input.type == "sampled" ? "grid" : "breakpoints"] = cfg.potential_input.nodes;
        p["values_re"] = cfg.potential_input.values_re;
        p["values_im"] = cfg.potential_input.values_im;
    }
    j["potential"] = p;
    j["theta"] = angles_json(cfg.angles);
    if (cfg.primed) j["theta_prime"] = angles_json(*cfg.primed);
    if (cfg.tol) j["tol"] = *cfg.tol;
    if (cfg.z_rect) {
        const ZRect& r = *cfg.z_rect;
        j["z_grid"] = {{"re_lo", r.re_lo}, {"re_hi", r.re_hi}, {"n_re", r.n_re},
                       {"im_lo", r.im_lo}, {"im_hi", r.im_hi}, {"n_im", r.n_im}};
    } else if (!cfg.z_points.empty()) {
        json zs = json::array();
        for (const cplx z : cfg.z_points) zs.push_back({z.real(), z.imag()});
        j["z_grid"] = zs;
    }
    if (cfg.n) j["n"] = *cfg.n;
    if (cfg.rect) j["rect"] = {cfg.rect->re_lo, cfg.rect->re_hi, cfg.rect->im_lo, cfg.rect->im_hi};
    if (!cfg.x_grid.empty()) j["x_grid"] = cfg.x_grid;
    if (cfg.x0) j["x0"] = *cfg.x0;
    if (cfg.alpha) j["alpha"] = *cfg.alpha;
    return j.dump(2);
}

double resolve_tol(std::optional<double> flag, const ProblemConfig& cfg)
{
    auto check = [](double t, const std::string& src) {
        if (!(t > 0.0 && t <= 1e-2)) config_fail(src + " tolerance must lie in (0, 1e-2]");
        return t;
    };
    if (flag) return check(*flag, "--tol");
    if (cfg.tol) return *cfg.tol;
    if (const char* env = std::getenv("BDM_TOL"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const double t = std::strtod(env, &end);
        if (end == env || *end != '\0') config_fail(std::string("BDM_TOL is not a number: '") + env + "'");
        return check(t, "BDM_TOL");
    }
    return kDefaultTol;
}

std::vector<VerifyRow> verify_suite(const ProblemConfig& cfg, double tol, int jobs)
{
    static const char* const kTaskNames[] = {
        "group laws",           "Robin map symmetry",   "adjoint trace representation", "linear fractional relations",
        "connector matrices",   "Herglotz positivity",  "Krein formula",                "Weyl-Titchmarsh links",
        "asymptotics, t = 1e4", "asymptotics, t = 1e6"};
    static const double kTaskThresholds[] = {1e-9, 1e-9, 1e-8, 1e-8, 1e-12, 0.0, 1e-7, 1e-6, 0.05, 0.005};
    const PotentialSpec& V = cfg.potential;
    const AnglePair p = cfg.angles;
    const AngleQuad q = cfg.quad();
    const double x0 = cfg.x0.value_or(0.5 * cfg.R);
    const double alpha = cfg.alpha.value_or(kPi / 5);

    using Task = std::function<std::vector<VerifyRow>()>;
    const std::vector<Task> tasks = {
        [&] { return std::vector{row_group_laws(V, q, tol)}; },
        [&] { return std::vector{row_symmetry(V, p, tol)}; },
        [&] { return std::vector{row_adjoint_trace(V, q, tol)}; },
        [&] { return std::vector{row_lft(V, q, tol)}; },
        [&] { return std::vector{row_connector(q)}; },
        [&] { return std::vector{row_positivity(V, q, tol)}; },
        [&] { return std::vector{row_krein(V, p, tol)}; },
        [&] { return rows_weyl(V, p, x0, alpha, tol); },
        [&] { return std::vector{row_asymptotics(V, p, 1e4, 0.05, tol)}; },
        [&] { return std::vector{row_asymptotics(V, p, 1e6, 0.005, tol)}; },
    };
    // A numerical failure inside one identity fails that row only.
    const auto parts = parallel_map<std::vector<VerifyRow>>(tasks.size(), jobs, [&](std::size_t i) {
        try {
            return tasks[i]();
        } catch (const NumericalError& e) {
            return std::vector{VerifyRow{kTaskNames[i], std::numeric_limits<double>::quiet_NaN(), kTaskThresholds[i],
                                         i == 5, false, std::string("numerical failure: ") + e.what()}};
        }
    });
    std::vector<VerifyRow> rows;
    for (const auto& part : parts) rows.insert(rows.end(), part.begin(), part.end());
    return rows;
}

std::string version() { return BDM_VERSION; }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Boundary data maps, Green's functions and spectra of Schroedinger operators on [0, R]", "bdm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    Common common;
    Options opt;
    auto add_common = [&](CLI::App* s) {
        s->add_option("--config", common.config, "problem description (JSON)")->required();
        s->add_option("--out", common.out_path, "output file (default: standard output)");
        s->add_option("--tol", common.tol, "integration tolerance");
        s->add_option("--jobs", common.jobs, "worker threads for grid tasks")->check(CLI::PositiveNumber);
    };
    auto* eig = app.add_subcommand("eig", "eigenvalues as CSV");
    add_common(eig);
    eig->add_option("--n", opt.n, "number of lowest eigenvalues (self-adjoint data)")->check(CLI::PositiveNumber);
    eig->add_option("--rect", opt.rect, "search rectangle re_lo,re_hi,im_lo,im_hi");
    auto* map = app.add_subcommand("map", "boundary data map entries over the z grid");
    add_common(map);
    map->add_option("--z", opt.z, "z value 're' or 're,im' (repeatable)")->allow_extra_args(false);
    auto* green = app.add_subcommand("green", "Green's function over an (x, x', z) grid");
    add_common(green);
    green->add_option("--z", opt.z, "z value 're' or 're,im' (repeatable)")->allow_extra_args(false);
    green->add_option("--nx", opt.nx, "uniform x points on [0, R]");
    auto* measure = app.add_subcommand("measure", "point masses of the spectral measure at eigenvalues");
    add_common(measure);
    measure->add_option("--n", opt.n, "number of lowest eigenvalues")->check(CLI::PositiveNumber);
    auto* wtm = app.add_subcommand("wtm", "Weyl-Titchmarsh matrix M_alpha over the z grid");
    add_common(wtm);
    wtm->add_option("--z", opt.z, "z value 're' or 're,im' (repeatable)")->allow_extra_args(false);
    wtm->add_option("--x0", opt.x0, "reference point in (0, R)");
    wtm->add_option("--alpha", opt.alpha, "rotation angle in [0, pi)");
    auto* verify = app.add_subcommand("verify", "run the identity suite and print a pass/fail table");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const ProblemConfig cfg = load_config(common.config);
        const double tol = resolve_tol(common.tol, cfg);
        std::ofstream file;
        if (!common.out_path.empty()) {
            file.open(common.out_path, std::ios::binary);
            if (!file) config_fail("cannot write '" + common.out_path + "'");
        }
        std::ostream& os = common.out_path.empty() ? out : file;
        if (eig->parsed()) cmd_eig(os, cfg, opt, tol);
        else if (map->parsed()) cmd_map(os, cfg, opt, tol, common.jobs);
        else if (green->parsed()) cmd_green(os, cfg, opt, tol, common.jobs);
        else if (measure->parsed()) cmd_measure(os, cfg, opt, tol, common.jobs);
        else if (wtm->parsed()) cmd_wtm(os, cfg, opt, tol, common.jobs);
        else if (verify->parsed() && !cmd_verify(os, cfg, tol, common.jobs)) {
            err << "verification failed\n";
            return 3;
        }
        os.flush();
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace bdm::cli
