#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdm/core.hpp"
#include "bdm/potential.hpp"
#include "bdm/spectrum.hpp"
#include "bdm/traces.hpp"

namespace bdm::cli {

// The potential as written in the config file, kept for round-tripping.
struct PotentialInput {
    std::string type{"zero"};
    std::vector<double> nodes;  // breakpoints (piecewise_constant) or grid (sampled)
    std::vector<double> values_re;
    std::vector<double> values_im;
};

struct ZRect {
    double re_lo{0.0};
    double re_hi{0.0};
    int n_re{1};
    double im_lo{0.0};
    double im_hi{0.0};
    int n_im{1};
};

struct ProblemConfig {
    double R{0.0};
    PotentialInput potential_input;
    PotentialSpec potential{PotentialSpec::zero(1.0)};
    AnglePair angles;
    std::optional<AnglePair> primed;
    std::vector<cplx> z_points;
    std::optional<ZRect> z_rect;
    std::optional<double> tol;

    // Task options.
    std::optional<int> n;
    std::optional<Rect> rect;
    std::vector<double> x_grid;
    std::optional<double> x0;
    std::optional<double> alpha;

    // z_points, or the rectangle sampled row by row (real part fastest).
    [[nodiscard]] std::vector<cplx> z_grid() const;
    // primed, or the Robin partner theta + pi/2.
    [[nodiscard]] AngleQuad quad() const;
};

// ConfigError on malformed input; unknown keys are rejected.
[[nodiscard]] ProblemConfig parse_config(std::string_view json_text);
[[nodiscard]] ProblemConfig load_config(const std::string& path);
[[nodiscard]] std::string config_to_json(const ProblemConfig& cfg);

// Command-line tol, then the config file, then BDM_TOL, then kDefaultTol.
[[nodiscard]] double resolve_tol(std::optional<double> flag, const ProblemConfig& cfg);

struct VerifyRow {
    std::string identity;
    double value{0.0};
    double threshold{0.0};
    bool lower_bound{false};  // value must exceed threshold instead of staying below it
    bool passed{false};
    std::string note;
};

[[nodiscard]] std::vector<VerifyRow> verify_suite(const ProblemConfig& cfg, double tol, int jobs);

[[nodiscard]] std::string version();

// Exit codes: 0 success, 1 usage or config error, 2 numerical failure,
// 3 verification failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bdm::cli
