#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgphonon/contrast.hpp"
#include "sgphonon/forces.hpp"
#include "sgphonon/materials.hpp"

namespace sgp {

/// Cartesian parameter grid for contrast sweeps.
struct SweepGrid {
    std::vector<double> masses;
    std::vector<double> delta_x;
    std::vector<double> delta_t;
    std::vector<double> flight_fraction{0.0};
    std::vector<double> temperatures;
    double eta_e = 0.0;  // induced-dipole channel
    GammaTreatment gamma = GammaTreatment::Exact;

    std::size_t size() const;
    /// ConfigError on empty axes or non-finite values.
    void validate() const;

    /// Point `index` in the order mass, delta_t, flight_fraction, temperature,
    /// delta_x (innermost).
    struct Point {
        double mass, delta_x, delta_t, flight_fraction, temperature;
    };
    Point point(std::size_t index) const;

    /// Axes accept an array or {from, to, per_decade} / {from, to, count}.
    /// Keys: masses, delta_x, delta_t, flight_fraction?, temperatures, eta_e?, gamma?
    static SweepGrid from_json(std::string_view json_text);
};

struct ContrastRow {
    ChannelKind channel = ChannelKind::SpinMagnetic;
    double mass = 0.0;
    double delta_x = 0.0;
    double delta_t = 0.0;
    double flight_fraction = 0.0;
    double temperature = 0.0;
    double neg_ln_c = 0.0;
    double contrast = 1.0;
    std::size_t modes_used = 0;
    std::string fidelity;
};

/// Contrast report of one channel at one grid point.
ContrastRow contrast_row(ChannelKind channel, const SweepGrid::Point& point,
                         const MaterialModel& material, double eta_e, GammaTreatment gamma,
                         const TruncationPolicy& truncation = TruncationPolicy::adaptive());

/// One row per grid point per channel, ordered by (grid index, channel
/// index). The output does not depend on `jobs`. A failing point is
/// rethrown with its grid index in the message.
std::vector<ContrastRow> sweep(const SweepGrid& grid, std::span<const ChannelKind> channels,
                               const MaterialModel& material, unsigned jobs = 1);

/// Header "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,contrast,modes_used,fidelity".
void write_contrast_csv(std::ostream& out, std::span<const ContrastRow> rows);
std::vector<ContrastRow> read_contrast_csv(std::istream& in);

/// Comma-separated channel list ("spin,dia,dipole").
std::vector<ChannelKind> parse_channel_list(std::string_view list);

/// Level set of a sampled field.
struct Contour {
    using Point = std::array<double, 2>;
    std::vector<std::vector<Point>> polylines;
    std::string notice;  // set when the threshold lies outside the data
    bool empty() const { return polylines.empty(); }
};

/// Marching squares at `threshold` over values[iy * xs.size() + ix], with
/// linear interpolation along cell edges. Coordinates are returned in the
/// units of xs / ys. Segments are chained into polylines.
Contour feasibility_contour(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> values, double threshold);

/// Header "polyline,x,y".
void write_contour_csv(std::ostream& out, const Contour& contour);

/// Scenario runner. The config is
/// {scenario, output_dir, material?, jobs?, parameters?}; scenario is one of
/// occupation, phase_space, contrast_curves, contrast_maps, dipole_estimate,
/// custom_sweep. Returns the summary JSON that is also written to
/// output_dir/summary.json. Config and output-directory problems are reported
/// before any computation.
struct ScenarioConfig {
    std::string scenario;
    std::filesystem::path output_dir;
    MaterialModel material = MaterialModel::diamond();
    unsigned jobs = 1;
    std::string parameters_json = "{}";

    /// `base_dir` resolves relative output_dir and material paths.
    static ScenarioConfig from_json(std::string_view json_text,
                                    const std::filesystem::path& base_dir = {});
};

std::string run_scenario(const ScenarioConfig& config);

/// Grid sweep straight to output_dir/sweep.csv; returns a summary JSON.
std::string run_sweep(const SweepGrid& grid, std::span<const ChannelKind> channels,
                      const MaterialModel& material, const std::filesystem::path& output_dir,
                      unsigned jobs);

}  // namespace sgp
