#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgphonon/contrast.hpp"
#include "sgphonon/dynamics.hpp"
#include "sgphonon/forces.hpp"

namespace sgp::oracle {

struct QuadratureDiagnostics {
    std::size_t panels = 0;
    int refinements = 0;
    double error_estimate = 0.0;
};

struct FourierOptions {
    double rel_tol = 1e-8;
    int max_doublings = 8;
    double panels_per_period = 8.0;
};

struct FourierResult {
    std::complex<double> integral;
    double value_sq = 0.0;
    QuadratureDiagnostics diagnostics;
};

/// |int_a^b f(t) e^{i omega t} dt|^2 by Gauss-Legendre (order 16) on panels no
/// wider than 1/8 period inside each breakpoint interval, doubled until two
/// successive levels agree to rel_tol. NonConvergence at the cap.
FourierResult fourier_transfer_numeric(const std::function<double(double)>& f, double a, double b,
                                       std::span<const double> breakpoints, double omega,
                                       const FourierOptions& options = {});

/// fourier_transfer_numeric of the channel's delta f_q over the protocol
/// window (local time 0..delta_t).
FourierResult channel_transfer_numeric(const CouplingChannel& channel,
                                       const SplitProtocol& protocol,
                                       const MaterialModel& material, double omega,
                                       const FourierOptions& options = {});

enum class Precision { Auto, Double, Quad };

/// |int Delta f e^{i omega t}|^2 with exact integrals of s^k e^{i omega s}
/// on each segment. The oracle rebuilds the arm kinematics itself by
/// integrating the piecewise-constant acceleration, so it shares no closed
/// form with the library. Spin, dia (either gating) and induced dipole.
double transfer_segments(const CouplingChannel& channel, const SplitProtocol& protocol,
                         const MaterialModel& material, double omega,
                         Precision precision = Precision::Auto);

/// Whether Auto picks extended precision for this (channel, protocol, omega).
bool needs_quad(const CouplingChannel& channel, const SplitProtocol& protocol, double omega);

struct OracleResult {
    std::string label;
    double analytic = 0.0;
    double oracle = 0.0;
    double rel_error = 0.0;
    QuadratureDiagnostics diagnostics;
};

OracleResult make_result(std::string label, double analytic, double oracle,
                         QuadratureDiagnostics diagnostics = {});

/// Analytic transfer of the channel against channel_transfer_numeric.
OracleResult transfer_check(const CouplingChannel& channel, const SplitProtocol& protocol,
                            const MaterialModel& material, double omega,
                            const FourierOptions& options = {});

/// omega^2 du^2 + du_dot^2 at delta_t from direct Duhamel quadrature
/// ("analytic" slot) against fourier_transfer_numeric ("oracle" slot).
OracleResult duhamel_recheck(const CouplingChannel& channel, const SplitProtocol& protocol,
                             const MaterialModel& material, double omega);

/// -lnC summed over the first `modes` harmonics, each mode's transfer taken
/// from transfer_segments.
double neg_ln_contrast_segments(const CouplingChannel& channel, const SplitProtocol& protocol,
                                const MaterialModel& material, double temperature,
                                std::size_t modes, Precision precision = Precision::Auto);

struct GoldenGridSpec {
    std::vector<ChannelKind> channels;
    std::vector<double> masses;
    std::vector<double> delta_x;
    std::vector<double> delta_t;
    std::vector<double> flight_fraction;
    std::vector<double> temperatures;

    std::size_t size() const;
    /// 2 channels x 2 masses x 2 temperatures x 16 separations, delta_t = 1 s, tau_f = 0.
    static GoldenGridSpec contrast_curves();
    static GoldenGridSpec from_json(std::string_view json_text);
};

struct GoldenRow {
    ChannelKind channel = ChannelKind::SpinMagnetic;
    double mass = 0.0;
    double delta_x = 0.0;
    double delta_t = 0.0;
    double flight_fraction = 0.0;
    double temperature = 0.0;
    double neg_ln_c = 0.0;
    double rel_err = 0.0;
    std::string method;
};

/// Rows ordered channel, mass, temperature, delta_t, flight fraction, delta_x
/// (innermost). Deterministic for any `jobs`.
std::vector<GoldenRow> golden_table_build(const GoldenGridSpec& grid, const MaterialModel& material,
                                          unsigned jobs = 1);

/// Header "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,rel_err,method".
void write_golden_csv(std::ostream& out, std::span<const GoldenRow> rows);
std::vector<GoldenRow> read_golden_csv(std::istream& in);

struct GoldenCheckRow {
    GoldenRow golden;
    double library = 0.0;
    double drift = 0.0;
};

struct GoldenCheck {
    std::vector<GoldenCheckRow> rows;
    double max_drift = 0.0;
    std::size_t failures = 0;
    bool ok() const { return failures == 0; }
};

/// Recomputes each row with the library's closed forms (held-gradient
/// convention for dia rows with tau_f > 0) and compares at `tolerance`.
GoldenCheck golden_check(std::span<const GoldenRow> rows, const MaterialModel& material,
                         double tolerance = 1e-9, unsigned jobs = 1);

}  // namespace sgp::oracle
