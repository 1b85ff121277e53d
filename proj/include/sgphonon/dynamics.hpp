#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sgphonon/forces.hpp"

namespace sgp {

/// Initial thermal occupation <n_q(0)> = coth(hbar omega / 2 k_B T) / 2.
/// Returns 1/2 at T = 0. DomainError for omega <= 0 or T < 0.
double thermal_occupation(double omega, double temperature);

struct ThermalWidths {
    double sigma_u = 0.0;     // kg^(1/2) m
    double sigma_udot = 0.0;  // kg^(1/2) m/s
    double occupation = 0.0;
};

/// sigma_u^2 = (hbar / 2 omega) coth, sigma_udot^2 = (hbar omega / 2) coth.
ThermalWidths characteristic_widths(double omega, double temperature);

/// Mass-weighted amplitude and velocity of one mode at time t.
struct ModeState {
    double u = 0.0;
    double u_dot = 0.0;
    double t = 0.0;
};

/// A drive t -> f(t) together with the points where it is not smooth.
struct Drive {
    std::function<double(double)> f;
    std::vector<double> breakpoints;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    int max_doublings = 8;
};

/// Duhamel solution from `initial` (at initial.t) to t_end with the integral
/// done by composite Gauss-Legendre on panels of at most 1/8 period, aligned
/// with the drive's breakpoints and doubled until self-consistent.
/// EvaluationError on a non-finite drive sample, NonConvergence at the cap.
ModeState evolve_mode(const ModeState& initial, double omega, const Drive& drive, double t_end,
                      const QuadratureOptions& options = {});

/// Exact evolution under a piecewise-quadratic drive (zero outside the segments).
ModeState evolve_mode(const ModeState& initial, double omega, std::span<const PolySegment> drive,
                      double t_end);

/// n = (u_dot^2 + omega^2 u^2) / (2 hbar omega).
double occupation_at(const ModeState& state, double omega);

struct PhaseDelta {
    double du = 0.0;
    double du_dot = 0.0;

    /// omega^2 du^2 + du_dot^2.
    double norm_sq(double omega) const { return omega * omega * du * du + du_dot * du_dot; }
};

/// Arm differences at protocol-local time t in [0, delta_t] (t = 0 is the
/// drive onset), computed by quadrature of the Duhamel integral of delta f.
PhaseDelta arm_deltas(const CouplingChannel& channel, const SplitProtocol& protocol,
                      const MaterialModel& material, double omega, double t,
                      const QuadratureOptions& options = {});

/// Gaussian phase-space density normalised to 1 over the plane.
double wigner_density(double u, double u_dot, double sigma_u, double sigma_udot);

/// One row of an arm history.
struct HistorySample {
    double t = 0.0;
    double u_l = 0.0;
    double udot_l = 0.0;
    double u_r = 0.0;
    double udot_r = 0.0;
    double n_l = 0.0;
    double n_r = 0.0;
};

enum class HistoryScaling {
    Raw,            // u, u_dot in SI, n absolute
    OccupationRatio,// n divided by n(0); u, u_dot raw
    Dimensionless,  // u / sigma_u, u_dot / sigma_udot, n / n(0)
};

/// Both arms evolved from (sigma_u, sigma_udot) at local time 0, sampled at
/// `times` (local, ascending, may extend past delta_t).
std::vector<HistorySample> arm_histories(const CouplingChannel& channel,
                                         const SplitProtocol& protocol,
                                         const MaterialModel& material, double omega,
                                         double temperature, std::span<const double> times,
                                         HistoryScaling scaling);

/// Header "t,u_L,udot_L,u_R,udot_R,n_L,n_R".
void write_history_csv(std::ostream& out, std::span<const HistorySample> samples);
std::vector<HistorySample> read_history_csv(std::istream& in);

}  // namespace sgp
