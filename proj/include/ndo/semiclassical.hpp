#pragma once

#include <complex>
#include <vector>

#include "ndo/integrate.hpp"
#include "ndo/params.hpp"

namespace ndo {

// Mean-field limit of the driven Kerr oscillator:
//   dalpha/dt = -i[Delta + chi + 2 chi |alpha|^2] alpha - i f(t) Omega - d alpha.
// The drive sign is fixed so the fixed points coincide with the quantum
// steady-state mean <a>; the opposite sign is the same flow under the gauge
// alpha -> -alpha and leaves every |alpha|^2 observable unchanged.
//
// The damping coefficient d is gamma/2 by default (Half), which makes the
// fixed points solve the same cubic as the quantum steady state; Full (d =
// gamma) is kept as a flag for sensitivity studies.
enum class DampingConvention { Half, Full };

inline double damping_rate(const ModelParams& p, DampingConvention conv) {
    return conv == DampingConvention::Half ? 0.5 * p.gamma : p.gamma;
}

std::complex<double> amplitude_rhs(std::complex<double> alpha, double t, const ModelParams& p,
                                   const DriveEnvelope& env,
                                   DampingConvention conv = DampingConvention::Half);

// One steady-state branch under constant drive: n = |alpha|^2 solves
//   4 chi^2 n^3 + 4 chi (Delta+chi) n^2 + [(Delta+chi)^2 + d^2] n = Omega^2,
// alpha = -i Omega / (d + i K) with K = Delta + chi + 2 chi n. Stability is
// the sign of the 2x2 Jacobian eigenvalues of the amplitude flow at the root.
struct SteadyRoot {
    double n = 0.0;
    std::complex<double> alpha;
    bool stable = false;
    bool degenerate = false;  // near-double root (fold point)
};

// All real nonnegative roots, ascending in n (1 to 3 of them).
std::vector<SteadyRoot> steady_amplitudes(const ModelParams& p,
                                          DampingConvention conv = DampingConvention::Half);

// Bistability criteria for the constant-drive oscillator. All three margins
// positive <=> three steady roots exist (a bistable window in Omega):
//   margin[0] = -chi (Delta + chi)                      (opposing nonlinearity)
//   margin[1] = |(Delta + chi)/d| - sqrt(3)             (detuning deep enough)
//   margin[2] = [1 - 3 (d/(Delta+chi))^2]^3
//             - [1 + 27 chi Omega^2/(Delta+chi)^3 + (3d/(Delta+chi))^2]^2
// with d the damping rate of the chosen convention.
struct BistabilityResult {
    bool bistable = false;
    double margin[3] = {0.0, 0.0, 0.0};
};

BistabilityResult bistability_test(const ModelParams& p,
                                   DampingConvention conv = DampingConvention::Half);

// Quasi-static continuation of the steady excitation n over a drive sweep:
// stay on the current stable branch while it exists and jump to the remaining
// stable branch at a fold. Up traverses omega_range ascending, Down descending;
// the curve is reported in traversal order.
enum class SweepDirection { Up, Down };

struct SweepCurve {
    std::vector<double> omega;
    std::vector<double> n;
    std::vector<std::complex<double>> alpha;
};

SweepCurve hysteresis_sweep(const ModelParams& p, const std::vector<double>& omega_range,
                            SweepDirection direction,
                            DampingConvention conv = DampingConvention::Half);

struct AmplitudeSeries {
    std::vector<double> t;
    std::vector<std::complex<double>> alpha;
};

// Integrate the amplitude flow, reporting alpha at every t_span point
// (t_span[0] is the initial time). Tolerances default to chaos-grade 1e-10.
AmplitudeSeries integrate_amplitude(std::complex<double> alpha0,
                                    const std::vector<double>& t_span, const ModelParams& p,
                                    const DriveEnvelope& env,
                                    DampingConvention conv = DampingConvention::Half,
                                    const SolverConfig& cfg = chaos_solver_config());

// Stroboscopic section: alpha sampled at t0 + k*period for
// k = transient_skip ... transient_skip + n_points - 1, integrating from
// alpha(0) = alpha0. period = 0 uses the pulse-train period; a constant
// envelope needs an explicit period (the sampled orbit is then a fixed point
// once transients die out).
struct PoincareSection {
    double t0 = 0.0;
    double period = 0.0;
    int transient_skip = 0;
    std::vector<std::complex<double>> points;
};

PoincareSection poincare_section(const ModelParams& p, const DriveEnvelope& env,
                                 std::complex<double> alpha0, double t0_phase, int n_points,
                                 int transient_skip = 100,
                                 DampingConvention conv = DampingConvention::Half,
                                 double period = 0.0);

// Largest Lyapunov exponent by two-trajectory renormalization: a companion
// trajectory offset by d0 is rescaled back to d0 every renorm_interval and the
// exponent is the time average of ln(growth). The drive phase makes the flow
// non-autonomous, which is the usual time-augmented system (beta = t,
// dbeta/dt = 1); the offset is applied in alpha only.
struct LyapunovConfig {
    std::complex<double> alpha0{0.0, 0.0};
    double d0 = 1e-8;
    double renorm_interval = 0.0;  // 0 -> period/10
    double transient = 0.0;        // 0 -> 50 periods
    double total_time = 0.0;       // 0 -> 200 periods measured after transient
    double t0_phase = 0.0;
    double tolerance = 0.05;  // convergence: |L(full) - L(half)| below this
    DampingConvention convention = DampingConvention::Half;
    SolverConfig solver = chaos_solver_config();
};

struct LyapunovResult {
    double value = 0.0;
    double convergence = 0.0;  // |L over full window - L over first half|
    bool converged = false;
    int renormalizations = 0;
};

LyapunovResult lyapunov_exponent(const ModelParams& p, const DriveEnvelope& env,
                                 const LyapunovConfig& cfg = {});

// Distinguish sustained chaos from transient chaos (positive early exponent
// that decays to regular motion) by estimating L over an early window
// (50-150 periods) and a late window (>= 300 periods).
enum class DynamicsClass { Regular, Chaotic, TransientChaos };

struct TransientChaosResult {
    LyapunovResult early;
    LyapunovResult late;
    DynamicsClass classification = DynamicsClass::Regular;
};

TransientChaosResult classify_transient_chaos(const ModelParams& p, const DriveEnvelope& env,
                                              LyapunovConfig cfg = {});

// Amplitude-scaling transformation: chi' = chi/lambda^2, Omega' = lambda Omega,
// Delta' = Delta + chi (1 - 1/lambda^2). The amplitude flow is exactly
// equivariant: alpha(t) -> lambda alpha(t) maps solutions to solutions.
ModelParams scale_params(const ModelParams& p, double lambda);

}  // namespace ndo
