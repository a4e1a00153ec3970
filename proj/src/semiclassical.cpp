#include "ndo/semiclassical.hpp"

#include <algorithm>
#include <cmath>

namespace ndo {

using std::complex;
static constexpr complex<double> kI{0.0, 1.0};
static constexpr double kPi = 3.14159265358979323846;

complex<double> amplitude_rhs(complex<double> alpha, double t, const ModelParams& p,
                              const DriveEnvelope& env, DampingConvention conv) {
    const double d = damping_rate(p, conv);
    const double k = p.delta + p.chi + 2.0 * p.chi * std::norm(alpha);
    return -kI * k * alpha - kI * (drive_envelope(env, t) * p.omega_drive) - d * alpha;
}

namespace {

// Excitation cubic under constant drive:
//   f(n) = 4 chi^2 n^3 + 4 chi dc n^2 + (dc^2 + d^2) n - Omega^2,  dc = Delta+chi.
struct ExcitationCubic {
    double c3, c2, c1, c0;
    double eval(double n) const { return ((c3 * n + c2) * n + c1) * n + c0; }
    double deriv(double n) const { return (3.0 * c3 * n + 2.0 * c2) * n + c1; }
};

std::vector<double> real_roots(const ModelParams& p, double d) {
    const double dc = p.delta + p.chi;
    const double om2 = p.omega_drive * p.omega_drive;
    std::vector<double> ns;
    if (p.chi == 0.0) {
        ns.push_back(om2 / (dc * dc + d * d));
        return ns;
    }
    // Monic form n^3 + a n^2 + b n + c, then the depressed cubic y^3 + py + q.
    const double a = dc / p.chi;
    const double b = (dc * dc + d * d) / (4.0 * p.chi * p.chi);
    const double c = -om2 / (4.0 * p.chi * p.chi);
    const double pp = b - a * a / 3.0;
    const double qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = qq * qq / 4.0 + pp * pp * pp / 27.0;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        ns.push_back(std::cbrt(-qq / 2.0 + r) + std::cbrt(-qq / 2.0 - r) - a / 3.0);
    } else {
        const double m = 2.0 * std::sqrt(-pp / 3.0);
        const double u = std::clamp(3.0 * qq / (pp * m), -1.0, 1.0);
        const double theta = std::acos(u) / 3.0;
        for (int k = 0; k < 3; ++k)
            ns.push_back(m * std::cos(theta - 2.0 * kPi * k / 3.0) - a / 3.0);
    }
    ExcitationCubic cubic{4.0 * p.chi * p.chi, 4.0 * p.chi * dc, dc * dc + d * d, -om2};
    for (double& n : ns)
        for (int it = 0; it < 3; ++it) {
            const double fp = cubic.deriv(n);
            if (std::abs(fp) < 1e-14) break;
            n -= cubic.eval(n) / fp;
        }
    std::sort(ns.begin(), ns.end());
    return ns;
}

}  // namespace

std::vector<SteadyRoot> steady_amplitudes(const ModelParams& p, DampingConvention conv) {
    p.validate();
    const double d = damping_rate(p, conv);
    std::vector<double> ns = real_roots(p, d);

    std::vector<SteadyRoot> roots;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        double n = ns[i];
        if (n < -1e-9) continue;
        n = std::max(n, 0.0);
        SteadyRoot root;
        root.n = n;
        if (i + 1 < ns.size() && std::abs(ns[i + 1] - n) < 1e-7 * std::max(1.0, n)) {
            root.degenerate = true;  // fold: merge the near-double pair
            ++i;
        }
        const double k = p.delta + p.chi + 2.0 * p.chi * n;
        root.alpha = -kI * p.omega_drive / complex<double>(d, k);
        // Linearization at the root: delta-alpha' = A delta-alpha + B conj(delta-alpha),
        // A = -i(dc + 4 chi n) - d, B = -2 i chi alpha^2. Eigenvalues of the real
        // 2x2 system are -d +- sqrt(|B|^2 - Im(A)^2).
        const double im_a = -(p.delta + p.chi + 4.0 * p.chi * n);
        const double excess = 4.0 * p.chi * p.chi * n * n - im_a * im_a;
        root.stable = excess <= 0.0 || std::sqrt(excess) < d;
        if (excess > 0.0 && std::abs(std::sqrt(excess) - d) < 1e-9) root.degenerate = true;
        roots.push_back(root);
    }
    return roots;
}

BistabilityResult bistability_test(const ModelParams& p, DampingConvention conv) {
    p.validate();
    const double d = damping_rate(p, conv);
    const double dc = p.delta + p.chi;
    BistabilityResult r;
    r.margin[0] = -p.chi * dc;
    r.margin[1] = (dc == 0.0 ? -std::sqrt(3.0) : std::abs(dc) / d - std::sqrt(3.0));
    if (dc != 0.0) {
        const double ratio = d / dc;
        const double lhs_inner = 1.0 + 27.0 * p.chi * p.omega_drive * p.omega_drive /
                                           (dc * dc * dc) +
                                 9.0 * ratio * ratio;
        const double rhs_inner = 1.0 - 3.0 * ratio * ratio;
        r.margin[2] = rhs_inner * rhs_inner * rhs_inner - lhs_inner * lhs_inner;
    } else {
        r.margin[2] = -1.0;
    }
    r.bistable = r.margin[0] > 0.0 && r.margin[1] > 0.0 && r.margin[2] > 0.0;
    return r;
}

SweepCurve hysteresis_sweep(const ModelParams& p, const std::vector<double>& omega_range,
                            SweepDirection direction, DampingConvention conv) {
    if (omega_range.size() < 2) throw InvalidArgument("hysteresis_sweep: need >= 2 omegas");
    for (std::size_t i = 1; i < omega_range.size(); ++i)
        if (omega_range[i] <= omega_range[i - 1])
            throw InvalidArgument("hysteresis_sweep: omega_range must be increasing");

    std::vector<double> order = omega_range;
    if (direction == SweepDirection::Down) std::reverse(order.begin(), order.end());

    SweepCurve curve;
    double prev_n = -1.0;
    for (double omega : order) {
        ModelParams q = p;
        q.omega_drive = omega;
        const auto roots = steady_amplitudes(q, conv);
        const SteadyRoot* pick = nullptr;
        for (const auto& root : roots) {
            if (!root.stable) continue;
            if (!pick) {
                pick = &root;
                continue;
            }
            if (prev_n < 0.0) {
                // Sweep entry: start on the low branch going up, high going down.
                const bool better = direction == SweepDirection::Up ? root.n < pick->n
                                                                    : root.n > pick->n;
                if (better) pick = &root;
            } else if (std::abs(root.n - prev_n) < std::abs(pick->n - prev_n)) {
                pick = &root;  // follow the current branch while it exists
            }
        }
        if (!pick) pick = &roots.front();
        curve.omega.push_back(omega);
        curve.n.push_back(pick->n);
        curve.alpha.push_back(pick->alpha);
        prev_n = pick->n;
    }
    return curve;
}

namespace {

// Narrow pulses must not be stepped over: cap the step at half the pulse width.
SolverConfig pulse_safe(const DriveEnvelope& env, SolverConfig cfg) {
    if (env.kind == DriveEnvelope::Kind::PulseTrain && cfg.h_max <= 0.0)
        cfg.h_max = 0.5 * env.T;
    return cfg;
}

}  // namespace

AmplitudeSeries integrate_amplitude(complex<double> alpha0, const std::vector<double>& t_span,
                                    const ModelParams& p, const DriveEnvelope& env,
                                    DampingConvention conv, const SolverConfig& cfg) {
    p.validate();
    env.validate();
    if (t_span.empty()) throw InvalidArgument("integrate_amplitude: empty t_span");
    for (std::size_t i = 1; i < t_span.size(); ++i)
        if (t_span[i] <= t_span[i - 1])
            throw InvalidArgument("integrate_amplitude: t_span must be increasing");

    const SolverConfig solver = pulse_safe(env, cfg);
    auto rhs = [&](const Eigen::VectorXcd& y, double t, Eigen::VectorXcd& dydt) {
        dydt(0) = amplitude_rhs(y(0), t, p, env, conv);
    };
    Eigen::VectorXcd y(1);
    y(0) = alpha0;
    AmplitudeSeries series;
    series.t = t_span;
    series.alpha.reserve(t_span.size());
    series.alpha.push_back(alpha0);
    for (std::size_t i = 1; i < t_span.size(); ++i) {
        integrate_adaptive(y, t_span[i - 1], t_span[i], rhs, solver);
        series.alpha.push_back(y(0));
    }
    return series;
}

PoincareSection poincare_section(const ModelParams& p, const DriveEnvelope& env,
                                 complex<double> alpha0, double t0_phase, int n_points,
                                 int transient_skip, DampingConvention conv, double period) {
    p.validate();
    env.validate();
    if (n_points < 1) throw InvalidArgument("poincare_section: n_points must be >= 1");
    if (transient_skip < 0) throw InvalidArgument("poincare_section: negative transient_skip");
    if (t0_phase < 0.0) throw InvalidArgument("poincare_section: t0_phase must be >= 0");
    if (period <= 0.0) {
        if (env.kind != DriveEnvelope::Kind::PulseTrain)
            throw InvalidArgument("poincare_section: constant envelope needs explicit period");
        period = env.tau;
    }

    const SolverConfig solver = pulse_safe(env, chaos_solver_config());
    auto rhs = [&](const Eigen::VectorXcd& y, double t, Eigen::VectorXcd& dydt) {
        dydt(0) = amplitude_rhs(y(0), t, p, env, conv);
    };
    Eigen::VectorXcd y(1);
    y(0) = alpha0;

    PoincareSection section;
    section.t0 = t0_phase;
    section.period = period;
    section.transient_skip = transient_skip;
    section.points.reserve(n_points);

    double t = 0.0;
    const double t_first = t0_phase + transient_skip * period;
    integrate_adaptive(y, t, t_first, rhs, solver);
    t = t_first;
    section.points.push_back(y(0));
    for (int k = 1; k < n_points; ++k) {
        integrate_adaptive(y, t, t + period, rhs, solver);
        t += period;
        section.points.push_back(y(0));
    }
    return section;
}

LyapunovResult lyapunov_exponent(const ModelParams& p, const DriveEnvelope& env,
                                 const LyapunovConfig& cfg) {
    p.validate();
    env.validate();
    if (!(cfg.d0 > 0.0)) throw InvalidArgument("lyapunov_exponent: d0 must be > 0");
    const double base = env.kind == DriveEnvelope::Kind::PulseTrain ? env.tau : 1.0;
    const double renorm = cfg.renorm_interval > 0.0 ? cfg.renorm_interval : base / 10.0;
    const double transient = cfg.transient > 0.0 ? cfg.transient : 50.0 * base;
    const double total = cfg.total_time > 0.0 ? cfg.total_time : 200.0 * base;
    if (total < 2.0 * renorm)
        throw InvalidArgument("lyapunov_exponent: total time must cover many intervals");

    const SolverConfig solver = pulse_safe(env, cfg.solver);
    auto rhs = [&](const Eigen::VectorXcd& y, double t, Eigen::VectorXcd& dydt) {
        dydt(0) = amplitude_rhs(y(0), t, p, env, cfg.convention);
        dydt(1) = amplitude_rhs(y(1), t, p, env, cfg.convention);
    };
    Eigen::VectorXcd y(2);
    y(0) = cfg.alpha0;
    y(1) = cfg.alpha0 + cfg.d0;

    double t = cfg.t0_phase;
    auto renormalize = [&]() -> double {
        complex<double> sep = y(1) - y(0);
        double dist = std::abs(sep);
        if (dist < 1e-300) {  // degenerate collapse; restart the offset
            sep = cfg.d0;
            dist = cfg.d0;
        }
        y(1) = y(0) + sep * (cfg.d0 / dist);
        return dist;
    };

    const long n_trans = std::lround(std::ceil(transient / renorm));
    for (long k = 0; k < n_trans; ++k) {
        integrate_adaptive(y, t, t + renorm, rhs, solver);
        t += renorm;
        renormalize();
    }

    const long n_meas = std::max(2L, std::lround(total / renorm));
    double sum = 0.0, sum_half = 0.0;
    const long half = n_meas / 2;
    for (long k = 0; k < n_meas; ++k) {
        integrate_adaptive(y, t, t + renorm, rhs, solver);
        t += renorm;
        sum += std::log(renormalize() / cfg.d0);
        if (k + 1 == half) sum_half = sum;
    }

    LyapunovResult res;
    res.value = sum / (static_cast<double>(n_meas) * renorm);
    const double l_half = sum_half / (static_cast<double>(half) * renorm);
    res.convergence = std::abs(res.value - l_half);
    res.converged = res.convergence < cfg.tolerance;
    res.renormalizations = static_cast<int>(n_meas);
    return res;
}

TransientChaosResult classify_transient_chaos(const ModelParams& p, const DriveEnvelope& env,
                                              LyapunovConfig cfg) {
    const double base = env.kind == DriveEnvelope::Kind::PulseTrain ? env.tau : 1.0;
    TransientChaosResult res;
    LyapunovConfig early = cfg;
    early.transient = 50.0 * base;
    early.total_time = 100.0 * base;
    res.early = lyapunov_exponent(p, env, early);

    LyapunovConfig late = cfg;
    late.transient = 300.0 * base;
    late.total_time = 200.0 * base;
    res.late = lyapunov_exponent(p, env, late);

    const double band = cfg.tolerance;
    if (res.late.value > band)
        res.classification = DynamicsClass::Chaotic;
    else if (res.early.value > band && res.late.value < -band)
        res.classification = DynamicsClass::TransientChaos;
    else
        res.classification = DynamicsClass::Regular;
    return res;
}

ModelParams scale_params(const ModelParams& p, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidArgument("scale_params: lambda must be > 0");
    ModelParams q = p;
    q.chi = p.chi / (lambda * lambda);
    q.omega_drive = lambda * p.omega_drive;
    q.delta = p.delta + p.chi * (1.0 - 1.0 / (lambda * lambda));
    return q;
}

}  // namespace ndo
