#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "ndo/errors.hpp"

namespace ndo {

// Physical rates of the driven Kerr oscillator, all in units of the dissipation
// rate gamma (gamma = 1 internally; kept explicit so formulas read literally).
//   delta       detuning Delta
//   chi         Kerr (anharmonicity) strength
//   omega_drive drive amplitude Omega >= 0, phase fixed to 0
//   n_bath      mean thermal quanta N of the reservoir (0 in all presets)
struct ModelParams {
    double delta = 0.0;
    double chi = 0.0;
    double omega_drive = 0.0;
    double gamma = 1.0;
    double n_bath = 0.0;

    void validate() const {
        if (!std::isfinite(delta) || !std::isfinite(chi) || !std::isfinite(omega_drive) ||
            !std::isfinite(gamma) || !std::isfinite(n_bath))
            throw InvalidArgument("model parameters must be finite");
        if (gamma <= 0.0) throw InvalidArgument("gamma must be > 0");
        if (omega_drive < 0.0) throw InvalidArgument("omega_drive must be >= 0");
        if (n_bath < 0.0) throw InvalidArgument("n_bath must be >= 0");
    }
};

// Drive envelope f(t): either constant 1 or a train of Gaussian pulses
//   f(t) = sum_{k>=0} exp(-(t - t0 - k*tau)^2 / T^2),
// truncated to pulses whose centers lie within 6T of t (tail < e^-36).
// pulse_count, when set, limits the train to k < pulse_count.
struct DriveEnvelope {
    enum class Kind { Constant, PulseTrain };
    Kind kind = Kind::Constant;
    double t0 = 0.0;
    double T = 1.0;
    double tau = 1.0;
    std::optional<long> pulse_count;

    static DriveEnvelope constant() { return DriveEnvelope{}; }
    static DriveEnvelope pulse_train(double t0, double T, double tau,
                                     std::optional<long> count = std::nullopt) {
        DriveEnvelope e;
        e.kind = Kind::PulseTrain;
        e.t0 = t0;
        e.T = T;
        e.tau = tau;
        e.pulse_count = count;
        e.validate();
        return e;
    }

    void validate() const {
        if (kind == Kind::Constant) return;
        if (!(T > 0.0)) throw InvalidArgument("pulse width T must be > 0");
        if (!(tau > 0.0)) throw InvalidArgument("pulse period tau must be > 0");
        if (!std::isfinite(t0)) throw InvalidArgument("pulse t0 must be finite");
        if (pulse_count && *pulse_count < 1) throw InvalidArgument("pulse_count must be >= 1");
    }
};

// Evaluate the envelope at time t.
inline double drive_envelope(const DriveEnvelope& env, double t) {
    if (env.kind == DriveEnvelope::Kind::Constant) return 1.0;
    const double span = 6.0 * env.T;
    long lo = static_cast<long>(std::floor((t - env.t0 - span) / env.tau));
    long hi = static_cast<long>(std::ceil((t - env.t0 + span) / env.tau));
    if (lo < 0) lo = 0;
    if (env.pulse_count && hi >= *env.pulse_count) hi = *env.pulse_count - 1;
    double f = 0.0;
    for (long k = lo; k <= hi; ++k) {
        const double u = (t - env.t0 - static_cast<double>(k) * env.tau) / env.T;
        if (std::abs(u) <= 6.0) f += std::exp(-u * u);
    }
    return f;
}

}  // namespace ndo
