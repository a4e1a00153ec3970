#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "ndo/errors.hpp"

namespace ndo {

// Adaptive Dormand-Prince 5(4) embedded Runge-Kutta on complex state vectors.
// rhs signature: void(const VectorXcd& y, double t, VectorXcd& dydt).
struct SolverConfig {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 0.0;  // 0 = unlimited
    long max_steps = 200'000'000;
};

// Tight tolerances for exponentially error-amplifying (chaotic) flows.
inline SolverConfig chaos_solver_config() {
    SolverConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    return cfg;
}

namespace detail {
// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// 4th-order weights for the error estimate (b - b*).
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
}  // namespace detail

// Integrate y from t0 to t1 in place. post_accept (optional) runs after every
// accepted step — used e.g. to re-hermitize a density matrix. Throws
// IntegrationFailure when the controller underflows the step size.
template <class Rhs, class PostAccept>
inline void integrate_adaptive(Eigen::VectorXcd& y, double t0, double t1, Rhs&& rhs,
                               const SolverConfig& cfg, PostAccept&& post_accept) {
    using Eigen::VectorXcd;
    using namespace detail;
    if (t1 <= t0) return;
    const auto n = y.size();
    VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), yerr(n);
    double t = t0;
    double h = std::min(cfg.h_init, t1 - t0);
    if (cfg.h_max > 0) h = std::min(h, cfg.h_max);
    rhs(y, t, k1);
    bool fsal_valid = true;
    for (long step = 0; step < cfg.max_steps; ++step) {
        if (t >= t1 - 1e-14 * std::max(1.0, std::abs(t1))) return;
        h = std::min(h, t1 - t);
        if (!fsal_valid) {
            rhs(y, t, k1);
            fsal_valid = true;
        }
        ytmp = y + h * a21 * k1;
        rhs(ytmp, t + c2 * h, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(ytmp, t + c3 * h, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(ytmp, t + c4 * h, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(ytmp, t + c5 * h, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(ytmp, t + h, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(ynew, t + h, k7);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        // Weighted RMS error norm.
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
            const double e = std::abs(yerr(i)) / sc;
            acc += e * e;
        }
        const double err = std::sqrt(acc / static_cast<double>(n));
        if (err <= 1.0 || h <= cfg.h_min * 2) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);  // first-same-as-last
            fsal_valid = true;
            if constexpr (!std::is_same_v<std::decay_t<PostAccept>, std::nullptr_t>) {
                post_accept(y, t);
                fsal_valid = false;  // post-processing may have modified y
            }
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        h *= fac;
        if (cfg.h_max > 0) h = std::min(h, cfg.h_max);
        if (h < cfg.h_min) throw IntegrationFailure("step size underflow", t);
    }
    throw IntegrationFailure("max step count exceeded", t);
}

template <class Rhs>
inline void integrate_adaptive(Eigen::VectorXcd& y, double t0, double t1, Rhs&& rhs,
                               const SolverConfig& cfg) {
    integrate_adaptive(y, t0, t1, std::forward<Rhs>(rhs), cfg, nullptr);
}

}  // namespace ndo
