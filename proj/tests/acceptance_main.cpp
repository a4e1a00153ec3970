// Acceptance gate: one PASS/FAIL line per shipped-behavior criterion.
// Exit code = number of failed criteria. Tolerances are part of the contract;
// see README.md ("Acceptance suite") for what each criterion pins down.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ndo/master.hpp"
#include "ndo/selfcheck.hpp"
#include "ndo/semiclassical.hpp"
#include "ndo/trajectories.hpp"
#include "ndo/wigner.hpp"

using namespace ndo;
using std::complex;

namespace {

constexpr double kTau5 = 2.0 * M_PI / 5.0;  // kicked-drive period used throughout

ModelParams deep_detuned(double omega) {  // wide hysteresis window regime
    ModelParams p;
    p.delta = -15.0;
    p.chi = 2.0;
    p.omega_drive = omega;
    return p;
}

ModelParams two_peak_point() {  // few-quanta bistability regime
    ModelParams p;
    p.delta = -8.0;
    p.chi = 2.0;
    p.omega_drive = 2.7;
    return p;
}

ModelParams kicked_point() {  // chaotic kicked-oscillator regime
    ModelParams p;
    p.delta = -15.0;
    p.chi = 0.7;
    p.omega_drive = 20.4;
    return p;
}

MatrixXcd vacuum_rho(int dim) {
    MatrixXcd rho = MatrixXcd::Zero(dim, dim);
    rho(0, 0) = 1.0;
    return rho;
}

VectorXcd vacuum_psi(int dim) {
    VectorXcd psi = VectorXcd::Zero(dim);
    psi(0) = 1.0;
    return psi;
}

std::vector<std::uint64_t> seq_seeds(int m) {
    std::vector<std::uint64_t> s(m);
    for (int k = 0; k < m; ++k) s[k] = k + 1;
    return s;
}

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

// budget_secs > 0 makes the wall-clock budget part of the criterion.
void run_criterion(const char* id, const char* label, double budget_secs,
                   const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_secs > 0.0) {
        if (secs > budget_secs) {
            out.pass = false;
            out.detail += " [EXCEEDED " + fmt(budget_secs, 4) + "s budget]";
        } else {
            out.detail += " [budget " + fmt(budget_secs, 4) + "s]";
        }
    }
    if (!out.pass) ++g_failures;
    std::printf("[%s] %s — %s (%.1fs): %s\n", out.pass ? "PASS" : "FAIL", id, label, secs,
                out.detail.c_str());
    std::fflush(stdout);
}

// ---------------------------------------------------------------------------

// Closed-form stationary mean vs long-time master evolution, 1e-3 relative,
// across the full lower-to-upper-branch crossover.
Outcome criterion_exact_vs_evolved() {
    const int dim = 24;  // truncation error at these drives is ~1e-14 relative
    const FockSpace space = make_fock_space(dim);
    double worst_rel = 0.0, worst_om = 0.0;
    for (int k = 1; k <= 12; ++k) {
        const ModelParams p = deep_detuned(0.5 * k);
        const double ref = exact_mean_excitation(p);

        // March in chunks until the chunk-to-chunk drift shows the residual
        // transient is far below the 1e-3 target (slowest relaxation rate in
        // this family is ~0.016, so a 50-unit chunk damps it by ~0.55; the
        // stopping drift of 2e-4 then bounds the remaining transient by
        // ~3.6e-4 relative).
        MatrixXcd rho = vacuum_rho(dim);
        double t = 0.0, n_prev = 0.0, n_now = 0.0;
        const double chunk = 50.0;
        while (t < 700.0) {
            rho = evolve_density(rho, {t, t + chunk}, space, p,
                                 DriveEnvelope::constant())
                      .back();
            t += chunk;
            n_prev = n_now;
            n_now = mean_excitation(rho);
            if (t >= 100.0 && std::abs(n_now - n_prev) < 2e-4 * std::max(n_now, 1e-3))
                break;
        }
        const double rel = std::abs(n_now - ref) / ref;
        if (rel > worst_rel) {
            worst_rel = rel;
            worst_om = p.omega_drive;
        }
    }
    Outcome out;
    out.pass = worst_rel < 1e-3;
    out.detail = "12 drive amplitudes in [0.5, 6.0]; worst relative error " + fmt(worst_rel) +
                 " at omega=" + fmt(worst_om) + " (threshold 1e-3)";
    return out;
}

// Semiclassical up/down sweeps disagree over a window; the quantum stationary
// curve stays single-valued and smooth through it.
Outcome criterion_hysteresis_window() {
    std::vector<double> omegas;
    for (double om = 0.25; om <= 10.0 + 1e-9; om += 0.25) omegas.push_back(om);
    const ModelParams base = deep_detuned(1.0);
    const auto up = hysteresis_sweep(base, omegas, SweepDirection::Up);
    const auto down = hysteresis_sweep(base, omegas, SweepDirection::Down);

    double window_lo = 0.0, window_hi = 0.0, max_gap = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        const double gap = std::abs(up.n[i] - down.n[omegas.size() - 1 - i]);
        if (gap > 1e-3) {
            if (window_lo == 0.0) window_lo = omegas[i];
            window_hi = omegas[i];
        }
        max_gap = std::max(max_gap, gap);
    }

    double jump_semi = 0.0;
    for (std::size_t i = 0; i + 1 < omegas.size(); ++i) {
        jump_semi = std::max(jump_semi, std::abs(up.n[i + 1] - up.n[i]));
        jump_semi = std::max(jump_semi, std::abs(down.n[i + 1] - down.n[i]));
    }

    double jump_quantum = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        ModelParams p = base;
        p.omega_drive = omegas[i];
        const double q = exact_mean_excitation(p);
        if (i > 0) jump_quantum = std::max(jump_quantum, std::abs(q - prev));
        prev = q;
    }

    Outcome out;
    out.pass = (window_hi > window_lo) && (max_gap > 0.5) && (jump_quantum < 1.0) &&
               (jump_quantum < 0.5 * jump_semi);
    out.detail = "branch window [" + fmt(window_lo) + ", " + fmt(window_hi) +
                 "], max branch gap " + fmt(max_gap) + "; max per-step jump: quantum " +
                 fmt(jump_quantum) + " vs semiclassical " + fmt(jump_semi) +
                 " (need quantum < 1.0 and < half the semiclassical)";
    return out;
}

// Few-quanta bistability: margin test, root structure, two-peak stationary
// quasi-probability aligned with the stable roots, and a point-like section.
Outcome criterion_two_peak_structure() {
    const ModelParams p = two_peak_point();

    const auto bi = bistability_test(p);
    const bool margins_ok = bi.bistable;

    const auto roots = steady_amplitudes(p);
    int stable = 0;
    for (const auto& r : roots) stable += r.stable ? 1 : 0;
    const bool roots_ok = roots.size() == 3 && stable == 2;

    const int dim = 24;
    const FockSpace space = make_fock_space(dim);
    const MatrixXcd rho = steady_state(space, p);
    const auto peaks = find_peaks(wigner_grid(rho));
    bool peaks_ok = peaks.size() == 2 && roots_ok;
    double worst_match = 0.0;
    if (peaks_ok) {
        for (const auto& r : roots) {
            if (!r.stable) continue;
            double best = 1e9;
            for (const auto& pk : peaks)
                best = std::min(best,
                                std::abs(complex<double>(pk.x, pk.y) - r.alpha));
            worst_match = std::max(worst_match, best);
        }
        peaks_ok = worst_match < 0.5;
    }

    const auto section = poincare_section(p, DriveEnvelope::constant(), {0.0, 0.0}, 0.0,
                                          200, 100, DampingConvention::Half, 1.0);
    complex<double> mean{0.0, 0.0};
    for (const auto& z : section.points) mean += z;
    mean /= double(section.points.size());
    double scatter = 0.0;
    for (const auto& z : section.points) scatter = std::max(scatter, std::abs(z - mean));
    const bool section_ok = scatter < 1e-6;

    Outcome out;
    out.pass = margins_ok && roots_ok && peaks_ok && section_ok;
    out.detail = std::string("margins ") + (margins_ok ? "bistable" : "NOT bistable") +
                 "; roots " + fmt(double(roots.size()), 1) + " (" + fmt(double(stable), 1) +
                 " stable); quasi-probability peaks " + fmt(double(peaks.size()), 1) +
                 ", worst peak-to-root offset " + fmt(worst_match) +
                 " (<0.5); section scatter " + fmt(scatter) + " (<1e-6)";
    return out;
}

// Stochastic unraveling reproduces the master-equation mean at gamma*t = 20.
// Both engines share one basis, sized so the explicit stochastic stepper is
// stable at its default step (the ceiling shrinks like 1/dim^3).
Outcome criterion_unraveling_consistency() {
    const ModelParams p = two_peak_point();
    const int dim = 12;
    const FockSpace space = make_fock_space(dim);
    const auto env = DriveEnvelope::constant();

    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(double(k));
    QsdConfig cfg;
    cfg.dt = std::min(cfg.dt, 0.9 * qsd_stable_dt(p, dim));
    const auto ens = ensemble_run(vacuum_psi(dim), grid, seq_seeds(500), space, p, env, cfg);

    const auto states = evolve_density(vacuum_rho(dim), {0.0, 20.0}, space, p, env);
    const double ref = mean_excitation(states.back());

    const double diff = std::abs(ens.mean.back() - ref);
    const double se = ens.std_error.back();
    Outcome out;
    out.pass = (diff <= 3.0 * se) && (se < 0.05 * ens.mean.back());
    out.detail = "500 trajectories: mean " + fmt(ens.mean.back()) + " +- " + fmt(se) +
                 " vs master " + fmt(ref) + "; |diff| = " + fmt(diff) + " = " +
                 fmt(diff / std::max(se, 1e-12), 3) + " SE (need <=3), SE/mean = " +
                 fmt(se / ens.mean.back(), 3) + " (need <0.05)";
    return out;
}

// A single long trajectory dwells near both stable amplitudes: its excitation
// histogram is bimodal with modes at the semiclassical values.
Outcome criterion_trajectory_switching() {
    const ModelParams p = two_peak_point();
    const int dim = 12;  // keeps the default stochastic step below its stability ceiling
    const FockSpace space = make_fock_space(dim);

    std::vector<double> grid;
    for (int k = 0; k <= 15000; ++k) grid.push_back(0.1 * k);
    QsdConfig cfg;
    cfg.dt = std::min(cfg.dt, 0.9 * qsd_stable_dt(p, dim));
    const auto rec =
        run_trajectory(vacuum_psi(dim), grid, 2026, space, p, DriveEnvelope::constant(), cfg);

    // Histogram of post-transient samples, lightly smoothed before mode count.
    const double lo = 0.0, hi = 3.5, bin = 0.1;
    const int nb = int((hi - lo) / bin);
    std::vector<double> hist(nb, 0.0);
    for (std::size_t k = 200; k < rec.excitation.size(); ++k) {
        const int b = int((rec.excitation[k] - lo) / bin);
        if (b >= 0 && b < nb) hist[b] += 1.0;
    }
    std::vector<double> smooth(nb, 0.0);
    const double w[5] = {1, 2, 3, 2, 1};
    for (int i = 0; i < nb; ++i) {
        double acc = 0.0, wsum = 0.0;
        for (int j = -2; j <= 2; ++j) {
            if (i + j < 0 || i + j >= nb) continue;
            acc += w[j + 2] * hist[i + j];
            wsum += w[j + 2];
        }
        smooth[i] = acc / wsum;
    }
    const double top = *std::max_element(smooth.begin(), smooth.end());
    std::vector<double> modes;
    for (int i = 1; i + 1 < nb; ++i)
        if (smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1] &&
            smooth[i] > 0.10 * top)
            modes.push_back(lo + (i + 0.5) * bin);

    const auto roots = steady_amplitudes(p);
    Outcome out;
    bool near_ok = false;
    if (modes.size() == 2 && roots.size() == 3)
        near_ok = std::abs(modes[0] - roots.front().n) < 0.4 &&
                  std::abs(modes[1] - roots.back().n) < 0.4;
    out.pass = modes.size() == 2 && near_ok;
    std::ostringstream ms;
    for (double m : modes) ms << " " << fmt(m, 3);
    out.detail = "histogram modes:" + ms.str() + " (expect 2, near semiclassical " +
                 fmt(roots.front().n, 3) + " and " + fmt(roots.back().n, 3) + ")";
    return out;
}

// Amplitude-scaling: exact classical equivariance and the quantum suppression
// of one stationary peak at lambda = 3.
Outcome criterion_scaling() {
    const ModelParams p = two_peak_point();
    const auto env = DriveEnvelope::constant();
    const complex<double> alpha0{0.3, 0.2};
    std::vector<double> ts;
    for (int k = 0; k <= 200; ++k) ts.push_back(0.05 * k);

    double worst = 0.0;
    for (double lambda : {2.0, 3.0}) {
        const auto base = integrate_amplitude(alpha0, ts, p, env);
        const auto scaled =
            integrate_amplitude(lambda * alpha0, ts, scale_params(p, lambda), env);
        for (std::size_t k = 0; k < ts.size(); ++k)
            worst = std::max(worst, std::abs(scaled.alpha[k] - lambda * base.alpha[k]));
    }
    const bool classical_ok = worst < 1e-6;

    WignerGridSpec spec;
    spec.xmin = spec.ymin = -6.5;
    spec.xmax = spec.ymax = 6.5;
    spec.nx = spec.ny = 131;

    const FockSpace space_base = make_fock_space(24);
    const auto peaks_base = find_peaks(wigner_grid(steady_state(space_base, p), spec));

    const ModelParams p3 = scale_params(p, 3.0);
    const FockSpace space_scaled = make_fock_space(58);
    SteadyConfig marched;  // basis too large for the direct solver
    marched.method = SteadyMethod::Integrate;
    marched.eps = 1e-8;
    const MatrixXcd rho3 = steady_state(space_scaled, p3, env, marched);
    const auto peaks_scaled = find_peaks(wigner_grid(rho3, spec));

    Outcome out;
    out.pass = classical_ok && peaks_base.size() == 2 && peaks_scaled.size() == 1;
    out.detail = "classical residual " + fmt(worst) +
                 " (<1e-6 for lambda in {2,3}); stationary peaks: base " +
                 fmt(double(peaks_base.size()), 1) + " -> lambda=3 " +
                 fmt(double(peaks_scaled.size()), 1) + " (expect 2 -> 1)";
    return out;
}

// Largest-separation-rate sweep of the kicked oscillator: sign change inside
// [11.5, 13.5] and a negative window overlapping [17.61, 19.56] under the
// half-rate damping flag; full-rate values reported alongside.
Outcome criterion_chaos_thresholds() {
    const auto env = DriveEnvelope::pulse_train(0.0, 0.1, kTau5);
    auto exponent_at = [&](double om, DampingConvention conv) {
        ModelParams p = kicked_point();
        p.omega_drive = om;
        LyapunovConfig cfg;
        cfg.convention = conv;
        return lyapunov_exponent(p, env, cfg).value;
    };

    double cross_lo = 0.0, cross_hi = 0.0;
    double l_prev = 0.0;
    bool found_cross = false;
    std::ostringstream half_scan;
    for (double om = 11.5; om <= 13.5 + 1e-9; om += 0.25) {
        const double l = exponent_at(om, DampingConvention::Half);
        half_scan << " " << fmt(om, 4) << ":" << fmt(l, 2);
        if (!found_cross && om > 11.5 && l_prev < 0.0 && l > 0.0) {
            cross_lo = om - 0.25;
            cross_hi = om;
            found_cross = true;
        }
        l_prev = l;
    }

    double window_min = 1e9, window_min_om = 0.0;
    for (double om = 17.75; om <= 19.5 + 1e-9; om += 0.25) {
        const double l = exponent_at(om, DampingConvention::Half);
        if (l < window_min) {
            window_min = l;
            window_min_om = om;
        }
    }
    const bool window_ok = window_min < -0.02;

    std::ostringstream full_scan;  // reported, not gated
    for (double om : {12.0, 13.0, 20.0, 20.5, 21.0, 21.5}) {
        full_scan << " " << fmt(om, 4) << ":" << fmt(exponent_at(om, DampingConvention::Full), 2);
    }

    Outcome out;
    out.pass = found_cross && window_ok;
    out.detail = std::string("half-rate crossing ") +
                 (found_cross ? ("in [" + fmt(cross_lo) + ", " + fmt(cross_hi) + "]")
                              : "NOT FOUND in [11.5, 13.5]") +
                 "; regular window: min exponent " + fmt(window_min, 3) + " at omega=" +
                 fmt(window_min_om) + " within [17.75, 19.5] (need < -0.02); half scan:" +
                 half_scan.str() + "; full-rate (informative):" + full_scan.str();
    return out;
}

// Kicked-ensemble means at the 10-level reference basis, plus scattered
// stroboscopic sections of the matching classical flow.
Outcome criterion_kicked_ensembles() {
    struct Case {
        double T;
        double target;
    };
    const Case cases[] = {{0.25, 1.54}, {0.205, 1.74}, {0.15, 2.04}, {0.1, 2.46}};
    const int dim = 10;  // reference-data basis; converged values reported alongside
    const FockSpace space = make_fock_space(dim);
    const ModelParams p = kicked_point();

    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(5.0 * k);

    bool all_ok = true;
    std::ostringstream detail;
    for (const Case& c : cases) {
        const auto preset_t0 = std::chrono::steady_clock::now();
        const auto env = DriveEnvelope::pulse_train(0.0, c.T, kTau5);
        QsdConfig cfg;
        // The Euler-Maruyama weak bias at this drive is ~ +1.3 * dt * |h_max|^2 / rate
        // on the mean (measured +0.15..0.27 at dt = 2e-4); a 4x finer step puts the
        // ensemble safely inside the +-0.2 tolerance around the reference values.
        cfg.dt = 5e-5;
        const auto ens =
            ensemble_run(vacuum_psi(dim), grid, seq_seeds(600), space, p, env, cfg);
        const double mean = ens.mean.back();
        const double se = ens.std_error.back();
        const bool mean_ok = std::abs(mean - c.target) <= 0.2;

        // Same-basis master value (what the tolerance is centered on) and the
        // converged-basis value (documenting that the 10-level numbers are a
        // truncation-bound reference, not the large-basis physics).
        const auto m10 =
            evolve_density(vacuum_rho(dim), {0.0, 100.0}, space, p, env);
        const double master10 = mean_excitation(m10.back());
        const FockSpace big = make_fock_space(44);
        const auto m44 = evolve_density(vacuum_rho(44), {0.0, 100.0}, big, p, env);
        const double master44 = mean_excitation(m44.back());

        const auto section = poincare_section(p, env, {0.0, 0.0},
                                              std::fmod(100.0, kTau5), 600, 100);
        int distinct = 0;
        std::vector<complex<double>> kept;
        for (const auto& z : section.points) {
            bool fresh = true;
            for (const auto& k : kept)
                if (std::abs(z - k) < 1e-6) {
                    fresh = false;
                    break;
                }
            if (fresh) {
                kept.push_back(z);
                ++distinct;
            }
        }
        complex<double> mu{0.0, 0.0};
        for (const auto& z : section.points) mu += z;
        mu /= double(section.points.size());
        double spread = 0.0;
        for (const auto& z : section.points) spread += std::norm(z - mu);
        spread = std::sqrt(spread / double(section.points.size()));
        const bool section_ok = distinct >= 300 && spread > 0.1;
        const double preset_secs = std::chrono::duration<double>(
                                       std::chrono::steady_clock::now() - preset_t0)
                                       .count();
        const bool time_ok = preset_secs < 1800.0;  // per-preset wall budget

        all_ok = all_ok && mean_ok && section_ok && time_ok;
        detail << " [T=" << fmt(c.T, 3) << ": ensemble " << fmt(mean, 3) << "+-"
               << fmt(se, 2) << " vs reference " << fmt(c.target, 3)
               << " (10-level master " << fmt(master10, 3) << ", 44-level "
               << fmt(master44, 3) << "); section " << distinct << " distinct, rms spread "
               << fmt(spread, 2) << "; " << fmt(preset_secs, 3) << "s"
               << (mean_ok && section_ok && time_ok ? "" : " <-- FAIL") << "]";
    }

    Outcome out;
    out.pass = all_ok;
    out.detail = "600 trajectories each, tolerance +-0.2, sections need >=300 distinct "
                 "points, 1800s per preset:" +
                 detail.str();
    return out;
}

// Pulsed driving leaves interference negativity in the quasi-probability;
// constant driving at the same parameters does not.
Outcome criterion_interference_negativity() {
    const ModelParams p = two_peak_point();
    const int dim = 32;
    const FockSpace space = make_fock_space(dim);

    const auto env = DriveEnvelope::pulse_train(0.0, 0.5, 2.0);
    const auto states = evolve_density(vacuum_rho(dim), {0.0, 20.5}, space, p, env);
    const WignerGrid pulsed = wigner_grid(states.back());
    const double min_w = pulsed.values.minCoeff();
    const double vol = negativity_volume(pulsed);

    const FockSpace small = make_fock_space(24);
    const WignerGrid steady = wigner_grid(steady_state(small, p));
    const double vol_const = negativity_volume(steady);

    Outcome out;
    out.pass = (min_w < -0.01) && (vol > 1e-4) && (vol_const < 1e-2);
    out.detail = "pulsed: min W " + fmt(min_w) + " (<-0.01), negativity volume " + fmt(vol) +
                 " (>1e-4); constant drive: negativity volume " + fmt(vol_const) +
                 " (<1e-2)";
    return out;
}

double over_transient_purity(double T, double tau) {
    ModelParams p = two_peak_point();
    const auto env = DriveEnvelope::pulse_train(0.0, T, tau);
    const int dim = 32;
    const FockSpace space = make_fock_space(dim);
    std::vector<double> ts{0.0};
    for (int k = 0; k <= 40; ++k) ts.push_back(8.0 * tau + k * tau / 20.0);
    const auto states = evolve_density(vacuum_rho(dim), ts, space, p, env);
    double acc = 0.0;
    for (std::size_t k = 1; k < states.size(); ++k) acc += purity(states[k]);
    return acc / double(states.size() - 1);
}

// Short pulses preserve purity; sparse pulses restore it. The two scan
// directions trend oppositely.
Outcome criterion_purity_trends() {
    const double p_short = over_transient_purity(0.1, 2.5);
    const double p_long = over_transient_purity(1.0, 2.5);
    const double p_dense = over_transient_purity(0.5, 1.0);
    const double p_sparse = over_transient_purity(0.5, 5.0);

    Outcome out;
    out.pass = (p_short > p_long + 0.05) && (p_dense < p_sparse - 0.05);
    out.detail = "fixed spacing 2.5: purity(T=0.1) = " + fmt(p_short, 3) +
                 " > purity(T=1.0) = " + fmt(p_long, 3) +
                 "; fixed duration 0.5: purity(tau=1) = " + fmt(p_dense, 3) +
                 " < purity(tau=5) = " + fmt(p_sparse, 3) + " (margins 0.05)";
    return out;
}

// Supplementary module invariant (not one of the numbered criteria): the
// ensemble-averaged projector converges to the density-matrix evolution in
// trace distance as the ensemble grows, and at M = 1000 the distance is below
// 5e-2 at both reference operating points (constant-drive bistable, kicked
// chaotic). The M = 100 value is the 1..100 seed prefix of the same ensemble.
Outcome criterion_density_convergence() {
    struct Point {
        const char* tag;
        ModelParams p;
        DriveEnvelope env;
        int dim;
        double dt;
        double t_final;
    };
    const Point points[] = {
        {"bistable", two_peak_point(), DriveEnvelope::constant(), 12, 2e-4, 20.0},
        {"kicked", kicked_point(), DriveEnvelope::pulse_train(0.0, 0.25, kTau5), 10, 5e-5,
         100.0},
    };

    bool all_ok = true;
    std::ostringstream detail;
    for (const Point& pt : points) {
        const FockSpace space = make_fock_space(pt.dim);
        QsdConfig cfg;
        cfg.dt = std::min(pt.dt, 0.9 * qsd_stable_dt(pt.p, pt.dim));
        cfg.snapshot_times = {pt.t_final};
        const std::vector<double> grid{0.0, 0.5 * pt.t_final, pt.t_final};
        const auto ens =
            ensemble_run(vacuum_psi(pt.dim), grid, seq_seeds(1000), space, pt.p, pt.env, cfg);

        const auto states =
            evolve_density(vacuum_rho(pt.dim), {0.0, pt.t_final}, space, pt.p, pt.env);
        const MatrixXcd& exact = states.back();

        MatrixXcd prefix = MatrixXcd::Zero(pt.dim, pt.dim);
        for (int k = 0; k < 100; ++k) {
            const VectorXcd& psi = ens.records[k].snapshots.back().second;
            prefix += psi * psi.adjoint();
        }
        prefix /= 100.0;
        const double td_100 = trace_distance(prefix, exact);
        const double td_1000 = trace_distance(ens.rho.back().second, exact);

        const bool ok = td_1000 < 5e-2 && td_1000 < td_100 && ens.failures.empty();
        all_ok = all_ok && ok;
        detail << " [" << pt.tag << ": M=100 " << fmt(td_100, 3) << " -> M=1000 "
               << fmt(td_1000, 3) << (ok ? "" : " <-- FAIL") << "]";
    }

    Outcome out;
    out.pass = all_ok;
    out.detail =
        "trace distance to the density-matrix state at the final time, need "
        "decrease with M and < 0.05 at M=1000:" +
        detail.str();
    return out;
}

// Built-in invariant suite (the `validate` subcommand).
Outcome criterion_invariant_suite() {
    const auto checks = run_selfcheck();
    int passed = 0;
    std::string failing;
    for (const auto& c : checks) {
        if (c.pass)
            ++passed;
        else
            failing += " " + c.name;
    }
    Outcome out;
    out.pass = passed == int(checks.size());
    out.detail = fmt(double(passed), 2) + "/" + fmt(double(checks.size()), 2) +
                 " invariants hold" + (failing.empty() ? "" : ("; failing:" + failing));
    return out;
}

}  // namespace

int main() {
    std::printf("acceptance suite: driven dissipative Kerr oscillator library\n");

    run_criterion("AC-1", "closed-form vs evolved stationary mean", 120.0,
                  criterion_exact_vs_evolved);
    run_criterion("AC-2", "hysteresis window with smooth quantum crossover", 0.0,
                  criterion_hysteresis_window);
    run_criterion("AC-3", "few-quanta bistability structure", 300.0,
                  criterion_two_peak_structure);
    run_criterion("AC-4", "unraveling vs master-equation mean", 600.0,
                  criterion_unraveling_consistency);
    run_criterion("AC-5", "single-trajectory switching histogram", 0.0,
                  criterion_trajectory_switching);
    run_criterion("AC-6", "scaling equivariance and peak suppression", 0.0, criterion_scaling);
    run_criterion("AC-7", "chaos thresholds of the kicked flow", 900.0,
                  criterion_chaos_thresholds);
    run_criterion("AC-8", "kicked-ensemble means and scattered sections", 0.0,
                  criterion_kicked_ensembles);
    run_criterion("AC-9", "interference negativity under pulsed driving", 0.0,
                  criterion_interference_negativity);
    run_criterion("AC-10", "over-transient purity trends", 0.0, criterion_purity_trends);
    run_criterion("AC-11", "built-in invariant suite", 60.0, criterion_invariant_suite);
    run_criterion("P-1", "ensemble-average convergence to the density matrix", 1200.0,
                  criterion_density_convergence);

    if (g_failures == 0)
        std::printf("acceptance: all 11 criteria + 1 supplementary invariant PASS\n");
    else
        std::printf("acceptance: %d check(s) FAILED\n", g_failures);
    return g_failures;
}
