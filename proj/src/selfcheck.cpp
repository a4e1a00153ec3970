#include "ndo/selfcheck.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "ndo/master.hpp"
#include "ndo/semiclassical.hpp"
#include "ndo/trajectories.hpp"
#include "ndo/wigner.hpp"

namespace ndo {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

CheckResult wigner_vacuum_peak() {
    MatrixXcd rho = MatrixXcd::Zero(12, 12);
    rho(0, 0) = 1.0;
    const double w0 = wigner_point(rho, 0.0);
    const double expect = 2.0 / M_PI;
    const double err = std::abs(w0 - expect);
    const auto peaks = find_peaks(wigner_grid(rho));
    const bool centered = peaks.size() == 1 && std::abs(peaks[0].x) < 0.06 &&
                          std::abs(peaks[0].y) < 0.06;
    return {"wigner-vacuum-peak", err < 1e-6 && centered,
            "W(0)=" + num(w0) + " vs 2/pi, |err|=" + num(err) + ", peaks=" +
                std::to_string(peaks.size())};
}

CheckResult wigner_one_photon() {
    MatrixXcd rho = MatrixXcd::Zero(12, 12);
    rho(1, 1) = 1.0;
    const double w0 = wigner_point(rho, 0.0);
    const double err = std::abs(w0 + 2.0 / M_PI);
    return {"wigner-one-photon-negative", err < 1e-6,
            "W(0)=" + num(w0) + " vs -2/pi, |err|=" + num(err)};
}

CheckResult wigner_grid_norm() {
    MatrixXcd rho = MatrixXcd::Zero(8, 8);
    const std::complex<double> amp = 1.0 / std::sqrt(3.0);
    VectorXcd psi = VectorXcd::Zero(8);
    psi(0) = amp;
    psi(1) = amp;
    psi(2) = amp;
    rho = psi * psi.adjoint();
    const WignerGrid g = wigner_grid(rho);
    return {"wigner-grid-normalization", std::abs(g.norm_residual) < 1e-2,
            "norm residual " + num(g.norm_residual)};
}

CheckResult master_invariants() {
    ModelParams p;
    p.delta = -8.0;
    p.chi = 2.0;
    p.omega_drive = 2.7;
    const int dim = 16;
    const FockSpace space = make_fock_space(dim);
    MatrixXcd rho0 = MatrixXcd::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    const auto states = evolve_density(rho0, {0.0, 0.5, 1.0, 1.5, 2.0}, space, p,
                                       DriveEnvelope::constant());
    double worst_trace = 0.0, worst_herm = 0.0, worst_eig = 0.0;
    for (const auto& rho : states) {
        worst_trace = std::max(worst_trace, std::abs(rho.trace().real() - 1.0));
        worst_herm = std::max(worst_herm, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
        worst_eig = std::max(worst_eig, -es.eigenvalues().minCoeff());
    }
    const bool pass = worst_trace < 1e-8 && worst_herm < 1e-10 && worst_eig < 1e-8;
    return {"master-trace-herm-positivity", pass,
            "trace err " + num(worst_trace) + ", herm err " + num(worst_herm) +
                ", min eig " + num(-worst_eig)};
}

CheckResult decay_law_master() {
    // Undriven oscillator: H commutes with n, so <n>(t) = n0 exp(-gamma t)
    // exactly, Kerr term or not.
    ModelParams p;
    p.delta = -1.0;
    p.chi = 1.0;
    const int dim = 8;
    const FockSpace space = make_fock_space(dim);
    MatrixXcd rho0 = MatrixXcd::Zero(dim, dim);
    rho0(2, 2) = 1.0;
    const std::vector<double> t{0.0, 0.5, 1.0, 2.0};
    const auto states = evolve_density(rho0, t, space, p, DriveEnvelope::constant());
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
        worst = std::max(worst,
                         std::abs(mean_excitation(states[k]) - 2.0 * std::exp(-t[k])));
    return {"decay-law-master", worst < 1e-7, "max |<n> - 2 e^-t| = " + num(worst)};
}

CheckResult decay_law_qsd() {
    ModelParams p;
    p.delta = -1.0;
    p.chi = 1.0;
    const int dim = 4;
    const FockSpace space = make_fock_space(dim);
    VectorXcd psi0 = VectorXcd::Zero(dim);
    psi0(1) = 1.0;
    std::vector<double> t;
    for (int k = 0; k <= 10; ++k) t.push_back(0.1 * k);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 1; s <= 24; ++s) seeds.push_back(s);
    QsdConfig qc;
    const EnsembleResult ens = ensemble_run(psi0, t, seeds, space, p,
                                            DriveEnvelope::constant(), qc);
    double worst = 0.0, bound = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double err = std::abs(ens.mean[k] - std::exp(-t[k]));
        const double tol = std::max(5.0 * ens.std_error[k], 0.02);
        worst = std::max(worst, err - tol);
        bound = std::max(bound, err);
    }
    return {"decay-law-qsd", worst <= 0.0,
            "max |mean - e^-t| = " + num(bound) + " (within 5 SE + drift allowance)"};
}

CheckResult seed_partition() {
    ModelParams p;
    p.delta = -8.0;
    p.chi = 2.0;
    p.omega_drive = 2.7;
    const int dim = 8;
    const FockSpace space = make_fock_space(dim);
    VectorXcd psi0 = VectorXcd::Zero(dim);
    psi0(0) = 1.0;
    std::vector<double> t;
    for (int k = 0; k <= 10; ++k) t.push_back(0.1 * k);
    QsdConfig qc;
    const DriveEnvelope env = DriveEnvelope::constant();
    const EnsembleResult whole =
        ensemble_run(psi0, t, {1, 2, 3, 4, 5, 6, 7, 8}, space, p, env, qc);
    const EnsembleResult a = ensemble_run(psi0, t, {1, 2, 3, 4}, space, p, env, qc);
    const EnsembleResult b = ensemble_run(psi0, t, {5, 6, 7, 8}, space, p, env, qc);
    const EnsembleResult merged = combine_ensembles(a, b);
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        worst = std::max(worst, std::abs(whole.mean[k] - merged.mean[k]));
        worst = std::max(worst, std::abs(whole.std_error[k] - merged.std_error[k]));
    }
    return {"seed-partition-invariance", worst < 1e-12,
            "max |whole - merged| = " + num(worst)};
}

CheckResult scaling_identity() {
    ModelParams p;
    p.delta = -8.0;
    p.chi = 2.0;
    p.omega_drive = 2.7;
    const double lam = 2.0;
    const ModelParams ps = scale_params(p, lam);
    std::vector<double> t;
    for (int k = 0; k <= 50; ++k) t.push_back(0.1 * k);
    const std::complex<double> a0(0.3, 0.2);
    const DriveEnvelope env = DriveEnvelope::constant();
    const AmplitudeSeries base = integrate_amplitude(a0, t, p, env);
    const AmplitudeSeries scaled = integrate_amplitude(lam * a0, t, ps, env);
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k)
        worst = std::max(worst, std::abs(scaled.alpha[k] - lam * base.alpha[k]));
    return {"scaling-identity", worst < 1e-6, "max residual " + num(worst)};
}

CheckResult lyapunov_linear() {
    ModelParams p;
    p.delta = 0.5;
    p.chi = 0.0;
    p.omega_drive = 1.0;
    const LyapunovResult r = lyapunov_exponent(p, DriveEnvelope::constant(), {});
    const double err = std::abs(r.value + 0.5);
    return {"lyapunov-linear-limit", err < 0.02,
            "L = " + num(r.value) + " vs -gamma/2, |err| = " + num(err)};
}

}  // namespace

std::vector<CheckResult> run_selfcheck() {
    std::vector<CheckResult> out;
    out.push_back(wigner_vacuum_peak());
    out.push_back(wigner_one_photon());
    out.push_back(wigner_grid_norm());
    out.push_back(master_invariants());
    out.push_back(decay_law_master());
    out.push_back(decay_law_qsd());
    out.push_back(seed_partition());
    out.push_back(scaling_identity());
    out.push_back(lyapunov_linear());
    return out;
}

}  // namespace ndo
