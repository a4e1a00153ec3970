#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ndo/fock.hpp"
#include "ndo/params.hpp"
#include "ndo/philox.hpp"

namespace ndo {

// Quantum state diffusion unraveling of the master equation:
//   dpsi = -i H psi dt
//        + sum_j [ <L_j^dag> L_j - 1/2 L_j^dag L_j - 1/2 <L_j^dag><L_j> ] psi dt
//        + sum_j (L_j - <L_j>) psi dxi_j,
// with independent complex Wiener increments, E[dxi_i conj(dxi_j)] = delta_ij dt,
// E[dxi_i dxi_j] = 0; the state is renormalized after every step.

struct QsdConfig {
    double dt = 2e-4;  // Euler-Maruyama step; see qsd_stable_dt for the ceiling
    std::vector<double> snapshot_times;  // subset of the record grid
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> excitation;
    std::vector<std::pair<double, VectorXcd>> snapshots;
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<double> mean;       // ensemble mean excitation per time point
    std::vector<double> std_error;  // standard error of the mean per time point
    std::vector<std::pair<double, MatrixXcd>> rho;  // averaged |psi><psi| at snapshot times
    std::vector<TrajectoryRecord> records;          // per-seed data (ascending seed)
    int trajectories = 0;
    // Seeds whose trajectories broke down mid-run, with the reason. The
    // ensemble completes with the survivors; callers decide whether a
    // non-empty list is acceptable for their statistics.
    std::vector<std::pair<std::uint64_t, std::string>> failures;
};

// One Euler-Maruyama step; noise carries one complex increment per Lindblad
// channel (1 for N=0, 2 for N>0) and is injected by the caller so tests can be
// deterministic. Throws StepFailure on norm underflow before renormalization.
VectorXcd qsd_step(const VectorXcd& psi, double t, double dt,
                   std::span<const std::complex<double>> noise, const FockSpace& space,
                   const ModelParams& p, const DriveEnvelope& env);

// Stability ceiling for the explicit scheme: the deterministic part of the map
// amplifies the top Fock component unless (h_n dt)^2 + (gamma n dt / 2)^2 <
// gamma n dt for all levels; returns half the tightest bound as a safe default.
double qsd_stable_dt(const ModelParams& p, int dim);

// Integrate one trajectory, recording mean excitation at every t_grid point
// (t_grid[0] is the initial time). Reproducible: the seed fully determines the
// noise through the counter-based generator.
TrajectoryRecord run_trajectory(const VectorXcd& psi0, const std::vector<double>& t_grid,
                                std::uint64_t seed, const FockSpace& space,
                                const ModelParams& p, const DriveEnvelope& env,
                                const QsdConfig& cfg);

// Seeded ensemble. Seeds must be distinct; they are processed in ascending
// order and all reductions use a fixed pairwise tree over that order, so the
// result is independent of how seeds are partitioned across calls. A step
// failure on one realization is recorded in `failures` and the run completes
// with the survivors; only an ensemble with no survivors throws.
EnsembleResult ensemble_run(const VectorXcd& psi0, const std::vector<double>& t_grid,
                            const std::vector<std::uint64_t>& seeds, const FockSpace& space,
                            const ModelParams& p, const DriveEnvelope& env,
                            const QsdConfig& cfg);

// Exact re-combination of two ensembles over the union of their seeds;
// equivalent to a single ensemble_run over all seeds.
EnsembleResult combine_ensembles(const EnsembleResult& a, const EnsembleResult& b);

}  // namespace ndo
