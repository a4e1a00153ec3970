#pragma once

#include <vector>

#include "ndo/fock.hpp"
#include "ndo/integrate.hpp"
#include "ndo/model.hpp"
#include "ndo/params.hpp"

namespace ndo {

// A density matrix is a dim x dim complex matrix; helpers below check the
// defining invariants (hermiticity, unit trace, positivity within tolerance).
void check_density(const MatrixXcd& rho, double herm_tol = 1e-10, double trace_tol = 1e-8,
                   double pos_tol = 1e-8);

// Right-hand side of the Lindblad master equation
//   drho/dt = -i[H(t), rho] + sum_i (L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho}).
// Exploits the tridiagonal H and shift structure of a: O(dim^2) per call.
MatrixXcd lindblad_rhs(const MatrixXcd& rho, double t, const FockSpace& space,
                       const ModelParams& p, const DriveEnvelope& env);

struct MasterConfig {
    double rtol = 1e-8;
    double atol = 1e-12;
};

// Integrate the master equation, returning the state at each requested time.
// t_span must be increasing; t_span[0] is the initial time of rho0. The state
// is re-hermitized after every accepted step (guards against roundoff drift).
std::vector<MatrixXcd> evolve_density(const MatrixXcd& rho0, const std::vector<double>& t_span,
                                      const FockSpace& space, const ModelParams& p,
                                      const DriveEnvelope& env, const MasterConfig& cfg = {});

double mean_excitation(const MatrixXcd& rho);
double purity(const MatrixXcd& rho);
VectorXd number_distribution(const MatrixXcd& rho);

// Trace distance 0.5 * ||a - b||_1 between two density matrices (0 identical,
// 1 orthogonal); the standard figure of merit for unraveling consistency.
double trace_distance(const MatrixXcd& a, const MatrixXcd& b);

struct DistributionExtrema {
    std::vector<int> maxima;
    std::vector<int> minima;
};

// Interior local extrema of p(n); plateaus report their smallest n. n=0 counts
// as a maximum when p(0) > p(1) (thermal-like monotone tails peak at zero).
DistributionExtrema distribution_extrema(const VectorXd& p);

// Closed-form stationary mean excitation of the constant-drive oscillator,
//   <n> = Omega^2 / ((Delta+chi)^2 + (gamma/2)^2) * F(c+1, c~+1, z) / F(c, c~, z),
// with c = (Delta+chi)/chi - i gamma/(2 chi), z = 2 (Omega/chi)^2 and
//   F(a, b, z) = sum_k [Gamma(a)Gamma(b) / (Gamma(a+k)Gamma(b+k))] z^k / k!.
// Requires chi != 0; the linear oscillator has the Lorentzian limit below.
double exact_mean_excitation(const ModelParams& p);

// chi = 0 limit: <n> = Omega^2 / (Delta^2 + (gamma/2)^2).
double lorentzian_mean_excitation(const ModelParams& p);

enum class SteadyMethod { Nullspace, Integrate };

struct SteadyConfig {
    SteadyMethod method = SteadyMethod::Nullspace;
    // Stationarity threshold: ||drho/dt||_F must fall below eps times the
    // generator's magnitude (the largest diagonal rate in the basis), so the
    // criterion is dimensionless and independent of basis size.
    double eps = 1e-9;
    double t_max = 4000;   // Integrate: give up beyond this horizon
    double t_chunk = 10;   // Integrate: check stationarity every t_chunk
    MasterConfig solver;   // Integrate: rtol is tightened to eps/100 if looser
};

// Stationary density matrix of the constant-drive master equation. The default
// solves the linear stationarity system directly (with the trace condition
// replacing one redundant row) and verifies ||drho/dt|| < eps on the result;
// SteadyMethod::Integrate instead marches the master equation from vacuum
// until the same criterion holds. Pulsed envelopes are rejected: the driven
// system then approaches a periodic orbit, not a fixed point.
MatrixXcd steady_state(const FockSpace& space, const ModelParams& p,
                       const DriveEnvelope& env = DriveEnvelope::constant(),
                       const SteadyConfig& cfg = {});

// Doubling search from dim=20: smallest tried dimension whose steady state has
// top-level population < 1e-6 and mean within 1e-6 of the previous size.
int auto_dim(const ModelParams& p, int start = 20, int cap = 160);

}  // namespace ndo
