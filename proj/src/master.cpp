#include "ndo/master.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace ndo {

using std::complex;
static constexpr complex<double> kI{0.0, 1.0};

void check_density(const MatrixXcd& rho, double herm_tol, double trace_tol, double pos_tol) {
    if (rho.rows() != rho.cols() || rho.rows() < 2)
        throw InvalidArgument("density matrix must be square with dim >= 2");
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > herm_tol) throw InvalidArgument("density matrix not Hermitian within tolerance");
    const double tr = std::abs(rho.trace() - 1.0);
    if (tr > trace_tol) throw InvalidArgument("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -pos_tol)
        throw InvalidArgument("density matrix has a negative eigenvalue beyond tolerance");
}

namespace {

// Precomputed constants for the O(dim^2) master-equation right-hand side,
// written against the shift structure of a and the diagonal H0 = Delta n + chi n^2.
struct MasterKernel {
    int dim;
    double omega, g1, g2;
    const DriveEnvelope* env;
    VectorXd hd;  // H0 diagonal
    VectorXd s;   // s(n) = sqrt(n)

    MasterKernel(const FockSpace& space, const ModelParams& p, const DriveEnvelope& e)
        : dim(space.dim),
          omega(p.omega_drive),
          g1(p.gamma * (p.n_bath + 1.0)),
          g2(p.gamma * p.n_bath),
          env(&e),
          hd(kerr_diagonal(p.delta, p.chi, space.dim)),
          s(space.dim + 1) {
        for (int n = 0; n <= dim; ++n) s(n) = std::sqrt(static_cast<double>(n));
    }

    template <class In, class Out>
    void apply(const In& rho, double t, Out& out) const {
        const double f_om = drive_envelope(*env, t) * omega;
        for (int j = 0; j < dim; ++j) {
            for (int i = 0; i < dim; ++i) {
                // -i [H0 + f*Omega*(a^dag + a), rho]
                complex<double> v = -kI * (hd(i) - hd(j)) * rho(i, j);
                if (f_om != 0.0) {
                    complex<double> c{0.0, 0.0};
                    if (i > 0) c += s(i) * rho(i - 1, j);            // a^dag rho
                    if (i + 1 < dim) c += s(i + 1) * rho(i + 1, j);  // a rho
                    if (j > 0) c -= rho(i, j - 1) * s(j);            // rho a
                    if (j + 1 < dim) c -= rho(i, j + 1) * s(j + 1);  // rho a^dag
                    v -= kI * f_om * c;
                }
                // damping channel: g1 (a rho a^dag - 1/2 {n, rho})
                complex<double> d{0.0, 0.0};
                if (i + 1 < dim && j + 1 < dim)
                    d += g1 * s(i + 1) * s(j + 1) * rho(i + 1, j + 1);
                d -= 0.5 * g1 * (static_cast<double>(i) + j) * rho(i, j);
                // thermal channel: g2 (a^dag rho a - 1/2 {a a^dag, rho}); the
                // anticommutator diagonal comes from the truncated a^dag, so the
                // top level contributes 0 rather than dim and the trace is
                // conserved exactly
                if (g2 != 0.0) {
                    if (i > 0 && j > 0) d += g2 * s(i) * s(j) * rho(i - 1, j - 1);
                    const double ci = (i + 1 < dim) ? i + 1.0 : 0.0;
                    const double cj = (j + 1 < dim) ? j + 1.0 : 0.0;
                    d -= 0.5 * g2 * (ci + cj) * rho(i, j);
                }
                out(i, j) = v + d;
            }
        }
    }
};

}  // namespace

MatrixXcd lindblad_rhs(const MatrixXcd& rho, double t, const FockSpace& space,
                       const ModelParams& p, const DriveEnvelope& env) {
    MasterKernel k(space, p, env);
    MatrixXcd out(space.dim, space.dim);
    k.apply(rho, t, out);
    return out;
}

std::vector<MatrixXcd> evolve_density(const MatrixXcd& rho0, const std::vector<double>& t_span,
                                      const FockSpace& space, const ModelParams& p,
                                      const DriveEnvelope& env, const MasterConfig& cfg) {
    p.validate();
    env.validate();
    check_density(rho0);
    if (t_span.empty()) throw InvalidArgument("t_span must not be empty");
    for (size_t k = 1; k < t_span.size(); ++k)
        if (t_span[k] <= t_span[k - 1]) throw InvalidArgument("t_span must be increasing");
    const int dim = space.dim;
    if (rho0.rows() != dim) throw InvalidArgument("rho0 dimension mismatch");

    MatrixXcd rho = rho0;
    MasterKernel kernel(space, p, env);
    auto rhs = [&](const VectorXcd& y, double t, VectorXcd& dydt) {
        Eigen::Map<const MatrixXcd> r(y.data(), dim, dim);
        Eigen::Map<MatrixXcd> dr(dydt.data(), dim, dim);
        kernel.apply(r, t, dr);
    };
    auto hermitize = [&](VectorXcd& y, double) {
        Eigen::Map<MatrixXcd> r(y.data(), dim, dim);
        r = 0.5 * (r + r.adjoint()).eval();
    };

    SolverConfig scfg;
    scfg.rtol = cfg.rtol;
    scfg.atol = cfg.atol;
    scfg.h_init = 1e-4;
    // Narrow pulses must not fit between the stage evaluations of one accepted
    // step, or the controller never sees them; cap the step at half the width.
    if (env.kind == DriveEnvelope::Kind::PulseTrain) scfg.h_max = 0.5 * env.T;

    std::vector<MatrixXcd> out;
    out.reserve(t_span.size());
    out.push_back(rho);
    VectorXcd y = Eigen::Map<const VectorXcd>(rho.data(), dim * dim);
    for (size_t k = 1; k < t_span.size(); ++k) {
        integrate_adaptive(y, t_span[k - 1], t_span[k], rhs, scfg, hermitize);
        Eigen::Map<const MatrixXcd> r(y.data(), dim, dim);
        out.push_back(0.5 * (r + r.adjoint()));
    }
    return out;
}

double mean_excitation(const MatrixXcd& rho) {
    double m = 0.0;
    for (int n = 0; n < rho.rows(); ++n) m += n * rho(n, n).real();
    return m;
}

double purity(const MatrixXcd& rho) { return rho.cwiseAbs2().sum(); }

double trace_distance(const MatrixXcd& a, const MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidArgument("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (a - b) + 0.5 * (a - b).adjoint());
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

VectorXd number_distribution(const MatrixXcd& rho) { return rho.diagonal().real(); }

DistributionExtrema distribution_extrema(const VectorXd& p) {
    DistributionExtrema ex;
    const int n = static_cast<int>(p.size());
    if (n < 2) return ex;
    if (p(0) > p(1)) ex.maxima.push_back(0);
    int i = 1;
    while (i < n - 1) {
        int j = i;
        while (j + 1 < n && p(j + 1) == p(i)) ++j;  // plateau [i..j]
        if (j >= n - 1) break;                      // plateau runs into the boundary
        const double left = p(i - 1), mid = p(i), right = p(j + 1);
        if (mid > left && mid > right) ex.maxima.push_back(i);
        if (mid < left && mid < right) ex.minima.push_back(i);
        i = j + 1;
    }
    return ex;
}

double lorentzian_mean_excitation(const ModelParams& p) {
    p.validate();
    const double hw = 0.5 * p.gamma;
    return p.omega_drive * p.omega_drive / (p.delta * p.delta + hw * hw);
}

double exact_mean_excitation(const ModelParams& p) {
    p.validate();
    if (p.chi == 0.0)
        throw UnsupportedParameter(
            "exact_mean_excitation requires chi != 0; use lorentzian_mean_excitation");
    if (p.omega_drive == 0.0) return 0.0;
    const complex<double> c{(p.delta + p.chi) / p.chi, -p.gamma / (2.0 * p.chi)};
    const double z = 2.0 * (p.omega_drive / p.chi) * (p.omega_drive / p.chi);
    // Both series share the term recursion t_{k+1} = t_k * z / ((a+k)(a~+k)(k+1))
    // = t_k * z / (|a+k|^2 (k+1)); every term is real positive. The two sums are
    // rescaled together when large so only their ratio matters.
    double t_den = 1.0, sum_den = 1.0;  // F(c, c~, z)
    double t_num = 1.0, sum_num = 1.0;  // F(c+1, c~+1, z)
    for (int k = 0; k < 100000; ++k) {
        const double q_den = std::norm(c + static_cast<double>(k));
        const double q_num = std::norm(c + static_cast<double>(k + 1));
        t_den *= z / (q_den * (k + 1));
        t_num *= z / (q_num * (k + 1));
        sum_den += t_den;
        sum_num += t_num;
        if (t_den < 1e-18 * sum_den && t_num < 1e-18 * sum_num) break;
        if (sum_den > 1e250 || sum_num > 1e250) {
            const double sc = 1e-250;
            t_den *= sc; sum_den *= sc; t_num *= sc; sum_num *= sc;
        }
    }
    const double pref =
        p.omega_drive * p.omega_drive /
        (std::pow(p.delta + p.chi, 2) + 0.25 * p.gamma * p.gamma);
    return pref * (sum_num / sum_den);
}

namespace {

// Stationarity system: rows of d(vec rho)/dt = 0 in column-stacked convention
// vec(A rho B) = (B^T kron A) vec(rho), with one row replaced by the trace
// condition. Built densely; intended for dim <= ~56.
MatrixXcd steady_state_nullspace(const FockSpace& space, const ModelParams& p) {
    const int dim = space.dim;
    const int d2 = dim * dim;
    if (d2 > 3200) throw UnsupportedParameter("nullspace steady state limited to dim <= 56");
    const MatrixXcd H = hamiltonian(space, p, DriveEnvelope::constant(), 0.0);
    const auto Ls = lindblad_ops(space, p);
    const MatrixXcd id = MatrixXcd::Identity(dim, dim);

    auto kron = [&](const MatrixXcd& A, const MatrixXcd& B) {
        MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
        for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j)
                K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        return K;
    };

    MatrixXcd L = -kI * (kron(id, H) - kron(H.transpose(), id));
    for (const auto& Lk : Ls) {
        const MatrixXcd LdL = Lk.adjoint() * Lk;
        L += kron(Lk.conjugate(), Lk);
        L -= 0.5 * kron(id, LdL);
        L -= 0.5 * kron(LdL.transpose(), id);
    }
    // Trace row replaces the first equation (the system is rank-deficient by 1).
    for (int j = 0; j < d2; ++j) L(0, j) = 0.0;
    for (int k = 0; k < dim; ++k) L(0, k * dim + k) = 1.0;
    VectorXcd b = VectorXcd::Zero(d2);
    b(0) = 1.0;
    VectorXcd x = L.partialPivLu().solve(b);
    MatrixXcd rho = Eigen::Map<const MatrixXcd>(x.data(), dim, dim);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return rho;
}

// Magnitude of the generator: the fastest rate in the truncated basis. Used to
// make the stationarity threshold dimensionless (a raw ||drho/dt||_F target is
// unreachable for large detunings, where solver noise alone scales with this).
double generator_scale(const FockSpace& space, const ModelParams& p) {
    const VectorXd hd = kerr_diagonal(p.delta, p.chi, space.dim);
    const double rate = p.gamma * (2.0 * p.n_bath + 1.0) * space.dim;
    return 1.0 + hd.cwiseAbs().maxCoeff() + rate + p.omega_drive;
}

MatrixXcd steady_state_integrate(const FockSpace& space, const ModelParams& p,
                                 const SteadyConfig& cfg) {
    const int dim = space.dim;
    MatrixXcd rho = MatrixXcd::Zero(dim, dim);
    rho(0, 0) = 1.0;
    const auto env = DriveEnvelope::constant();
    const double target = cfg.eps * generator_scale(space, p);
    MasterConfig solver = cfg.solver;  // march accurately enough to see the target
    solver.rtol = std::min(solver.rtol, std::max(0.01 * cfg.eps, 1e-13));
    solver.atol = std::min(solver.atol, 1e-3 * solver.rtol);
    double t = 0.0;
    while (t < cfg.t_max) {
        auto states = evolve_density(rho, {t, t + cfg.t_chunk}, space, p, env, solver);
        rho = states.back();
        t += cfg.t_chunk;
        if (lindblad_rhs(rho, t, space, p, env).norm() < target) return rho;
    }
    throw IntegrationFailure("steady state not reached within t_max", cfg.t_max);
}

}  // namespace

MatrixXcd steady_state(const FockSpace& space, const ModelParams& p, const DriveEnvelope& env,
                       const SteadyConfig& cfg) {
    p.validate();
    if (env.kind != DriveEnvelope::Kind::Constant)
        throw UnsupportedParameter(
            "steady_state requires a constant drive (pulsed dynamics has no fixed point)");
    MatrixXcd rho = (cfg.method == SteadyMethod::Nullspace)
                        ? steady_state_nullspace(space, p)
                        : steady_state_integrate(space, p, cfg);
    const double res = lindblad_rhs(rho, 0.0, space, p, env).norm();
    if (res > std::max(cfg.eps, 1e-12) * generator_scale(space, p))
        throw IntegrationFailure("steady-state residual " + std::to_string(res) +
                                     " exceeds threshold",
                                 0.0);
    return rho;
}

int auto_dim(const ModelParams& p, int start, int cap) {
    p.validate();
    double prev_mean = -1.0;
    for (int dim = start; dim <= cap; dim *= 2) {
        FockSpace space = make_fock_space(dim);
        SteadyConfig cfg;
        if (dim * dim > 3200) cfg.method = SteadyMethod::Integrate;
        MatrixXcd rho = steady_state(space, p, DriveEnvelope::constant(), cfg);
        const double m = mean_excitation(rho);
        const double top = rho(dim - 1, dim - 1).real();
        if (prev_mean >= 0.0 && std::abs(top) < 1e-6 && std::abs(m - prev_mean) < 1e-6)
            return dim;
        prev_mean = m;
    }
    throw UnsupportedParameter("auto_dim: no converged dimension up to cap");
}

}  // namespace ndo
