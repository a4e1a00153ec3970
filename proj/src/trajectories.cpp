#include "ndo/trajectories.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace ndo {

using std::complex;
static constexpr complex<double> kI{0.0, 1.0};

namespace {

// Precomputed data for the O(dim) stochastic step.
struct QsdKernel {
    int dim;
    double omega, g1, g2;  // drive amplitude, downward rate, upward rate
    const DriveEnvelope* env;
    VectorXd hd;
    VectorXd s;

    QsdKernel(const FockSpace& space, const ModelParams& p, const DriveEnvelope& e)
        : dim(space.dim),
          omega(p.omega_drive),
          g1(p.gamma * (p.n_bath + 1.0)),
          g2(p.gamma * p.n_bath),
          env(&e),
          hd(kerr_diagonal(p.delta, p.chi, space.dim)),
          s(space.dim + 1) {
        for (int n = 0; n <= dim; ++n) s(n) = std::sqrt(static_cast<double>(n));
    }

    // One Euler-Maruyama step + renormalization.
    void step(VectorXcd& psi, double t, double dt,
              std::span<const complex<double>> noise) const {
        const double f_om = drive_envelope(*env, t) * omega;
        VectorXcd apsi = VectorXcd::Zero(dim), adpsi = VectorXcd::Zero(dim);
        for (int k = 0; k + 1 < dim; ++k) apsi(k) = s(k + 1) * psi(k + 1);
        for (int k = 1; k < dim; ++k) adpsi(k) = s(k) * psi(k - 1);

        complex<double> ea{0.0, 0.0};  // <a> for the normalized state
        for (int k = 0; k < dim; ++k) ea += std::conj(psi(k)) * apsi(k);
        const double ea2 = std::norm(ea);

        VectorXcd out(dim);
        const complex<double> xi1 = std::sqrt(g1) * noise[0];
        const complex<double> xi2 =
            (g2 > 0.0 && noise.size() > 1) ? std::sqrt(g2) * noise[1] : complex<double>{0, 0};
        for (int k = 0; k < dim; ++k) {
            const complex<double> hpsi = hd(k) * psi(k) + f_om * (apsi(k) + adpsi(k));
            complex<double> drift =
                -kI * hpsi +
                g1 * (std::conj(ea) * apsi(k) - 0.5 * (double(k) * psi(k)) - 0.5 * ea2 * psi(k));
            if (g2 > 0.0)
                drift += g2 * (ea * adpsi(k) - 0.5 * ((k + 1.0) * psi(k)) - 0.5 * ea2 * psi(k));
            out(k) = psi(k) + dt * drift + xi1 * (apsi(k) - ea * psi(k));
            if (g2 > 0.0) out(k) += xi2 * (adpsi(k) - std::conj(ea) * psi(k));
        }
        const double nrm = out.norm();
        if (nrm < 1e-12)
            throw StepFailure("qsd_step: state norm underflow; reduce the step size");
        psi = out / nrm;
    }
};

double excitation_of(const VectorXcd& psi) {
    double m = 0.0;
    for (int k = 0; k < psi.size(); ++k) m += k * std::norm(psi(k));
    return m;
}

// Fixed reduction order: recursive halving over the (ascending-seed) index
// range; guarantees bitwise partition independence of ensemble averages.
template <class T, class Leaf, class Add>
T pairwise_reduce(std::size_t lo, std::size_t hi, Leaf&& leaf, Add&& add) {
    if (hi - lo == 1) return leaf(lo);
    const std::size_t mid = lo + (hi - lo) / 2;
    T a = pairwise_reduce<T>(lo, mid, leaf, add);
    T b = pairwise_reduce<T>(mid, hi, leaf, add);
    return add(std::move(a), std::move(b));
}

EnsembleResult reduce_records(std::vector<TrajectoryRecord> records) {
    EnsembleResult res;
    res.trajectories = static_cast<int>(records.size());
    res.times = records.front().times;
    const std::size_t m = records.size();
    const std::size_t nt = res.times.size();

    auto add_vec = [](std::vector<double> a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
    };
    auto sum_exc = pairwise_reduce<std::vector<double>>(
        0, m, [&](std::size_t i) { return records[i].excitation; }, add_vec);
    res.mean.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) res.mean[i] = sum_exc[i] / static_cast<double>(m);

    res.std_error.assign(nt, 0.0);
    if (m > 1) {
        auto sum_sq = pairwise_reduce<std::vector<double>>(
            0, m,
            [&](std::size_t i) {
                std::vector<double> d(nt);
                for (std::size_t k = 0; k < nt; ++k) {
                    const double dev = records[i].excitation[k] - res.mean[k];
                    d[k] = dev * dev;
                }
                return d;
            },
            add_vec);
        for (std::size_t i = 0; i < nt; ++i)
            res.std_error[i] = std::sqrt(sum_sq[i] / static_cast<double>(m - 1) /
                                         static_cast<double>(m));
    }

    const std::size_t nsnap = records.front().snapshots.size();
    for (std::size_t sidx = 0; sidx < nsnap; ++sidx) {
        auto sum_rho = pairwise_reduce<MatrixXcd>(
            0, m,
            [&](std::size_t i) -> MatrixXcd {
                const VectorXcd& psi = records[i].snapshots[sidx].second;
                return psi * psi.adjoint();
            },
            [](MatrixXcd a, const MatrixXcd& b) -> MatrixXcd { return a + b; });
        res.rho.emplace_back(records.front().snapshots[sidx].first,
                             sum_rho / static_cast<double>(m));
    }
    res.records = std::move(records);
    return res;
}

}  // namespace

VectorXcd qsd_step(const VectorXcd& psi, double t, double dt,
                   std::span<const complex<double>> noise, const FockSpace& space,
                   const ModelParams& p, const DriveEnvelope& env) {
    p.validate();
    if (psi.size() != space.dim) throw InvalidArgument("qsd_step: psi dimension mismatch");
    if (!(dt > 0.0)) throw InvalidArgument("qsd_step: dt must be > 0");
    if (noise.empty()) throw InvalidArgument("qsd_step: need one noise increment per channel");
    QsdKernel kernel(space, p, env);
    VectorXcd out = psi;
    kernel.step(out, t, dt, noise);
    return out;
}

double qsd_stable_dt(const ModelParams& p, int dim) {
    const VectorXd hd = kerr_diagonal(p.delta, p.chi, dim);
    const double g1 = p.gamma * (p.n_bath + 1.0);
    double dt = 1.0;
    for (int n = 1; n < dim; ++n) {
        const double h2 = hd(n) * hd(n);
        const double gn = g1 * n;
        dt = std::min(dt, gn / (h2 + 0.25 * gn * gn));
    }
    return 0.5 * dt;
}

TrajectoryRecord run_trajectory(const VectorXcd& psi0, const std::vector<double>& t_grid,
                                std::uint64_t seed, const FockSpace& space,
                                const ModelParams& p, const DriveEnvelope& env,
                                const QsdConfig& cfg) {
    p.validate();
    env.validate();
    if (psi0.size() != space.dim) throw InvalidArgument("run_trajectory: psi0 dim mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        throw InvalidArgument("run_trajectory: psi0 must be normalized");
    if (t_grid.size() < 2) throw InvalidArgument("run_trajectory: need at least two times");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (t_grid[k] <= t_grid[k - 1]) throw InvalidArgument("t_grid must be increasing");
    if (!(cfg.dt > 0.0)) throw InvalidArgument("run_trajectory: dt must be > 0");
    for (double ts : cfg.snapshot_times) {
        bool on_grid = false;
        for (double t : t_grid) on_grid = on_grid || std::abs(t - ts) < 1e-9;
        if (!on_grid)
            throw InvalidArgument("run_trajectory: snapshot times must lie on the time grid");
    }

    QsdKernel kernel(space, p, env);
    Philox rng(seed);
    const int channels = (p.n_bath > 0.0) ? 2 : 1;

    TrajectoryRecord rec;
    rec.seed = seed;
    rec.times = t_grid;
    rec.excitation.reserve(t_grid.size());

    VectorXcd psi = psi0;
    auto maybe_snapshot = [&](double t) {
        for (double ts : cfg.snapshot_times)
            if (std::abs(t - ts) < 1e-9) rec.snapshots.emplace_back(ts, psi);
    };
    rec.excitation.push_back(excitation_of(psi));
    maybe_snapshot(t_grid[0]);

    std::array<complex<double>, 2> noise{};
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double seg = t_grid[k] - t_grid[k - 1];
        const long steps = std::max(1L, std::lround(seg / cfg.dt));
        const double h = seg / static_cast<double>(steps);
        double t = t_grid[k - 1];
        for (long i = 0; i < steps; ++i) {
            for (int c = 0; c < channels; ++c) noise[c] = rng.next_wiener(h);
            kernel.step(psi, t, h, std::span<const complex<double>>(noise.data(), channels));
            t += h;
        }
        rec.excitation.push_back(excitation_of(psi));
        maybe_snapshot(t_grid[k]);
    }
    return rec;
}

EnsembleResult ensemble_run(const VectorXcd& psi0, const std::vector<double>& t_grid,
                            const std::vector<std::uint64_t>& seeds, const FockSpace& space,
                            const ModelParams& p, const DriveEnvelope& env,
                            const QsdConfig& cfg) {
    if (seeds.empty()) throw InvalidArgument("ensemble_run: need at least one seed");
    std::vector<std::uint64_t> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw InvalidArgument("ensemble_run: seeds must be distinct");

    std::vector<TrajectoryRecord> records;
    records.reserve(sorted.size());
    // A numerical breakdown on one realization must not discard the rest:
    // keep the survivors and report the failed seeds alongside the result.
    // Input errors are common to every seed and still propagate.
    std::vector<std::pair<std::uint64_t, std::string>> failures;
    for (std::uint64_t s : sorted) {
        try {
            records.push_back(run_trajectory(psi0, t_grid, s, space, p, env, cfg));
        } catch (const StepFailure& e) {
            failures.emplace_back(s, e.what());
        }
    }
    if (records.empty())
        throw StepFailure("ensemble_run: every trajectory failed; first seed " +
                          std::to_string(failures.front().first) + ": " + failures.front().second);
    EnsembleResult res = reduce_records(std::move(records));
    res.failures = std::move(failures);
    return res;
}

EnsembleResult combine_ensembles(const EnsembleResult& a, const EnsembleResult& b) {
    if (a.times != b.times)
        throw InvalidArgument("combine_ensembles: time grids differ");
    std::vector<TrajectoryRecord> records;
    records.reserve(a.records.size() + b.records.size());
    records.insert(records.end(), a.records.begin(), a.records.end());
    records.insert(records.end(), b.records.begin(), b.records.end());
    std::sort(records.begin(), records.end(),
              [](const TrajectoryRecord& x, const TrajectoryRecord& y) { return x.seed < y.seed; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].seed == records[i - 1].seed)
            throw InvalidArgument("combine_ensembles: overlapping seeds");
    EnsembleResult res = reduce_records(std::move(records));
    res.failures = a.failures;
    res.failures.insert(res.failures.end(), b.failures.begin(), b.failures.end());
    std::sort(res.failures.begin(), res.failures.end());
    return res;
}

}  // namespace ndo
