#include "ndo/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ndo/errors.hpp"
#include "ndo/master.hpp"
#include "ndo/presets.hpp"
#include "ndo/semiclassical.hpp"
#include "ndo/trajectories.hpp"
#include "ndo/wigner.hpp"

namespace ndo {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const char* kCodeVersion = "0.1.0";

// Full round-trip precision: reruns must be byte-identical.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Compact form for file names and labels.
std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string csv_row(std::initializer_list<double> vals) {
    std::string line;
    for (double v : vals) {
        if (!line.empty()) line += ',';
        line += fmt(v);
    }
    line += '\n';
    return line;
}

// Accumulates one artifact bundle: data files plus a provenance meta.json.
struct BundleWriter {
    fs::path dir;
    std::vector<std::string> files;
    json meta;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    explicit BundleWriter(const fs::path& d) : dir(d) { fs::create_directories(dir); }

    void write_text(const std::string& name, const std::string& content) {
        atomic_write(dir / name, content);
        files.push_back(name);
    }

    void write_wigner(const std::string& name, const WignerGrid& g) {
        std::string out = "x,y,w\n";
        out.reserve(out.size() + 48u * static_cast<std::size_t>(g.xs.size()) * g.ys.size());
        for (int iy = 0; iy < g.ys.size(); ++iy)
            for (int ix = 0; ix < g.xs.size(); ++ix)
                out += csv_row({g.xs[ix], g.ys[iy], g.values(iy, ix)});
        write_text(name, out);
    }

    void finish() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        std::sort(files.begin(), files.end());
        meta["files"] = files;
        meta["code_version"] = kCodeVersion;
        char stamp[32];
        std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        meta["run"] = {{"timestamp", stamp}, {"runtime_seconds", secs}};
        atomic_write(dir / "meta.json", meta.dump(2) + "\n");
        files.insert(std::lower_bound(files.begin(), files.end(), "meta.json"), "meta.json");
    }
};

bool wants_master(Engine e) { return e == Engine::Master || e == Engine::All; }
bool wants_qsd(Engine e) { return e == Engine::Qsd || e == Engine::All; }
bool wants_semi(Engine e) { return e == Engine::Semiclassical || e == Engine::All; }

// Dimension bound from the classical amplitudes: highest steady excitation
// plus a fluctuation margin of several sqrt(n). Clamped to the direct-solver
// range; pin grid.dim explicitly for states known to need more.
int dim_for(const ModelParams& p, DampingConvention conv) {
    double n_top = 0.0;
    for (const auto& r : steady_amplitudes(p, conv)) n_top = std::max(n_top, r.n);
    const double n_q =
        p.chi != 0.0 ? exact_mean_excitation(p) : lorentzian_mean_excitation(p);
    n_top = std::max(n_top, n_q);
    const int dim = static_cast<int>(std::ceil(n_top + 8.0 * std::sqrt(n_top + 1.0) + 6.0));
    return std::clamp(dim, 12, 56);
}

MatrixXcd vacuum_density(int dim) {
    MatrixXcd rho = MatrixXcd::Zero(dim, dim);
    rho(0, 0) = 1.0;
    return rho;
}

VectorXcd vacuum_state(int dim) {
    VectorXcd psi = VectorXcd::Zero(dim);
    psi(0) = 1.0;
    return psi;
}

// Record grid 0..t_final at record_dt, with the extra times merged in.
std::vector<double> time_grid(double t_final, double record_dt,
                              const std::vector<double>& extra) {
    std::vector<double> t;
    const long n = std::lround(std::ceil(t_final / record_dt - 1e-9));
    for (long k = 0; k <= n; ++k) t.push_back(std::min(static_cast<double>(k) * record_dt, t_final));
    if (t.back() < t_final - 1e-12) t.push_back(t_final);
    for (double ts : extra) t.push_back(ts);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-9; }),
            t.end());
    return t;
}

std::size_t grid_index(const std::vector<double>& t, double ts) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::abs(t[i] - ts) < 1e-9) return i;
    throw InvalidArgument("snapshot time " + fmt_g(ts) + " not on the record grid");
}

// Wigner evaluation that widens the window (around its center) until the
// normalization check passes, mirroring the documented auto-expansion.
WignerGrid wigner_auto(const MatrixXcd& rho, WignerGridSpec spec, bool expand) {
    WignerGrid g = wigner_grid(rho, spec);
    int tries = 0;
    while (expand && g.support_warning && tries < 3) {
        const double cx = 0.5 * (spec.xmin + spec.xmax), cy = 0.5 * (spec.ymin + spec.ymax);
        const double hx = 0.75 * (spec.xmax - spec.xmin), hy = 0.75 * (spec.ymax - spec.ymin);
        spec.xmin = cx - hx;
        spec.xmax = cx + hx;
        spec.ymin = cy - hy;
        spec.ymax = cy + hy;
        spec.nx = spec.nx / 2 * 3 + 1;  // keep the point density (and odd counts)
        spec.ny = spec.ny / 2 * 3 + 1;
        g = wigner_grid(rho, spec);
        ++tries;
    }
    return g;
}

json peaks_json(const std::vector<WignerPeak>& peaks) {
    json a = json::array();
    for (const auto& p : peaks) a.push_back({{"x", p.x}, {"y", p.y}, {"w", p.value}});
    return a;
}

std::string peaks_csv(const std::vector<WignerPeak>& peaks) {
    std::string out = "x,y,w\n";
    for (const auto& p : peaks) out += csv_row({p.x, p.y, p.value});
    return out;
}

MatrixXcd steady_for(const FockSpace& space, const ModelParams& p) {
    SteadyConfig scfg;
    if (space.dim > 56) scfg.method = SteadyMethod::Integrate;
    return steady_state(space, p, DriveEnvelope::constant(), scfg);
}

// Optional convenience plotting script; the CSVs remain the contract.
const char* kPlotScript = R"(#!/usr/bin/env python3
"""Quick-look plots for every CSV in this bundle (written next to the data).

Grids with columns x,y,w become heat maps; other files plot each column
against the first. Needs matplotlib + numpy.
"""
import csv
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = pathlib.Path(__file__).parent
for path in sorted(here.glob("*.csv")):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    if not rows:
        continue
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if header[:3] == ["x", "y", "w"]:
        x = sorted({float(r[0]) for r in rows})
        y = sorted({float(r[1]) for r in rows})
        w = np.array([float(r[2]) for r in rows]).reshape(len(y), len(x))
        pc = ax.pcolormesh(x, y, w, shading="nearest", cmap="RdBu_r",
                           vmin=-abs(w).max(), vmax=abs(w).max())
        fig.colorbar(pc, ax=ax, label="W")
        ax.set_xlabel("x"); ax.set_ylabel("y"); ax.set_aspect("equal")
    else:
        cols = list(zip(*[[float(v) if v else np.nan for v in r[:len(header)]]
                          for r in rows if not any(c.isalpha() for c in "".join(r[1:2]))]))
        if not cols:
            plt.close(fig)
            continue
        x = np.array(cols[0])
        for name, c in zip(header[1:], cols[1:]):
            ax.plot(x, np.array(c), label=name, lw=0.9)
        ax.set_xlabel(header[0])
        ax.legend(fontsize=7)
    ax.set_title(path.name)
    fig.tight_layout()
    fig.savefig(path.with_suffix(".png"), dpi=130)
    plt.close(fig)
print("wrote", len(list(here.glob("*.png"))), "png files")
)";

// ---------------------------------------------------------------------------
// Task pipelines
// ---------------------------------------------------------------------------

void run_hysteresis(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.sweep.omega.size() < 2)
        throw ValidationError("sweep.omega: hysteresis needs at least 2 amplitudes");
    const auto& omegas = cfg.sweep.omega;
    SweepCurve up = hysteresis_sweep(cfg.model, omegas, SweepDirection::Up, cfg.convention);
    SweepCurve down = hysteresis_sweep(cfg.model, omegas, SweepDirection::Down, cfg.convention);

    std::string out =
        "omega,n_quantum,n_up,n_down,re_alpha_up,im_alpha_up,re_alpha_down,im_alpha_down\n";
    const std::size_t m = omegas.size();
    for (std::size_t i = 0; i < m; ++i) {
        ModelParams p = cfg.model;
        p.omega_drive = omegas[i];
        const double nq =
            p.chi != 0.0 ? exact_mean_excitation(p) : lorentzian_mean_excitation(p);
        const std::size_t j = m - 1 - i;  // down sweep is in traversal order
        out += csv_row({omegas[i], nq, up.n[i], down.n[j], up.alpha[i].real(),
                        up.alpha[i].imag(), down.alpha[j].real(), down.alpha[j].imag()});
    }
    bw.write_text("hysteresis.csv", out);

    double window = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        window = std::max(window, std::abs(up.n[i] - down.n[m - 1 - i]));
    bw.meta["resolved"] = {{"max_branch_separation", window},
                           {"points", static_cast<int>(m)}};
}

void run_bistable(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::Constant)
        throw ValidationError("drive.kind: the bistable task needs a constant drive");
    const int dim = resolve_dim(cfg);
    const FockSpace space = make_fock_space(dim);
    const auto t = time_grid(cfg.grid.t_final, cfg.grid.record_dt, cfg.grid.snapshot_times);
    json resolved = {{"dim", dim}};
    json cross;

    MatrixXcd rho_final;  // master state at t_final (cross-check anchor)
    double master_final_mean = 0.0;
    if (wants_master(cfg.engine)) {
        MatrixXcd rho_ss = steady_for(space, cfg.model);
        WignerGrid g = wigner_auto(rho_ss, cfg.grid.wigner, cfg.grid.wigner_auto_expand);
        bw.write_wigner("steady_wigner.csv", g);
        const auto peaks = find_peaks(g);
        bw.write_text("steady_peaks.csv", peaks_csv(peaks));
        resolved["steady_mean"] = mean_excitation(rho_ss);
        resolved["steady_purity"] = purity(rho_ss);
        resolved["steady_top_population"] = rho_ss(dim - 1, dim - 1).real();
        resolved["wigner_norm_residual"] = g.norm_residual;
        resolved["negativity_volume"] = negativity_volume(g);
        cross["master_steady_mean"] = mean_excitation(rho_ss);
        cross["wigner_peaks"] = peaks_json(peaks);

        const auto states = evolve_density(vacuum_density(dim), t, space, cfg.model,
                                           cfg.drive, cfg.solver);
        std::string series = "t,n,purity\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            series += csv_row({t[k], mean_excitation(states[k]), purity(states[k])});
        bw.write_text("master_series.csv", series);
        rho_final = states.back();
        master_final_mean = mean_excitation(rho_final);
        cross["master_final_mean"] = master_final_mean;
    }

    if (wants_qsd(cfg.engine)) {
        auto seeds = cfg.seed_list();
        if (seeds.empty()) seeds = {1};
        QsdConfig qc;
        qc.dt = cfg.ensemble.dt;
        const double bound = qsd_stable_dt(cfg.model, dim);
        if (qc.dt > bound)
            throw InvalidArgument("ensemble.dt " + fmt_g(qc.dt) +
                                  " exceeds the stability ceiling " + fmt_g(bound) +
                                  " for dim " + std::to_string(dim));
        qc.snapshot_times = {t.back()};
        const EnsembleResult ens =
            ensemble_run(vacuum_state(dim), t, seeds, space, cfg.model, cfg.drive, qc);
        std::string traj = "t,n\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            traj += csv_row({t[k], ens.records.front().excitation[k]});
        bw.write_text("trajectory.csv", traj);
        std::string mean = "t,mean_n,std_error\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            mean += csv_row({t[k], ens.mean[k], ens.std_error[k]});
        bw.write_text("ensemble_mean.csv", mean);
        resolved["seeds"] = seeds;
        resolved["qsd_dt"] = qc.dt;
        resolved["qsd_dt_stability_bound"] = bound;
        resolved["trajectories_completed"] = ens.trajectories;
        if (!ens.failures.empty()) {
            json jfail = json::array();
            for (const auto& [s, why] : ens.failures)
                jfail.push_back({{"seed", s}, {"error", why}});
            resolved["failed_seeds"] = jfail;
        }
        cross["qsd_final_mean"] = ens.mean.back();
        cross["qsd_final_std_error"] = ens.std_error.back();
        if (rho_final.size() > 0 && !ens.rho.empty())
            cross["trace_distance_final"] = trace_distance(ens.rho.back().second, rho_final);
    }

    if (wants_semi(cfg.engine)) {
        const auto roots = steady_amplitudes(cfg.model, cfg.convention);
        std::string rcsv = "n,re_alpha,im_alpha,stable\n";
        json jroots = json::array();
        for (const auto& r : roots) {
            rcsv += csv_row({r.n, r.alpha.real(), r.alpha.imag(), r.stable ? 1.0 : 0.0});
            jroots.push_back({{"n", r.n},
                              {"re", r.alpha.real()},
                              {"im", r.alpha.imag()},
                              {"stable", r.stable}});
        }
        bw.write_text("steady_roots.csv", rcsv);
        const PoincareSection sec =
            poincare_section(cfg.model, cfg.drive, 0.0, 0.0, 200, 100, cfg.convention, 1.0);
        std::string scsv = "k,re_alpha,im_alpha\n";
        for (std::size_t k = 0; k < sec.points.size(); ++k)
            scsv += csv_row({static_cast<double>(k), sec.points[k].real(),
                             sec.points[k].imag()});
        bw.write_text("poincare.csv", scsv);
        cross["classical_roots"] = jroots;
        double scatter = 0.0;
        for (const auto& a : sec.points)
            for (const auto& b : sec.points) scatter = std::max(scatter, std::abs(a - b));
        resolved["poincare_scatter"] = scatter;
    }

    if (cfg.engine == Engine::All) {
        if (cross.contains("qsd_final_mean") && cross.contains("master_final_mean")) {
            const double diff = std::abs(cross["qsd_final_mean"].get<double>() -
                                         cross["master_final_mean"].get<double>());
            cross["final_mean_abs_diff"] = diff;
            const double se = cross["qsd_final_std_error"].get<double>();
            if (se > 0.0) cross["final_mean_diff_over_se"] = diff / se;
        }
        bw.write_text("crosscheck.json", cross.dump(2) + "\n");
    }
    bw.meta["resolved"] = resolved;
}

void run_amplitude_scan(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::Constant)
        throw ValidationError("drive.kind: the amplitude scan needs a constant drive");
    if (cfg.sweep.omega.empty())
        throw ValidationError("sweep.omega: the amplitude scan needs amplitudes");
    std::string summary = "omega,dim,n_mean,purity,peak_count\n";
    std::string allpeaks = "omega,x,y,w\n";
    for (double om : cfg.sweep.omega) {
        ModelParams p = cfg.model;
        p.omega_drive = om;
        const int dim = cfg.grid.dim > 0 ? cfg.grid.dim : dim_for(p, cfg.convention);
        const FockSpace space = make_fock_space(dim);
        const MatrixXcd rho = steady_for(space, p);
        const WignerGrid g = wigner_auto(rho, cfg.grid.wigner, cfg.grid.wigner_auto_expand);
        bw.write_wigner("wigner_om" + fmt_g(om) + ".csv", g);
        const auto peaks = find_peaks(g);
        for (const auto& pk : peaks) allpeaks += csv_row({om, pk.x, pk.y, pk.value});
        summary += csv_row({om, static_cast<double>(dim), mean_excitation(rho), purity(rho),
                            static_cast<double>(peaks.size())});
    }
    bw.write_text("amplitude_scan.csv", summary);
    bw.write_text("peaks.csv", allpeaks);
}

void run_scaling(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::Constant)
        throw ValidationError("drive.kind: the scaling task needs a constant drive");
    if (cfg.sweep.lambda.empty())
        throw ValidationError("sweep.lambda: the scaling task needs factors");
    std::vector<double> lambdas = {1.0};
    for (double lam : cfg.sweep.lambda)
        if (std::abs(lam - 1.0) > 1e-12) lambdas.push_back(lam);

    std::string summary = "lambda,dim,n_mean,n_per_lambda2,peak_count\n";
    std::string allpeaks = "lambda,x,y,w\n";
    json jsum = json::array();
    for (double lam : lambdas) {
        const ModelParams ps = scale_params(cfg.model, lam);
        const int dim = cfg.grid.dim > 0 ? cfg.grid.dim : dim_for(ps, cfg.convention);
        const FockSpace space = make_fock_space(dim);
        const MatrixXcd rho = steady_for(space, ps);
        const WignerGrid g = wigner_auto(rho, cfg.grid.wigner, cfg.grid.wigner_auto_expand);
        bw.write_wigner("wigner_lambda" + fmt_g(lam) + ".csv", g);
        const auto peaks = find_peaks(g);
        for (const auto& pk : peaks) allpeaks += csv_row({lam, pk.x, pk.y, pk.value});
        const double n_mean = mean_excitation(rho);
        summary += csv_row({lam, static_cast<double>(dim), n_mean, n_mean / (lam * lam),
                            static_cast<double>(peaks.size())});
        jsum.push_back({{"lambda", lam},
                        {"dim", dim},
                        {"n_mean", n_mean},
                        {"peak_count", peaks.size()},
                        {"top_population", rho(dim - 1, dim - 1).real()}});
    }
    bw.write_text("scaling_summary.csv", summary);
    bw.write_text("peaks.csv", allpeaks);

    // Classical covariance of the amplitude flow: the scaled-parameter
    // trajectory from lambda*alpha0 must equal lambda times the original.
    const std::complex<double> alpha0(0.3, 0.2);
    const auto tspan = time_grid(10.0, 0.05, {});
    const AmplitudeSeries base =
        integrate_amplitude(alpha0, tspan, cfg.model, cfg.drive, cfg.convention);
    std::string ident = "lambda,max_abs_residual\n";
    for (double lam : cfg.sweep.lambda) {
        const ModelParams ps = scale_params(cfg.model, lam);
        const AmplitudeSeries scaled =
            integrate_amplitude(lam * alpha0, tspan, ps, cfg.drive, cfg.convention);
        double res = 0.0;
        for (std::size_t k = 0; k < tspan.size(); ++k)
            res = std::max(res, std::abs(scaled.alpha[k] - lam * base.alpha[k]));
        ident += csv_row({lam, res});
    }
    bw.write_text("scaling_identity.csv", ident);
    bw.meta["resolved"] = {{"states", jsum}};
}

void run_pulsed_wigner(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::PulseTrain)
        throw ValidationError("drive.kind: the pulsed-Wigner task needs a pulse train");
    std::vector<double> variants = cfg.sweep.pulse_T;
    if (variants.empty()) variants = {cfg.drive.T};
    std::vector<double> snaps = cfg.grid.snapshot_times;
    if (snaps.empty()) snaps = {cfg.grid.t_final};
    const int dim = cfg.grid.dim > 0 ? cfg.grid.dim : dim_for(cfg.model, cfg.convention);
    const FockSpace space = make_fock_space(dim);
    const auto t = time_grid(cfg.grid.t_final, cfg.grid.record_dt, snaps);

    std::string neg = "T,t,min_w,negativity_volume,n_mean,purity\n";
    json jres = json::array();
    for (double T : variants) {
        DriveEnvelope env = cfg.drive;
        env.T = T;
        env.validate();
        const auto states =
            evolve_density(vacuum_density(dim), t, space, cfg.model, env, cfg.solver);
        std::string series = "t,n,purity\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            series += csv_row({t[k], mean_excitation(states[k]), purity(states[k])});
        bw.write_text("series_T" + fmt_g(T) + ".csv", series);
        for (double ts : snaps) {
            const MatrixXcd& rho = states[grid_index(t, ts)];
            const WignerGrid g = wigner_auto(rho, cfg.grid.wigner, cfg.grid.wigner_auto_expand);
            bw.write_wigner("wigner_T" + fmt_g(T) + "_t" + fmt_g(ts) + ".csv", g);
            const double minw = g.values.minCoeff();
            const double nv = negativity_volume(g);
            neg += csv_row({T, ts, minw, nv, mean_excitation(rho), purity(rho)});
            jres.push_back({{"T", T},
                            {"t", ts},
                            {"min_w", minw},
                            {"negativity_volume", nv},
                            {"top_population", rho(dim - 1, dim - 1).real()}});
        }
    }
    bw.write_text("negativity.csv", neg);
    bw.meta["resolved"] = {{"dim", dim}, {"snapshots", jres}};
}

// Over-transient purity: skip 8 periods, then average over periods 8..10
// sampled at tau/20 (a period average; the instantaneous purity breathes
// within each pulse cycle).
double overtransient_purity(const ModelParams& p, const DriveEnvelope& env, int dim,
                            const MasterConfig& solver, double* top_pop) {
    std::vector<double> t{0.0};
    const double start = 8.0 * env.tau;
    for (int k = 0; k <= 40; ++k) t.push_back(start + k * env.tau / 20.0);
    const FockSpace space = make_fock_space(dim);
    const auto states = evolve_density(vacuum_density(dim), t, space, p, env, solver);
    double acc = 0.0;
    for (std::size_t k = 1; k < states.size(); ++k) acc += purity(states[k]);
    if (top_pop) *top_pop = states.back()(dim - 1, dim - 1).real();
    return acc / static_cast<double>(states.size() - 1);
}

void run_purity_scan(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::PulseTrain)
        throw ValidationError("drive.kind: the purity scan needs a pulse train");
    if (cfg.sweep.pulse_T.empty() && cfg.sweep.pulse_tau.empty())
        throw ValidationError("sweep.pulse_T/pulse_tau: the purity scan needs an axis");
    const int dim = cfg.grid.dim > 0 ? cfg.grid.dim : dim_for(cfg.model, cfg.convention);
    double worst_top = 0.0;
    if (!cfg.sweep.pulse_T.empty()) {
        std::string out = "T,purity\n";
        for (double T : cfg.sweep.pulse_T) {
            DriveEnvelope env = DriveEnvelope::pulse_train(cfg.drive.t0, T, cfg.drive.tau,
                                                           cfg.drive.pulse_count);
            double top = 0.0;
            out += csv_row({T, overtransient_purity(cfg.model, env, dim, cfg.solver, &top)});
            worst_top = std::max(worst_top, top);
        }
        bw.write_text("purity_vs_T.csv", out);
    }
    if (!cfg.sweep.pulse_tau.empty()) {
        std::string out = "tau,purity\n";
        for (double tau : cfg.sweep.pulse_tau) {
            DriveEnvelope env = DriveEnvelope::pulse_train(cfg.drive.t0, cfg.drive.T, tau,
                                                           cfg.drive.pulse_count);
            double top = 0.0;
            out += csv_row({tau, overtransient_purity(cfg.model, env, dim, cfg.solver, &top)});
            worst_top = std::max(worst_top, top);
        }
        bw.write_text("purity_vs_tau.csv", out);
    }
    bw.meta["resolved"] = {{"dim", dim},
                           {"protocol", "average over periods 8..10, sampled tau/20"},
                           {"worst_top_population", worst_top}};
}

void run_chaos(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::PulseTrain)
        throw ValidationError("drive.kind: the chaos tasks need a pulse train");
    const int dim = cfg.grid.dim > 0 ? cfg.grid.dim : dim_for(cfg.model, cfg.convention);
    const FockSpace space = make_fock_space(dim);
    std::vector<double> snaps = cfg.grid.snapshot_times;
    if (snaps.empty()) snaps = {cfg.grid.t_final};
    const auto t = time_grid(cfg.grid.t_final, cfg.grid.record_dt, snaps);
    json resolved = {{"dim", dim}};
    json cross;

    std::vector<MatrixXcd> master_states;
    if (wants_master(cfg.engine)) {
        master_states =
            evolve_density(vacuum_density(dim), t, space, cfg.model, cfg.drive, cfg.solver);
        std::string series = "t,n,purity\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            series += csv_row({t[k], mean_excitation(master_states[k]),
                               purity(master_states[k])});
        bw.write_text("master_series.csv", series);
        cross["master_final_mean"] = mean_excitation(master_states.back());
        resolved["master_top_population"] =
            master_states.back()(dim - 1, dim - 1).real();
    }

    if (wants_qsd(cfg.engine)) {
        auto seeds = cfg.seed_list();
        if (seeds.empty()) seeds = {1};
        QsdConfig qc;
        qc.dt = cfg.ensemble.dt;
        const double bound = qsd_stable_dt(cfg.model, dim);
        if (qc.dt > bound)
            throw InvalidArgument("ensemble.dt " + fmt_g(qc.dt) +
                                  " exceeds the stability ceiling " + fmt_g(bound) +
                                  " for dim " + std::to_string(dim));
        qc.snapshot_times = snaps;
        const EnsembleResult ens =
            ensemble_run(vacuum_state(dim), t, seeds, space, cfg.model, cfg.drive, qc);
        std::string mean = "t,mean_n,std_error\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            mean += csv_row({t[k], ens.mean[k], ens.std_error[k]});
        bw.write_text("ensemble_mean.csv", mean);
        std::string traj = "t,n\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            traj += csv_row({t[k], ens.records.front().excitation[k]});
        bw.write_text("trajectory.csv", traj);

        double lo = ens.mean.front(), hi = lo;
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] < cfg.drive.tau) continue;  // skip the rise out of vacuum
            lo = std::min(lo, ens.mean[k]);
            hi = std::max(hi, ens.mean[k]);
        }
        resolved["seeds_count"] = seeds.size();
        resolved["qsd_dt"] = qc.dt;
        resolved["qsd_dt_stability_bound"] = bound;
        resolved["trajectories_completed"] = ens.trajectories;
        if (!ens.failures.empty()) {
            json jfail = json::array();
            for (const auto& [s, why] : ens.failures)
                jfail.push_back({{"seed", s}, {"error", why}});
            resolved["failed_seeds"] = jfail;
        }
        resolved["mean_final"] = ens.mean.back();
        resolved["std_error_final"] = ens.std_error.back();
        resolved["mean_range_after_first_period"] = {lo, hi};
        cross["qsd_final_mean"] = ens.mean.back();
        cross["qsd_final_std_error"] = ens.std_error.back();

        json jsnaps = json::array();
        for (const auto& [ts, rho] : ens.rho) {
            const WignerGrid g = wigner_auto(rho, cfg.grid.wigner, cfg.grid.wigner_auto_expand);
            bw.write_wigner("wigner_t" + fmt_g(ts) + ".csv", g);
            const VectorXd dist = number_distribution(rho);
            std::string dcsv = "n,p\n";
            for (int n = 0; n < dist.size(); ++n)
                dcsv += csv_row({static_cast<double>(n), dist(n)});
            bw.write_text("number_dist_t" + fmt_g(ts) + ".csv", dcsv);
            json e = {{"t", ts},
                      {"mean", mean_excitation(rho)},
                      {"purity", purity(rho)},
                      {"negativity_volume", negativity_volume(g)},
                      {"min_w", g.values.minCoeff()}};
            if (!master_states.empty())
                e["trace_distance_vs_master"] =
                    trace_distance(rho, master_states[grid_index(t, ts)]);
            jsnaps.push_back(e);
        }
        resolved["snapshots"] = jsnaps;
    }

    if (wants_semi(cfg.engine)) {
        const double tau = cfg.drive.tau;
        const double t0 = std::fmod(cfg.grid.t_final, tau);
        const PoincareSection sec =
            poincare_section(cfg.model, cfg.drive, 0.0, t0, 600, 100, cfg.convention);
        std::string scsv = "k,re_alpha,im_alpha\n";
        for (std::size_t k = 0; k < sec.points.size(); ++k)
            scsv += csv_row({static_cast<double>(k), sec.points[k].real(),
                             sec.points[k].imag()});
        bw.write_text("poincare.csv", scsv);
        const AmplitudeSeries cl =
            integrate_amplitude(0.0, t, cfg.model, cfg.drive, cfg.convention);
        std::string ccsv = "t,n,re_alpha,im_alpha\n";
        for (std::size_t k = 0; k < t.size(); ++k)
            ccsv += csv_row({t[k], std::norm(cl.alpha[k]), cl.alpha[k].real(),
                             cl.alpha[k].imag()});
        bw.write_text("classical_series.csv", ccsv);
        resolved["poincare_t0"] = t0;
        resolved["poincare_points"] = sec.points.size();
    }

    if (cfg.engine == Engine::All && cross.contains("qsd_final_mean") &&
        cross.contains("master_final_mean")) {
        const double diff = std::abs(cross["qsd_final_mean"].get<double>() -
                                     cross["master_final_mean"].get<double>());
        cross["final_mean_abs_diff"] = diff;
        const double se = cross["qsd_final_std_error"].get<double>();
        if (se > 0.0) cross["final_mean_diff_over_se"] = diff / se;
        bw.write_text("crosscheck.json", cross.dump(2) + "\n");
    }
    bw.meta["resolved"] = resolved;
}

void run_lyapunov_sweep(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::PulseTrain)
        throw ValidationError("drive.kind: the Lyapunov sweep needs a pulse train");
    if (cfg.sweep.omega.empty())
        throw ValidationError("sweep.omega: the Lyapunov sweep needs amplitudes");
    const bool two_families = !cfg.sweep.t0_max.empty() || !cfg.sweep.t0_min.empty();
    std::string out = two_families
                          ? "omega,t0_max,L_max,converged_max,t0_min,L_min,converged_min\n"
                          : "omega,t0,L,converged\n";
    for (double om : cfg.sweep.omega) {
        ModelParams p = cfg.model;
        p.omega_drive = om;
        auto eval = [&](double t0) {
            LyapunovConfig lc;
            lc.t0_phase = t0;
            lc.convention = cfg.convention;
            return lyapunov_exponent(p, cfg.drive, lc);
        };
        if (two_families) {
            const double ta = phase_for(cfg.sweep.t0_max, om);
            const double tb = phase_for(cfg.sweep.t0_min, om);
            const LyapunovResult ra = eval(ta), rb = eval(tb);
            out += csv_row({om, ta, ra.value, ra.converged ? 1.0 : 0.0, tb, rb.value,
                            rb.converged ? 1.0 : 0.0});
        } else {
            const LyapunovResult r = eval(0.0);
            out += csv_row({om, 0.0, r.value, r.converged ? 1.0 : 0.0});
        }
    }
    bw.write_text("lyapunov.csv", out);
    bw.meta["resolved"] = {{"points", cfg.sweep.omega.size()},
                           {"phase_families", two_families ? 2 : 1}};
}

void run_minmax_sweep(const ExperimentConfig& cfg, BundleWriter& bw) {
    if (cfg.drive.kind != DriveEnvelope::Kind::PulseTrain)
        throw ValidationError("drive.kind: the extrema sweep needs a pulse train");
    if (cfg.sweep.omega.empty())
        throw ValidationError("sweep.omega: the extrema sweep needs amplitudes");
    const double tau = cfg.drive.tau;
    // Late-window series: past the same 300-period transient the classifier's
    // late window uses, sampled densely for 200 periods.
    std::vector<double> tspan{0.0};
    const double start = 300.0 * tau;
    const long n = std::lround(200.0 * 50.0);
    for (long k = 0; k <= n; ++k) tspan.push_back(start + static_cast<double>(k) * tau / 50.0);

    std::string out = "omega,n_min,n_max,L_early,L_late,class\n";
    for (double om : cfg.sweep.omega) {
        ModelParams p = cfg.model;
        p.omega_drive = om;
        LyapunovConfig lc;
        lc.convention = cfg.convention;
        const TransientChaosResult cls = classify_transient_chaos(p, cfg.drive, lc);
        const AmplitudeSeries series =
            integrate_amplitude(0.0, tspan, p, cfg.drive, cfg.convention);
        double lo = std::norm(series.alpha[1]), hi = lo;
        for (std::size_t k = 1; k < series.alpha.size(); ++k) {
            const double v = std::norm(series.alpha[k]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const char* label = cls.classification == DynamicsClass::Chaotic ? "chaotic"
                            : cls.classification == DynamicsClass::TransientChaos
                                ? "transient-chaos"
                                : "regular";
        out += fmt(om);
        out += ',' + fmt(lo) + ',' + fmt(hi) + ',' + fmt(cls.early.value) + ',' +
               fmt(cls.late.value) + ',' + label + '\n';
    }
    bw.write_text("minmax.csv", out);
    bw.meta["resolved"] = {{"points", cfg.sweep.omega.size()},
                           {"late_window_periods", 200},
                           {"transient_periods", 300}};
}

}  // namespace

int resolve_dim(const ExperimentConfig& cfg) {
    if (cfg.grid.dim > 0) return cfg.grid.dim;
    return dim_for(cfg.model, cfg.convention);
}

Bundle run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    std::string dir = !out_dir.empty() ? out_dir : cfg.output.dir;
    if (dir.empty()) {
        const char* root = std::getenv("NDO_OUT_ROOT");
        dir = (root && *root ? std::string(root) : std::string("runs")) + "/" + cfg.name;
    }
    BundleWriter bw{fs::path(dir)};
    bw.meta["name"] = cfg.name;
    bw.meta["task"] = to_string(cfg.task);
    bw.meta["engine"] = to_string(cfg.engine);
    bw.meta["damping_convention"] = to_string(cfg.convention);
    bw.meta["config"] = config_to_json(cfg);
    bw.meta["tolerances"] = {{"solver_rtol", cfg.solver.rtol},
                             {"solver_atol", cfg.solver.atol},
                             {"qsd_dt", cfg.ensemble.dt}};

    switch (cfg.task) {
        case Task::Hysteresis: run_hysteresis(cfg, bw); break;
        case Task::Bistable: run_bistable(cfg, bw); break;
        case Task::AmplitudeScan: run_amplitude_scan(cfg, bw); break;
        case Task::Scaling: run_scaling(cfg, bw); break;
        case Task::PulsedWigner: run_pulsed_wigner(cfg, bw); break;
        case Task::PurityScan: run_purity_scan(cfg, bw); break;
        case Task::ChaosEnsemble: run_chaos(cfg, bw); break;
        case Task::ChaosSnapshot: run_chaos(cfg, bw); break;
        case Task::LyapunovSweep: run_lyapunov_sweep(cfg, bw); break;
        case Task::MinMaxSweep: run_minmax_sweep(cfg, bw); break;
    }

    if (cfg.output.plot_scripts) bw.write_text("plot.py", kPlotScript);
    bw.finish();
    Bundle b;
    b.dir = dir;
    b.files = bw.files;
    return b;
}

namespace {

ExperimentConfig apply_overrides(ExperimentConfig c, const RunOverrides& o) {
    if (o.seeds) {
        c.ensemble.seeds = *o.seeds;
        c.ensemble.trajectories = static_cast<int>(o.seeds->size());
    }
    if (o.trajectories) {
        c.ensemble.trajectories = *o.trajectories;
        c.ensemble.seeds.clear();
    }
    if (o.dt) c.ensemble.dt = *o.dt;
    if (o.convention) c.convention = *o.convention;
    if (o.engine) c.engine = *o.engine;
    if (o.plot_scripts) c.output.plot_scripts = *o.plot_scripts;
    c.validate();
    return c;
}

}  // namespace

Bundle run_preset(const std::string& name_or_prefix, const RunOverrides& o,
                  const std::string& out_dir) {
    const Preset& pr = find_preset(name_or_prefix);
    return run_experiment(apply_overrides(pr.config, o), out_dir);
}

Bundle run_config(const std::string& path, const RunOverrides& o, const std::string& out_dir) {
    return run_experiment(apply_overrides(load_config(path), o), out_dir);
}

}  // namespace ndo
