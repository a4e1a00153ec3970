#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "ndo/master.hpp"
#include "ndo/model.hpp"

using namespace ndo;
using std::complex;

namespace {

// Deterministic pseudo-random Hermitian unit-trace positive matrix.
MatrixXcd test_density(int dim, unsigned salt) {
    MatrixXcd g(dim, dim);
    unsigned s = salt * 2654435761u + 12345u;
    auto next = [&]() {
        s = s * 1664525u + 1013904223u;
        return (double(s >> 8) / double(1u << 24)) - 0.5;
    };
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = complex<double>(next(), next());
    MatrixXcd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

ModelParams bistable_point() {
    ModelParams p;
    p.delta = -8.0;
    p.chi = 2.0;
    p.omega_drive = 2.7;
    return p;
}

}  // namespace

TEST_CASE("structured master rhs matches the dense operator formula") {
    const int dim = 9;
    const FockSpace space = make_fock_space(dim);
    ModelParams p;
    p.delta = -2.3;
    p.chi = 0.7;
    p.omega_drive = 1.3;
    p.gamma = 1.7;
    p.n_bath = 0.3;
    const auto env = DriveEnvelope::pulse_train(0.0, 0.5, 2.0);
    const double t = 0.4;
    const MatrixXcd rho = test_density(dim, 1);

    const MatrixXcd fast = lindblad_rhs(rho, t, space, p, env);

    const MatrixXcd h = hamiltonian(space, p, env, t);
    const complex<double> I{0.0, 1.0};
    MatrixXcd dense = -I * (h * rho - rho * h);
    for (const MatrixXcd& L : lindblad_ops(space, p)) {
        const MatrixXcd LdL = L.adjoint() * L;
        dense += L * rho * L.adjoint() - 0.5 * (LdL * rho + rho * LdL);
    }
    CHECK((fast - dense).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(fast.trace()) < 1e-13);
    CHECK((fast - fast.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("density checks accept valid states and flag broken ones") {
    MatrixXcd ok = MatrixXcd::Zero(2, 2);
    ok(0, 0) = 0.6;
    ok(1, 1) = 0.4;
    CHECK_NOTHROW(check_density(ok));

    MatrixXcd nonherm = ok;
    nonherm(0, 1) = complex<double>(0.0, 0.1);
    CHECK_THROWS_AS(check_density(nonherm), InvalidArgument);

    MatrixXcd badtrace = ok;
    badtrace(1, 1) = 0.6;
    CHECK_THROWS_AS(check_density(badtrace), InvalidArgument);

    MatrixXcd negative = MatrixXcd::Zero(2, 2);
    negative(0, 0) = 1.2;
    negative(1, 1) = -0.2;
    CHECK_THROWS_AS(check_density(negative), InvalidArgument);
}

TEST_CASE("undriven relaxation follows the exponential decay law") {
    const int dim = 4;
    const FockSpace space = make_fock_space(dim);
    ModelParams p;
    p.delta = -1.0;
    p.chi = 1.0;
    MatrixXcd rho0 = MatrixXcd::Zero(dim, dim);
    rho0(2, 2) = 1.0;

    std::vector<double> ts;
    for (int k = 0; k <= 6; ++k) ts.push_back(0.5 * k);
    const auto states = evolve_density(rho0, ts, space, p, DriveEnvelope::constant());
    REQUIRE(states.size() == ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k)
        CHECK(std::abs(mean_excitation(states[k]) - 2.0 * std::exp(-ts[k])) < 1e-7);
    CHECK(purity(states.front()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("thermal bath relaxes the undriven oscillator to detailed balance") {
    const int dim = 16;
    const FockSpace space = make_fock_space(dim);
    ModelParams p;
    p.delta = 0.3;
    p.chi = 0.4;
    p.n_bath = 0.5;
    MatrixXcd rho0 = MatrixXcd::Zero(dim, dim);
    rho0(0, 0) = 1.0;

    const auto states = evolve_density(rho0, {0.0, 15.0}, space, p, DriveEnvelope::constant());
    const MatrixXcd& rho = states.back();
    CHECK(mean_excitation(rho) == doctest::Approx(0.5).epsilon(1e-4));
    // Geometric level populations with ratio N/(N+1).
    const VectorXd pn = number_distribution(rho);
    for (int n = 0; n < 4; ++n)
        CHECK(pn(n + 1) / pn(n) == doctest::Approx(0.5 / 1.5).epsilon(1e-3));
}

TEST_CASE("linear oscillator settles on the lorentzian coherent state") {
    const int dim = 14;
    const FockSpace space = make_fock_space(dim);
    ModelParams p;
    p.delta = 0.5;
    p.omega_drive = 1.0;
    MatrixXcd rho0 = MatrixXcd::Zero(dim, dim);
    rho0(0, 0) = 1.0;

    const auto states = evolve_density(rho0, {0.0, 25.0}, space, p, DriveEnvelope::constant());
    const MatrixXcd& rho = states.back();
    const double n_ref = lorentzian_mean_excitation(p);
    CHECK(n_ref == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mean_excitation(rho) == doctest::Approx(n_ref).epsilon(1e-5));
    // The stationary state of the damped driven linear oscillator is coherent,
    // hence pure, with amplitude -i Omega / (gamma/2 + i Delta).
    CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-5));
    const complex<double> a_mean = (space.a * rho).trace();
    const complex<double> a_ref =
        complex<double>(0.0, -1.0) * p.omega_drive / complex<double>(0.5 * p.gamma, p.delta);
    CHECK(std::abs(a_mean - a_ref) < 1e-5);
}

TEST_CASE("closed-form stationary mean matches an independent tabulation") {
    ModelParams p;
    p.delta = -15.0;
    p.chi = 2.0;
    // Reference values computed with an unrelated log-gamma series implementation.
    const double pins[][2] = {
        {0.5, 0.001479}, {1.0, 0.005936}, {1.5, 0.013437}, {2.0, 0.024097},
        {2.5, 0.038093}, {3.0, 0.055736}, {3.5, 0.077890}, {4.0, 0.108621},
        {4.5, 0.168715}, {5.0, 0.348579}, {5.5, 0.918193}, {6.0, 2.120525},
        {6.5, 3.360188}, {7.0, 4.037571}, {8.0, 4.461067}, {9.75, 4.690117},
    };
    for (const auto& pin : pins) {
        p.omega_drive = pin[0];
        CHECK(std::abs(exact_mean_excitation(p) - pin[1]) < 1e-6);
    }
}

TEST_CASE("closed-form mean reduces to the lorentzian for weak nonlinearity") {
    ModelParams p;
    p.delta = 0.7;
    p.omega_drive = 0.4;
    p.chi = 1e-5;
    const double lorentz = lorentzian_mean_excitation(p);
    CHECK(exact_mean_excitation(p) == doctest::Approx(lorentz).epsilon(1e-3));

    p.chi = 0.0;
    CHECK_THROWS_AS(exact_mean_excitation(p), UnsupportedParameter);

    p.chi = 2.0;
    p.omega_drive = 0.0;
    CHECK(exact_mean_excitation(p) == 0.0);
}

TEST_CASE("closed-form mean stays finite deep in the strong-drive regime") {
    ModelParams p;
    p.delta = -15.0;
    p.chi = 0.7;
    p.omega_drive = 20.4;  // series argument z ~ 1.7e3: exercises the rescaling
    const double v = exact_mean_excitation(p);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
}

TEST_CASE("stationary solver matches the closed form at the two-peak point") {
    const ModelParams p = bistable_point();
    const int dim = 24;
    const FockSpace space = make_fock_space(dim);
    const MatrixXcd rho = steady_state(space, p);
    CHECK_NOTHROW(check_density(rho));
    CHECK(mean_excitation(rho) ==
          doctest::Approx(exact_mean_excitation(p)).epsilon(1e-7));
}

TEST_CASE("direct and time-marched stationary solvers agree") {
    ModelParams p;
    p.delta = -15.0;
    p.chi = 2.0;
    p.omega_drive = 3.0;
    const int dim = 12;
    const FockSpace space = make_fock_space(dim);

    const MatrixXcd direct = steady_state(space, p);
    SteadyConfig marched;
    marched.method = SteadyMethod::Integrate;
    marched.eps = 1e-10;
    const MatrixXcd evolved = steady_state(space, p, DriveEnvelope::constant(), marched);

    CHECK(std::abs(mean_excitation(direct) - mean_excitation(evolved)) < 1e-6);
    CHECK(trace_distance(direct, evolved) < 1e-6);
}

TEST_CASE("stationary solver rejects pulsed drives and oversized bases") {
    const ModelParams p = bistable_point();
    const FockSpace small = make_fock_space(8);
    CHECK_THROWS_AS(steady_state(small, p, DriveEnvelope::pulse_train(0.0, 0.5, 2.0)),
                    UnsupportedParameter);
    const FockSpace big = make_fock_space(60);
    CHECK_THROWS_AS(steady_state(big, p), UnsupportedParameter);
}

TEST_CASE("purity and mean excitation of elementary states") {
    MatrixXcd fock2 = MatrixXcd::Zero(5, 5);
    fock2(2, 2) = 1.0;
    CHECK(mean_excitation(fock2) == doctest::Approx(2.0));
    CHECK(purity(fock2) == doctest::Approx(1.0));

    const MatrixXcd mixed = MatrixXcd::Identity(4, 4) / 4.0;
    CHECK(purity(mixed) == doctest::Approx(0.25));
    CHECK(mean_excitation(mixed) == doctest::Approx(1.5));
    CHECK(number_distribution(mixed).sum() == doctest::Approx(1.0));
}

TEST_CASE("trace distance separates states and vanishes on equality") {
    MatrixXcd g0 = MatrixXcd::Zero(3, 3), g1 = MatrixXcd::Zero(3, 3);
    g0(0, 0) = 1.0;
    g1(1, 1) = 1.0;
    CHECK(trace_distance(g0, g0) == 0.0);
    CHECK(trace_distance(g0, g1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace_distance(g1, g0) == doctest::Approx(1.0).epsilon(1e-12));

    MatrixXcd p1 = MatrixXcd::Zero(2, 2), p2 = MatrixXcd::Zero(2, 2);
    p1(0, 0) = 0.7;
    p1(1, 1) = 0.3;
    p2(0, 0) = 0.3;
    p2(1, 1) = 0.7;
    CHECK(trace_distance(p1, p2) == doctest::Approx(0.4).epsilon(1e-12));

    CHECK_THROWS_AS(trace_distance(g0, p1), InvalidArgument);
}

TEST_CASE("distribution extrema find boundary modes, interior modes, and plateaus") {
    VectorXd p(5);
    p << 0.3, 0.1, 0.2, 0.05, 0.01;
    auto ex = distribution_extrema(p);
    CHECK(ex.maxima == std::vector<int>{0, 2});
    CHECK(ex.minima == std::vector<int>{1});

    VectorXd q(5);
    q << 0.1, 0.25, 0.25, 0.2, 0.3;  // plateau maximum reports its first index
    ex = distribution_extrema(q);
    CHECK(ex.maxima == std::vector<int>{1});
    CHECK(ex.minima == std::vector<int>{3});

    VectorXd mono(3);
    mono << 0.5, 0.3, 0.2;
    ex = distribution_extrema(mono);
    CHECK(ex.maxima == std::vector<int>{0});
    CHECK(ex.minima.empty());
}

TEST_CASE("density evolution validates its inputs") {
    const FockSpace space = make_fock_space(4);
    const ModelParams p;
    MatrixXcd rho = MatrixXcd::Zero(4, 4);
    rho(0, 0) = 1.0;
    const auto env = DriveEnvelope::constant();
    CHECK_THROWS_AS(evolve_density(rho, {}, space, p, env), InvalidArgument);
    CHECK_THROWS_AS(evolve_density(rho, {0.0, 1.0, 1.0}, space, p, env), InvalidArgument);
    MatrixXcd wrong = MatrixXcd::Zero(3, 3);
    wrong(0, 0) = 1.0;
    CHECK_THROWS_AS(evolve_density(wrong, {0.0, 1.0}, space, p, env), InvalidArgument);
}

TEST_CASE("automatic truncation search converges at the two-peak point") {
    const ModelParams p = bistable_point();
    const int dim = auto_dim(p);
    CHECK(dim >= 40);
    CHECK(dim <= 80);
    const FockSpace space = make_fock_space(std::min(dim, 56));
    const MatrixXcd rho = steady_state(space, p);
    CHECK(mean_excitation(rho) ==
          doctest::Approx(exact_mean_excitation(p)).epsilon(1e-6));
}
