#include "ndo/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace ndo {

using std::complex;
using Eigen::VectorXcd;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Core recurrence: accumulates sum_{mn} rho_mn W_nm(alpha) with the
// displaced-parity coefficients in Laguerre form; w is scratch of size dim.
double wigner_kernel(const MatrixXcd& rho, complex<double> A, VectorXcd& w) {
    const int M = static_cast<int>(rho.rows());
    w(0) = std::exp(-2.0 * std::norm(A)) / kPi;
    double W = rho(0, 0).real() * w(0).real();
    for (int n = 1; n < M; ++n) {
        w(n) = (2.0 * A * w(n - 1)) / std::sqrt(static_cast<double>(n));
        W += 2.0 * (rho(0, n) * w(n)).real();
    }
    for (int m = 1; m < M; ++m) {
        const double sm = std::sqrt(static_cast<double>(m));
        complex<double> temp = w(m);
        w(m) = (2.0 * std::conj(A) * temp - sm * w(m - 1)) / sm;
        W += (rho(m, m) * w(m)).real();
        for (int n = m + 1; n < M; ++n) {
            const complex<double> next = (2.0 * A * w(n - 1) - sm * temp) /
                                         std::sqrt(static_cast<double>(n));
            temp = w(n);
            w(n) = next;
            W += 2.0 * (rho(m, n) * w(n)).real();
        }
    }
    return 2.0 * W;  // quadrature convention alpha = x + iy, integral dx dy = 1
}

}  // namespace

double wigner_point(const MatrixXcd& rho, complex<double> alpha) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw InvalidArgument("wigner_point: rho must be square");
    VectorXcd w(rho.rows());
    return wigner_kernel(rho, alpha, w);
}

WignerGrid wigner_grid(const MatrixXcd& rho, const WignerGridSpec& spec) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw InvalidArgument("wigner_grid: rho must be square");
    if (spec.nx < 32 || spec.ny < 32)
        throw InvalidArgument("wigner_grid: resolution must be >= 32 points per axis");
    if (!(spec.xmax > spec.xmin) || !(spec.ymax > spec.ymin))
        throw InvalidArgument("wigner_grid: empty ranges");

    WignerGrid g;
    g.xs = VectorXd::LinSpaced(spec.nx, spec.xmin, spec.xmax);
    g.ys = VectorXd::LinSpaced(spec.ny, spec.ymin, spec.ymax);
    g.values.resize(spec.ny, spec.nx);
    VectorXcd w(rho.rows());
    for (int iy = 0; iy < spec.ny; ++iy)
        for (int ix = 0; ix < spec.nx; ++ix)
            g.values(iy, ix) = wigner_kernel(rho, {g.xs(ix), g.ys(iy)}, w);

    const double hx = (spec.xmax - spec.xmin) / (spec.nx - 1);
    const double hy = (spec.ymax - spec.ymin) / (spec.ny - 1);
    g.norm_residual = g.values.sum() * hx * hy - 1.0;
    g.support_warning = std::abs(g.norm_residual) > 1e-2;
    return g;
}

double negativity_volume(const WignerGrid& grid) {
    const double hx = grid.xs(1) - grid.xs(0);
    const double hy = grid.ys(1) - grid.ys(0);
    return grid.values.cwiseAbs().sum() * hx * hy - 1.0;
}

std::vector<WignerPeak> find_peaks(const WignerGrid& grid) {
    std::vector<WignerPeak> peaks;
    const double threshold = 1e-3 * grid.values.maxCoeff();
    for (int iy = 1; iy + 1 < grid.values.rows(); ++iy) {
        for (int ix = 1; ix + 1 < grid.values.cols(); ++ix) {
            const double v = grid.values(iy, ix);
            if (v <= threshold) continue;
            bool is_peak = true;
            for (int dy = -1; dy <= 1 && is_peak; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (v <= grid.values(iy + dy, ix + dx)) {
                        is_peak = false;
                        break;
                    }
                }
            if (is_peak) peaks.push_back({grid.xs(ix), grid.ys(iy), v});
        }
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const WignerPeak& a, const WignerPeak& b) { return a.value > b.value; });
    return peaks;
}

}  // namespace ndo
