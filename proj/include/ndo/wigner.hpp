#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ndo/errors.hpp"

namespace ndo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Phase-space grid for the Wigner function over alpha = x + i y, normalized so
// that integral W dx dy = 1 and |W| <= 2/pi.
struct WignerGridSpec {
    double xmin = -5.0, xmax = 5.0;
    double ymin = -5.0, ymax = 5.0;
    int nx = 201, ny = 201;
};

struct WignerGrid {
    VectorXd xs, ys;
    MatrixXd values;       // values(iy, ix) = W(xs[ix], ys[iy])
    double norm_residual;  // integral W dx dy - 1 on this grid
    bool support_warning;  // grid likely smaller than the state's support
};

// Evaluate W(x+iy) = (2/pi) sum_n (-1)^n <n| D^dag(alpha) rho D(alpha) |n> on
// the grid. The displaced-parity matrix elements reduce to associated Laguerre
// polynomials, evaluated by a stable two-term recurrence; the result is exact
// for the truncated rho (no Fock-padding error term).
WignerGrid wigner_grid(const MatrixXcd& rho, const WignerGridSpec& spec = {});

// Single-point evaluation (same recurrence).
double wigner_point(const MatrixXcd& rho, std::complex<double> alpha);

// integral |W| dx dy - 1: zero (up to quadrature error) for nonnegative W,
// strictly positive in the presence of negative regions.
double negativity_volume(const WignerGrid& grid);

struct WignerPeak {
    double x, y, value;
};

// Interior grid points strictly above all 8 neighbors and above
// 1e-3 * max(W), sorted by value descending.
std::vector<WignerPeak> find_peaks(const WignerGrid& grid);

}  // namespace ndo
