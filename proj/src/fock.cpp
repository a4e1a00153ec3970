#include "ndo/fock.hpp"

#include <cmath>

namespace ndo {

FockSpace make_fock_space(int dim) {
    if (dim < 2) throw InvalidArgument("Fock dimension must be >= 2");
    FockSpace s;
    s.dim = dim;
    s.a = MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) s.a(n - 1, n) = std::sqrt(static_cast<double>(n));
    s.ad = s.a.adjoint();
    s.n_op = MatrixXcd::Zero(dim, dim);
    s.n2_op = MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        s.n_op(n, n) = n;
        s.n2_op(n, n) = static_cast<double>(n) * n;
    }
    return s;
}

VectorXd kerr_diagonal(double delta, double chi, int dim) {
    VectorXd h(dim);
    for (int n = 0; n < dim; ++n) h(n) = delta * n + chi * static_cast<double>(n) * n;
    return h;
}

}  // namespace ndo
