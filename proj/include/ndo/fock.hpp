#pragma once

#include <Eigen/Dense>

#include "ndo/errors.hpp"

namespace ndo {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Truncated Fock space {|0>, ..., |dim-1>} with cached dense ladder operators.
// a is the lower shift with entries sqrt(n); n_op = a^dag a is diag(0..dim-1).
struct FockSpace {
    int dim = 0;
    MatrixXcd a;     // annihilation
    MatrixXcd ad;    // creation
    MatrixXcd n_op;  // number operator
    MatrixXcd n2_op; // number operator squared
};

FockSpace make_fock_space(int dim);

// Diagonal of Delta*n + chi*n^2 for n = 0..dim-1 (the undriven Hamiltonian).
VectorXd kerr_diagonal(double delta, double chi, int dim);

}  // namespace ndo
