#pragma once

#include <vector>

#include "ndo/fock.hpp"
#include "ndo/params.hpp"

namespace ndo {

// H(t) = Delta*n + chi*n^2 + f(t)*Omega*(a^dag + a), Hermitian by construction.
MatrixXcd hamiltonian(const FockSpace& space, const ModelParams& p, const DriveEnvelope& env,
                      double t);

// Lindblad operators of the damped oscillator coupled to a bath with mean
// quanta N: L1 = sqrt((N+1)*gamma) a, and L2 = sqrt(N*gamma) a^dag when N > 0.
std::vector<MatrixXcd> lindblad_ops(const FockSpace& space, const ModelParams& p);

}  // namespace ndo
