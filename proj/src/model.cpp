#include "ndo/model.hpp"

#include <cmath>

namespace ndo {

MatrixXcd hamiltonian(const FockSpace& space, const ModelParams& p, const DriveEnvelope& env,
                      double t) {
    p.validate();
    const double f = drive_envelope(env, t);
    MatrixXcd h = space.n_op * p.delta + space.n2_op * p.chi;
    h += (f * p.omega_drive) * (space.ad + space.a);
    return h;
}

std::vector<MatrixXcd> lindblad_ops(const FockSpace& space, const ModelParams& p) {
    p.validate();
    std::vector<MatrixXcd> ops;
    ops.push_back(std::sqrt((p.n_bath + 1.0) * p.gamma) * space.a);
    if (p.n_bath > 0.0) ops.push_back(std::sqrt(p.n_bath * p.gamma) * space.ad);
    return ops;
}

}  // namespace ndo
