#include "mfto/model.hpp"

#include <cmath>

namespace mfto {

double eval_potential(const HamiltonianModel& model, const Eigen::VectorXd& q) {
    if (!model.in_domain(q)) throw DomainError(model.id() + ": configuration outside model domain");
    return model.potential(q);
}

Eigen::MatrixXd eval_mass_matrix(const HamiltonianModel& model, const Eigen::VectorXd& q) {
    Eigen::MatrixXd M = model.mass_matrix(q);
    double scale = M.cwiseAbs().maxCoeff();
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ModelConsistencyError(model.id() + ": mass matrix asymmetric at q");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ModelConsistencyError(model.id() + ": mass matrix not positive definite at q");
    return M;
}

namespace {

// dM/dq_k by central differences, step 1e-6 in coordinate k.
Eigen::MatrixXd mass_matrix_derivative(const HamiltonianModel& model, const Eigen::VectorXd& q, int k) {
    const double h = 1e-6;
    Eigen::VectorXd qp = q, qm = q;
    qp[k] += h;
    qm[k] -= h;
    return (model.mass_matrix(qp) - model.mass_matrix(qm)) / (2.0 * h);
}

}  // namespace

Eigen::VectorXd eval_vector_field(const HamiltonianModel& model, const PhaseState& z) {
    const int d = model.dim();
    Eigen::MatrixXd M = model.mass_matrix(z.q);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw ModelConsistencyError(model.id() + ": mass matrix not SPD in vector field");
    Eigen::VectorXd qdot = llt.solve(z.p);
    Eigen::VectorXd pdot = -model.potential_gradient(z.q);
    if (!model.constant_mass()) {
        // d/dq_k (1/2 p.M^-1 p) = -1/2 (M^-1 p) . dM/dq_k (M^-1 p)
        for (int k = 0; k < d; ++k) {
            Eigen::MatrixXd dM = mass_matrix_derivative(model, z.q, k);
            pdot[k] += 0.5 * qdot.dot(dM * qdot);
        }
    }
    Eigen::VectorXd f(2 * d);
    f << qdot, pdot;
    for (int k = 0; k < 2 * d; ++k)
        if (!std::isfinite(f[k]))
            throw EvaluationError(model.id() + ": non-finite vector field component " + std::to_string(k));
    return f;
}

Eigen::VectorXd eval_vector_field_flat(const HamiltonianModel& model, const Eigen::VectorXd& z) {
    return eval_vector_field(model, PhaseState::from_flat(z));
}

}  // namespace mfto
