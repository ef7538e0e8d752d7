#include "mfto/sampling.hpp"

#include <cmath>

namespace mfto {

Eigen::VectorXd sample_conditional_momentum(const CanonicalEnsemble& ens, const Eigen::VectorXd& q,
                                            Rng& rng) {
    Eigen::MatrixXd M = ens.model->mass_matrix(q);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw ModelConsistencyError(ens.model->id() + ": momentum sampling needs SPD mass matrix");
    Eigen::VectorXd xi(q.size());
    for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = rng.normal();
    return llt.matrixL() * xi / std::sqrt(ens.beta);
}

Eigen::VectorXd sample_gaussian_momentum(const Eigen::MatrixXd& covariance, Rng& rng) {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success)
        throw ModelConsistencyError("momentum covariance not SPD");
    Eigen::VectorXd xi(covariance.rows());
    for (Eigen::Index k = 0; k < xi.size(); ++k) xi[k] = rng.normal();
    return llt.matrixL() * xi;
}

Eigen::VectorXd sample_uniform_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, Rng& rng) {
    Eigen::VectorXd q(lo.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = rng.uniform(lo[k], hi[k]);
    return q;
}

double boltzmann_position_density(const CanonicalEnsemble& ens, const Eigen::VectorXd& q) {
    double w = std::exp(-ens.beta * ens.model->potential(q));
    if (ens.convention == MarginalConvention::exact_marginal) {
        Eigen::MatrixXd M = ens.model->mass_matrix(q);
        w *= std::sqrt(M.determinant());
    }
    return w;
}

}  // namespace mfto
