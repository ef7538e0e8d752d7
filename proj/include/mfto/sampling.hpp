#ifndef MFTO_SAMPLING_HPP
#define MFTO_SAMPLING_HPP

#include <Eigen/Dense>
#include <string>

#include "mfto/model.hpp"
#include "mfto/rng.hpp"
#include "mfto/units.hpp"

namespace mfto {

// Convention for the spatial weight of the canonical density when M depends
// on q. `paper` uses h_q proportional to exp(-beta V); `exact_marginal`
// multiplies in det(M(q))^{1/2}, the true q-marginal of exp(-beta H).
enum class MarginalConvention { paper, exact_marginal };

inline std::string convention_name(MarginalConvention c) {
    return c == MarginalConvention::paper ? "paper" : "exact-marginal";
}

struct CanonicalEnsemble {
    const HamiltonianModel* model = nullptr;
    double beta = 1.0;  // mol/J for molecular models, 1/energy-unit otherwise
    MarginalConvention convention = MarginalConvention::paper;

    static CanonicalEnsemble at_temperature(const HamiltonianModel& m, double kelvin,
                                            MarginalConvention conv = MarginalConvention::paper) {
        return CanonicalEnsemble{&m, units::beta_from_temperature(kelvin), conv};
    }
};

// Draws p from the conditional momentum law h_bar(q,.): the zero-mean
// Gaussian with covariance M(q)/beta, via the Cholesky factor of M(q).
Eigen::VectorXd sample_conditional_momentum(const CanonicalEnsemble& ens, const Eigen::VectorXd& q,
                                            Rng& rng);

// Gaussian with explicit covariance; used by the mean-field component maps.
Eigen::VectorXd sample_gaussian_momentum(const Eigen::MatrixXd& covariance, Rng& rng);

Eigen::VectorXd sample_uniform_in_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, Rng& rng);

// Unnormalized spatial weight per the ensemble's convention flag.
double boltzmann_position_density(const CanonicalEnsemble& ens, const Eigen::VectorXd& q);

}  // namespace mfto

#endif
