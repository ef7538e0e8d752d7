#include "mfto/integrate.hpp"

#include <cmath>

namespace mfto {

void apply_boundaries(Eigen::VectorXd& q, Eigen::VectorXd& p, std::span<const CoordinateDomain> domain) {
    for (std::size_t k = 0; k < domain.size(); ++k) {
        const auto& c = domain[k];
        const double w = c.hi - c.lo;
        double x = q[static_cast<Eigen::Index>(k)];
        if (c.boundary == Boundary::periodic) {
            double y = std::fmod(x - c.lo, w);
            if (y < 0) y += w;
            q[static_cast<Eigen::Index>(k)] = c.lo + y;
        } else if (c.boundary == Boundary::reflecting) {
            double y = std::fmod(x - c.lo, 2.0 * w);
            if (y < 0) y += 2.0 * w;
            if (y > w) {
                y = 2.0 * w - y;
                p[static_cast<Eigen::Index>(k)] = -p[static_cast<Eigen::Index>(k)];
            }
            q[static_cast<Eigen::Index>(k)] = c.lo + y;
        }
    }
}

PhaseState flow(const PhaseField& field, const PhaseState& z0, const IntegratorSpec& spec,
                std::span<const CoordinateDomain> domain) {
    const Eigen::Index d = z0.q.size();
    const double dt = spec.dt();
    Eigen::VectorXd z = z0.flat();
    for (int s = 0; s < spec.steps; ++s) {
        if (spec.scheme == Scheme::explicit_euler) {
            z += dt * field(z);
        } else {
            Eigen::VectorXd k1 = field(z);
            Eigen::VectorXd k2 = field(z + 0.5 * dt * k1);
            Eigen::VectorXd k3 = field(z + 0.5 * dt * k2);
            Eigen::VectorXd k4 = field(z + dt * k3);
            z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!z.allFinite()) throw BlowUpError("flow: non-finite state", s);
        if (!domain.empty()) {
            Eigen::VectorXd q = z.head(d), p = z.tail(d);
            apply_boundaries(q, p, domain);
            z.head(d) = q;
            z.tail(d) = p;
        }
    }
    return PhaseState::from_flat(z);
}

PhaseState flow(const HamiltonianModel& model, const PhaseState& z0, const IntegratorSpec& spec) {
    auto field = [&model](const Eigen::VectorXd& z) { return eval_vector_field_flat(model, z); };
    return flow(field, z0, spec, std::span<const CoordinateDomain>(model.domain()));
}

}  // namespace mfto
