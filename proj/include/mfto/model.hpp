#ifndef MFTO_MODEL_HPP
#define MFTO_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mfto/errors.hpp"
#include "mfto/grid.hpp"

namespace mfto {

struct PhaseState {
    Eigen::VectorXd q;
    Eigen::VectorXd p;

    Eigen::VectorXd flat() const {
        Eigen::VectorXd z(q.size() + p.size());
        z << q, p;
        return z;
    }
    static PhaseState from_flat(const Eigen::VectorXd& z) {
        const Eigen::Index d = z.size() / 2;
        return PhaseState{z.head(d), z.tail(d)};
    }
};

struct SubsystemBlock {
    int offset = 0;
    int size = 1;
};

// Ordered, contiguous partition of the d configuration coordinates.
class SubsystemLayout {
public:
    SubsystemLayout() = default;
    explicit SubsystemLayout(std::vector<SubsystemBlock> blocks) : blocks_(std::move(blocks)) {
        int expect = 0;
        for (const auto& b : blocks_) {
            if (b.offset != expect || b.size < 1)
                throw LayoutError("subsystem blocks must be contiguous, ordered and cover all coordinates");
            expect += b.size;
        }
        dim_ = expect;
        if (dim_ == 0) throw LayoutError("empty subsystem layout");
    }

    static SubsystemLayout per_coordinate(int d) {
        std::vector<SubsystemBlock> b;
        for (int i = 0; i < d; ++i) b.push_back({i, 1});
        return SubsystemLayout(std::move(b));
    }

    static SubsystemLayout from_sizes(const std::vector<int>& sizes) {
        std::vector<SubsystemBlock> b;
        int off = 0;
        for (int s : sizes) {
            b.push_back({off, s});
            off += s;
        }
        return SubsystemLayout(std::move(b));
    }

    int count() const { return static_cast<int>(blocks_.size()); }
    int dim() const { return dim_; }
    const SubsystemBlock& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }

    Eigen::VectorXd extract(const Eigen::VectorXd& q, int i) const {
        const auto& b = block(i);
        return q.segment(b.offset, b.size);
    }

private:
    std::vector<SubsystemBlock> blocks_;
    int dim_ = 0;
};

struct CoordinateDomain {
    double lo = 0.0;
    double hi = 1.0;
    Boundary boundary = Boundary::truncated;
};

// Optional tensor decomposition of the potential over the subsystem layout:
//   V(q) = sum_t coeff_t * prod_i g_{t,i}(q_i),
// with a missing factor meaning the constant 1. Lets the mean-field
// quadrature of cross terms collapse to precomputed scalar moments.
struct ProductInteraction {
    struct Term {
        double coeff = 1.0;
        // per-subsystem factor; empty std::function == constant 1
        std::vector<std::function<double(const Eigen::VectorXd&)>> factors;
    };
    std::vector<Term> terms;
};

class HamiltonianModel {
public:
    virtual ~HamiltonianModel() = default;

    virtual std::string id() const = 0;
    virtual int dim() const = 0;
    virtual const std::vector<CoordinateDomain>& domain() const = 0;
    virtual const SubsystemLayout& layout() const = 0;

    virtual double potential(const Eigen::VectorXd& q) const = 0;
    virtual Eigen::VectorXd potential_gradient(const Eigen::VectorXd& q) const = 0;
    virtual Eigen::MatrixXd mass_matrix(const Eigen::VectorXd& q) const = 0;

    // True when M is independent of q; skips the dM term in the vector field.
    virtual bool constant_mass() const { return false; }

    virtual const ProductInteraction* interaction_decomposition() const { return nullptr; }

    bool in_domain(const Eigen::VectorXd& q) const {
        const auto& dom = domain();
        for (int k = 0; k < dim(); ++k) {
            const auto& c = dom[static_cast<std::size_t>(k)];
            if (c.boundary == Boundary::periodic) continue;  // wraps
            if (q[k] < c.lo || q[k] > c.hi) return false;
        }
        return true;
    }

    double hamiltonian(const PhaseState& z) const {
        Eigen::MatrixXd M = mass_matrix(z.q);
        Eigen::LLT<Eigen::MatrixXd> llt(M);
        if (llt.info() != Eigen::Success)
            throw ModelConsistencyError(id() + ": mass matrix not SPD in hamiltonian()");
        return 0.5 * z.p.dot(llt.solve(z.p)) + potential(z.q);
    }
};

// Checked evaluation wrappers (the [OP] surface of the model module).
double eval_potential(const HamiltonianModel& model, const Eigen::VectorXd& q);
Eigen::MatrixXd eval_mass_matrix(const HamiltonianModel& model, const Eigen::VectorXd& q);

// f(z) = (M^-1 p, -d/dq(1/2 p.M^-1 p) - grad V). The mass-matrix derivative
// uses d(M^-1) = -M^-1 (dM) M^-1 with dM from central differences of
// mass_matrix (step 1e-6), skipped entirely for constant-mass models.
Eigen::VectorXd eval_vector_field(const HamiltonianModel& model, const PhaseState& z);

// Flattened-state variant used by the integrator.
Eigen::VectorXd eval_vector_field_flat(const HamiltonianModel& model, const Eigen::VectorXd& z);

}  // namespace mfto

#endif
