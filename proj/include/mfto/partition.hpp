#ifndef MFTO_PARTITION_HPP
#define MFTO_PARTITION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mfto/grid.hpp"
#include "mfto/model.hpp"

namespace mfto {

// Box partition of a (sub)configuration space; a thin view over TensorGrid
// with cell-bound queries for the Ulam samplers.
class TensorPartition {
public:
    TensorPartition() = default;
    explicit TensorPartition(TensorGrid grid) : grid_(std::move(grid)) {}

    // Partition of the model's full configuration domain.
    static TensorPartition for_model(const HamiltonianModel& model, const std::vector<int>& cells) {
        if (static_cast<int>(cells.size()) != model.dim())
            throw ConfigError("partition cell counts do not match model dimension");
        std::vector<GridAxis> axes;
        for (int k = 0; k < model.dim(); ++k) {
            const auto& c = model.domain()[static_cast<std::size_t>(k)];
            axes.push_back({c.lo, c.hi, cells[static_cast<std::size_t>(k)], c.boundary});
        }
        return TensorPartition(TensorGrid(std::move(axes)));
    }

    // Partition of one subsystem's configuration block.
    static TensorPartition for_subsystem(const HamiltonianModel& model, const SubsystemLayout& layout,
                                         int subsystem, int cells_per_dim) {
        const auto& b = layout.block(subsystem);
        std::vector<GridAxis> axes;
        for (int k = 0; k < b.size; ++k) {
            const auto& c = model.domain()[static_cast<std::size_t>(b.offset + k)];
            axes.push_back({c.lo, c.hi, cells_per_dim, c.boundary});
        }
        return TensorPartition(TensorGrid(std::move(axes)));
    }

    const TensorGrid& grid() const { return grid_; }
    std::int64_t n() const { return grid_.size(); }
    int ndim() const { return grid_.ndim(); }
    double cell_volume() const { return grid_.cell_volume(); }

    std::int64_t locate(const Eigen::VectorXd& q) const { return grid_.locate(q); }

    void cell_bounds(std::int64_t j, Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
        std::vector<int> idx;
        grid_.unflatten(j, idx);
        lo.resize(grid_.ndim());
        hi.resize(grid_.ndim());
        for (int k = 0; k < grid_.ndim(); ++k) {
            const auto& a = grid_.axis(k);
            lo[k] = a.lo + idx[static_cast<std::size_t>(k)] * a.dx();
            hi[k] = lo[k] + a.dx();
        }
    }

    Eigen::VectorXd cell_center(std::int64_t j) const { return grid_.center(j); }

    std::vector<CoordinateDomain> domains() const {
        std::vector<CoordinateDomain> d;
        for (const auto& a : grid_.axes()) d.push_back({a.lo, a.hi, a.boundary});
        return d;
    }

private:
    TensorGrid grid_;
};

}  // namespace mfto

#endif
