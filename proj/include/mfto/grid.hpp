#ifndef MFTO_GRID_HPP
#define MFTO_GRID_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mfto/errors.hpp"

namespace mfto {

enum class Boundary {
    periodic,    // coordinate wraps, densities wrap
    reflecting,  // coordinate reflects, conjugate momentum flips sign
    truncated    // unbounded coordinate truncated to [lo,hi]; no folding
};

inline std::string boundary_name(Boundary b) {
    switch (b) {
        case Boundary::periodic: return "periodic";
        case Boundary::reflecting: return "reflecting";
        default: return "truncated";
    }
}

inline Boundary boundary_from_name(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "reflecting") return Boundary::reflecting;
    if (s == "truncated") return Boundary::truncated;
    throw ConfigError("unknown boundary flag: " + s);
}

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int cells = 1;
    Boundary boundary = Boundary::truncated;

    double width() const { return hi - lo; }
    double dx() const { return (hi - lo) / cells; }
    double center(int i) const { return lo + (i + 0.5) * dx(); }
};

// Out-of-range policy for multilinear interpolation along truncated axes.
enum class OutOfRange { zero, clamp, error };

// Uniform tensor-product grid of cells. Values live at cell centers; the
// flattened index runs with the FIRST axis fastest.
class TensorGrid {
public:
    TensorGrid() = default;
    explicit TensorGrid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
        size_ = 1;
        strides_.resize(axes_.size());
        for (std::size_t k = 0; k < axes_.size(); ++k) {
            if (axes_[k].cells < 1 || !(axes_[k].hi > axes_[k].lo))
                throw ConfigError("invalid grid axis");
            strides_[k] = size_;
            size_ *= axes_[k].cells;
        }
    }

    int ndim() const { return static_cast<int>(axes_.size()); }
    std::int64_t size() const { return size_; }
    const GridAxis& axis(int k) const { return axes_[static_cast<std::size_t>(k)]; }
    const std::vector<GridAxis>& axes() const { return axes_; }

    double cell_volume() const {
        double v = 1.0;
        for (const auto& a : axes_) v *= a.dx();
        return v;
    }

    std::int64_t flatten(const std::vector<int>& idx) const {
        std::int64_t f = 0;
        for (std::size_t k = 0; k < axes_.size(); ++k) f += strides_[k] * idx[k];
        return f;
    }

    void unflatten(std::int64_t f, std::vector<int>& idx) const {
        idx.resize(axes_.size());
        for (std::size_t k = 0; k < axes_.size(); ++k) {
            idx[k] = static_cast<int>(f % axes_[k].cells);
            f /= axes_[k].cells;
        }
    }

    Eigen::VectorXd center(std::int64_t f) const {
        std::vector<int> idx;
        unflatten(f, idx);
        Eigen::VectorXd c(ndim());
        for (int k = 0; k < ndim(); ++k) c[k] = axes_[static_cast<std::size_t>(k)].center(idx[static_cast<std::size_t>(k)]);
        return c;
    }

    // Cell index along one axis; -1 if out of range (after folding periodic
    // and reflecting coordinates back into the interval).
    int locate_axis(int k, double x) const {
        const GridAxis& a = axes_[static_cast<std::size_t>(k)];
        double y = fold(a, x);
        if (y < a.lo || y > a.hi) return -1;
        int i = static_cast<int>((y - a.lo) / a.dx());
        if (i == a.cells) i = a.cells - 1;  // x exactly at hi
        return i;
    }

    // Flattened cell index of point x, or -1 if any coordinate is out of range.
    std::int64_t locate(const Eigen::VectorXd& x) const {
        std::int64_t f = 0;
        for (int k = 0; k < ndim(); ++k) {
            int i = locate_axis(k, x[k]);
            if (i < 0) return -1;
            f += strides_[static_cast<std::size_t>(k)] * i;
        }
        return f;
    }

    // Multilinear interpolation of cell-center values at point x.
    double interpolate(const Eigen::Ref<const Eigen::VectorXd>& values, const Eigen::VectorXd& x,
                       OutOfRange policy = OutOfRange::zero) const {
        const int d = ndim();
        int lo_idx[8][2];
        double wts[8][2];
        if (d > 8) throw LayoutError("TensorGrid::interpolate supports at most 8 dimensions");
        for (int k = 0; k < d; ++k) {
            const GridAxis& a = axes_[static_cast<std::size_t>(k)];
            double y = fold(a, x[k]);
            double s = (y - a.lo) / a.dx() - 0.5;
            int i0 = static_cast<int>(std::floor(s));
            double w1 = s - i0;
            // snap queries that are numerically on a node so that the
            // zero-weight partner cannot trip the out-of-range policy
            constexpr double snap = 1e-9;
            if (w1 <= snap) {
                w1 = 0.0;
            } else if (w1 >= 1.0 - snap) {
                ++i0;
                w1 = 0.0;
            }
            int i1 = i0 + 1;
            const bool ok = resolve_index(a, i0) && (w1 == 0.0 || resolve_index(a, i1));
            if (!ok) {
                if (policy == OutOfRange::zero) return 0.0;
                if (policy == OutOfRange::error) throw EvaluationError("interpolation point outside grid range");
                // clamp
                i0 = std::min(std::max(i0, 0), a.cells - 1);
                i1 = std::min(std::max(i1, 0), a.cells - 1);
            }
            if (w1 == 0.0) i1 = i0;
            lo_idx[k][0] = i0;
            lo_idx[k][1] = i1;
            wts[k][0] = 1.0 - w1;
            wts[k][1] = w1;
        }
        double acc = 0.0;
        const int corners = 1 << d;
        for (int c = 0; c < corners; ++c) {
            double w = 1.0;
            std::int64_t f = 0;
            for (int k = 0; k < d; ++k) {
                int bit = (c >> k) & 1;
                w *= wts[k][bit];
                f += strides_[static_cast<std::size_t>(k)] * lo_idx[k][bit];
            }
            if (w != 0.0) acc += w * values[f];
        }
        return acc;
    }

    std::string describe() const {
        std::string s;
        for (const auto& a : axes_) {
            if (!s.empty()) s += "x";
            s += std::to_string(a.cells);
        }
        return s;
    }

private:
    static double fold(const GridAxis& a, double x) {
        if (a.boundary == Boundary::periodic) {
            double w = a.width();
            double y = std::fmod(x - a.lo, w);
            if (y < 0) y += w;
            return a.lo + y;
        }
        if (a.boundary == Boundary::reflecting) {
            double w = a.width();
            double y = std::fmod(x - a.lo, 2.0 * w);
            if (y < 0) y += 2.0 * w;
            if (y > w) y = 2.0 * w - y;
            return a.lo + y;
        }
        return x;
    }

    // Map an interpolation index into a valid cell. Returns false if the
    // point lies outside a truncated axis' center range.
    static bool resolve_index(const GridAxis& a, int& i) {
        if (i >= 0 && i < a.cells) return true;
        switch (a.boundary) {
            case Boundary::periodic:
                i = ((i % a.cells) + a.cells) % a.cells;
                return true;
            case Boundary::reflecting:
                // mirror across the cell-center lattice boundary
                if (i < 0) i = -1 - i;
                if (i >= a.cells) i = 2 * a.cells - 1 - i;
                return i >= 0 && i < a.cells;
            default:
                return false;
        }
    }

    std::vector<GridAxis> axes_;
    std::vector<std::int64_t> strides_;
    std::int64_t size_ = 0;
};

}  // namespace mfto

#endif
