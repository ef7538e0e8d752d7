#ifndef MFTO_IO_HPP
#define MFTO_IO_HPP

#include <string>

#include "mfto/grid.hpp"
#include "mfto/spectral.hpp"
#include "mfto/stochastic.hpp"

namespace mfto {

// Sparse transition matrices are stored as plain-text triplet files:
//   # mfto-matrix v1
//   # model <id>
//   # grid <c0>x<c1>x...
//   # K <samples per cell>
//   # T <propagation time>
//   # seed <master seed>
//   # convention <momentum-marginal convention>
//   # config <hash>
//   # lost <total lost samples> <max lost fraction per column>
//   <n> <nnz>
//   <row> <col> <value>          (0-based, column-stochastic: column sums = 1)
// Values use %.17g so a written matrix reads back bit-exactly.
void write_matrix(const std::string& path, const StochasticMatrix& P);
StochasticMatrix read_matrix(const std::string& path);

// Grid functions (densities, eigenfunction factors) on a tensor grid:
//   # mfto-grid v1
//   # name <label>
//   # axis <lo> <hi> <cells> <boundary>   (one line per axis)
//   <value>                               (one per cell, first axis fastest)
void write_grid_function(const std::string& path, const std::string& name, const TensorGrid& grid,
                         const Eigen::VectorXd& values);
struct GridFunction {
    std::string name;
    TensorGrid grid;
    Eigen::VectorXd values;
};
GridFunction read_grid_function(const std::string& path);

// Eigenvalue tables: index,real,imag,modulus,residual,is_real
void write_eigenvalue_csv(const std::string& path, const SpectralResult& r);

// Two-dimensional slice as x,y,value rows with a header naming the columns.
void write_slice_csv(const std::string& path, const std::string& xname, const std::string& yname,
                     const GridAxis& xaxis, const GridAxis& yaxis,
                     const std::function<double(int, int)>& value);

std::string format_double(double v);  // %.17g

}  // namespace mfto

#endif
