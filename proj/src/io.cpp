#include "mfto/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mfto {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    return f;
}

// Reads "# <key> rest..." header lines; returns the first non-comment line.
std::string read_headers(std::ifstream& f, const std::string& path,
                         const std::function<void(const std::string&, std::istringstream&)>& on_key) {
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] != '#') return line;
        std::istringstream ss(line.substr(1));
        std::string key;
        ss >> key;
        on_key(key, ss);
    }
    throw IoError("unexpected end of file: " + path);
}

}  // namespace

void write_matrix(const std::string& path, const StochasticMatrix& P) {
    auto f = open_out(path);
    const auto& m = P.meta();
    f << "# mfto-matrix v1\n";
    f << "# model " << m.model_id << "\n";
    f << "# grid " << m.grid_desc << "\n";
    f << "# K " << m.K << "\n";
    f << "# T " << format_double(m.T) << "\n";
    f << "# seed " << m.seed << "\n";
    f << "# convention " << m.convention << "\n";
    f << "# config " << (m.config_hash.empty() ? "-" : m.config_hash) << "\n";
    f << "# lost " << m.lost_samples << " " << format_double(m.max_lost_fraction) << "\n";
    const auto& S = P.matrix();
    f << P.n() << " " << S.nonZeros() << "\n";
    for (int j = 0; j < S.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(S, j); it; ++it)
            f << it.row() << " " << it.col() << " " << format_double(it.value()) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

StochasticMatrix read_matrix(const std::string& path) {
    auto f = open_in(path);
    AssemblyMeta meta;
    bool tagged = false;
    std::string first = read_headers(f, path, [&](const std::string& key, std::istringstream& ss) {
        if (key == "mfto-matrix") tagged = true;
        else if (key == "model") ss >> meta.model_id;
        else if (key == "grid") ss >> meta.grid_desc;
        else if (key == "K") ss >> meta.K;
        else if (key == "T") ss >> meta.T;
        else if (key == "seed") ss >> meta.seed;
        else if (key == "convention") ss >> meta.convention;
        else if (key == "config") {
            ss >> meta.config_hash;
            if (meta.config_hash == "-") meta.config_hash.clear();
        } else if (key == "lost") ss >> meta.lost_samples >> meta.max_lost_fraction;
    });
    if (!tagged) throw IoError("not a matrix file (missing mfto-matrix header): " + path);
    std::istringstream head(first);
    std::int64_t n = 0, nnz = 0;
    if (!(head >> n >> nnz) || n < 1 || nnz < 0) throw IoError("bad matrix size line: " + path);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nnz));
    for (std::int64_t t = 0; t < nnz; ++t) {
        std::int64_t i = 0, j = 0;
        double v = 0.0;
        if (!(f >> i >> j >> v)) throw IoError("truncated triplet list: " + path);
        if (i < 0 || i >= n || j < 0 || j >= n) throw IoError("triplet index out of range: " + path);
        trip.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
    }
    Eigen::SparseMatrix<double> S(static_cast<int>(n), static_cast<int>(n));
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();
    return StochasticMatrix(std::move(S), std::move(meta));
}

void write_grid_function(const std::string& path, const std::string& name, const TensorGrid& grid,
                         const Eigen::VectorXd& values) {
    if (values.size() != grid.size()) throw IoError("grid function size mismatch: " + path);
    auto f = open_out(path);
    f << "# mfto-grid v1\n";
    f << "# name " << name << "\n";
    for (const auto& a : grid.axes())
        f << "# axis " << format_double(a.lo) << " " << format_double(a.hi) << " " << a.cells << " "
          << boundary_name(a.boundary) << "\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) f << format_double(values[i]) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

GridFunction read_grid_function(const std::string& path) {
    auto f = open_in(path);
    GridFunction g;
    std::vector<GridAxis> axes;
    bool tagged = false;
    std::string first = read_headers(f, path, [&](const std::string& key, std::istringstream& ss) {
        if (key == "mfto-grid") tagged = true;
        else if (key == "name") std::getline(ss >> std::ws, g.name);
        else if (key == "axis") {
            GridAxis a;
            std::string b;
            if (!(ss >> a.lo >> a.hi >> a.cells >> b)) throw IoError("bad axis line: " + path);
            a.boundary = boundary_from_name(b);
            axes.push_back(a);
        }
    });
    if (!tagged) throw IoError("not a grid file (missing mfto-grid header): " + path);
    if (axes.empty()) throw IoError("grid file has no axes: " + path);
    g.grid = TensorGrid(std::move(axes));
    g.values.resize(g.grid.size());
    std::istringstream fs(first);
    if (!(fs >> g.values[0])) throw IoError("bad value line: " + path);
    for (std::int64_t i = 1; i < g.grid.size(); ++i)
        if (!(f >> g.values[i])) throw IoError("truncated value list: " + path);
    return g;
}

void write_eigenvalue_csv(const std::string& path, const SpectralResult& r) {
    auto f = open_out(path);
    f << "index,real,imag,modulus,residual,is_real\n";
    for (std::size_t t = 0; t < r.eigenvalues.size(); ++t) {
        const auto& ev = r.eigenvalues[t];
        f << t << "," << format_double(ev.real()) << "," << format_double(ev.imag()) << ","
          << format_double(std::abs(ev)) << "," << format_double(r.residuals[t]) << ","
          << (r.is_real[t] ? 1 : 0) << "\n";
    }
    if (!f) throw IoError("write failed: " + path);
}

void write_slice_csv(const std::string& path, const std::string& xname, const std::string& yname,
                     const GridAxis& xaxis, const GridAxis& yaxis,
                     const std::function<double(int, int)>& value) {
    auto f = open_out(path);
    f << xname << "," << yname << ",value\n";
    for (int iy = 0; iy < yaxis.cells; ++iy)
        for (int ix = 0; ix < xaxis.cells; ++ix)
            f << format_double(xaxis.center(ix)) << "," << format_double(yaxis.center(iy)) << ","
              << format_double(value(ix, iy)) << "\n";
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace mfto
