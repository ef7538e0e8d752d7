#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mfto/config.hpp"
#include "mfto/io.hpp"
#include "mfto/models.hpp"
#include "mfto/ulam.hpp"
#include "support.hpp"

using namespace mfto;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("mfto-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

StochasticMatrix sample_matrix() {
    DoubleWell2D model;
    CanonicalEnsemble ens{&model, 2.0};
    TensorPartition part = TensorPartition::for_model(model, {6, 6});
    StochasticMatrix S = assemble_full_spatial(model, ens, part, 16, {Scheme::rk4, 10, 0.3}, 17);
    S.meta().config_hash = "0123456789abcdef";
    return S;
}

}  // namespace

TEST_CASE("matrices round-trip bit-exactly with their metadata") {
    TempDir tmp;
    StochasticMatrix S = sample_matrix();
    const std::string path = tmp.file("m.stm");
    write_matrix(path, S);
    StochasticMatrix R = read_matrix(path);
    CHECK(R.n() == S.n());
    CHECK((Eigen::MatrixXd(R.matrix()) - Eigen::MatrixXd(S.matrix())).norm() == 0.0);
    CHECK(R.meta().model_id == S.meta().model_id);
    CHECK(R.meta().grid_desc == "6x6");
    CHECK(R.meta().K == 16);
    CHECK(R.meta().T == S.meta().T);
    CHECK(R.meta().seed == 17);
    CHECK(R.meta().convention == "paper");
    CHECK(R.meta().config_hash == "0123456789abcdef");
    CHECK(R.meta().lost_samples == S.meta().lost_samples);
    CHECK(R.meta().max_lost_fraction == S.meta().max_lost_fraction);
    CHECK_NOTHROW(R.assert_column_stochastic(1e-12));
}

TEST_CASE("grid functions round-trip bit-exactly") {
    TempDir tmp;
    TensorGrid g({{-2, 2, 5, Boundary::truncated}, {0, M_PI, 3, Boundary::reflecting}});
    Eigen::VectorXd v(15);
    Rng rng(1);
    for (int i = 0; i < 15; ++i) v[i] = rng.normal() * 1e-7;
    const std::string path = tmp.file("f.grid");
    write_grid_function(path, "factor one", g, v);
    GridFunction f = read_grid_function(path);
    CHECK(f.name == "factor one");
    CHECK(f.grid.ndim() == 2);
    CHECK(f.grid.axis(0).lo == -2.0);
    CHECK(f.grid.axis(0).cells == 5);
    CHECK(f.grid.axis(1).boundary == Boundary::reflecting);
    CHECK(f.grid.axis(1).hi == M_PI);
    CHECK((f.values - v).norm() == 0.0);
}

TEST_CASE("eigenvalue tables carry every reported pair") {
    TempDir tmp;
    StochasticMatrix S = sample_matrix();
    SpectralResult r = dominant_eigs(S, 3);
    const std::string path = tmp.file("e.csv");
    write_eigenvalue_csv(path, r);
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "index,real,imag,modulus,residual,is_real");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("slice tables tabulate the value callback over both axes") {
    TempDir tmp;
    const std::string path = tmp.file("s.csv");
    write_slice_csv(path, "a", "b", {0, 1, 2, Boundary::truncated}, {0, 1, 3, Boundary::truncated},
                    [](int i, int j) { return 10.0 * i + j; });
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "a,b,value");
    int rows = 0;
    std::string line;
    double last = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        last = std::stod(line.substr(line.rfind(',') + 1));
    }
    CHECK(rows == 6);
    CHECK(last == doctest::Approx(12.0));
}

TEST_CASE("doubles survive the printed representation exactly") {
    for (double v : {1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 0.985}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("reading damaged matrix files raises io errors") {
    TempDir tmp;
    CHECK_THROWS_AS(read_matrix(tmp.file("missing.stm")), IoError);
    const std::string path = tmp.file("bad.stm");
    {
        std::ofstream out(path);
        out << "# not-a-matrix v1\n";
    }
    CHECK_THROWS_AS(read_matrix(path), IoError);
}

TEST_CASE("reading damaged grid files raises io errors") {
    TempDir tmp;
    CHECK_THROWS_AS(read_grid_function(tmp.file("missing.grid")), IoError);
    const std::string path = tmp.file("bad.grid");
    {
        std::ofstream out(path);
        out << "# mfto-grid v1\n# name x\n# axis 0 1 4 truncated\n1.0\n";  // too few values
    }
    CHECK_THROWS_AS(read_grid_function(path), IoError);
}

TEST_CASE("configs serialize to json and back without loss") {
    ExperimentConfig c;
    c.model = "butane_ua";
    c.cells = {32, 32, 32};
    c.mf_cells = 48;
    c.K = 64;
    c.mf_K = 4096;
    c.T = 0.5e-13;
    c.steps = 10;
    c.scheme = "explicit-euler";
    c.seed = 99;
    c.temperature = 300.0;
    c.convention = "exact-marginal";
    c.sweeps = 7;
    c.coupling = 0.5;
    c.n_eigs = 4;
    c.outdir = "/tmp/somewhere";
    ExperimentConfig r = config_from_json(to_json(c));
    CHECK(r.model == c.model);
    CHECK(r.cells == c.cells);
    CHECK(r.mf_cells == c.mf_cells);
    CHECK(r.K == c.K);
    CHECK(r.mf_K == c.mf_K);
    CHECK(r.T == c.T);
    CHECK(r.steps == c.steps);
    CHECK(r.scheme == c.scheme);
    CHECK(r.seed == c.seed);
    CHECK(r.temperature == c.temperature);
    CHECK(r.beta == c.beta);
    CHECK(r.convention == c.convention);
    CHECK(r.sweeps == c.sweeps);
    CHECK(r.coupling == c.coupling);
    CHECK(r.n_eigs == c.n_eigs);
    CHECK(r.outdir == c.outdir);
    CHECK(config_hash(r) == config_hash(c));
}

TEST_CASE("config hashes react to any field change") {
    ExperimentConfig a;
    a.cells = {32, 32};
    ExperimentConfig b = a;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 3;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.T = 0.2;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.model = "butane_ua";
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("loading configs from disk validates the contents") {
    TempDir tmp;
    const std::string good = tmp.file("good.json");
    {
        std::ofstream out(good);
        out << R"({"model":"double_well_2d","cells":[16,16],"K":8,"T":0.1,"steps":5,)"
            << R"("scheme":"rk4","seed":1,"beta":2.0})";
    }
    ExperimentConfig c = load_config(good);
    CHECK(c.model == "double_well_2d");
    CHECK(c.cells == std::vector<int>{16, 16});
    CHECK(c.scheme == "rk4");

    CHECK_THROWS_AS(load_config(tmp.file("missing.json")), IoError);

    const std::string bad = tmp.file("bad.json");
    {
        std::ofstream out(bad);
        out << R"({"model":"double_well_2d","K":0})";
    }
    CHECK_THROWS_AS(load_config(bad), ConfigError);

    const std::string junk = tmp.file("junk.json");
    {
        std::ofstream out(junk);
        out << "not json at all";
    }
    CHECK_THROWS(load_config(junk));
}

TEST_CASE("presets describe the bundled experiments") {
    ExperimentConfig b = preset_config("butane_ua");
    CHECK(b.model == "butane_ua");
    CHECK(b.cells == std::vector<int>{32, 32, 32});
    CHECK(b.K == 32);
    CHECK(b.T == doctest::Approx(0.5e-13));
    CHECK(b.steps == 10);
    CHECK(b.scheme == "explicit-euler");
    CHECK(b.temperature == doctest::Approx(300.0));
    CHECK(b.seed == 2024);

    ExperimentConfig d = preset_config("double_well_2d");
    CHECK(d.model == "double_well_2d");
    CHECK(d.cells == std::vector<int>{32, 32});
    CHECK(d.effective_beta() == doctest::Approx(2.0));

    CHECK_THROWS_AS(preset_config("unknown"), ConfigError);
}

TEST_CASE("derived accessors compute integrator and ensemble settings") {
    ExperimentConfig c;
    c.cells = {8, 8};
    c.scheme = "rk4";
    c.steps = 4;
    c.T = 1.0;
    IntegratorSpec spec = c.integrator();
    CHECK(spec.scheme == Scheme::rk4);
    CHECK(spec.dt() == doctest::Approx(0.25));
    c.temperature = 300.0;
    CHECK(c.effective_beta() == doctest::Approx(units::beta_from_temperature(300.0)));
    c.temperature = 0.0;
    c.beta = 3.5;
    CHECK(c.effective_beta() == doctest::Approx(3.5));
    c.K = 16;
    c.mf_K = 0;
    CHECK(c.component_K() == 16);
    c.mf_K = 64;
    CHECK(c.component_K() == 64);
    c.convention = "bogus";
    CHECK_THROWS_AS(c.marginal_convention(), ConfigError);
}
