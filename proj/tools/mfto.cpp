// Command-line front end: assembles transfer-operator discretizations, runs
// the mean-field self-consistency loop, extracts spectra, and compares
// mean-field product eigenfunctions against the full-space ones.
#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mfto/compare.hpp"
#include "mfto/config.hpp"
#include "mfto/io.hpp"
#include "mfto/meanfield.hpp"
#include "mfto/models.hpp"
#include "mfto/spectral.hpp"
#include "mfto/ulam.hpp"

namespace {

using namespace mfto;

// exit codes, one per failure family
constexpr int exit_ok = 0;
constexpr int exit_other = 1;
constexpr int exit_config = 2;
constexpr int exit_model = 3;
constexpr int exit_assembly = 4;
constexpr int exit_spectral = 5;
constexpr int exit_compare = 6;
constexpr int exit_io = 7;

std::shared_ptr<HamiltonianModel> make_model(const ExperimentConfig& cfg) {
    if (cfg.model == "double_well_2d")
        return std::make_shared<DoubleWell2D>(3.0, 1.0, 1.0, cfg.coupling);
    if (cfg.model == "butane_ua") return std::make_shared<ButaneModel>();
    throw ConfigError("unknown model: " + cfg.model);
}

// Flag values layered over preset/config-file settings; only flags the user
// actually passed override.
struct CommonOpts {
    std::string config_path, model, scheme, convention, outdir;
    std::vector<int> cells;
    int mf_cells = 0, K = 0, mf_K = -1, steps = 0, sweeps = 0, threads = -1, n_eigs = 0;
    double T = 0.0, temperature = -1.0, beta = 0.0, coupling = 0.0;
    std::uint64_t seed = 0;

    CLI::Option *o_config = nullptr, *o_model = nullptr, *o_scheme = nullptr, *o_convention = nullptr,
                *o_outdir = nullptr, *o_cells = nullptr, *o_mf_cells = nullptr, *o_K = nullptr, *o_mf_K = nullptr,
                *o_steps = nullptr, *o_sweeps = nullptr, *o_threads = nullptr, *o_n_eigs = nullptr,
                *o_T = nullptr, *o_temperature = nullptr, *o_beta = nullptr, *o_coupling = nullptr,
                *o_seed = nullptr;

    void attach(CLI::App* app) {
        o_config = app->add_option("--config", config_path, "JSON config file (flags override it)");
        o_model = app->add_option("--model", model, "model preset: double_well_2d | butane_ua");
        o_cells = app->add_option("--cells", cells, "full-partition cells per coordinate");
        o_mf_cells = app->add_option("--mf-cells", mf_cells, "cells per dimension of each subsystem partition");
        o_K = app->add_option("--samples,-K", K, "Monte-Carlo samples per cell");
        o_mf_K = app->add_option("--mf-samples", mf_K, "samples per cell for component maps (0: same as -K)");
        o_T = app->add_option("--T", T, "propagation time");
        o_steps = app->add_option("--steps", steps, "integrator steps over T");
        o_scheme = app->add_option("--scheme", scheme, "integration scheme: explicit-euler | rk4");
        o_seed = app->add_option("--seed", seed, "master RNG seed");
        o_temperature = app->add_option("--temperature", temperature, "temperature in Kelvin");
        o_beta = app->add_option("--beta", beta, "inverse temperature (used when no temperature is set)");
        o_convention = app->add_option("--convention", convention,
                                       "spatial-weight convention: paper | exact-marginal");
        o_sweeps = app->add_option("--iters", sweeps, "self-consistency sweeps");
        o_coupling = app->add_option("--coupling", coupling, "interaction strength knob");
        o_threads = app->add_option("--threads", threads, "worker threads (0: hardware concurrency)");
        o_n_eigs = app->add_option("--n-eigs", n_eigs, "number of eigenpairs");
        o_outdir = app->add_option("--outdir", outdir, "output directory (default: $MFTO_OUTDIR or .)");
    }

    ExperimentConfig resolve(const std::string& default_model = "") const {
        ExperimentConfig cfg;
        if (o_config->count()) {
            cfg = load_config(config_path);
        } else {
            std::string m = o_model->count() ? model
                            : default_model.empty() ? cfg.model
                                                    : default_model;
            cfg = preset_config(m);
        }
        if (o_model->count()) cfg.model = model;
        if (o_cells->count()) cfg.cells = cells;
        if (o_mf_cells->count()) cfg.mf_cells = mf_cells;
        if (o_K->count()) cfg.K = K;
        if (o_mf_K->count()) cfg.mf_K = mf_K;
        if (o_T->count()) cfg.T = T;
        if (o_steps->count()) cfg.steps = steps;
        if (o_scheme->count()) cfg.scheme = scheme;
        if (o_seed->count()) cfg.seed = seed;
        if (o_temperature->count()) cfg.temperature = temperature;
        if (o_beta->count()) {
            cfg.beta = beta;
            if (!o_temperature->count()) cfg.temperature = 0.0;
        }
        if (o_convention->count()) cfg.convention = convention;
        if (o_sweeps->count()) cfg.sweeps = sweeps;
        if (o_coupling->count()) cfg.coupling = coupling;
        if (o_threads->count()) cfg.threads = threads;
        if (o_n_eigs->count()) cfg.n_eigs = n_eigs;
        if (o_outdir->count()) {
            cfg.outdir = outdir;
        } else if (!o_config->count()) {
            if (const char* env = std::getenv("MFTO_OUTDIR")) cfg.outdir = env;
        }
        if (cfg.cells.empty()) cfg.cells = preset_config(cfg.model).cells;
        std::filesystem::create_directories(cfg.outdir);
        return cfg;
    }
};

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.outdir) / name).string();
}

StochasticMatrix build_full(const ExperimentConfig& cfg, const HamiltonianModel& model) {
    auto ens = CanonicalEnsemble{&model, cfg.effective_beta(), cfg.marginal_convention()};
    auto part = TensorPartition::for_model(model, cfg.cells);
    StochasticMatrix P =
        assemble_full_spatial(model, ens, part, cfg.K, cfg.integrator(), cfg.seed, cfg.threads);
    P.meta().config_hash = config_hash(cfg);
    return P;
}

RoothaanResult run_roothaan(const ExperimentConfig& cfg, const HamiltonianModel& model) {
    const auto& layout = model.layout();
    std::vector<TensorPartition> parts;
    for (int i = 0; i < layout.count(); ++i)
        parts.push_back(TensorPartition::for_subsystem(model, layout, i, cfg.mf_cells));
    auto w0 = boltzmann_factors(model, layout, parts, cfg.effective_beta());
    return roothaan_iterate(model, layout, w0, parts, cfg.effective_beta(), cfg.component_K(), cfg.integrator(),
                            cfg.sweeps, cfg.seed, cfg.threads);
}

void print_diagnostics(const RoothaanResult& r) {
    for (std::size_t s = 0; s < r.diag.factor_change.size(); ++s) {
        std::cout << "sweep " << s + 1 << " factor change:";
        for (double c : r.diag.factor_change[s]) std::cout << " " << c;
        std::cout << "\n";
    }
    std::cout << "fixed-point residuals:";
    for (double c : r.diag.fixed_point_residuals) std::cout << " " << c;
    std::cout << "\n";
    if (r.diag.oscillation_warning)
        std::cout << "warning: factor changes grew over three consecutive sweeps\n";
}

void write_roothaan(const ExperimentConfig& cfg, const RoothaanResult& r) {
    for (std::size_t i = 0; i < r.factors.size(); ++i) {
        write_grid_function(out_path(cfg, cfg.model + "_factor" + std::to_string(i) + ".grid"),
                            cfg.model + " subsystem " + std::to_string(i) + " invariant factor",
                            r.factors[i].qgrid, r.factors[i].values);
        StochasticMatrix S = r.component_matrices[i];
        S.meta().config_hash = config_hash(cfg);
        write_matrix(out_path(cfg, cfg.model + "_mf" + std::to_string(i) + ".stm"), S);
    }
}

// The per-subsystem spatial eigenfunctions entering the products: invariant
// factor plus subdominant component-map eigenvectors.
std::vector<SpectralResult> component_spectra(const RoothaanResult& r, int k) {
    std::vector<SpectralResult> out;
    for (const auto& S : r.component_matrices)
        out.push_back(dominant_eigs(S, std::min<int>(k, static_cast<int>(S.n()))));
    return out;
}

// All products with exactly one non-invariant factor, the natural first
// excitations under the product ansatz.
struct ProductCandidate {
    Eigen::VectorXd values;
    std::string label;
    double eigenvalue = 1.0;
};

std::vector<ProductCandidate> product_candidates(const RoothaanResult& r,
                                                 const std::vector<SpectralResult>& spectra,
                                                 const TensorPartition& product_part, int per_subsystem) {
    std::vector<ProductCandidate> out;
    const int N = static_cast<int>(r.factors.size());
    for (int i = 0; i < N; ++i) {
        for (int t = 1; t <= per_subsystem; ++t) {
            if (t >= static_cast<int>(spectra[static_cast<std::size_t>(i)].eigenvalues.size())) break;
            if (!spectra[static_cast<std::size_t>(i)].is_real[static_cast<std::size_t>(t)]) continue;
            std::vector<SpatialFactor> sel = r.factors;
            sel[static_cast<std::size_t>(i)].values =
                spectra[static_cast<std::size_t>(i)].vectors.col(t);
            sel[static_cast<std::size_t>(i)].norm = SpatialFactor::Norm::unit_l2;
            ProductCandidate c;
            c.values = product_eigenfunction(sel, product_part);
            c.label = "sub" + std::to_string(i) + ":mode" + std::to_string(t);
            c.eigenvalue = spectra[static_cast<std::size_t>(i)]
                               .eigenvalues[static_cast<std::size_t>(t)]
                               .real();
            out.push_back(std::move(c));
        }
    }
    // double excitations: first non-invariant mode in two subsystems at once
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            const auto &si = spectra[static_cast<std::size_t>(i)], &sj = spectra[static_cast<std::size_t>(j)];
            if (si.eigenvalues.size() < 2 || sj.eigenvalues.size() < 2) continue;
            if (!si.is_real[1] || !sj.is_real[1]) continue;
            std::vector<SpatialFactor> sel = r.factors;
            sel[static_cast<std::size_t>(i)].values = si.vectors.col(1);
            sel[static_cast<std::size_t>(i)].norm = SpatialFactor::Norm::unit_l2;
            sel[static_cast<std::size_t>(j)].values = sj.vectors.col(1);
            sel[static_cast<std::size_t>(j)].norm = SpatialFactor::Norm::unit_l2;
            ProductCandidate c;
            c.values = product_eigenfunction(sel, product_part);
            c.label = "sub" + std::to_string(i) + ":mode1*sub" + std::to_string(j) + ":mode1";
            c.eigenvalue = si.eigenvalues[1].real() * sj.eigenvalues[1].real();
            out.push_back(std::move(c));
        }
    }
    return out;
}

int run_pipeline(const ExperimentConfig& cfg) {
    auto model = make_model(cfg);
    std::cout << "model " << model->id() << ", grid";
    for (int c : cfg.cells) std::cout << " " << c;
    std::cout << ", K " << cfg.K << ", T " << cfg.T << ", seed " << cfg.seed << "\n";

    StochasticMatrix P = build_full(cfg, *model);
    write_matrix(out_path(cfg, cfg.model + "_full.stm"), P);
    std::cout << "assembled full operator: n " << P.n() << ", lost samples " << P.meta().lost_samples
              << "\n";

    SpectralResult full = dominant_eigs(P, cfg.n_eigs);
    write_eigenvalue_csv(out_path(cfg, cfg.model + "_full_eigs.csv"), full);
    for (int t = 0; t < cfg.n_eigs; ++t)
        std::cout << "lambda_" << t + 1 << " = " << full.eigenvalues[static_cast<std::size_t>(t)].real()
                  << (full.is_real[static_cast<std::size_t>(t)] ? "" : " (complex pair)") << "\n";

    RoothaanResult mf = run_roothaan(cfg, *model);
    print_diagnostics(mf);
    write_roothaan(cfg, mf);

    auto spectra = component_spectra(mf, 3);
    auto product_part = TensorPartition::for_model(*model, cfg.cells);
    if (cfg.cells != std::vector<int>(cfg.cells.size(), cfg.mf_cells))
        throw ConfigError("pipeline comparison needs --cells equal to --mf-cells in every coordinate");
    auto candidates = product_candidates(mf, spectra, product_part, 2);
    if (candidates.empty()) throw ComparisonError("no real product candidates found");

    Eigen::VectorXd weights = invariant_vector(P);
    Eigen::MatrixXd reference(P.n(), std::max(0, cfg.n_eigs - 1));
    std::vector<int> ref_cols;
    for (int t = 1; t < cfg.n_eigs; ++t) {
        if (!full.is_real[static_cast<std::size_t>(t)]) continue;
        reference.col(static_cast<int>(ref_cols.size())) = full.vectors.col(t);
        ref_cols.push_back(t);
    }
    reference.conservativeResize(Eigen::NoChange, static_cast<int>(ref_cols.size()));
    std::vector<Eigen::VectorXd> cand_vecs;
    for (const auto& c : candidates) cand_vecs.push_back(c.values);
    ComparisonReport rep = match_eigenfunctions(reference, cand_vecs, weights);
    for (const auto& p : rep.pairs) {
        const auto& c = candidates[static_cast<std::size_t>(p.candidate)];
        std::cout << "full lambda_" << ref_cols[static_cast<std::size_t>(p.reference)] + 1 << " ("
                  << full.eigenvalues[static_cast<std::size_t>(ref_cols[static_cast<std::size_t>(p.reference)])]
                         .real()
                  << ") ~ product " << c.label << " (" << c.eigenvalue << "): cosine " << p.cosine
                  << ", sign agreement " << p.sign_agreement << "\n";
    }

    if (cfg.model == "butane_ua") {
        // slice of the second full eigenfunction at the mid theta1 plane
        const auto& g = product_part.grid();
        Eigen::VectorXd v2 = full.vectors.col(1);
        const int i1 = g.axis(0).cells / 2;
        write_slice_csv(out_path(cfg, "butane_slice_theta1_mid.csv"), "theta2", "phi", g.axis(1),
                        g.axis(2), [&](int ix, int iy) {
                            std::vector<int> idx{i1, ix, iy};
                            return v2[g.flatten(idx)];
                        });
    }
    std::cout << "outputs in " << cfg.outdir << "\n";
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mean-field transfer-operator toolkit"};
    app.require_subcommand(1);

    CommonOpts opt_full, opt_mf, opt_root, opt_eigs, opt_cmp, opt_pb, opt_p2;

    auto* c_full = app.add_subcommand("assemble-full", "assemble the full spatial transfer operator");
    opt_full.attach(c_full);

    auto* c_mf = app.add_subcommand("assemble-mf",
                                    "assemble mean-field component operators from factor files");
    opt_mf.attach(c_mf);
    std::vector<std::string> factor_paths;
    c_mf->add_option("--factors", factor_paths, "one factor grid file per subsystem (default: Boltzmann)");

    auto* c_root = app.add_subcommand("roothaan", "run the mean-field self-consistency sweeps");
    opt_root.attach(c_root);

    auto* c_eigs = app.add_subcommand("eigs", "dominant eigenpairs of a stored operator");
    opt_eigs.attach(c_eigs);
    std::string matrix_path;
    double eig_tol = 1e-8;
    c_eigs->add_option("--matrix", matrix_path, "transition matrix file")->required();
    c_eigs->add_option("--tol", eig_tol, "residual tolerance");
    bool dump_vectors = false;
    c_eigs->add_flag("--dump-vectors", dump_vectors, "also write the eigenvectors column-wise as CSV");

    auto* c_cmp = app.add_subcommand("compare",
                                     "compare a product of factor files against a full operator's "
                                     "subdominant eigenfunctions");
    opt_cmp.attach(c_cmp);
    std::string cmp_matrix;
    std::vector<std::string> cmp_factors;
    c_cmp->add_option("--matrix", cmp_matrix, "full transition matrix file")->required();
    c_cmp->add_option("--product", cmp_factors, "factor grid files, one per subsystem, in order")
        ->required();

    auto* c_pb = app.add_subcommand("run-paper-butane", "full butane pipeline at the reference settings");
    opt_pb.attach(c_pb);
    auto* c_p2 = app.add_subcommand("run-paper-2d", "full 2D double-well pipeline");
    opt_p2.attach(c_p2);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_full->parsed()) {
            ExperimentConfig cfg = opt_full.resolve();
            auto model = make_model(cfg);
            StochasticMatrix P = build_full(cfg, *model);
            const std::string path = out_path(cfg, cfg.model + "_full.stm");
            write_matrix(path, P);
            std::cout << "wrote " << path << " (n " << P.n() << ", nnz " << P.matrix().nonZeros()
                      << ", lost " << P.meta().lost_samples << ")\n";
        } else if (c_mf->parsed()) {
            ExperimentConfig cfg = opt_mf.resolve();
            auto model = make_model(cfg);
            const auto& layout = model->layout();
            std::vector<TensorPartition> parts;
            for (int i = 0; i < layout.count(); ++i)
                parts.push_back(TensorPartition::for_subsystem(*model, layout, i, cfg.mf_cells));
            std::vector<SpatialFactor> factors;
            if (factor_paths.empty()) {
                factors = boltzmann_factors(*model, layout, parts, cfg.effective_beta());
            } else {
                if (static_cast<int>(factor_paths.size()) != layout.count())
                    throw ConfigError("need one factor file per subsystem");
                for (int i = 0; i < layout.count(); ++i) {
                    GridFunction g = read_grid_function(factor_paths[static_cast<std::size_t>(i)]);
                    factors.push_back({i, g.grid, g.values, SpatialFactor::Norm::density});
                    factors.back().normalize();
                }
            }
            for (int i = 0; i < layout.count(); ++i) {
                StochasticMatrix S = assemble_mf_component_spatial(
                    *model, layout, i, factors, cfg.effective_beta(), parts[static_cast<std::size_t>(i)],
                    cfg.component_K(), cfg.integrator(), cfg.seed, cfg.threads);
                S.meta().config_hash = config_hash(cfg);
                const std::string path = out_path(cfg, cfg.model + "_mf" + std::to_string(i) + ".stm");
                write_matrix(path, S);
                std::cout << "wrote " << path << " (n " << S.n() << ")\n";
            }
        } else if (c_root->parsed()) {
            ExperimentConfig cfg = opt_root.resolve();
            auto model = make_model(cfg);
            RoothaanResult r = run_roothaan(cfg, *model);
            print_diagnostics(r);
            write_roothaan(cfg, r);
            std::cout << "outputs in " << cfg.outdir << "\n";
        } else if (c_eigs->parsed()) {
            ExperimentConfig cfg = opt_eigs.resolve();
            StochasticMatrix P = read_matrix(matrix_path);
            P.assert_column_stochastic(1e-9);
            SpectralResult r = dominant_eigs(P, cfg.n_eigs, eig_tol);
            const std::string stem = std::filesystem::path(matrix_path).stem().string();
            const std::string path = out_path(cfg, stem + "_eigs.csv");
            write_eigenvalue_csv(path, r);
            for (int t = 0; t < cfg.n_eigs; ++t)
                std::cout << "lambda_" << t + 1 << " = "
                          << r.eigenvalues[static_cast<std::size_t>(t)].real()
                          << (r.is_real[static_cast<std::size_t>(t)] ? "" : " (complex pair)")
                          << "  residual " << r.residuals[static_cast<std::size_t>(t)] << "\n";
            if (dump_vectors) {
                std::ofstream f(out_path(cfg, stem + "_vectors.csv"));
                if (!f) throw IoError("cannot write eigenvector dump");
                for (std::int64_t i = 0; i < P.n(); ++i) {
                    for (int t = 0; t < cfg.n_eigs; ++t)
                        f << (t ? "," : "") << format_double(r.vectors(i, t));
                    f << "\n";
                }
            }
            std::cout << "wrote " << path << "\n";
        } else if (c_cmp->parsed()) {
            ExperimentConfig cfg = opt_cmp.resolve();
            StochasticMatrix P = read_matrix(cmp_matrix);
            P.assert_column_stochastic(1e-9);
            std::vector<SpatialFactor> sel;
            std::vector<GridAxis> axes;
            for (std::size_t i = 0; i < cmp_factors.size(); ++i) {
                GridFunction g = read_grid_function(cmp_factors[i]);
                for (const auto& a : g.grid.axes()) axes.push_back(a);
                sel.push_back({static_cast<int>(i), g.grid, g.values, SpatialFactor::Norm::unit_l2});
            }
            TensorPartition part{TensorGrid(axes)};
            if (part.n() != P.n())
                throw ComparisonError("factor grids do not match the matrix dimension");
            Eigen::VectorXd prod = product_eigenfunction(sel, part);
            SpectralResult full = dominant_eigs(P, cfg.n_eigs);
            Eigen::VectorXd weights = invariant_vector(P);
            double best = -1.0;
            int best_t = -1;
            for (int t = 1; t < cfg.n_eigs; ++t) {
                if (!full.is_real[static_cast<std::size_t>(t)]) continue;
                double c = weighted_cosine(full.vectors.col(t), prod, weights);
                if (c > best) {
                    best = c;
                    best_t = t;
                }
            }
            if (best_t < 0) throw ComparisonError("no real subdominant eigenvector to compare against");
            double sa = sign_agreement(full.vectors.col(best_t), prod, weights);
            std::cout << "best match: lambda_" << best_t + 1 << " = "
                      << full.eigenvalues[static_cast<std::size_t>(best_t)].real() << ", cosine " << best
                      << ", sign agreement " << sa << "\n";
        } else if (c_pb->parsed()) {
            ExperimentConfig cfg = opt_pb.resolve("butane_ua");
            if (cfg.model != "butane_ua") throw ConfigError("run-paper-butane is fixed to butane_ua");
            return run_pipeline(cfg);
        } else if (c_p2->parsed()) {
            ExperimentConfig cfg = opt_p2.resolve("double_well_2d");
            if (cfg.model != "double_well_2d")
                throw ConfigError("run-paper-2d is fixed to double_well_2d");
            return run_pipeline(cfg);
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ComparisonError& e) {
        std::cerr << "comparison error: " << e.what() << "\n";
        return exit_compare;
    } catch (const SpectralError& e) {
        std::cerr << "spectral error: " << e.what() << "\n";
        return exit_spectral;
    } catch (const BlowUpError& e) {
        std::cerr << "integration error: " << e.what() << "\n";
        return exit_assembly;
    } catch (const EvaluationError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return exit_assembly;
    } catch (const DomainError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return exit_model;
    } catch (const ModelConsistencyError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return exit_model;
    } catch (const LayoutError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return exit_model;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_other;
    }
}
