#ifndef MFTO_CONFIG_HPP
#define MFTO_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mfto/integrate.hpp"
#include "mfto/sampling.hpp"

namespace mfto {

// One experiment = model + discretization + propagation + ensemble settings.
// Serialized as JSON; the FNV-1a hash of the canonical dump stamps output
// files so results can be traced back to their settings.
struct ExperimentConfig {
    std::string model = "double_well_2d";
    std::vector<int> cells;       // full-partition cells per coordinate
    int mf_cells = 32;            // per-dimension cells of each subsystem partition
    int K = 32;                   // Monte-Carlo samples per cell
    int mf_K = 0;                 // samples per cell for component maps; 0: same as K
    double T = 0.1;               // propagation time
    int steps = 10;
    std::string scheme = "explicit-euler";
    std::uint64_t seed = 2024;
    double temperature = 0.0;     // Kelvin; 0 means use beta directly
    double beta = 1.0;            // inverse temperature when temperature == 0
    std::string convention = "paper";
    int sweeps = 10;              // self-consistency sweeps
    double coupling = 1.0;        // interaction strength knob (models that have one)
    int threads = 0;              // 0: hardware concurrency
    int n_eigs = 3;
    std::string outdir = ".";

    IntegratorSpec integrator() const { return {scheme_from_name(scheme), steps, T}; }
    int component_K() const { return mf_K > 0 ? mf_K : K; }
    double effective_beta() const {
        return temperature > 0.0 ? units::beta_from_temperature(temperature) : beta;
    }
    MarginalConvention marginal_convention() const {
        if (convention == "paper") return MarginalConvention::paper;
        if (convention == "exact-marginal") return MarginalConvention::exact_marginal;
        throw ConfigError("unknown marginal convention: " + convention);
    }
};

std::string to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// 16-hex-digit FNV-1a of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& c);

// Named parameter sets for the bundled models.
ExperimentConfig preset_config(const std::string& name);

}  // namespace mfto

#endif
