#include "mfto/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mfto {

namespace {
using nlohmann::json;
}

std::string to_json(const ExperimentConfig& c) {
    json j;
    j["model"] = c.model;
    j["cells"] = c.cells;
    j["mf_cells"] = c.mf_cells;
    j["K"] = c.K;
    j["mf_K"] = c.mf_K;
    j["T"] = c.T;
    j["steps"] = c.steps;
    j["scheme"] = c.scheme;
    j["seed"] = c.seed;
    j["temperature"] = c.temperature;
    j["beta"] = c.beta;
    j["convention"] = c.convention;
    j["sweeps"] = c.sweeps;
    j["coupling"] = c.coupling;
    j["threads"] = c.threads;
    j["n_eigs"] = c.n_eigs;
    j["outdir"] = c.outdir;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        if (j.contains("model")) c.model = j["model"].get<std::string>();
        if (j.contains("cells")) c.cells = j["cells"].get<std::vector<int>>();
        if (j.contains("mf_cells")) c.mf_cells = j["mf_cells"].get<int>();
        if (j.contains("K")) c.K = j["K"].get<int>();
        if (j.contains("mf_K")) c.mf_K = j["mf_K"].get<int>();
        if (j.contains("T")) c.T = j["T"].get<double>();
        if (j.contains("steps")) c.steps = j["steps"].get<int>();
        if (j.contains("scheme")) c.scheme = j["scheme"].get<std::string>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("temperature")) c.temperature = j["temperature"].get<double>();
        if (j.contains("beta")) c.beta = j["beta"].get<double>();
        if (j.contains("convention")) c.convention = j["convention"].get<std::string>();
        if (j.contains("sweeps")) c.sweeps = j["sweeps"].get<int>();
        if (j.contains("coupling")) c.coupling = j["coupling"].get<double>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("n_eigs")) c.n_eigs = j["n_eigs"].get<int>();
        if (j.contains("outdir")) c.outdir = j["outdir"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field type: ") + e.what());
    }
    if (c.K < 1 || c.mf_K < 0 || c.steps < 1 || c.sweeps < 1 || c.mf_cells < 1 || c.n_eigs < 1)
        throw ConfigError("config counts must be positive");
    scheme_from_name(c.scheme);  // validates
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json(ss.str());
}

std::string config_hash(const ExperimentConfig& c) {
    const std::string s = to_json(c);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "butane_ua") {
        c.model = "butane_ua";
        c.cells = {32, 32, 32};
        c.mf_cells = 32;
        c.K = 32;
        c.mf_K = 32768;
        c.T = 0.5e-13;
        c.steps = 10;
        c.scheme = "explicit-euler";
        c.temperature = 300.0;
        c.sweeps = 10;
        c.n_eigs = 4;
        return c;
    }
    if (name == "double_well_2d") {
        c.model = "double_well_2d";
        c.cells = {32, 32};
        c.mf_cells = 32;
        c.K = 256;
        c.mf_K = 8192;
        c.T = 3.0;
        c.steps = 300;
        c.scheme = "rk4";
        c.temperature = 0.0;
        c.beta = 2.0;
        c.coupling = 1.0;
        c.sweeps = 10;
        c.n_eigs = 4;
        return c;
    }
    throw ConfigError("unknown preset: " + name);
}

}  // namespace mfto
