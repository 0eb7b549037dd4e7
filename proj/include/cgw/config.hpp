#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgw/kernel.hpp"
#include "cgw/operator.hpp"
#include "json.hpp"

namespace cgw {

struct TransferScanConfig {
    double s_max = 1000.0;
    int n_samples = 10000;
};

struct SpectrumConfig {
    double im_min = 0.5;
    double im_max = 50.0 * 3.141592653589793;
    std::optional<double> re_min;  // default −0.49 δ
    int n_re = 8;
    int n_im = 0;
};

struct ResolventScanConfig {
    double s_min = 20.0;
    double s_max = 400.0;
    int n_s = 40;
    bool log_spacing = true;
    bool peaks = false;  // sample resonance maxima instead of the plain grid
    int dense_threshold = 800;
    double tol = 1e-8;
    GridSpec grid{1024, 64, HistoryParams{}};
};

struct LowerBoundConfig {
    int n_min = 10;
    int n_max = 100;
};

struct EvolveConfig {
    double t_max = 100.0;
    double dt = 0.01;
    std::string datum = "inverse_applied";  // or "random"
    std::string noise = "w_white";          // or "raw"
    double fit_lo = 10.0;
    double fit_hi = 100.0;
    GridSpec grid{128, 128, HistoryParams{1.15, std::nullopt, 1e-8, 64}};
};

struct DecayReportConfig {
    std::vector<double> times{0, 10, 20, 30, 50, 70, 100};
    double dt = 0.01;
    GridSpec grid{48, 48, HistoryParams{1.15, std::nullopt, 1e-8, 24}};
};

struct RunConfig {
    std::vector<Mode> modes{{1.0, 1.0}};
    bool normalize = false;
    TransferScanConfig transfer_scan;
    SpectrumConfig spectrum;
    ResolventScanConfig resolvent_scan;
    LowerBoundConfig lower_bound;
    EvolveConfig evolve;
    DecayReportConfig decay_report;
    unsigned seed = 1;
    int threads = 1;
    std::string out = ".";

    MemoryKernel kernel() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j, const GridSpec& defaults, const std::string& where);

}  // namespace cgw
