#include "cgw/config.hpp"

#include <fstream>
#include <set>

#include "cgw/error.hpp"

namespace cgw {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown config key: " + where + "." + key);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for config key: " + where + "." + key);
    }
}

// `derived` is the token emitted for a default that depends on the kernel; reading it back
// keeps the default.
template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out, const std::string& where,
              const char* derived = nullptr) {
    if (!j.contains(key)) return;
    if (derived && j.at(key).is_string() && j.at(key).get<std::string>() == derived) {
        out.reset();
        return;
    }
    T v{};
    read(j, key, v, where);
    out = v;
}

}  // namespace

MemoryKernel RunConfig::kernel() const { return normalize ? cgw::normalize(modes) : MemoryKernel(modes); }

GridSpec grid_from_json(const json& j, const GridSpec& defaults, const std::string& where) {
    only_keys(j, {"n_u", "n_w", "history", "memory"}, where);
    GridSpec g = defaults;
    read(j, "n_u", g.n_u, where);
    read(j, "n_w", g.n_w, where);
    std::string memory = std::holds_alternative<ModeReduction>(g.memory) ? "modes" : "history";
    read(j, "memory", memory, where);
    if (memory == "modes") {
        if (j.contains("history")) throw ConfigError(where + ": history given with memory = modes");
        g.memory = ModeReduction{};
    } else if (memory == "history") {
        HistoryParams hp;
        if (const auto* d = std::get_if<HistoryParams>(&defaults.memory)) hp = *d;
        if (j.contains("history")) {
            const json& h = j.at("history");
            const std::string w = where + ".history";
            only_keys(h, {"ratio", "s1", "tail_tol", "J"}, w);
            if (h.contains("ratio")) hp.J.reset();
            read(h, "ratio", hp.ratio, w);
            read_opt(h, "s1", hp.s1, w, "0.01/delta");
            read(h, "tail_tol", hp.tail_tol, w);
            read_opt(h, "J", hp.J, w);
        }
        g.memory = hp;
    } else {
        throw ConfigError("bad value for config key: " + where + ".memory");
    }
    return g;
}

json to_json(const GridSpec& g) {
    json j{{"n_u", g.n_u}, {"n_w", g.n_w}};
    if (const auto* hp = std::get_if<HistoryParams>(&g.memory)) {
        json h{{"ratio", hp->ratio}, {"tail_tol", hp->tail_tol}};
        h["s1"] = hp->s1 ? json(*hp->s1) : json("0.01/delta");
        if (hp->J) h["J"] = *hp->J;
        j["memory"] = "history";
        j["history"] = h;
    } else {
        j["memory"] = "modes";
    }
    return j;
}

RunConfig parse_config(const json& j) {
    RunConfig c;
    only_keys(j, {"kernel", "transfer_scan", "spectrum", "resolvent_scan", "lower_bound", "evolve",
                  "decay_report", "seed", "threads", "out"},
              "config");
    read(j, "seed", c.seed, "config");
    read(j, "threads", c.threads, "config");
    read(j, "out", c.out, "config");
    if (c.threads < 1) throw ConfigError("bad value for config key: config.threads");

    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        only_keys(k, {"modes", "normalize"}, "kernel");
        read(k, "normalize", c.normalize, "kernel");
        if (k.contains("modes")) {
            c.modes.clear();
            const json& m = k.at("modes");
            if (!m.is_array()) throw ConfigError("bad value for config key: kernel.modes");
            for (const auto& p : m) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigError("bad value for config key: kernel.modes (expected [a, b] pairs)");
                c.modes.push_back({p[0].get<double>(), p[1].get<double>()});
            }
        }
    }
    if (j.contains("transfer_scan")) {
        const json& t = j.at("transfer_scan");
        only_keys(t, {"s_max", "n_samples"}, "transfer_scan");
        read(t, "s_max", c.transfer_scan.s_max, "transfer_scan");
        read(t, "n_samples", c.transfer_scan.n_samples, "transfer_scan");
    }
    if (j.contains("spectrum")) {
        const json& t = j.at("spectrum");
        only_keys(t, {"im_min", "im_max", "re_min", "n_re", "n_im"}, "spectrum");
        read(t, "im_min", c.spectrum.im_min, "spectrum");
        read(t, "im_max", c.spectrum.im_max, "spectrum");
        read_opt(t, "re_min", c.spectrum.re_min, "spectrum", "-0.49*delta");
        read(t, "n_re", c.spectrum.n_re, "spectrum");
        read(t, "n_im", c.spectrum.n_im, "spectrum");
    }
    if (j.contains("resolvent_scan")) {
        const json& t = j.at("resolvent_scan");
        auto& r = c.resolvent_scan;
        only_keys(t, {"s_min", "s_max", "n_s", "log_spacing", "peaks", "dense_threshold", "tol", "grid"},
                  "resolvent_scan");
        read(t, "s_min", r.s_min, "resolvent_scan");
        read(t, "s_max", r.s_max, "resolvent_scan");
        read(t, "n_s", r.n_s, "resolvent_scan");
        read(t, "log_spacing", r.log_spacing, "resolvent_scan");
        read(t, "peaks", r.peaks, "resolvent_scan");
        read(t, "dense_threshold", r.dense_threshold, "resolvent_scan");
        read(t, "tol", r.tol, "resolvent_scan");
        if (t.contains("grid")) r.grid = grid_from_json(t.at("grid"), r.grid, "resolvent_scan.grid");
    }
    if (j.contains("lower_bound")) {
        const json& t = j.at("lower_bound");
        only_keys(t, {"n_min", "n_max"}, "lower_bound");
        read(t, "n_min", c.lower_bound.n_min, "lower_bound");
        read(t, "n_max", c.lower_bound.n_max, "lower_bound");
    }
    if (j.contains("evolve")) {
        const json& t = j.at("evolve");
        auto& e = c.evolve;
        only_keys(t, {"t_max", "dt", "datum", "noise", "fit_lo", "fit_hi", "grid"}, "evolve");
        read(t, "t_max", e.t_max, "evolve");
        read(t, "dt", e.dt, "evolve");
        read(t, "datum", e.datum, "evolve");
        read(t, "noise", e.noise, "evolve");
        read(t, "fit_lo", e.fit_lo, "evolve");
        read(t, "fit_hi", e.fit_hi, "evolve");
        if (e.datum != "inverse_applied" && e.datum != "random")
            throw ConfigError("bad value for config key: evolve.datum");
        if (e.noise != "w_white" && e.noise != "raw") throw ConfigError("bad value for config key: evolve.noise");
        if (t.contains("grid")) e.grid = grid_from_json(t.at("grid"), e.grid, "evolve.grid");
    }
    if (j.contains("decay_report")) {
        const json& t = j.at("decay_report");
        auto& d = c.decay_report;
        only_keys(t, {"times", "dt", "grid"}, "decay_report");
        read(t, "times", d.times, "decay_report");
        read(t, "dt", d.dt, "decay_report");
        if (t.contains("grid")) d.grid = grid_from_json(t.at("grid"), d.grid, "decay_report.grid");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json modes = json::array();
    for (const auto& m : c.modes) modes.push_back({m.a, m.b});
    const auto& r = c.resolvent_scan;
    const auto& e = c.evolve;
    return json{
        {"kernel", {{"modes", modes}, {"normalize", c.normalize}}},
        {"transfer_scan", {{"s_max", c.transfer_scan.s_max}, {"n_samples", c.transfer_scan.n_samples}}},
        {"spectrum",
         {{"im_min", c.spectrum.im_min},
          {"im_max", c.spectrum.im_max},
          {"re_min", c.spectrum.re_min ? json(*c.spectrum.re_min) : json("-0.49*delta")},
          {"n_re", c.spectrum.n_re},
          {"n_im", c.spectrum.n_im}}},
        {"resolvent_scan",
         {{"s_min", r.s_min},
          {"s_max", r.s_max},
          {"n_s", r.n_s},
          {"log_spacing", r.log_spacing},
          {"peaks", r.peaks},
          {"dense_threshold", r.dense_threshold},
          {"tol", r.tol},
          {"grid", to_json(r.grid)}}},
        {"lower_bound", {{"n_min", c.lower_bound.n_min}, {"n_max", c.lower_bound.n_max}}},
        {"evolve",
         {{"t_max", e.t_max},
          {"dt", e.dt},
          {"datum", e.datum},
          {"noise", e.noise},
          {"fit_lo", e.fit_lo},
          {"fit_hi", e.fit_hi},
          {"grid", to_json(e.grid)}}},
        {"decay_report",
         {{"times", c.decay_report.times}, {"dt", c.decay_report.dt}, {"grid", to_json(c.decay_report.grid)}}},
        {"seed", c.seed},
        {"threads", c.threads},
        {"out", c.out}};
}

}  // namespace cgw
