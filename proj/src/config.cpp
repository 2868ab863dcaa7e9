#include "mmflux/config.hpp"

#include <fstream>
#include <set>

#include "mmflux/errors.hpp"

namespace mmflux {

using json = nlohmann::json;

namespace {

void require_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : j.items()) {
        if (!ok.count(item.key())) throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

std::vector<double> schedule_from(const json& j, const char* name) {
    if (!j.contains(name)) return {};
    return j.at(name).get<std::vector<double>>();
}

}  // namespace

PairKind pair_kind_from_string(const std::string& s) {
    for (PairKind k : {PairKind::contraction, PairKind::comparison, PairKind::kato}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown pair kind '" + s + "'");
}

void to_json(json& j, const RunConfig& c) {
    json radii = json::array();
    for (const auto& [rt, rx] : c.battery_radii) radii.push_back({rt, rx});
    j = json{{"problem", c.problem},
             {"grid", {{"cells", c.cells}}},
             {"snapshots", c.snapshots},
             {"entropy", {{"k_count", c.k_count}, {"k_extra", c.k_extra}, {"battery_radii", radii}, {"forms", c.forms}}},
             {"schedules",
              {{"j", c.j_schedule}, {"ell", c.ell_schedule}, {"m", c.m_schedule}, {"fixed_index", c.fixed_index}}},
             {"ym", {{"block_t", c.macro.block_t}, {"block_x", c.macro.block_x}, {"min_samples", c.macro.min_samples}}},
             {"parametrize",
              {{"slope", c.param_slope}, {"s_range", {c.param_s_lo, c.param_s_hi}}, {"samples", c.param_samples}}},
             {"output", c.output}};
    if (c.pair) j["pair"] = {{"u0", c.pair->u0}, {"kind", to_string(c.pair->kind)}};
}

void from_json(const json& j, RunConfig& c) {
    c = RunConfig{};
    try {
        require_keys(j, "config",
                     {"problem", "grid", "snapshots", "entropy", "schedules", "pair", "ym", "parametrize", "output"});
        c.problem = j.at("problem").get<ProblemSpec>();
        if (j.contains("grid")) {
            require_keys(j.at("grid"), "grid", {"cells"});
            c.cells = j.at("grid").at("cells").get<std::vector<std::size_t>>();
        }
        c.snapshots = j.value("snapshots", c.snapshots);
        if (j.contains("entropy")) {
            const json& e = j.at("entropy");
            require_keys(e, "entropy", {"k_count", "k_extra", "battery_radii", "forms"});
            c.k_count = e.value("k_count", c.k_count);
            if (e.contains("k_extra")) c.k_extra = e.at("k_extra").get<std::vector<double>>();
            if (e.contains("battery_radii")) {
                c.battery_radii.clear();
                for (const auto& r : e.at("battery_radii")) {
                    const auto v = r.get<std::vector<double>>();
                    if (v.size() != 2) throw ConfigError("entropy.battery_radii entries must be [rt, rx]");
                    c.battery_radii.emplace_back(v[0], v[1]);
                }
            }
            if (e.contains("forms")) c.forms = e.at("forms").get<std::vector<std::string>>();
        }
        if (j.contains("schedules")) {
            const json& s = j.at("schedules");
            require_keys(s, "schedules", {"j", "ell", "m", "fixed_index"});
            c.j_schedule = schedule_from(s, "j");
            c.ell_schedule = schedule_from(s, "ell");
            c.m_schedule = schedule_from(s, "m");
            c.fixed_index = s.value("fixed_index", c.fixed_index);
        }
        if (j.contains("pair")) {
            const json& p = j.at("pair");
            require_keys(p, "pair", {"u0", "kind"});
            PairConfig pc;
            pc.u0 = p.at("u0").get<InitialDatum>();
            if (p.contains("kind")) pc.kind = pair_kind_from_string(p.at("kind").get<std::string>());
            c.pair = pc;
        }
        if (j.contains("ym")) {
            const json& y = j.at("ym");
            require_keys(y, "ym", {"block_t", "block_x", "min_samples"});
            c.macro.block_t = y.value("block_t", c.macro.block_t);
            c.macro.block_x = y.value("block_x", c.macro.block_x);
            c.macro.min_samples = y.value("min_samples", c.macro.min_samples);
        }
        if (j.contains("parametrize")) {
            const json& p = j.at("parametrize");
            require_keys(p, "parametrize", {"slope", "s_range", "samples"});
            c.param_slope = p.value("slope", c.param_slope);
            if (p.contains("s_range")) {
                const auto r = p.at("s_range").get<std::vector<double>>();
                if (r.size() != 2) throw ConfigError("parametrize.s_range must be [lo, hi]");
                c.param_s_lo = r[0];
                c.param_s_hi = r[1];
            }
            c.param_samples = p.value("samples", c.param_samples);
        }
        c.output = j.value("output", c.output);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    if (c.cells.empty()) throw ConfigError("grid.cells must not be empty");
    for (std::size_t n : c.cells) {
        if (n == 0) throw ConfigError("grid.cells entries must be positive");
    }
    if (c.snapshots < 2) throw ConfigError("snapshots must be >= 2");
    if (c.k_count < 2) throw ConfigError("entropy.k_count must be >= 2");
    for (const auto& [rt, rx] : c.battery_radii) {
        if (!(rt > 0.0) || !(rx > 0.0)) throw ConfigError("entropy.battery_radii must be positive");
    }
    for (const auto& f : c.forms) {
        try {
            (void)form_from_string(f);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    if (!(c.fixed_index >= 1.0)) throw ConfigError("schedules.fixed_index must be >= 1");
    if (c.macro.block_t == 0 || c.macro.block_x == 0) throw ConfigError("ym blocks must be positive");
    if (!(c.param_s_lo < c.param_s_hi) || c.param_samples < 2) {
        throw ConfigError("parametrize needs s_range lo < hi and samples >= 2");
    }
    if (c.output.empty()) throw ConfigError("output must not be empty");
}

RunConfig parse_config(const json& j) { return j.get<RunConfig>(); }

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace mmflux
