#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mmflux/entropy.hpp"
#include "mmflux/measures.hpp"
#include "mmflux/problem.hpp"

namespace mmflux {

/// Second initial datum for the two-solution checks of `verify` and `ym`.
struct PairConfig {
    InitialDatum u0;
    PairKind kind = PairKind::contraction;
    bool operator==(const PairConfig&) const = default;
};

/// Root of a configuration file: the problem plus everything the subcommands need.
struct RunConfig {
    ProblemSpec problem;
    std::vector<std::size_t> cells{256};  // grid sizes; solve/ym/parametrize use the first
    std::size_t snapshots = 11;            // evenly spaced in time, both ends included
    std::size_t k_count = 33;
    std::vector<double> k_extra;  // appended to the default v-space k set
    std::vector<std::pair<double, double>> battery_radii{{0.125, 0.125}, {0.2, 0.2}};
    std::vector<std::string> forms{"SEMI_PLUS", "SEMI_MINUS", "SGN", "N1", "N2"};
    std::vector<double> j_schedule;
    std::vector<double> ell_schedule;
    std::vector<double> m_schedule;
    double fixed_index = 1.0;  // ell during the m schedule, m during the ell schedule
    std::optional<PairConfig> pair;
    MacroSpec macro;
    double param_slope = 1.0;
    double param_s_lo = -4.0;
    double param_s_hi = 4.0;
    std::size_t param_samples = 401;
    std::string output = "out";

    bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig load_config(const std::string& path);
RunConfig parse_config(const nlohmann::json& j);

PairKind pair_kind_from_string(const std::string& s);

}  // namespace mmflux
