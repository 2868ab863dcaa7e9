#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mmflux/config.hpp"
#include "mmflux/monotone.hpp"

namespace mmflux::testing {

inline std::string config_path(const std::string& name) { return std::string(MMFLUX_CONFIG_DIR) + "/" + name; }
inline std::string data_path(const std::string& name) { return std::string(MMFLUX_TEST_DATA_DIR) + "/" + name; }

/// Random maximal monotone graph: 1-4 breakpoints in [-3, 3], nonnegative
/// interior slopes, jumps with probability 1/2, tails in [0, 3] (zero tails
/// with probability 1/8 each side).
inline MonotoneGraph random_graph(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = count(rng);
    std::vector<double> bps;
    for (int i = 0; i < n; ++i) bps.push_back(pos(rng));
    std::sort(bps.begin(), bps.end());
    for (std::size_t i = 1; i < bps.size(); ++i) {
        if (bps[i] - bps[i - 1] < 1e-3) bps[i] = bps[i - 1] + 1e-3;
    }
    std::vector<double> left, right;
    double v = 4.0 * unit(rng) - 2.0;
    for (int i = 0; i < n; ++i) {
        if (i > 0) v += 2.0 * unit(rng) * (bps[i] - bps[i - 1]);
        left.push_back(v);
        if (unit(rng) < 0.5) v += 2.0 * unit(rng);
        right.push_back(v);
    }
    auto tail = [&] { return unit(rng) < 0.125 ? 0.0 : 3.0 * unit(rng); };
    const double tl = tail();
    const double tr = tail();
    return MonotoneGraph(bps, left, right, tl, tr);
}

}  // namespace mmflux::testing
