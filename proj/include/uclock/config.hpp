// Flat key-value run configuration for the benchmark runner. Grammar: one
// `key = value` per line, `#` starts a comment, blank lines ignored.
// List-valued keys (circuit, attack) may repeat; `attacks` also accepts a
// comma-separated list. Command-line flags override file values.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uclock/error.hpp"

namespace uclock {

struct RunConfig {
    std::vector<std::string> circuits;
    int frames = 1;
    int k = 2;
    int slack = 0;
    std::uint64_t seed = 1;
    bool greedy_luts = false;

    std::vector<std::string> attacks;
    double budget_sec = 600.0;
    std::string solver = "embedded"; // embedded | external
    std::string external_cmd;        // defaults to $UCLOCK_SAT_SOLVER

    std::string out_dir = "out";
    int workers = 1;
    int guess_trials = 1;

    int appsat_dip_period = 10;
    int appsat_samples = 50;
    double appsat_eps = 0.01;
    double scope_margin = 0.25;
    bool dump_dips = false;

    void set(const std::string& key, const std::string& value, int line_no = 0);
    void validate_config() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in);

} // namespace uclock
