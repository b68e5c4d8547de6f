#include "uclock/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

namespace uclock {

namespace {

std::string trim(const std::string& s)
{
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string where(int line_no)
{
    return line_no > 0 ? "config line " + std::to_string(line_no) + ": " : "config: ";
}

int to_int(const std::string& v, const std::string& key, int line_no)
{
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        throw InputError(where(line_no) + "bad integer for " + key + ": " + v);
    }
}

double to_double(const std::string& v, const std::string& key, int line_no)
{
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw InputError(where(line_no) + "bad number for " + key + ": " + v);
    }
}

bool to_bool(const std::string& v, const std::string& key, int line_no)
{
    if (v == "1" || v == "true" || v == "yes" || v == "on")
        return true;
    if (v == "0" || v == "false" || v == "no" || v == "off")
        return false;
    throw InputError(where(line_no) + "bad boolean for " + key + ": " + v);
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value, int line_no)
{
    if (key == "circuit") {
        circuits.push_back(value);
    } else if (key == "frames") {
        frames = to_int(value, key, line_no);
    } else if (key == "k") {
        k = to_int(value, key, line_no);
    } else if (key == "slack") {
        slack = to_int(value, key, line_no);
    } else if (key == "seed") {
        try {
            seed = std::stoull(value);
        } catch (const std::exception&) {
            throw InputError(where(line_no) + "bad seed: " + value);
        }
    } else if (key == "greedy_luts") {
        greedy_luts = to_bool(value, key, line_no);
    } else if (key == "attack") {
        attacks.push_back(value);
    } else if (key == "attacks") {
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty())
                attacks.push_back(trim(item));
    } else if (key == "budget_sec") {
        budget_sec = to_double(value, key, line_no);
    } else if (key == "solver") {
        solver = value;
    } else if (key == "external_cmd") {
        external_cmd = value;
    } else if (key == "out") {
        out_dir = value;
    } else if (key == "workers") {
        workers = to_int(value, key, line_no);
    } else if (key == "trials") {
        guess_trials = to_int(value, key, line_no);
    } else if (key == "appsat_dip_period") {
        appsat_dip_period = to_int(value, key, line_no);
    } else if (key == "appsat_samples") {
        appsat_samples = to_int(value, key, line_no);
    } else if (key == "appsat_eps") {
        appsat_eps = to_double(value, key, line_no);
    } else if (key == "scope_margin") {
        scope_margin = to_double(value, key, line_no);
    } else if (key == "dump_dips") {
        dump_dips = to_bool(value, key, line_no);
    } else {
        throw InputError(where(line_no) + "unknown key: " + key);
    }
}

void RunConfig::validate_config() const
{
    if (frames < 1)
        throw InputError("config: frames must be >= 1");
    if (budget_sec <= 0)
        throw InputError("config: budget_sec must be > 0");
    if (workers < 1)
        throw InputError("config: workers must be >= 1");
    if (solver != "embedded" && solver != "external")
        throw InputError("config: solver must be embedded or external");
    const std::vector<std::string> known = {"sat",  "appsat", "scope", "guess-random",
                                            "guess-hillclimb"};
    for (const auto& a : attacks)
        if (std::find(known.begin(), known.end(), a) == known.end())
            throw InputError("config: unknown attack id: " + a);
}

RunConfig parse_config(std::istream& in)
{
    RunConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::string entry = trim(line);
        if (entry.empty())
            continue;
        auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw InputError(where(line_no) + "expected key = value");
        std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        if (key.empty() || value.empty())
            throw InputError(where(line_no) + "expected key = value");
        config.set(key, value, line_no);
    }
    return config;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open config file: " + path);
    return parse_config(in);
}

} // namespace uclock
