#pragma once
// Subcommands of contact-reduce. Each returns a report; main_entry maps reports and errors to
// exit codes 0 (pass), 1 (check or compare failure), 2 (usage or schema error), 3 (numerical
// failure).
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "cr/integrate.hpp"

namespace cr::cli {

struct Options {
    std::filesystem::path config;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    bool quiet = false;
};

struct ReportLine {
    std::string key;
    double value = 0.0;
    std::optional<double> tol;   // checked as value <= tol
    bool pass = true;
};

struct RunReport {
    std::string command;
    std::vector<ReportLine> lines;
    std::vector<std::pair<std::string, std::string>> info;
    bool numerical_failure = false;
    double seconds = 0.0;

    void metric(const std::string& key, double value);
    void check(const std::string& key, double value, double tol);
    void note(const std::string& key, const std::string& text);
    bool pass() const;
    std::string str() const;
};

struct Simulation {
    Trajectory traj;
    Vec x0;
    std::string target;
};

Simulation simulate(const ScenarioConfig& cfg, const Options& opts = {});

RunReport cmd_check(const ScenarioConfig& cfg, const Options& opts);
RunReport cmd_reduce(const ScenarioConfig& cfg, const Options& opts);
RunReport cmd_run(const ScenarioConfig& cfg, const Options& opts);
RunReport cmd_compare(const ScenarioConfig& cfg, const Options& opts);
RunReport cmd_sweep(const ScenarioConfig& cfg, const Options& opts);

int exit_code(const RunReport& report);

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cr::cli
