#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sis/bounds.hpp"
#include "sis/model.hpp"

// Command-line frontend. One subcommand per capability; every numeric
// flag is validated against the type invariants before any computation
// starts. Exit statuses: 0 success, 1 usage error, 2 computation error,
// 3 sandwich violation.

namespace sis::cli {

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// --help and --version leave through here with exit status 0.
struct HelpRequested {
    std::string text;
};

enum class Command { meanfield, master, bounds, ssa, sandwich, converge, phase };

struct RunConfig {
    Command command = Command::sandwich;
    ModelParams params;
    double t_end = 10.0;
    int num_points = 201;
    std::filesystem::path out;  // defaults to <subcommand>.csv
    long long reps = 10000;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    std::vector<int> n_list = {20, 40, 80, 160, 320, 640};
    bool with_ssa = false;              // converge: add the sampled-MSE column
    bool retain_distributions = false;  // master: dump the full distributions too
    Z2Forcing forcing = Z2Forcing::loose;
};

// args do not include the program name.
RunConfig parse_args(const std::vector<std::string>& args);

int run(const RunConfig& config);

int main(int argc, char** argv);

}  // namespace sis::cli
