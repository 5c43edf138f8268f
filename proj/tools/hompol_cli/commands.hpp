#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hompol::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfigError = 2,
    kIoError = 3,
    kDataError = 4,
    kNotConverged = 5,
    kDegenerate = 6,
    kInternal = 7,
};

/// A post-computation sanity check failed (e.g. probabilities off [0, 1]).
class InternalCheckFailed : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::string command;
    std::filesystem::path config;
    std::filesystem::path out_dir = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

const std::vector<std::string> &command_names();

/// 64-bit FNV-1a, printed as 16 hex digits in sidecars.
std::uint64_t fnv1a64(std::string_view text);

/// Runs one command; throws on failure.
void execute(const RunOptions &options, std::ostream &log);

/// Runs one command and maps failures onto exit codes, writing a one-line
/// diagnostic to `err`.
int run(const RunOptions &options, std::ostream &log, std::ostream &err);

} // namespace hompol::cli
