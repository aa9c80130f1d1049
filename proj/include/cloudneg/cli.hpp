#pragma once

// Command-line front end: argument parsing and verb execution.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cloudneg {

enum class Verb { Run, Validate, Report };

struct Command {
    Verb verb = Verb::Run;
    std::filesystem::path scenario;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out = "out";
    std::filesystem::path transcript;
    int verbosity = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
    UsageError(const std::string& message, bool help)
        : std::runtime_error(message), help_(help) {}
    /// True when the user asked for help; the message is the help text.
    bool help() const noexcept { return help_; }

private:
    bool help_;
};

/// `args` excludes the program name. Throws UsageError.
Command parse_args(const std::vector<std::string>& args);

/// Human summary goes to `out`, diagnostics to `err`.
int execute(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse_args + execute with usage errors mapped to exit code 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cloudneg
