#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace visco::cli {

enum class Experiment { spectrum, modal, simulate, ingham_inverse, ingham_direct, control };

std::string_view to_string(Experiment e);

/// Targets of the control experiment: (e₁, 0), (0, e₁) or a random L² × H^{-1} pair.
enum class ControlTarget { mode1_value, mode1_velocity, random };

struct RunConfig {
    double gamma = 0.0, b1 = 0.0, b2 = 0.0, r1 = 0.0, r2 = 0.0;
    Experiment experiment = Experiment::spectrum;
    int N = 20;
    std::optional<double> T; ///< empty means auto, 1.5·T₀
    int trials = 10;
    std::uint64_t seed = 1;
    double epsilon = 0.01;
    std::string output = "out";
    std::optional<double> decay;
    double tikhonov = 0.0;
    ControlTarget target = ControlTarget::mode1_value;

    /// key = value pairs as read, in file order, for the manifest.
    std::vector<std::pair<std::string, std::string>> echo;
};

/// Flat `key = value` lines with `#` comments. Throws Error(Config) with line and field.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

struct RunResult {
    int exit_code = 0;
    std::vector<std::string> files;     ///< written CSVs, relative to the output directory
    std::vector<std::string> failures;  ///< failed embedded assertions
    std::string error;                  ///< message of the error that stopped the run
};

/// Runs the experiment, writes its CSVs and manifest.json into config.output.
/// Exit code 0 iff every embedded assertion passed; errors map through exit_code(ErrorKind).
RunResult run(const RunConfig& config);

/// 17 significant digits, shortest form not attempted.
std::string format_double(double v);

std::string sha256_hex(std::string_view bytes);

} // namespace visco::cli
