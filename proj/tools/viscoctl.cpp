#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "visco/cli.hpp"
#include "visco/error.hpp"
#include "visco/model.hpp"
#include "visco/spectrum.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
    using namespace visco;
    try {
        cli::RunConfig config = cli::load_config(config_path);
        if (!out_dir.empty()) config.output = out_dir;
        if (seed) config.seed = *seed;
        const auto result = cli::run(config);
        for (const auto& f : result.files) std::cout << "wrote " << config.output << "/" << f << '\n';
        for (const auto& f : result.failures) std::cerr << "assertion failed: " << f << '\n';
        if (!result.error.empty()) std::cerr << result.error << '\n';
        return result.exit_code;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_code(e.kind());
    }
}

int check_params(double gamma, double b1, double b2, double r1, double r2) {
    using namespace visco;
    try {
        const ModelParams p = validate_params(gamma, b1, b2, r1, r2);
        std::cout << "ok\n";
        std::cout << "strong condition (3/2)(b1+b2) < r1+r2: " << (p.strong_condition() ? "yes" : "no") << '\n';
        const auto limits = spectral_limits(p, 100);
        std::cout << "gap " << cli::format_double(limits.gap) << ", alpha_omega " << cli::format_double(limits.alpha_omega)
                  << '\n';
        try {
            std::cout << "T0 " << cli::format_double(control_time_threshold(limits)) << '\n';
        } catch (const Error& e) {
            std::cout << "T0 undefined: " << e.what() << '\n';
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_code(e.kind());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral experiments for the two-kernel viscoelastic wave equation"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    run->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (overrides `output`)");
    run->add_option("--seed", seed, "Seed (overrides `seed`)");

    auto* check = app.add_subcommand("check-params", "Validate model parameters");
    double gamma = 0, b1 = 0, b2 = 0, r1 = 0, r2 = 0;
    check->add_option("--gamma", gamma)->required();
    check->add_option("--b1", b1)->required();
    check->add_option("--b2", b2)->required();
    check->add_option("--r1", r1)->required();
    check->add_option("--r2", r2)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : visco::exit_code(visco::ErrorKind::Config);
    }

    if (*run) return run_command(config_path, out_dir, seed);
    return check_params(gamma, b1, b2, r1, r2);
}
