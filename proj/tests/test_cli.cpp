#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "visco/cli.hpp"
#include "visco/error.hpp"

using namespace visco;
using namespace visco::cli;

namespace {

constexpr const char* kBase = "gamma = 1\nb1 = 0.05\nb2 = 0.15\nr1 = 0.1\nr2 = 0.3\n";

std::string config_error(std::string_view text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    return {};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("visco_cli_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig config_for(const std::string& extra, const std::string& name) {
    auto c = parse_config(std::string(kBase) + extra);
    c.output = scratch(name).string();
    return c;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("a minimal config takes defaults") {
    const auto c = parse_config(std::string(kBase) + "experiment = spectrum\n");
    CHECK(c.gamma == 1.0);
    CHECK(c.r2 == 0.3);
    CHECK(c.experiment == Experiment::spectrum);
    CHECK(c.N == 20);
    CHECK_FALSE(c.T.has_value());
    CHECK(c.trials == 10);
    CHECK(c.seed == 1);
    CHECK(c.epsilon == 0.01);
    CHECK(c.output == "out");
    CHECK(c.echo.size() == 6);
}

TEST_CASE("comments, blank lines and every optional key") {
    const auto c = parse_config(std::string("# header\n\n") + kBase +
                                "experiment = control   # trailing\nN = 12\nT = 9.5\ntrials = 4\nseed = 77\n"
                                "epsilon = 0.2\noutput = runs/a\ndecay = 1.5\ntikhonov = 0\ntarget = mode1-velocity\n");
    CHECK(c.experiment == Experiment::control);
    CHECK(c.N == 12);
    CHECK(*c.T == 9.5);
    CHECK(c.trials == 4);
    CHECK(c.seed == 77);
    CHECK(c.epsilon == 0.2);
    CHECK(c.output == "runs/a");
    CHECK(*c.decay == 1.5);
    CHECK(c.target == ControlTarget::mode1_velocity);
    CHECK(parse_config(std::string(kBase) + "experiment = control\nT = auto\n").T.has_value() == false);
}

TEST_CASE("experiment names") {
    CHECK(to_string(Experiment::ingham_inverse) == "ingham-inverse");
    CHECK(parse_config(std::string(kBase) + "experiment = ingham-direct\n").experiment == Experiment::ingham_direct);
}

TEST_CASE("errors name the line and the field") {
    const auto unknown = config_error(std::string(kBase) + "experiment = modal\nspeed = 3\n");
    CHECK(unknown.find("line 7") != std::string::npos);
    CHECK(unknown.find("speed") != std::string::npos);

    const auto bad = config_error("gamma = fast\n");
    CHECK(bad.find("line 1") != std::string::npos);
    CHECK(bad.find("gamma") != std::string::npos);

    const auto dup = config_error(std::string(kBase) + "b1 = 0.1\nexperiment = modal\n");
    CHECK(dup.find("line 6") != std::string::npos);
    CHECK(dup.find("b1") != std::string::npos);

    CHECK(config_error(std::string(kBase)).find("experiment") != std::string::npos);
    CHECK(config_error(std::string(kBase) + "experiment = modal\nN = -3\n").find("'N'") != std::string::npos);
    CHECK(config_error(std::string(kBase) + "experiment = modal\nepsilon = 1\n").find("epsilon") != std::string::npos);
    CHECK(config_error(std::string(kBase) + "experiment = dance\n").find("dance") != std::string::npos);
    CHECK(config_error(std::string(kBase) + "experiment = modal\nno equals sign\n").find("line 7") != std::string::npos);
    CHECK(config_error(std::string(kBase) + "experiment =\n").find("experiment") != std::string::npos);
}

TEST_CASE("format and hashing") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("spectrum run writes one row per mode and a checked manifest") {
    auto c = config_for("experiment = spectrum\nN = 100\n", "spectrum");
    const auto r = run(c);
    CHECK(r.exit_code == 0);
    CHECK(r.failures.empty());
    const std::filesystem::path dir(c.output);
    const auto roots = slurp(dir / "roots.csv");
    CHECK(std::count(roots.begin(), roots.end(), '\n') == 101);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["experiment"] == "spectrum");
    CHECK(manifest["exit_code"] == 0);
    CHECK(manifest["resolved"]["N"] == 100);
    REQUIRE(manifest["files"].size() == r.files.size());
    for (const auto& f : manifest["files"]) {
        const auto bytes = slurp(dir / f["name"].get<std::string>());
        CHECK(f["bytes"] == bytes.size());
        CHECK(f["sha256"] == sha256_hex(bytes));
    }
}

TEST_CASE("every experiment runs clean on the canonical model") {
    for (const char* e : {"modal", "simulate", "ingham-inverse", "ingham-direct"}) {
        CAPTURE(e);
        auto c = config_for(std::string("experiment = ") + e + "\nN = 10\ntrials = 3\n", std::string("all_") + e);
        const auto r = run(c);
        CHECK(r.exit_code == 0);
        CHECK(r.error.empty());
        CHECK_FALSE(r.files.empty());
    }
}

TEST_CASE("control on a short horizon reports conditioning failure") {
    auto c = config_for("experiment = control\nT = 1\n", "short");
    const auto r = run(c);
    CHECK(r.exit_code == 5);
    CHECK(r.error.find("NotPositiveDefinite") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(std::filesystem::path(c.output) / "manifest.json"));
    CHECK(manifest["exit_code"] == 5);
}

TEST_CASE("parameter constraint failures exit with 3") {
    auto c = parse_config("gamma = 1\nb1 = 0.5\nb2 = 0.5\nr1 = 0.1\nr2 = 0.3\nexperiment = spectrum\n");
    c.output = scratch("constraint").string();
    CHECK(run(c).exit_code == 3);
}

TEST_CASE("runs are deterministic in the seed") {
    auto a = config_for("experiment = control\nN = 8\ntarget = random\nseed = 5\n", "det_a");
    auto b = config_for("experiment = control\nN = 8\ntarget = random\nseed = 5\n", "det_b");
    const auto ra = run(a);
    const auto rb = run(b);
    REQUIRE(ra.exit_code == 0);
    REQUIRE(ra.files == rb.files);
    for (const auto& f : ra.files) CHECK(slurp(std::filesystem::path(a.output) / f) == slurp(std::filesystem::path(b.output) / f));
}

}
