// Runs the built corrheston binary on small configs.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "experiments.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "corrheston_cli_tests";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = std::string(CORRHESTON_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

const std::string kSmile = R"(experiment = smile

[market]
spot = 1

[model]
theta = 0.01
alpha = 0.3
beta = 2
rho_bar = 0
eta_grid = 0, 0.4

[sweep]
expiry = 0.25
strike_min = 0.9
strike_max = 1.1
strike_count = 5
)";

}  // namespace

TEST(Cli, ListAndVersion) {
    EXPECT_EQ(run("--list"), 0);
    EXPECT_EQ(run("--version"), 0);
}

TEST(Cli, UnknownExperimentIsValidationError) {
    const fs::path cfg = write_config("smile.ini", kSmile);
    EXPECT_EQ(run("no-such-thing --config " + cfg.string()), 2);
}

TEST(Cli, ByteIdenticalReruns) {
    const fs::path cfg = write_config("smile.ini", kSmile);
    const fs::path a = scratch_dir() / "a.csv";
    const fs::path b = scratch_dir() / "b.csv";
    ASSERT_EQ(run("smile --config " + cfg.string() + " --out " + a.string()), 0);
    ASSERT_EQ(run("smile --config " + cfg.string() + " --out " + b.string()), 0);
    const std::string text = slurp(a);
    EXPECT_FALSE(text.empty());
    EXPECT_EQ(text, slurp(b));
    EXPECT_TRUE(fs::exists(a.string() + ".manifest.json"));
    EXPECT_NE(slurp(a.string() + ".manifest.json").find("\"status\""), std::string::npos);
}

TEST(Cli, EmptyEtaGridFails) {
    std::string text = kSmile;
    text.replace(text.find("eta_grid = 0, 0.4"), 17, "eta_grid =");
    const fs::path cfg = write_config("empty_grid.ini", text);
    EXPECT_NE(run("smile --config " + cfg.string() + " --out " + (scratch_dir() / "e.csv").string()), 0);
}

TEST(Cli, UnknownKeyFails) {
    const fs::path cfg = write_config("typo.ini", kSmile + "\n[output]\npaht = x.csv\n");
    EXPECT_EQ(run("smile --config " + cfg.string()), 2);
}

TEST(Cli, ShippedConfigsLoad) {
    for (const auto& entry : fs::directory_iterator(CORRHESTON_CONFIG_DIR)) {
        if (entry.path().extension() != ".ini") continue;
        std::ifstream in(entry.path());
        std::string first;
        std::getline(in, first);
        const std::string name = first.substr(first.find('=') + 2);
        EXPECT_NO_THROW((void)corrheston::cli::load_config(entry.path(), name)) << entry.path();
    }
}

TEST(Cli, KTauRuns) {
    const fs::path out = scratch_dir() / "k.csv";
    ASSERT_EQ(run(std::string("k-tau --config ") + CORRHESTON_CONFIG_DIR + "/k_tau.ini --out " +
                  out.string()),
              0);
    EXPECT_NE(slurp(out).find('\n'), std::string::npos);
}

TEST(CsvWriter, ShortestRoundTripDoubles) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) {
        const std::string s = corrheston::cli::format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(back, x) << s;
    }
    EXPECT_EQ(corrheston::cli::format_double(0.25), "0.25");
}
