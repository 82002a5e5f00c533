#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "holemem/analysis.hpp"
#include "holemem/csv.hpp"
#include "holemem_cli/commands.hpp"
#include "holemem_cli/config.hpp"

namespace fs = std::filesystem;
using namespace holemem;
using namespace holemem::cli;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("holemem_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Runs the installed-style binary; returns its exit status.
int run(const std::string& args, const fs::path& log = "/dev/null") {
    const std::string cmd = std::string(HOLEMEM_BIN) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Second column of the row whose first field is `name` in a text-keyed CSV.
double lookup(const fs::path& p, const std::string& name) {
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        if (line.substr(0, comma) != name) continue;
        const auto rest = line.substr(comma + 1);
        return std::stod(rest.substr(0, rest.find(',')));
    }
    ADD_FAILURE() << name << " missing from " << p;
    return std::nan("");
}

const std::string coarse = "--set grid.n_z=20 --set grid.n_detuning=400";

}  // namespace

TEST(Config, DefaultsRoundTrip) {
    const Config c;
    const auto text = c.dump();
    const auto back = Config::parse(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.dump(), text);
    EXPECT_DOUBLE_EQ(c.real("hole.delta0_khz"), 230.0);
    EXPECT_EQ(c.reals("sweep.od_values").size(), 6u);
}

TEST(Config, ParsesCommentsAndCanonicalizes) {
    const auto c = Config::parse("# hole\nhole.n = 3.50\n\nsweep.od_values = 1,2 ,3\n");
    EXPECT_DOUBLE_EQ(c.real("hole.n"), 3.5);
    EXPECT_EQ(c.reals("sweep.od_values"), (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(Config::parse(c.dump()), c);
}

TEST(Config, ErrorsNameTheLine) {
    try {
        Config::parse("hole.n = 3\nhole.bogus = 1\n", "x.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("x.cfg:2"), std::string::npos) << e.what();
    }
    EXPECT_THROW(Config::parse("hole.n = 3\nhole.n = 4\n"), ConfigError);
    EXPECT_THROW(Config::parse("hole.n 3\n"), ConfigError);
    EXPECT_THROW(Config::parse("hole.n = abc\n"), ConfigError);
    EXPECT_THROW(Config::parse("grid.n_z = 2.5\n"), ConfigError);
    EXPECT_THROW(Config::parse("grid.mode = sideways\n"), ConfigError);
    EXPECT_THROW(Config::load("/nonexistent/holemem.cfg"), ValidationError);
}

TEST(Config, InterpretValidatesPhysics) {
    Config c;
    EXPECT_NO_THROW(interpret(c));
    c.set("hole.n", "0");
    EXPECT_THROW(interpret(c), ConfigError);
    c = Config();
    c.set("photon.window_us", "20");
    EXPECT_THROW(interpret(c), ConfigError);
    c = Config();
    c.set("raman.start_us", "5");
    EXPECT_THROW(interpret(c), ConfigError);
    c = Config();
    c.set("hole.strength_ratio", "2");
    EXPECT_NEAR(interpret(c).sequence.profile.d, 17.4, 1e-12);
}

TEST(Config, HelpListsKeysWithUnits) {
    const auto help = describe_keys();
    for (const auto& k : schema()) EXPECT_NE(help.find(std::string(k.key)), std::string::npos) << k.key;
    EXPECT_NE(help.find("[kHz]"), std::string::npos);
}

TEST(Commands, ExitCodes) {
    EXPECT_EQ(exit_code(ValidationError("x")), 2);
    EXPECT_EQ(exit_code(ConfigError("x")), 2);
    EXPECT_EQ(exit_code(NumericalError("x")), 3);
    EXPECT_EQ(exit_code(std::runtime_error("x")), 1);
}

TEST(Commands, WriteAtomicReplacesContent) {
    const auto dir = fresh_dir("atomic");
    write_atomic(dir / "sub" / "a.txt", "one");
    write_atomic(dir / "sub" / "a.txt", "two");
    EXPECT_EQ(slurp(dir / "sub" / "a.txt"), "two");
    EXPECT_FALSE(fs::exists(dir / "sub" / "a.txt.tmp"));
}

TEST(Binary, HelpAndUsageErrors) {
    const auto dir = fresh_dir("help");
    EXPECT_EQ(run("--help", dir / "help.txt"), 0);
    const auto help = slurp(dir / "help.txt");
    EXPECT_NE(help.find("photon-stats"), std::string::npos);
    EXPECT_NE(help.find("hole.delta0_khz"), std::string::npos);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("--set hole.nonsense=1 config"), 2);
    EXPECT_EQ(run("--set sweep.od_values= sweep-od"), 2);
}

TEST(Binary, ConfigDumpReloads) {
    const auto dir = fresh_dir("dump");
    ASSERT_EQ(run("--set hole.n=2.5 config", dir / "a.cfg"), 0);
    ASSERT_EQ(run("--config " + (dir / "a.cfg").string() + " config", dir / "b.cfg"), 0);
    EXPECT_EQ(slurp(dir / "a.cfg"), slurp(dir / "b.cfg"));
    EXPECT_DOUBLE_EQ(Config::load(dir / "a.cfg").real("hole.n"), 2.5);
}

TEST(Binary, FitsBundledData) {
    const auto dir = fresh_dir("fit");
    ASSERT_EQ(run("--out " + dir.string() + " fit --kind hole " HOLEMEM_DATA_DIR "/hole_trace.csv"), 0);
    EXPECT_NEAR(lookup(dir / "fit.csv", "delta0_khz"), 230.0, 230.0 * 1e-6);
    EXPECT_NEAR(lookup(dir / "fit.csv", "n"), 3.0, 3.0 * 1e-6);
    EXPECT_NEAR(lookup(dir / "fit.csv", "od"), 8.7, 8.7 * 1e-6);

    ASSERT_EQ(run("--out " + dir.string() + " fit --kind decay " HOLEMEM_DATA_DIR "/decay_curve.csv"), 0);
    EXPECT_NEAR(lookup(dir / "fit.csv", "gamma_khz"), 25.6, 25.6 * 1e-6);
}

TEST(Binary, MalformedInputReportsLine) {
    const auto dir = fresh_dir("malformed");
    {
        std::ofstream f(dir / "bad.csv");
        f << "detuning_khz,od\n0,1\n10,abc\n";
    }
    EXPECT_EQ(run("--out " + dir.string() + " fit --kind hole " + (dir / "bad.csv").string(),
                  dir / "log.txt"),
              2);
    EXPECT_NE(slurp(dir / "log.txt").find("3"), std::string::npos);
    EXPECT_EQ(run("--out " + dir.string() + " fit --kind hole " + (dir / "missing.csv").string()), 2);
}

TEST(Binary, PhotonStatsDeterministic) {
    const auto a = fresh_dir("photon_a");
    const auto b = fresh_dir("photon_b");
    const std::string common = "--seed 5 --set photon.preparations=10 photon-stats";
    ASSERT_EQ(run("--out " + a.string() + " --threads 1 " + common), 0);
    ASSERT_EQ(run("--out " + b.string() + " --threads 3 " + common), 0);
    for (const char* f : {"snr.csv", "mu1.txt", "histogram_0.csv", "histogram_noise_3.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    const auto snr = csv::read(a / "snr.csv", {"mu_in", "signal_mean", "signal_sigma", "noise_mean",
                                               "noise_sigma", "snr", "snr_sigma", "mu1", "mu1_sigma"});
    EXPECT_EQ(snr.rows.size(), 4u);
    EXPECT_EQ(run("--out " + a.string() + " --set photon.mu_values=0 photon-stats"), 2);
}

TEST(Binary, SweepTs) {
    const auto dir = fresh_dir("sweep_ts");
    ASSERT_EQ(run("--out " + dir.string() + " " + coarse + " sweep-ts"), 0);
    DecayCurve curve = read_decay_curve((dir / "sweep_ts.csv").string());
    ASSERT_EQ(curve.ts_us.size(), 8u);
    EXPECT_NEAR(fit_decay(curve).gamma_khz, 25.6, 1e-3);
}

TEST(Binary, SimulateWithoutRamanAndRerun) {
    const auto a = fresh_dir("sim_a");
    const auto b = fresh_dir("sim_b");
    const std::string args = coarse + " simulate --raman-area 0";
    ASSERT_EQ(run("--out " + a.string() + " " + args), 0);
    ASSERT_EQ(run("--out " + b.string() + " --threads 2 " + args), 0);
    for (const char* f : {"trace.csv", "trace_input.csv", "trace_slow.csv", "summary.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_LT(lookup(a / "summary.csv", "eta_s"), 0.01);
    EXPECT_NEAR(lookup(a / "summary.csv", "energy_balance"), 1.0, 0.02);
}
