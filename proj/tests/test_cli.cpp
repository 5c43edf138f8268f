#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "hompol_cli/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hompol::cli;

namespace {

constexpr double kPi = std::numbers::pi;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_csv(const fs::path &path) {
    std::ifstream in(path);
    EXPECT_TRUE(in.good()) << path;
    Table t;
    std::string line;
    std::getline(in, line);
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) {
        t.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::vector<double> row;
        for (std::string cell; std::getline(ls, cell, ',');) {
            row.push_back(std::stod(cell));
        }
        t.rows.push_back(row);
    }
    return t;
}

json read_json(const fs::path &path) {
    std::ifstream in(path);
    return json::parse(in);
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               (std::string("hompol_cli_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }

    void TearDown() override {
        if (!HasFailure()) {
            fs::remove_all(dir_);
        }
    }

    fs::path write(const std::string &name, const std::string &text) const {
        const auto p = dir_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    fs::path write(const std::string &name, const json &j) const { return write(name, j.dump(2)); }

    /// Runs the installed binary; returns its exit status.
    int shell(const std::string &args) const {
        const std::string cmd = std::string("\"") + HOMPOL_CLI_PATH + "\" " + args + " > \"" +
                                (dir_ / "stdout.txt").string() + "\" 2> \"" +
                                (dir_ / "stderr.txt").string() + "\"";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    /// Runs a command in-process.
    int inproc(const std::string &command, const fs::path &config, const fs::path &out,
               std::optional<std::uint64_t> seed = std::nullopt, unsigned threads = 2) {
        RunOptions o;
        o.command = command;
        o.config = config;
        o.out_dir = out;
        o.seed = seed;
        o.threads = threads;
        std::ostringstream log;
        return run(o, log, err_);
    }

    static json lab() { return {{"lambda0_nm", 810.0}, {"delta_lambda_nm", 0.0}, {"l_c_um", 60.0}}; }

    static json fit_block() {
        return {{"lambda0_nm", 810.0}, {"l_c_um", 60.0}, {"delta_lambda_nm", 0.0}};
    }

    static json simulate_config(double dz, double events, std::uint64_t seed) {
        return {{"model",
                 {{"delta_z_um", dz},
                  {"lambda0_nm", 810.0},
                  {"delta_lambda_nm", 0.0},
                  {"l_c_um", 60.0},
                  {"background", 0.01}}},
                {"theta_rad", {{"start", 0.0}, {"stop", kPi / 4}, {"count", 41}}},
                {"mean_events_per_setting", events},
                {"seed", seed}};
    }

    fs::path dir_;
    std::ostringstream err_;
};

} // namespace

TEST_F(Cli, ProbmapWritesMapsAndCuts) {
    const auto cfg = write("probmap.json",
                           json{{"lab", lab()},
                                {"phi_rad", {{"start", 0.0}, {"stop", kPi}, {"count", 21}}},
                                {"delta_z_um", {{"start", 0.0}, {"stop", 90.0}, {"count", 10}}},
                                {"cuts_delta_z_um", {0, 30, 60}}});
    ASSERT_EQ(inproc("probmap", cfg, dir_ / "out"), kOk) << err_.str();

    int csvs = 0;
    for (const auto &entry : fs::directory_iterator(dir_ / "out")) {
        if (entry.path().extension() == ".csv") {
            ++csvs;
            auto sidecar = entry.path();
            sidecar.replace_extension(".json");
            EXPECT_TRUE(fs::exists(sidecar)) << sidecar;
        }
    }
    EXPECT_EQ(csvs, 20);

    std::vector<Table> maps;
    for (const char *key : {"40", "04", "31", "13", "22"}) {
        maps.push_back(read_csv(dir_ / "out" / (std::string("probmap_p") + key + ".csv")));
        const auto &t = maps.back();
        EXPECT_EQ(t.header, (std::vector<std::string>{"phi_rad", "delta_z_um", "probability"}));
        ASSERT_EQ(t.rows.size(), 210U);
        for (const auto &r : t.rows) {
            EXPECT_GE(r[2], 0.0);
            EXPECT_LE(r[2], 1.0);
        }
    }
    for (std::size_t i = 0; i < maps[0].rows.size(); ++i) {
        double sum = 0.0;
        for (const auto &t : maps) {
            EXPECT_EQ(t.rows[i][0], maps[0].rows[i][0]);
            sum += t.rows[i][2];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    // Row 10 is phi = pi/2 at delta_z = 0.
    EXPECT_NEAR(maps[2].rows[10][0], kPi / 2, 1e-15);
    EXPECT_LT(maps[2].rows[10][2], 1e-10);

    const auto cut = read_csv(dir_ / "out" / "probmap_p22_dz30.csv");
    EXPECT_EQ(cut.rows.size(), 21U);
    const auto side = read_json(dir_ / "out" / "probmap_p22_dz30.json");
    EXPECT_EQ(side["command"], "probmap");
    EXPECT_EQ(side["cut_delta_z_um"], 30.0);
    EXPECT_EQ(side["columns"].size(), 3U);
    EXPECT_TRUE(side["config_hash"].get<std::string>().starts_with("fnv1a64:"));
}

TEST_F(Cli, FisherScanPlateauAndEndpoints) {
    const auto cfg = write("scan.json",
                           json{{"lab", lab()},
                                {"phi_rad", {{"start", 0.0}, {"stop", kPi}, {"count", 41}}},
                                {"delta_z_um", {{"values", {0.0, 60.0}}}},
                                {"cuts_delta_z_um", {0.0}}});
    ASSERT_EQ(shell("fisher-scan --config \"" + cfg.string() + "\" --out \"" +
                    (dir_ / "out").string() + "\" --threads 3"),
              kOk)
        << slurp(dir_ / "stderr.txt");

    const auto scan = read_csv(dir_ / "out" / "fisher_scan.csv");
    EXPECT_EQ(scan.header, (std::vector<std::string>{"phi_rad", "delta_z_um", "fisher"}));
    ASSERT_EQ(scan.rows.size(), 82U);
    const double expected = 4.0 * (1.0 + 2.0 * std::exp(-4.0));
    double best = 0.0;
    for (const auto &r : scan.rows) {
        if (r[1] == 0.0) {
            EXPECT_NEAR(r[2], 12.0, 1e-6);
        } else {
            best = std::max(best, r[2]);
        }
    }
    EXPECT_NEAR(best, expected, 1e-6);

    const auto summary = read_json(dir_ / "out" / "fisher_summary.json");
    ASSERT_EQ(summary["rows"].size(), 2U);
    const auto &far = summary["rows"][1];
    EXPECT_NEAR(far["indistinguishability"].get<double>(), std::exp(-4.0), 1e-12);
    EXPECT_NEAR(far["max_fisher"].get<double>(), expected, 1e-6);
    const double argmax = far["argmax_phi_rad"].get<double>();
    EXPECT_TRUE(argmax == 0.0 || std::abs(argmax - kPi) < 1e-12) << argmax;
    EXPECT_NEAR(far["fisher_at_half_pi"].get<double>(), 0.0, 1e-9);
    EXPECT_TRUE(fs::exists(dir_ / "out" / "fisher_scan_dz0.csv"));
}

TEST_F(Cli, SimulateThenFitRecoversPathDifference) {
    const auto sim = write("sim.json", simulate_config(10.0, 1e5, 2024));
    ASSERT_EQ(inproc("simulate", sim, dir_ / "sim"), kOk) << err_.str();
    const auto side = read_json(dir_ / "sim" / "counts.json");
    EXPECT_EQ(side["seed"], 2024);

    // Relative data paths resolve against the config file's directory.
    const auto fit = write("cfg/fit.json", json{{"data", "../sim/counts.csv"}, {"fit", fit_block()}});
    ASSERT_EQ(inproc("fit", fit, dir_ / "fit"), kOk) << err_.str();
    const auto result = read_json(dir_ / "fit" / "fit.json")["result"];
    EXPECT_TRUE(result["converged"].get<bool>());
    EXPECT_NEAR(result["delta_z_um"].get<double>(), 10.0, 2.0);
    EXPECT_NEAR(result["background"].get<double>(), 0.01, 0.01);
}

TEST_F(Cli, McBandDistinguishableRegime) {
    const auto sim = write("sim.json", simulate_config(120.0, 1e5, 31));
    ASSERT_EQ(inproc("simulate", sim, dir_ / "sim"), kOk) << err_.str();
    const auto cfg = write("band.json", json{{"data", "sim/counts.csv"},
                                             {"fit", fit_block()},
                                             {"n_resamples", 100},
                                             {"phi_rad", {{"values", {0.0, kPi / 4, kPi / 2}}}},
                                             {"seed", 5}});
    ASSERT_EQ(shell("mc-band --config \"" + cfg.string() + "\" --out \"" +
                    (dir_ / "band").string() + "\""),
              kOk)
        << slurp(dir_ / "stderr.txt");
    const auto band = read_csv(dir_ / "band" / "fisher_band.csv");
    EXPECT_EQ(band.header, (std::vector<std::string>{"phi_rad", "nominal", "mean", "stddev",
                                                     "lower", "upper"}));
    ASSERT_EQ(band.rows.size(), 3U);
    EXPECT_NEAR(band.rows[0][2], 4.0, 0.01);
    EXPECT_LT(band.rows[0][3], 0.01);
    EXPECT_NEAR(band.rows[2][2], 0.0, 1e-9);
    const auto summary = read_json(dir_ / "band" / "fisher_band.json")["summary"];
    EXPECT_EQ(summary["n_resamples"], 100);
    EXPECT_EQ(summary["n_failed"], 0);
}

TEST_F(Cli, HomDipRecoversVisibility) {
    const auto cfg = write("dip.json",
                           json{{"truth", {{"visibility", 0.998}, {"center_um", 0.0}, {"l_c_um", 60.0}}},
                                {"l_c_guess_um", 50.0},
                                {"pairs_per_point", 100000},
                                {"seed", 3}});
    ASSERT_EQ(inproc("hom-dip", cfg, dir_ / "dip"), kOk) << err_.str();
    const auto fit = read_json(dir_ / "dip" / "hom_dip_fit.json");
    EXPECT_NEAR(fit["result"]["visibility"].get<double>(), 0.998, 0.005) << fit.dump();
    const auto table = read_csv(dir_ / "dip" / "hom_dip.csv");
    EXPECT_EQ(table.header, (std::vector<std::string>{"delta_z_um", "pairs", "coincidences",
                                                      "fitted_probability"}));
    EXPECT_EQ(table.rows.size(), 61U);

    // Feed the simulated table back in as measured data.
    std::string measured = "delta_z_um,pairs,coincidences\n";
    for (const auto &r : table.rows) {
        measured += std::to_string(r[0]) + "," + std::to_string(static_cast<long>(r[1])) + "," +
                    std::to_string(static_cast<long>(r[2])) + "\n";
    }
    write("measured.csv", measured);
    const auto refit = write("refit.json", json{{"input", "measured.csv"}, {"l_c_guess_um", 50.0}});
    ASSERT_EQ(inproc("hom-dip", refit, dir_ / "refit"), kOk) << err_.str();
    EXPECT_NEAR(read_json(dir_ / "refit" / "hom_dip_fit.json")["result"]["visibility"].get<double>(),
                fit["result"]["visibility"].get<double>(), 1e-4);
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossRuns) {
    const auto sim = write("sim.json", simulate_config(15.0, 2e4, 8));
    const auto band = write("band.json", json{{"data", "a/counts.csv"},
                                              {"fit", fit_block()},
                                              {"n_resamples", 100},
                                              {"phi_rad", {{"start", 0.0}, {"stop", kPi}, {"count", 9}}},
                                              {"seed", 4}});
    ASSERT_EQ(inproc("simulate", sim, dir_ / "a", std::nullopt, 1), kOk) << err_.str();
    ASSERT_EQ(inproc("simulate", sim, dir_ / "b", std::nullopt, 4), kOk) << err_.str();
    ASSERT_EQ(inproc("mc-band", band, dir_ / "band_a", std::nullopt, 1), kOk) << err_.str();
    ASSERT_EQ(inproc("mc-band", band, dir_ / "band_b", std::nullopt, 5), kOk) << err_.str();
    for (const char *file : {"counts.csv", "counts.json"}) {
        EXPECT_EQ(slurp(dir_ / "a" / file), slurp(dir_ / "b" / file)) << file;
    }
    for (const char *file : {"fisher_band.csv", "fisher_band.json"}) {
        EXPECT_EQ(slurp(dir_ / "band_a" / file), slurp(dir_ / "band_b" / file)) << file;
    }

    // --seed overrides the config value.
    ASSERT_EQ(inproc("simulate", sim, dir_ / "c", 9), kOk) << err_.str();
    EXPECT_NE(slurp(dir_ / "a" / "counts.csv"), slurp(dir_ / "c" / "counts.csv"));
    EXPECT_EQ(read_json(dir_ / "c" / "counts.json")["seed"], 9);
}

TEST_F(Cli, VersionAndUsage) {
    EXPECT_EQ(shell("--version"), kOk);
    EXPECT_NE(slurp(dir_ / "stdout.txt").find("0.1.0"), std::string::npos);
    EXPECT_EQ(shell("--help"), kOk);
    EXPECT_EQ(shell(""), kUsage);
    EXPECT_EQ(shell("bogus --config x.json"), kUsage);
    EXPECT_EQ(shell("probmap"), kUsage);
    EXPECT_EQ(shell("probmap --config x.json --threads 0"), kUsage);
}

TEST_F(Cli, ConfigErrors) {
    const auto unknown = write("unknown.json", json{{"lab", lab()}, {"phi_grid", {0, 1}}});
    EXPECT_EQ(inproc("probmap", unknown, dir_ / "o"), kConfigError);
    EXPECT_NE(err_.str().find("phi_grid"), std::string::npos) << err_.str();

    const auto nested = write("nested.json", json{{"lab", {{"lambda0_nm", 810.0},
                                                           {"delta_lambda_nm", 0.0},
                                                           {"l_c_um", 60.0},
                                                           {"lc", 1}}}});
    EXPECT_EQ(inproc("fisher-scan", nested, dir_ / "o"), kConfigError);

    const auto malformed = write("malformed.json", std::string("{\"lab\": "));
    EXPECT_EQ(inproc("probmap", malformed, dir_ / "o"), kConfigError);

    const auto decreasing = write("dec.json", json{{"lab", lab()}, {"phi_rad", {1.0, 0.5}}});
    EXPECT_EQ(inproc("probmap", decreasing, dir_ / "o"), kConfigError);

    const auto few = write("few.json", json{{"data", "x.csv"}, {"fit", fit_block()}, {"n_resamples", 50}});
    EXPECT_EQ(inproc("mc-band", few, dir_ / "o"), kConfigError);

    EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(Cli, IoErrors) {
    EXPECT_EQ(inproc("probmap", dir_ / "missing.json", dir_ / "o"), kIoError);
    const auto fit = write("fit.json", json{{"data", "nowhere.csv"}, {"fit", fit_block()}});
    EXPECT_EQ(inproc("fit", fit, dir_ / "o"), kIoError);
    EXPECT_EQ(shell("fit --config \"" + fit.string() + "\""), kIoError);
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("nowhere.csv"), std::string::npos);
}

TEST_F(Cli, DataErrors) {
    write("neg.csv", std::string("theta_rad,n40,n04,n31,n13,n22\n0.1,1,2,-3,4,5\n0.2,1,2,3,4,5\n"));
    const auto neg = write("fit_neg.json", json{{"data", "neg.csv"}, {"fit", fit_block()}});
    EXPECT_EQ(inproc("fit", neg, dir_ / "o"), kDataError);

    write("same.csv", std::string("theta_rad,n40,n04,n31,n13,n22\n0.1,1,2,3,4,5\n0.1,5,4,3,2,1\n"));
    const auto same = write("fit_same.json", json{{"data", "same.csv"}, {"fit", fit_block()}});
    EXPECT_EQ(inproc("fit", same, dir_ / "o"), kDegenerate) << err_.str();

    write("dip.csv", std::string("dz,pairs,coincidences\n0,10,1\n"));
    const auto dip = write("fit_dip.json", json{{"input", "dip.csv"}, {"l_c_guess_um", 60.0}});
    EXPECT_EQ(inproc("hom-dip", dip, dir_ / "o"), kDataError);
}

TEST(CliHash, Fnv1a64KnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
