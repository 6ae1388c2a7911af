#include "commands.hpp"
#include "longrun/error.hpp"
#include "scenario.hpp"
#include "table.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace longrun;
using namespace longrun::cli;

namespace {

const char* kBase = R"({"family": "OU", "b": 0.16, "k": 2.0, "sigma": 0.8, "xi": 1.0,
                        "nu": -2.0, "rho_bar": -0.5, "rho_sq": 0.25,
                        "T_list": [2, 5, 10], "n_paths": 4000, "n_steps": 10, "seed": 3})";

std::string csv(const Table& t) {
    std::ostringstream os;
    write_csv(t, os);
    return os.str();
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto p = std::filesystem::temp_directory_path() / ("longrun_cli_" + name);
    std::ofstream(p) << content;
    return p;
}

int run_binary(const std::string& args, const std::string& out_name) {
    const auto out = std::filesystem::temp_directory_path() / out_name;
    const std::string cmd = std::string(LONGRUN_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Scenario, ParsesAllKeys) {
    const auto sc = parse_scenario(R"({"family": "3/2", "b": 0.3, "k": 1.1, "sigma": 0.7, "mu": 0.05,
        "r": 0.01, "omega": 2.0, "xi": 0.9, "nu": -3.0, "rho_bar": 0.2, "rho_sq": 0.5, "T": 4,
        "n_paths": 123, "n_steps": 25, "seed": 9, "output": "x.csv", "format": "json",
        "nu_grid": [-1, -2], "mu_grid": [1]})");
    EXPECT_EQ(sc.spec.family, Family::ThreeHalves);
    EXPECT_EQ(sc.spec.k, 1.1);
    EXPECT_EQ(sc.market.omega, 2.0);
    EXPECT_EQ(sc.T_list, std::vector<double>{4.0});
    EXPECT_EQ(sc.n_paths, 123u);
    EXPECT_EQ(sc.mc().steps_per_unit, 25.0);
    EXPECT_EQ(sc.mc().rng.seed, 9u);
    EXPECT_EQ(sc.format, Format::Json);
    EXPECT_EQ(sc.nu_grid->size(), 2u);
}

TEST(Scenario, RejectsMalformedInput) {
    EXPECT_THROW(parse_scenario("{"), InvalidInput);
    EXPECT_THROW(parse_scenario("[1]"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"b": 1})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "Heston"})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "OU", "sigmaa": 1})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "OU", "b": "0.1"})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "OU", "T": 1, "T_list": [1]})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "OU", "T": -1})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "OU", "n_paths": -5})"), InvalidInput);
    EXPECT_THROW(parse_scenario(R"({"family": "OU", "format": "xml"})"), InvalidInput);
}

TEST(Table, MissingCellsCarryReasons) {
    Table t;
    t.columns = {"a", "b", "c"};
    t.add({1.5, Missing{"q-bound"}, std::nan("")});
    EXPECT_EQ(csv(t), "a,b,c,reason\n1.5,,,b: q-bound; c: non-finite value\n");
    const auto j = to_json(t);
    EXPECT_TRUE(j["rows"][0]["b"].is_null());
    EXPECT_EQ(j["rows"][0]["a"], 1.5);
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_THROW(t.add({1.0}), std::logic_error);
}

TEST(Decompose, ZeroKillingBlackScholesRow) {
    auto sc = parse_scenario(R"({"family": "BlackScholes", "mu": 0.03, "r": 0.03, "sigma": 0.2, "T": 5})");
    const auto res = cmd_decompose(sc);
    ASSERT_EQ(res.table.rows.size(), 1u);
    const auto& row = res.table.rows[0];
    EXPECT_EQ(std::get<double>(row[1]), 0.0);   // λ
    EXPECT_EQ(std::get<double>(row[11]), 1.0);  // MC p_T
    EXPECT_EQ(std::get<double>(row[13]), 1.0);  // assembled
    EXPECT_EQ(res.exit_code, kExitOk);
}

TEST(Decompose, OuBaseAgreesAndIsReproducible) {
    auto sc = parse_scenario(kBase);
    sc.T_list = {5.0};
    sc.n_paths = 20000;
    const auto res = cmd_decompose(sc);
    EXPECT_EQ(res.exit_code, kExitOk);
    EXPECT_LE(std::get<double>(res.table.rows[0][15]), 3.0);
    EXPECT_EQ(csv(res.table), csv(cmd_decompose(sc).table));
}

TEST(Decompose, QuadraticDriftReportsLimit) {
    auto sc = parse_scenario(kBase);
    sc.spec.family = Family::QuadraticDrift;
    sc.T_list = {10.0};
    const auto res = cmd_decompose(sc);
    EXPECT_EQ(std::get<std::string>(res.table.rows[0][8]), "limit");
    EXPECT_GT(std::get<double>(res.table.rows[0][14]), 0.0);
}

TEST(Decompose, InvalidScenarioThrows) {
    auto sc = parse_scenario(kBase);
    sc.market.nu = 0.5;
    EXPECT_THROW(cmd_decompose(sc), InvalidInput);
    EXPECT_THROW(cmd_sensitivity(sc), InvalidInput);
}

TEST(Sensitivity, BlackScholesTableIsExact) {
    auto sc = parse_scenario(R"({"family": "BlackScholes", "mu": 0.1, "r": 0.02, "sigma": 0.2,
                                 "T_list": [2, 5, 10, 20]})");
    const auto res = cmd_sensitivity(sc);
    ASSERT_EQ(res.table.rows.size(), 4u);
    for (const auto& row : res.table.rows) {
        EXPECT_EQ(std::get<double>(row[6]), 0.0);
        EXPECT_NEAR(std::get<double>(row[8]), 0.0288889, 5e-8);
        EXPECT_TRUE(std::get<bool>(row[11]));
    }
}

TEST(Sensitivity, OuResidualBand) {
    auto sc = parse_scenario(kBase);
    sc.n_paths = 20000;
    sc.n_steps = 20;
    const auto res = cmd_sensitivity(sc);
    const double band = std::get<double>(res.table.rows[0][10]);
    EXPECT_LT(band, 3.0);
}

TEST(Compare, SinglePointMatchesLambdaSensitivity) {
    auto sc = parse_scenario(kBase);
    sc.nu_grid = std::vector<double>{-2.0};
    sc.mu_grid = std::vector<double>{2.0};
    const auto res = cmd_compare(sc);
    ASSERT_EQ(res.table.rows.size(), 2u);
    const Family fams[] = {Family::OU, Family::CIR, Family::ThreeHalves, Family::QuadraticDrift};
    for (int i = 0; i < 4; ++i) {
        ModelSpec spec = sc.spec;
        spec.family = fams[i];
        if (fams[i] == Family::CIR) continue;  // σ = 0.8 is outside the CIR domain for the checked API
        EXPECT_DOUBLE_EQ(std::get<double>(res.table.rows[0][3 + i]), lambda_sensitivity(spec, sc.market));
    }
    EXPECT_DOUBLE_EQ(std::get<double>(res.table.rows[0][4]), eigen_nu_derivatives({Family::CIR, 0.16, 2.0, 0.8, 0.0},
                                                                                   sc.market).dlambda);
}

TEST(Compare, UncorrelatedSignsAgree) {
    auto sc = parse_scenario(kBase);
    sc.market.rho_bar = 0.0;
    sc.market.rho_sq = 0.0;
    const auto res = cmd_compare(sc);
    for (const auto& row : res.table.rows) {
        for (int i = 3; i < 7; ++i) EXPECT_LT(std::get<double>(row[static_cast<std::size_t>(i)]), 0.0);
    }
}

TEST(Compare, BadPointsBecomeReasons) {
    auto sc = parse_scenario(kBase);
    sc.nu_grid = std::vector<double>{-2.0, 0.5};
    sc.market.rho_bar = -1.0;
    sc.market.rho_sq = 1.0;
    sc.mu_grid = std::vector<double>{0.01};
    const auto res = cmd_compare(sc);
    EXPECT_TRUE(std::holds_alternative<Missing>(res.table.rows[1][3]));
    EXPECT_TRUE(std::holds_alternative<Missing>(res.table.rows[2][5]));  // 3/2 speed bound
    EXPECT_NE(csv(res.table).find("violated"), std::string::npos);
    sc.nu_grid = std::vector<double>{};
    EXPECT_THROW(cmd_compare(sc), InvalidInput);
}

TEST(Validate, AllPassAndFaultInjection) {
    auto sc = parse_scenario(kBase);
    sc.T_list = {1.0};
    sc.n_paths = 20000;
    const auto ok = cmd_validate(sc);
    EXPECT_EQ(ok.exit_code, kExitOk) << csv(ok.table);
    const auto bad = cmd_validate(sc, 1e-3);
    EXPECT_EQ(bad.exit_code, kExitValidation);
    EXPECT_EQ(std::get<std::string>(bad.table.rows[1][0]), "generator_residual");
    EXPECT_EQ(std::get<std::string>(bad.table.rows[1][1]), "fail");

    sc.seed = 12345;
    const auto other = cmd_validate(sc);
    EXPECT_EQ(other.exit_code, kExitOk);
    EXPECT_NE(csv(other.table), csv(ok.table));
}

TEST(Validate, InvalidModelIsAFailedCheck) {
    auto sc = parse_scenario(kBase);
    sc.spec.family = Family::CIR;  // σ = 0.8 breaks b > σ²/2
    const auto res = cmd_validate(sc);
    EXPECT_EQ(res.exit_code, kExitValidation);
    EXPECT_EQ(std::get<std::string>(res.table.rows[0][1]), "fail");
}

TEST(Binary, ExitCodesAndByteIdenticalOutput) {
    const auto good = temp_file("good.json", kBase);
    const auto bad_nu = temp_file("bad_nu.json", R"({"family": "OU", "b": 0.16, "k": 2, "sigma": 0.8, "nu": 0.5})");
    const auto empty = temp_file("empty.json", R"({"family": "OU", "b": 0.16, "k": 2, "sigma": 0.8, "nu_grid": []})");
    const auto tmp = std::filesystem::temp_directory_path();

    EXPECT_EQ(run_binary("decompose --scenario " + good.string() + " --seed 5", "a.csv"), 0);
    EXPECT_EQ(run_binary("decompose --scenario " + good.string() + " --seed 5", "b.csv"), 0);
    EXPECT_EQ(slurp(tmp / "a.csv"), slurp(tmp / "b.csv"));
    EXPECT_EQ(run_binary("decompose --scenario " + good.string() + " --seed 6", "c.csv"), 0);
    EXPECT_NE(slurp(tmp / "a.csv"), slurp(tmp / "c.csv"));

    EXPECT_EQ(run_binary("sensitivity --scenario " + bad_nu.string(), "d.txt"), 1);
    EXPECT_NE(slurp(tmp / "d.txt").find("ν < 0 violated"), std::string::npos);
    EXPECT_EQ(run_binary("compare --scenario " + empty.string(), "e.txt"), 1);
    EXPECT_EQ(run_binary("decompose --scenario /nonexistent.json", "f.txt"), 1);
    EXPECT_EQ(run_binary("frobnicate", "g.txt"), 1);
    EXPECT_EQ(run_binary("validate --scenario " + good.string() + " --inject-lambda 1e-3", "h.txt"), 3);

    const auto out = tmp / "longrun_cli_out.json";
    EXPECT_EQ(run_binary("compare --scenario " + good.string() + " --format json --out " + out.string(), "i.txt"), 0);
    EXPECT_NE(slurp(out).find("\"command\": \"compare\""), std::string::npos);
}
