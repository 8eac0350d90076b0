#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eoq/commands.hpp"
#include "reference_values.hpp"

namespace eoq::cli {
namespace {

using Json = nlohmann::json;

struct Outcome {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream l(line);
    for (std::string c; std::getline(l, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

class TempCsv {
 public:
  explicit TempCsv(const std::string& text)
      : path_(std::filesystem::temp_directory_path() /
              ("eoqx_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
               "_" + std::to_string(counter_++) + ".csv")) {
    std::ofstream(path_) << text;
  }
  ~TempCsv() { std::filesystem::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

TEST(Optimize, HundredItemFixture) {
  const Outcome r = run({"optimize", "--fixture", "case100"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  EXPECT_NEAR(j["cycle_length"].get<double>(), 0.2787, 0.0001);
  EXPECT_NEAR(j["orders_per_time"].get<double>(), 3.5868, 0.0005);
  EXPECT_NEAR(j["order_sizes"]["43"].get<double>(), 74.44, 0.01);
  EXPECT_NEAR(j["order_sizes"]["2"].get<double>(), 130.20, 0.01);
  EXPECT_EQ(j["order_sizes"].size(), 100u);
  EXPECT_TRUE(j.contains("cost_per_time"));
  EXPECT_TRUE(j["exempt"].get<bool>());
}

TEST(Optimize, SingleItemFileWithFarExemption) {
  TempCsv f("item,firm,group,d,h,c\n1,,,419,0.45,4.03\n");
  const Outcome r = run({"optimize", f.path(), "--a", "2000", "--B", "1e15", "--full-precision"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(r.json()["order_sizes"]["1"].get<double>(), std::sqrt(2.0 * 2000 * 419 / 0.45),
              1e-9);
}

TEST(Optimize, CoalitionFilterAndCsv) {
  const Outcome r = run({"optimize", "--fixture", "types9", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"item", "order_size", "cycle_length",
                                               "orders_per_time", "cost_per_time"}));
  EXPECT_NEAR(std::stod(rows[1][2]), 2.8443, 0.0001);

  const Outcome sub = run({"optimize", "--fixture", "three_firms", "--coalition", "2,3"});
  ASSERT_EQ(sub.code, kExitOk);
  EXPECT_NEAR(sub.json()["cost_per_time"].get<double>(), 21.090, 0.001);
  EXPECT_EQ(sub.json()["order_sizes"].size(), 2u);
}

TEST(Allocate, HdColumn) {
  const Outcome r = run({"allocate", "--fixture", "case100", "--rule", "hd"});
  ASSERT_EQ(r.code, kExitOk);
  const Json j = r.json();
  EXPECT_EQ(j["rule"], "hd");
  EXPECT_EQ(j["items"][1]["item"], "2");
  EXPECT_NEAR(j["items"][1]["value"].get<double>(), 29.95, 0.01);
}

TEST(Allocate, SpFirmTotals) {
  const Outcome r = run({"allocate", "--fixture", "case100_firms", "--rule", "sp"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = r.json();
  ASSERT_EQ(j["firms"].size(), 8u);
  for (const auto& f : j["firms"]) {
    const int k = std::stoi(f["firm"].get<std::string>());
    EXPECT_NEAR(f["value"].get<double>(), eoq::testing::kCase100FirmTotals[k - 1], 0.02);
  }
}

TEST(Allocate, ShapleyExactNineItems) {
  const Outcome r = run({"allocate", "--fixture", "types9", "--rule", "shapley-exact", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(std::stod(rows[i + 1][2]), eoq::testing::kTypes9[i].shapley, 0.01);
  }
}

TEST(Allocate, SampledReportsErrorsAndIsDeterministic) {
  const std::vector<std::string> args{"allocate", "--fixture", "types9", "--rule",
                                      "shapley-sampled", "--samples", "3000", "--seed", "5"};
  const Outcome a = run(args);
  const Outcome b = run(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const Json j = a.json();
  EXPECT_EQ(j["samples"], 3000);
  EXPECT_TRUE(j["items"][0].contains("std_error"));
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(run(threaded).out, a.out);
}

TEST(Allocate, ExactOverThresholdIsAnError) {
  const Outcome r = run({"allocate", "--fixture", "case100", "--rule", "shapley-exact"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("threshold"), std::string::npos);
  const Outcome sp = run({"allocate", "--fixture", "case100", "--rule", "sp"});
  EXPECT_EQ(sp.code, kExitValidation);
}

TEST(GameExport, ThreeFirmTable) {
  const Outcome r = run({"game-export", "--fixture", "three_firms", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"mask", "cost"}));
  const double want[] = {0.0, 13.462, 8.750, 9.854, 84.853, 43.182, 21.090, 19.484};
  for (std::size_t m = 0; m < 8; ++m) {
    EXPECT_EQ(rows[m + 1][0], std::to_string(m));
    EXPECT_NEAR(std::stod(rows[m + 1][1]), want[m], 0.001);
  }
}

TEST(GameExport, SizesAndLimit) {
  TempCsv one("item,d,h,c\nx,10,1,5\n");
  const Outcome r1 = run({"game-export", one.path(), "--a", "5", "--B", "100", "--format", "csv"});
  EXPECT_EQ(csv_rows(r1.out).size(), 3u);

  const Outcome r9 = run({"game-export", "--fixture", "types9", "--format", "csv"});
  const auto rows = csv_rows(r9.out);
  ASSERT_EQ(rows.size(), 513u);
  double shapley_sum = 0.0;
  for (const auto& row : eoq::testing::kTypes9) shapley_sum += row.shapley;
  EXPECT_NEAR(std::stod(rows.back()[1]), shapley_sum, 0.05);

  const Outcome big = run({"game-export", "--fixture", "case100"});
  EXPECT_EQ(big.code, kExitValidation);
  EXPECT_EQ(run({"game-export", "--fixture", "types9", "--max-n", "8"}).code, kExitValidation);
}

TEST(CoreCheck, ShapleyViolationExitsTwo) {
  const Outcome r = run({"core-check", "--fixture", "three_firms", "--rule", "shapley-exact"});
  EXPECT_EQ(r.code, kExitViolation);
  const Json j = r.json();
  EXPECT_FALSE(j["in_core"].get<bool>());
  ASSERT_EQ(j["violations"].size(), 1u);
  EXPECT_EQ(j["violations"][0]["members"], Json::array({"2", "3"}));
  EXPECT_NEAR(j["violations"][0]["excess"].get<double>(), 1.203, 0.002);
}

TEST(CoreCheck, HdAndFirmLevelPass) {
  EXPECT_EQ(run({"core-check", "--fixture", "three_firms", "--rule", "hd"}).code, kExitOk);
  const Outcome f = run({"core-check", "--fixture", "case100_firms", "--rule", "sp", "--level", "firms"});
  EXPECT_EQ(f.code, kExitOk) << f.err;
  EXPECT_EQ(f.json()["coalitions_checked"], 255);
  EXPECT_EQ(run({"core-check", "--fixture", "three_firms", "--rule", "shapley-exact", "--tol",
                 "1.5"}).code,
            kExitOk);
}

TEST(Axioms, RandomSuitePasses) {
  const Outcome r = run({"axioms", "--random-suite", "40", "--seed", "42"});
  ASSERT_EQ(r.code, kExitOk) << r.out << r.err;
  const Json j = r.json();
  EXPECT_TRUE(j["all_hold"].get<bool>());
  EXPECT_EQ(j["rules"].size(), 2u);
  EXPECT_EQ(j["problems"], 40);
}

TEST(Axioms, FixtureAndRuleSelection) {
  const Outcome r = run({"axioms", "--fixture", "types9", "--rule", "hd", "--format", "csv"});
  ASSERT_EQ(r.code, kExitOk);
  const auto rows = csv_rows(r.out);
  EXPECT_EQ(rows.size(), 7u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][2], "true");
  EXPECT_EQ(run({"axioms", "--fixture", "types9", "--rule", "shapley-exact"}).code,
            kExitValidation);
  EXPECT_EQ(run({"axioms", "--fixture", "types9", "--random-suite", "3"}).code, kExitValidation);
}

TEST(DropAnalysis, ByShapleyAndMarginal) {
  const Outcome s = run({"drop-analysis", "--fixture", "types9", "--measure", "shapley"});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(s.json()["dropped"], Json::array({"2", "6", "9"}));
  EXPECT_NEAR(s.json()["remaining_cost"].get<double>(), 617.41, 0.01);
  const Outcome m = run({"drop-analysis", "--fixture", "types9", "--measure", "marginal"});
  EXPECT_EQ(m.json()["dropped"], Json::array({"1", "6", "9"}));
  EXPECT_NEAR(m.json()["remaining_cost"].get<double>(), 618.61, 0.01);
}

TEST(DropAnalysis, ExplicitGroupsAndErrors) {
  const Outcome r = run({"drop-analysis", "--fixture", "types9", "--measure", "marginal", "--groups",
                     "1,2,3,4,5,6,7,8,9", "--drops", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.json()["dropped"].size(), 2u);
  EXPECT_EQ(run({"drop-analysis", "--fixture", "case100"}).code, kExitValidation);
  EXPECT_EQ(run({"drop-analysis", "--fixture", "types9", "--groups", "1,2;3"}).code,
            kExitValidation);
  EXPECT_EQ(run({"drop-analysis", "--fixture", "types9", "--measure", "median"}).code,
            kExitValidation);
}

TEST(Plotdata, HundredItemsSortedByShapley) {
  const Outcome r = run({"plotdata", "--fixture", "case100", "--format", "csv", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"rank", "shapley", "hd_prop"}));
  for (std::size_t k = 2; k < rows.size(); ++k) {
    EXPECT_LE(std::stod(rows[k - 1][1]), std::stod(rows[k][1]));
  }
  EXPECT_NEAR(std::stod(rows[1][1]), -76.38, 1.0);
  // Item 43 has the smallest Shapley value.
  const Outcome j = run({"plotdata", "--fixture", "case100", "--seed", "1"});
  EXPECT_EQ(j.json()["rows"][0]["item"], "43");
  EXPECT_NEAR(j.json()["rows"][0]["hd_prop"].get<double>(), 2.98, 0.01);
}

TEST(Plotdata, SingleItem) {
  TempCsv f("item,d,h,c\nx,10,1,5\n");
  const Outcome r = run({"plotdata", f.path(), "--a", "5", "--B", "100", "--format", "csv"});
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], rows[1][2]);
  EXPECT_EQ(rows[1][0], "1");
}

TEST(Inputs, ValidationFailuresExitOne) {
  EXPECT_EQ(run({"allocate", "--fixture", "types9", "--rule", "median"}).code, kExitValidation);
  TempCsv f("item,d,h,c\nx,10,1,5\n");
  EXPECT_EQ(run({"allocate", f.path()}).code, kExitValidation);            // no a, B
  EXPECT_EQ(run({"allocate", f.path(), "--a", "5", "--B", "0"}).code, kExitValidation);
  EXPECT_EQ(run({"allocate"}).code, kExitValidation);
  EXPECT_EQ(run({"allocate", "--fixture", "nope"}).code, kExitValidation);
  EXPECT_EQ(run({"allocate", f.path(), "--fixture", "types9"}).code, kExitValidation);
  EXPECT_EQ(run({"allocate", "--bogus"}).code, kExitValidation);
  EXPECT_EQ(run({}).code, kExitValidation);
  TempCsv bad("item,d,h,c\nx,0,1,5\n");
  const Outcome r = run({"allocate", bad.path(), "--a", "5", "--B", "100"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST(Inputs, FixtureOverridesAndListing) {
  const Outcome r = run({"optimize", "--fixture", "three_firms", "--B", "1e9"});
  EXPECT_FALSE(r.json()["exempt"].get<bool>());
  const Outcome list = run({"fixtures"});
  EXPECT_NE(list.out.find("case100_firms"), std::string::npos);
  EXPECT_EQ(run({"fixtures", "types9"}).out, std::string(fixture("types9").csv));
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST(Output, FullPrecisionAndRepeatability) {
  const Outcome six = run({"allocate", "--fixture", "three_firms", "--rule", "shapley-exact"});
  const Outcome full = run({"allocate", "--fixture", "three_firms", "--rule", "shapley-exact",
                        "--full-precision"});
  const double v6 = six.json()["items"][0]["value"].get<double>();
  const double vf = full.json()["items"][0]["value"].get<double>();
  EXPECT_EQ(v6, std::round(vf * 1e6) / 1e6);
  EXPECT_NE(v6, vf);
  EXPECT_EQ(run({"plotdata", "--fixture", "types9"}).out, run({"plotdata", "--fixture", "types9"}).out);
}

TEST(Executable, ExitCodesReachTheShell) {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(EOQX_PATH) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("optimize --fixture types9"), 0);
  EXPECT_EQ(status("allocate --fixture types9 --a -1"), 1);
  EXPECT_EQ(status("core-check --fixture three_firms --rule shapley-exact"), 2);
}

}  // namespace
}  // namespace eoq::cli
