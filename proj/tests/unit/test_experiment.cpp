#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "catbrw/acceptance.h"
#include "catbrw/errors.h"
#include "catbrw/experiment.h"
#include "catbrw/io.h"

using namespace catbrw;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json small_config() {
  return json::parse(R"({
    "calibration": {"excursions": 200000},
    "solver": {"step": 0.1, "t_max": 200},
    "moments": {"max_order": 2},
    "mc": {"replicates": 4000, "window": 200, "probes": [0, 10, 50, 200]}
  })");
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("catbrw_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, CsvRoundTripIsExact) {
  CsvTable t;
  t.meta = {{"k", "v"}, {"x", "1"}};
  t.columns = {"a", "b"};
  t.rows = {{0.1, 1.0 / 3}, {1e-300, -2.5e17}};
  const auto text = t.render();
  const auto back = CsvTable::parse(text);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.meta_value("k"), "v");
  EXPECT_EQ(back.column("b"), 1u);
  EXPECT_EQ(back.render(), text);
}

TEST(Io, DistributionRoundTrip) {
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const TabulatedDistribution d(grid, {0.0, 0.5, 0.7}, 0.9, std::nullopt, PowerTail{0.4, 1.0, 2.0});
  const auto back = distribution_from_csv(CsvTable::parse(distribution_to_csv(d, {}).render()));
  EXPECT_EQ(back.cdf(), d.cdf());
  EXPECT_EQ(back.total_mass(), 0.9);
  ASSERT_TRUE(back.tail());
  EXPECT_EQ(back.tail()->constant, 0.4);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(json::object());
  EXPECT_EQ(c.make_walk().dimension(), 4);
  EXPECT_EQ(c.make_offspring().mean(), 2.0);
  EXPECT_EQ(c.mc.replicates, 1000000);
  const auto s = parse_config(small_config());
  EXPECT_EQ(s.solver.step, 0.1);
  EXPECT_NE(c.hash(), s.hash());
  EXPECT_EQ(s.hash(), parse_config(s.to_json()).hash());
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config(json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"mc": {"replicates": "many"}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"solver": {"step": 0.3, "t_max": 100}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"offspring": {"preset": "poisson"}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"offspring": {"coefficients": [0.5, 0.6]}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"mc": {"probes": [10, 5]}})")), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/catbrw.json"), ConfigError);
}

TEST(Pipeline, SubcriticalOffspringHasNoCalibration) {
  auto j = small_config();
  j["offspring"] = {{"coefficients", {0.6, 0.4}}};
  Pipeline p(parse_config(j), fresh_dir("subcritical"));
  EXPECT_THROW(p.calibrate(), NoSolutionError);
}

TEST(Pipeline, MissingUpstreamIsDependencyError) {
  Pipeline p(parse_config(small_config()), fresh_dir("missing"));
  EXPECT_THROW(p.solve(), DependencyError);
  EXPECT_THROW(p.report(), DependencyError);
}

TEST(Pipeline, EndToEndIsReproducibleAndGuarded) {
  const auto cfg = parse_config(small_config());
  const auto d1 = fresh_dir("e2e1");
  const auto d2 = fresh_dir("e2e2");
  for (const auto& dir : {d1, d2}) {
    Pipeline p(cfg, dir, dir == d1 ? 1 : 2);
    const auto cal = p.calibrate();
    EXPECT_GT(cal.constants.C, 0.0);
    EXPECT_GT(cal.constants.alpha, 0.0);
    p.solve();
    p.moments();
    p.simulate();
  }
  for (const auto& e : fs::directory_iterator(d1)) {
    const auto name = e.path().filename();
    EXPECT_EQ(read_file(e.path()), read_file(d2 / name)) << name;
  }

  Pipeline p(cfg, d1);
  const auto text = p.report();
  for (int id = 1; id <= 11; ++id) {
    char tag[32];
    std::snprintf(tag, sizeof tag, "criterion %2d:", id);
    EXPECT_NE(text.find(tag), std::string::npos) << tag;
  }
  EXPECT_NE(text.find("PASS criterion 11"), std::string::npos);
  const auto comparison = p.load_artifact("report", "comparison");
  EXPECT_EQ(p.report(), text);
  EXPECT_EQ(p.load_artifact("report", "comparison"), comparison);

  // Another config never reads these artifacts.
  auto other = small_config();
  other["seed"] = 99;
  EXPECT_THROW(Pipeline(parse_config(other), d1).load_calibration(), DependencyError);

  fs::path solved;
  for (const auto& e : fs::directory_iterator(d1))
    if (e.path().filename().string().rfind("solve-", 0) == 0) solved = e.path();
  ASSERT_FALSE(solved.empty());
  {
    std::ofstream out(solved, std::ios::app);
    out << "# tampered\n";
  }
  EXPECT_THROW(p.report(), IntegrityError);
}
