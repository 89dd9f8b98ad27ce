#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ovm/errors.hpp"
#include "ovm/harness.hpp"

using namespace ovm;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidArgument;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ovm_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Harness, ListsAllExperiments) {
  const auto& all = list_experiments();
  EXPECT_EQ(all.size(), 9u);
  for (const auto& info : all) EXPECT_EQ(experiment_from_string(info.name), info.experiment);
  EXPECT_EQ(code_of([] { experiment_from_string("Bogus"); }), ErrorCode::ConfigError);
}

TEST(Harness, DefaultConfigsValidate) {
  for (const auto& info : list_experiments()) EXPECT_NO_THROW(validate(default_config(info.experiment))) << info.name;
}

TEST(Harness, RejectsUnknownKeys) {
  EXPECT_EQ(code_of([] { config_from_json({{"experiment", "Region1"}, {"sede", 1}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"experiment", "Region1"}, {"grid", {{"pts", 4}}}}); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"experiment", "Region1"}, {"params", {{"epsilon", 0.1}}}}); }),
            ErrorCode::ConfigError);
}

TEST(Harness, RejectsBadValues) {
  EXPECT_EQ(code_of([] { config_from_json({{"seed", 1}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"experiment", "Region1"}, {"seed", "one"}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              config_from_json({{"experiment", "Region1"}, {"eps_schedule", {{"values", {0.1, 0.2}}}}});
            }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              config_from_json(
                  {{"experiment", "Region1"}, {"eps_schedule", {{"values", {0.1}}, {"beta_m", {1}}}}});
            }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"experiment", "Region1"}, {"gauge", "Sideways"}}); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] {
              config_from_json({{"experiment", "Harmonicity"}, {"params", {{"h_coeffs", {1.0, 2.0}}}}});
            }),
            ErrorCode::ConfigError);
}

TEST(Harness, ConfigRoundTrip) {
  auto c = default_config(Experiment::Harmonicity);
  c.seed = 9;
  c.gauge = Gauge::StringMinus;
  const auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);
  c.seed = 10;
  EXPECT_NE(config_hash(back), config_hash(c));
}

TEST(Harness, PartialConfigKeepsDefaults) {
  const auto c = config_from_json({{"experiment", "CurvatureSweep"}, {"seed", 3}});
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.eps_schedule.resolve().size(), 7u);
}

TEST(Harness, ParseFormats) {
  const auto f = parse_formats("csv,svg");
  EXPECT_TRUE(f.csv);
  EXPECT_FALSE(f.json);
  EXPECT_TRUE(f.svg);
  EXPECT_EQ(code_of([] { parse_formats("csv,pdf"); }), ErrorCode::ConfigError);
}

TEST(Harness, CsvUsesRoundTripPrecision) {
  const Table t{"t", {"a", "b"}, {{0.1, 1.0 / 3.0}}};
  EXPECT_EQ(render_csv(t), "a,b\n0.10000000000000001,0.33333333333333331\n");
}

TEST(Harness, SvgIsWellFormed) {
  const Figure f{"f", "title & more", "x", "y", {{"s", {0.1, 0.01}, {10.0, 100.0}}}};
  const auto svg = render_svg(f);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("&amp;"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Harness, BundleRoundTrip) {
  const auto b = run(default_config(Experiment::PotentialIdentity), 1);
  EXPECT_TRUE(b.all_pass());
  const auto j = bundle_to_json(b);
  EXPECT_FALSE(j.contains("wall_time_s"));
  EXPECT_EQ(bundle_to_json(bundle_from_json(j)), j);
}

TEST(Harness, ModuleErrorsBecomeFailingVerdicts) {
  auto c = default_config(Experiment::Region2);
  c.d_schedule = {1.0, 0.6};
  const auto b = run(c, 1);
  EXPECT_FALSE(b.all_pass());
  ASSERT_EQ(b.verdicts.size(), 1u);
  EXPECT_NE(b.verdicts[0].name.find("InvalidSchedule"), std::string::npos);
}

TEST(Harness, EmitIsDeterministic) {
  auto c = default_config(Experiment::CurvatureSweep);
  c.eps_schedule.beta_m = {2, 3};
  c.grid.radial_points = 6;
  c.grid.polar_angles = 2;
  const auto d1 = scratch_dir("a"), d2 = scratch_dir("b");
  const auto files1 = emit(run(c, 1), d1.string(), {});
  const auto files2 = emit(run(c, 3), d2.string(), {});
  ASSERT_EQ(files1.size(), files2.size());
  for (std::size_t i = 0; i < files1.size(); ++i) {
    const auto name = std::filesystem::path(files1[i]).filename();
    EXPECT_EQ(slurp(d1 / name), slurp(d2 / name)) << name;
  }
  EXPECT_EQ(slurp(d1 / "sweep.csv").substr(0, 68),
            "eps,max_norm_rm,ratio_upper,ratio_lower,argmax_u,argmax_y1,argmax_y2");
  const auto summary = json::parse(slurp(d1 / "summary.json"));
  EXPECT_EQ(summary["config_hash"], config_hash(c));
  EXPECT_TRUE(summary.contains("code_version"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST(Harness, EmitReportsUnwritableDirectory) {
  const auto b = run(default_config(Experiment::PotentialIdentity), 1);
  EXPECT_EQ(code_of([&] { emit(b, "/proc/ovm_not_writable", {}); }), ErrorCode::IoError);
}
