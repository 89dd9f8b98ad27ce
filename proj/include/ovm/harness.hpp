#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ovm/collapse_limits.hpp"
#include "ovm/lattice_potential.hpp"

namespace ovm {

enum class Experiment {
  PotentialIdentity,
  Harmonicity,
  RicciFlat,
  CurvatureSweep,
  Region1,
  Region2,
  Region3,
  LimitStability,
  MatrixLemma,
};

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);  // throws ConfigError

struct ExperimentInfo {
  Experiment experiment;
  std::string name;
  std::string summary;
};
const std::vector<ExperimentInfo>& list_experiments();

/// Explicit eps values, or eps_m = exp(-2 pi m) for the listed m (beta = m).
struct EpsSchedule {
  std::vector<double> values;
  std::vector<double> beta_m;
  std::vector<double> resolve() const;
};

struct GridSpec {
  int points = 100;
  int radial_points = 24;
  int polar_angles = 5;
  double r_min = 0.0;
  double r_max = 0.5;
  double fd_step = 0.0;  // <= 0: per-experiment default
};

struct MatrixSpec {
  int n = 2;
  std::size_t samples = 100000;
  std::vector<double> eps_list{0.01, 0.05, 0.1};
};

struct ExperimentConfig {
  Experiment experiment = Experiment::PotentialIdentity;
  PotentialParams params;
  EpsSchedule eps_schedule;
  GridSpec grid;
  RegionThresholds thresholds;
  DSchedule d_schedule{1.0, 0.25};
  Gauge gauge = Gauge::StringPlus;
  MatrixSpec matrix;
  std::uint64_t seed = 42;
  std::string output_dir = "out";
};

/// Defaults reproducing the acceptance setting of each experiment.
ExperimentConfig default_config(Experiment e);

/// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

/// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct Figure {
  std::string name;  // file stem
  std::string title, x_label, y_label;
  std::vector<Series> series;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string threshold;  // human-readable condition
  double observed = 0.0;
};

struct ReportBundle {
  Experiment experiment = Experiment::PotentialIdentity;
  ExperimentConfig config;
  std::string config_hash;
  std::string code_version;
  double wall_time_s = 0.0;  // kept out of serialized output
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;
  std::vector<Figure> figures;

  bool all_pass() const;
};

ReportBundle run(const ExperimentConfig& config, int jobs = 1);

nlohmann::json bundle_to_json(const ReportBundle& b);
ReportBundle bundle_from_json(const nlohmann::json& j);

struct EmitFormats {
  bool csv = true, json = true, svg = true;
};
EmitFormats parse_formats(const std::string& list);  // "csv,json,svg"

/// Writes <table>.csv, summary.json plus bundle.json, <figure>.svg into dir.
/// Returns the written paths in write order. Throws IoError with the path.
std::vector<std::string> emit(const ReportBundle& b, const std::string& dir, const EmitFormats& formats);

std::string render_csv(const Table& t);
std::string render_svg(const Figure& f);

}  // namespace ovm
