// Runs every acceptance criterion and prints one PASS/FAIL line each.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "ovm/errors.hpp"
#include "ovm/gauge_connection.hpp"
#include "ovm/harness.hpp"

using namespace ovm;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int g_jobs = 1;

std::string worst_verdict(const ReportBundle& b) {
  std::ostringstream o;
  for (const auto& v : b.verdicts) o << (v.pass ? "" : "!") << v.name << "=" << v.observed << " ";
  return o.str();
}

Outcome experiment(Experiment e, const std::function<void(ExperimentConfig&)>& adjust = {}) {
  auto c = default_config(e);
  if (adjust) adjust(c);
  const auto b = run(c, g_jobs);
  return {b.all_pass(), worst_verdict(b)};
}

// FD curl of A against grad V over random off-string points.
Outcome connection_equation() {
  PotentialParams p;
  p.eps = 0.5;
  p.h_coeffs = {0.0, {0.05, 0.02}, {-0.04, 0.05}};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.25, 0.25), y(-0.5, 0.5);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 500;) {
    const ChartPoint3 x{u(rng), y(rng), y(rng)};
    if (std::sqrt(x.radial2()) < 0.1) continue;
    ++i;
    // One truncation for the whole stencil keeps the differenced function smooth.
    const ConnectionOptions pin{.pin_index = 2 * choose_connection_index(p, x)};
    for (Gauge g : {Gauge::StringPlus, Gauge::StringMinus}) {
      Eigen::Matrix3d J;
      for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[k] = h;
        J.col(k) = (eval_connection(p, ChartPoint3::from(x.vec() + e), g, pin).A -
                    eval_connection(p, ChartPoint3::from(x.vec() - e), g, pin).A) /
                   (2 * h);
      }
      const Eigen::Vector3d curl(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
      worst = std::max(worst, (curl - hodge_dV(eval_V(p, x).grad)).cwiseAbs().maxCoeff());
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max |dA - *dV| = %.3g", worst);
  return {worst < 1e-6, buf};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::filesystem::path& work) {
  std::vector<ExperimentConfig> configs = {default_config(Experiment::PotentialIdentity),
                                           default_config(Experiment::MatrixLemma),
                                           default_config(Experiment::Region1)};
  auto sweep = default_config(Experiment::CurvatureSweep);
  sweep.eps_schedule.beta_m = {2, 4};
  sweep.grid.radial_points = 8;
  sweep.grid.polar_angles = 3;
  configs.push_back(sweep);
  std::size_t compared = 0;
  for (const auto& c : configs) {
    const auto a = work / "determinism" / (to_string(c.experiment) + "_a");
    const auto b = work / "determinism" / (to_string(c.experiment) + "_b");
    const auto fa = emit(run(c, 1), a.string(), {true, true, false});
    const auto fb = emit(run(c, g_jobs), b.string(), {true, true, false});
    if (fa.size() != fb.size()) return {false, to_string(c.experiment) + ": file lists differ"};
    for (const auto& f : fa) {
      const auto name = std::filesystem::path(f).filename();
      if (slurp(a / name) != slurp(b / name)) return {false, to_string(c.experiment) + ": " + name.string() + " differs"};
      ++compared;
    }
  }
  return {true, std::to_string(compared) + " files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance_runs";
  g_jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--work-dir", work, "Scratch directory for emitted files");
  app.add_option("--jobs", g_jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "rescaling identity", 10, [] { return experiment(Experiment::PotentialIdentity); }},
      {2, "harmonicity", 30, [] { return experiment(Experiment::Harmonicity); }},
      {3, "connection equation", 30, connection_equation},
      {4, "Ricci flatness", 300, [] { return experiment(Experiment::RicciFlat); }},
      {5, "curvature scaling", 900, [] { return experiment(Experiment::CurvatureSweep); }},
      {6, "bubble limit", 600, [] { return experiment(Experiment::Region1); }},
      {7, "neck limit", 600, [] { return experiment(Experiment::Region2); }},
      {8, "outer limit", 600, [] { return experiment(Experiment::Region3); }},
      {9, "limit stability", 300, [] { return experiment(Experiment::LimitStability); }},
      {10, "matrix lemma", 120,
       [] { return experiment(Experiment::MatrixLemma, [](ExperimentConfig& c) { c.matrix.samples = 1000000; }); }},
      {11, "determinism", 600, [&] { return determinism(work); }},
  };

  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    all = all && pass;
    std::printf("%s %2d %-20s %7.2fs (limit %.0fs)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
