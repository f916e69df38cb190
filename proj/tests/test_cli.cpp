#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "modebound/cli_args.hpp"
#include "modebound/sweep.hpp"

using namespace modebound;

TEST(ParseComplex, Forms) {
  EXPECT_EQ(parse_complex("0.5"), Complex(0.5, 0.0));
  EXPECT_EQ(parse_complex("-0.25"), Complex(-0.25, 0.0));
  EXPECT_EQ(parse_complex("0.5i"), Complex(0.0, 0.5));
  EXPECT_EQ(parse_complex("0.3+0.4i"), Complex(0.3, 0.4));
  EXPECT_EQ(parse_complex("0.3-0.4i"), Complex(0.3, -0.4));
  EXPECT_EQ(parse_complex("-0.3-0.4j"), Complex(-0.3, -0.4));
  EXPECT_EQ(parse_complex("i"), Complex(0.0, 1.0));
  EXPECT_EQ(parse_complex("-i"), Complex(0.0, -1.0));
  EXPECT_EQ(parse_complex("0.5+i"), Complex(0.5, 1.0));
  EXPECT_EQ(parse_complex(" 0.1 + 0.2i "), Complex(0.1, 0.2));
  EXPECT_EQ(parse_complex("1e-1+2e-1i"), Complex(0.1, 0.2));
  EXPECT_EQ(parse_complex("1e-1"), Complex(0.1, 0.0));
}

TEST(ParseComplex, Rejects) {
  for (const char* bad : {"", "abc", "0.5x", "0.5+0.2", "1+2i+3i", "--1"})
    EXPECT_THROW(parse_complex(bad), ValidationError) << bad;
}

TEST(BuildFamily, Builtins) {
  FamilyArgs a;
  a.k = "0.3+0.4i";
  EXPECT_EQ(build_family(a).k(0, 1), Complex(0.3, 0.4));
  a.family = "phase";
  a.n_outcomes = 4;
  EXPECT_EQ(build_family(a).size(), 4);
  a.family = "comp-ft";
  a.d = 3;
  EXPECT_EQ(build_family(a).size(), 6);
  a.family = "dps";
  a.ell = 2;
  EXPECT_EQ(build_family(a).size(), 4);
  a.family = "custom";
  EXPECT_THROW(build_family(a), ValidationError);
  a.family = "nonsense";
  EXPECT_THROW(build_family(a), ValidationError);
}

TEST(BuildFamily, CustomAndPriors) {
  FamilyArgs a;
  a.family = "custom";
  a.kfile = MODEBOUND_SAMPLES_DIR "/three_modes.json";
  const ModeFamily f = build_family(a);
  EXPECT_EQ(f.size(), 3);
  EXPECT_EQ(f.k(0, 1), Complex(0.3, 0.4));

  const auto priors = std::filesystem::temp_directory_path() / "modebound_test_priors.json";
  std::ofstream(priors) << "{\"priors\": [0.5, 0.25, 0.25]}";
  a.priors_file = priors.string();
  EXPECT_EQ(build_family(a).priors(), (std::vector<double>{0.5, 0.25, 0.25}));
  std::ofstream(priors) << "[0.5, 0.5]";
  EXPECT_THROW(build_family(a), ValidationError);
  std::ofstream(priors) << "not json";
  EXPECT_THROW(build_family(a), ValidationError);
  std::filesystem::remove(priors);
}

TEST(Grids, Spacing) {
  EXPECT_EQ(linspace(0.0, 1.0, 5), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(linspace(2.0, 3.0, 1), (std::vector<double>{2.0}));
  const auto g = logspace(1e-3, 10.0, 5);
  EXPECT_NEAR(g.front(), 1e-3, 1e-15);
  EXPECT_NEAR(g[1], 1e-2, 1e-15);
  EXPECT_NEAR(g.back(), 10.0, 1e-12);
  EXPECT_THROW(linspace(0.0, 1.0, 0), ValidationError);
  EXPECT_THROW(logspace(0.0, 1.0, 3), ValidationError);
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.0), "0");
}

TEST(Sweep, OrderedAndStable) {
  BoundRequest base;
  base.scenario = Scenario::source;
  base.task = Task::probabilistic;
  base.n_max = 20;
  const std::vector<NamedFamily> fams = {{"phase-2", make_phase_family(2)}, {"phase-3", make_phase_family(3)}};
  const SweepSpec spec = family_nbar_sweep(fams, linspace(0.1, 2.0, 6), base);
  std::ostringstream a, b;
  write_sweep_csv(spec, run_sweep(spec, 1), a, true);
  write_sweep_csv(spec, run_sweep(spec, 3), b, true);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream in(a.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "family,scenario,task,nbar,bound,status,n_max,tol,wall_ms");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",optimal,20,"), std::string::npos) << line;
    EXPECT_EQ(line.substr(0, 7), rows <= 6 ? "phase-2" : "phase-3");
  }
  EXPECT_EQ(rows, 12);
}

TEST(Sweep, MonotoneColumns) {
  BoundRequest base;
  base.scenario = Scenario::channel;
  base.task = Task::probabilistic;
  base.n_max = 20;
  const SweepSpec spec =
      family_nbar_sweep({{"phase-3", make_phase_family(3)}}, logspace(1e-3, 3.0, 7), base);
  const auto rows = run_sweep(spec);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].value.bound, rows[i - 1].value.bound - 1e-6);
}

TEST(Sweep, ErrorsBecomeRows) {
  SweepSpec spec;
  spec.key_names = {"x"};
  spec.jobs.push_back({{"1"}, [] { return SweepValue{0.5, "optimal", 3, 1e-7}; }});
  spec.jobs.push_back({{"2"}, []() -> SweepValue { throw ValidationError("bad point"); }});
  const auto rows = run_sweep(spec, 2);
  EXPECT_EQ(rows[0].value.status, "optimal");
  EXPECT_EQ(rows[1].value.status, "error");
  EXPECT_TRUE(std::isnan(rows[1].value.bound));
}

TEST(Sweep, PolarConjugationSymmetry) {
  BoundRequest base;
  base.scenario = Scenario::channel;
  base.task = Task::unambiguous;
  base.nbar = 0.5;
  base.n_max = 20;
  const int angles = 8;
  const SweepSpec spec = polar_sweep({0.4, 0.8}, angles, base);
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 16u);
  for (int r = 0; r < 2; ++r)
    for (int a = 1; a < angles; ++a) {
      const auto& x = rows[static_cast<std::size_t>(r * angles + a)];
      const auto& y = rows[static_cast<std::size_t>(r * angles + angles - a)];
      EXPECT_NEAR(x.value.bound, y.value.bound, 1e-6);
    }
}

TEST(Sweep, DpsKeyedByEnergyPerPulse) {
  BoundRequest base;
  base.scenario = Scenario::source;
  base.task = Task::unambiguous;
  base.n_max = 12;
  const SweepSpec spec = dps_sweep({1, 2}, {0.5}, base);
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].keys[4], "1");
  EXPECT_EQ(rows[1].keys[4], "1.5");
}

TEST(Jobs, FromEnvironment) {
  ::unsetenv("MODEBOUND_JOBS");
  EXPECT_EQ(default_jobs(), 1u);
  ::setenv("MODEBOUND_JOBS", "4", 1);
  EXPECT_EQ(default_jobs(), 4u);
  ::setenv("MODEBOUND_JOBS", "four", 1);
  EXPECT_EQ(default_jobs(), 1u);
  ::unsetenv("MODEBOUND_JOBS");
}
