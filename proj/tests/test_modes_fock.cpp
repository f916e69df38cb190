#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "modebound/fock.hpp"
#include "modebound/modes.hpp"

using namespace modebound;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("modebound_test_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST(Modes, TwoModeEntries) {
  const ModeFamily same = make_two_mode(1.0);
  EXPECT_EQ(same.k(0, 1), Complex(1.0));
  const ModeFamily orth = make_two_mode(0.0);
  EXPECT_TRUE(orth.k().isApprox(CMatrix::Identity(2, 2)));
  const ModeFamily anti = make_two_mode(-1.0);
  EXPECT_EQ(anti.k(0, 1), Complex(-1.0));
  EXPECT_EQ(anti.k(1, 0), Complex(-1.0));
  const ModeFamily cplx = make_two_mode({0.3, 0.4});
  EXPECT_EQ(cplx.k(1, 0), Complex(0.3, -0.4));
  EXPECT_THROW(make_two_mode(1.0 + 1e-9), ValidationError);
  EXPECT_NO_THROW(make_two_mode(1.0 + 1e-13));
}

TEST(Modes, PhaseFamily) {
  const ModeFamily two = make_phase_family(2);
  EXPECT_NEAR(std::abs(two.k(0, 1) - Complex(-1.0)), 0.0, 1e-15);
  EXPECT_TRUE(two.k().isApprox(make_two_mode(-1.0).k(), 1e-15));
  const ModeFamily four = make_phase_family(4);
  EXPECT_NEAR(std::abs(four.k(0, 1) - Complex(0.0, -1.0)), 0.0, 1e-15);
  for (int n = 2; n <= 6; ++n) {
    const ModeFamily f = make_phase_family(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) EXPECT_NEAR(std::abs(f.k(i, j)), 1.0, 1e-15);
  }
  EXPECT_THROW(make_phase_family(1), ValidationError);
}

TEST(Modes, CompFourierFamily) {
  const ModeFamily d2 = make_comp_ft_family(2);
  EXPECT_EQ(d2.size(), 4);
  EXPECT_NEAR(std::abs(d2.k(0, 2) - Complex(1.0 / std::sqrt(2.0))), 0.0, 1e-15);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(d2.k());
  const RVector ev = es.eigenvalues();
  EXPECT_NEAR(ev(0), 0.0, 1e-12);
  EXPECT_NEAR(ev(1), 0.0, 1e-12);
  EXPECT_NEAR(ev(2), 2.0, 1e-12);
  EXPECT_NEAR(ev(3), 2.0, 1e-12);
  const ModeFamily d3 = make_comp_ft_family(3);
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l) {
      EXPECT_NEAR(std::abs(d3.k(j, 3 + l)), 1.0 / std::sqrt(3.0), 1e-15);
      if (j != l) {
        EXPECT_EQ(d3.k(j, l), Complex(0.0));
        EXPECT_EQ(d3.k(3 + j, 3 + l), Complex(0.0));
      }
    }
  EXPECT_THROW(make_comp_ft_family(1), ValidationError);
}

TEST(Modes, DpsFamily) {
  const ModeFamily one = make_dps_family(1);
  EXPECT_EQ(one.size(), 2);
  EXPECT_NEAR(std::abs(one.k(0, 1)), 0.0, 1e-15);
  const ModeFamily two = make_dps_family(2);
  EXPECT_EQ(two.labels()[0], "00");
  EXPECT_EQ(two.labels()[1], "01");
  EXPECT_NEAR(std::abs(two.k(0, 1) - Complex(1.0 / 3.0)), 0.0, 1e-15);
  const ModeFamily three = make_dps_family(3);
  for (int x = 0; x < 8; ++x) {
    int orthogonal = 0;
    for (int y = 0; y < 8; ++y)
      if (y != x && std::abs(three.k(x, y)) < 1e-12) ++orthogonal;
    EXPECT_EQ(orthogonal, 3) << "mode " << three.labels()[static_cast<std::size_t>(x)];
  }
  EXPECT_THROW(make_dps_family(0), ValidationError);
  EXPECT_THROW(make_dps_family(7), ValidationError);
  EXPECT_NO_THROW(make_dps_family(7, 7));
}

TEST(Modes, InvariantViolationsNameTheEntry) {
  CMatrix bad(2, 2);
  bad << 1.0, 0.5, 0.4, 1.0;
  try {
    ModeFamily f(bad);
    FAIL() << "non-Hermitian matrix accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Hermiticity"), std::string::npos);
  }
  CMatrix diag(2, 2);
  diag << 0.9, 0.0, 0.0, 1.0;
  EXPECT_THROW(ModeFamily{diag}, ValidationError);
  // three mutually anti-aligned modes cannot exist
  CMatrix notpsd(3, 3);
  notpsd << 1.0, -0.9, -0.9, -0.9, 1.0, -0.9, -0.9, -0.9, 1.0;
  EXPECT_THROW(ModeFamily{notpsd}, ValidationError);
  EXPECT_THROW(make_two_mode(0.5).with_priors({0.7, 0.7}), ValidationError);
  EXPECT_THROW(make_two_mode(0.5).with_priors({1.2, -0.2}), ValidationError);
}

TEST(Modes, JsonRoundTrip) {
  const auto path = temp_file("family.json");
  const ModeFamily f = make_comp_ft_family(3);
  save_family(f, path);
  const ModeFamily g = load_family(path);
  EXPECT_EQ(g.size(), f.size());
  EXPECT_LE((g.k() - f.k()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(g.labels(), f.labels());
  EXPECT_EQ(g.fingerprint(), f.fingerprint());
  std::filesystem::remove(path);
}

TEST(Modes, JsonFiles) {
  const auto path = temp_file("two.json");
  write_text(path, R"({"n_modes": 2, "k": [[1, 0.5], [0.5, 1]]})");
  EXPECT_TRUE(load_family(path).k().isApprox(make_two_mode(0.5).k()));

  write_text(path, R"({"n_modes": 2, "k": [[1, 1.2], [1.2, 1]]})");
  try {
    load_family(path);
    FAIL() << "|k| > 1 accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(0,1)"), std::string::npos);
  }

  write_text(path, R"({"n_modes": 2, "k": [[1, {"re": 0.1, "im": 0.2}], [{"re": 0.1, "im": 0.2}, 1]]})");
  try {
    load_family(path);
    FAIL() << "non-Hermitian matrix accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Hermiticity"), std::string::npos);
  }

  write_text(path, R"({"n_modes": 2, "k": [[1, 0.5]]})");
  EXPECT_THROW(load_family(path), ValidationError);
  write_text(path, "{not json");
  EXPECT_THROW(load_family(path), ValidationError);
  EXPECT_THROW(load_family(temp_file("does_not_exist.json")), ValidationError);
  std::filesystem::remove(path);
}

TEST(Modes, FingerprintTracksContent) {
  EXPECT_EQ(make_two_mode(0.5).fingerprint(), make_two_mode(0.5).fingerprint());
  EXPECT_NE(make_two_mode(0.5).fingerprint(), make_two_mode(0.6).fingerprint());
  EXPECT_NE(make_two_mode(0.5).fingerprint(), make_two_mode(0.5).with_priors({0.6, 0.4}).fingerprint());
  EXPECT_NE(make_two_mode({0.5, 0.1}).fingerprint(), make_two_mode({0.5, -0.1}).fingerprint());
}

TEST(Fock, DistributionValidation) {
  EXPECT_THROW(PhotonDistribution(std::vector<double>{}), ValidationError);
  EXPECT_THROW(PhotonDistribution({0.5, -0.1}), ValidationError);
  EXPECT_THROW(PhotonDistribution({0.7, 0.7}), ValidationError);
  EXPECT_THROW(PhotonDistribution({0.5, 0.5}, 0.7), ValidationError);
  EXPECT_NO_THROW(PhotonDistribution({0.5, 0.5}, 0.5));
  // sub-normalised: the declared mean refers to the untruncated state
  EXPECT_NO_THROW(PhotonDistribution({0.5, 0.3}, 3.0));
  EXPECT_THROW(EnergyConstraint(-0.1, 10), ValidationError);
  EXPECT_THROW(EnergyConstraint(11.0, 10), ValidationError);
  EXPECT_THROW(EnergyConstraint(0.5, 0), ValidationError);
}

TEST(Fock, InnerProduct) {
  EXPECT_EQ(inner_product(PhotonDistribution({1.0}), Complex(0.3, 0.2)), Complex(1.0));
  EXPECT_NEAR(std::abs(inner_product(PhotonDistribution::fock(1), 0.5) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(inner_product(PhotonDistribution({0.5, 0.5}), -1.0)), 0.0, 1e-15);
}

TEST(Fock, InnerProductProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> w(1 + t % 15);
    double z = 0.0;
    for (double& v : w) z += (v = u(rng));
    const double mass = u(rng);
    for (double& v : w) v *= mass / z;
    const PhotonDistribution p(w);
    const Complex k = std::polar(u(rng), 6.283185307179586 * u(rng));
    const Complex s = inner_product(p, k);
    EXPECT_LE(std::abs(s), p.mass() + 1e-15);
    EXPECT_NEAR(std::abs(inner_product(p, std::conj(k)) - std::conj(s)), 0.0, 1e-15);
  }
}

TEST(Fock, TruncationEpsilon) {
  EXPECT_EQ(truncation_epsilon(PhotonDistribution({0.5, 0.5}), 0.7), 0.0);
  EXPECT_NEAR(truncation_epsilon(PhotonDistribution({0.4, 0.5}), Complex(0.0, 1.0)), 0.1, 1e-15);
  EXPECT_NEAR(truncation_epsilon(PhotonDistribution({0.3, 0.3, 0.2, 0.1}), 0.5), 0.1 * 0.0625, 1e-15);
}

TEST(Fock, TruncationEpsilonMonotoneInCutoff) {
  for (int n = 1; n < 30; ++n) {
    const PhotonDistribution a(std::vector<double>(static_cast<std::size_t>(n) + 1, 0.9 / (n + 1)));
    const PhotonDistribution b(std::vector<double>(static_cast<std::size_t>(n) + 2, 0.9 / (n + 2)));
    EXPECT_LE(truncation_epsilon(b, 0.8), truncation_epsilon(a, 0.8));
  }
}

TEST(Fock, TailBoundedByEpsilonForGeometricTails) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double ratio = 0.2 + 0.75 * u(rng);
    const int n_max = 1 + t % 12;
    const Complex k = std::polar(u(rng), 6.283185307179586 * u(rng));
    std::vector<double> full(400);
    for (std::size_t n = 0; n < full.size(); ++n) full[n] = (1.0 - ratio) * std::pow(ratio, static_cast<double>(n));
    const PhotonDistribution p(std::vector<double>(full.begin(), full.begin() + n_max + 1));
    Complex tail = 0.0;
    for (std::size_t n = static_cast<std::size_t>(n_max) + 1; n < full.size(); ++n)
      tail += full[n] * ipow(k, static_cast<int>(n));
    EXPECT_LE(std::abs(tail), truncation_epsilon(p, k) + 1e-15);
  }
}

TEST(Fock, RelaxedEnergyRow) {
  const LinearInequality row = relaxed_energy_row(EnergyConstraint(0.5, 1));
  ASSERT_EQ(row.coeffs.size(), 2u);
  EXPECT_EQ(row.coeffs[0], 2.0);
  EXPECT_EQ(row.coeffs[1], 1.0);
  EXPECT_EQ(row.rhs, 1.5);
  // normalised distributions satisfy it exactly when their mean is at most nbar
  const LinearInequality r3 = relaxed_energy_row(EnergyConstraint(1.5, 3));
  EXPECT_TRUE(satisfies(r3, {0.0, 0.5, 0.5, 0.0}));
  double lhs = 0.0;
  for (int n = 0; n <= 3; ++n) lhs += r3.coeffs[static_cast<std::size_t>(n)] * std::vector<double>{0.0, 0.5, 0.5, 0.0}[static_cast<std::size_t>(n)];
  EXPECT_NEAR(lhs, r3.rhs, 1e-15);
  EXPECT_FALSE(satisfies(r3, {0.0, 0.0, 1.0, 0.0}));
  EXPECT_TRUE(satisfies(r3, {0.0, 1.0, 0.0, 0.0}));
}

TEST(Fock, FloorCeilState) {
  const PhotonDistribution half = floor_ceil_state(0.5);
  EXPECT_EQ(half.weights(), (std::vector<double>{0.5, 0.5}));
  const PhotonDistribution two = floor_ceil_state(2.0);
  EXPECT_EQ(two[2], 1.0);
  EXPECT_EQ(two.n_max(), 2);
  const PhotonDistribution q = floor_ceil_state(1.25);
  EXPECT_NEAR(q[1], 0.75, 1e-15);
  EXPECT_NEAR(q[2], 0.25, 1e-15);
  EXPECT_NEAR(q.mean(), 1.25, 1e-15);
  EXPECT_THROW(floor_ceil_state(-1.0), ValidationError);
}
