#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "modebound/common.hpp"

namespace modebound {

/// A set of N optical modes described by their commutation constants
/// [a_i, a_j^dagger] = k_ij. Immutable once constructed.
class ModeFamily {
 public:
  static constexpr double kBoundTol = 1e-12;
  static constexpr double kPsdFloor = -1e-9;

  explicit ModeFamily(CMatrix k, std::vector<std::string> labels = {}, std::vector<double> priors = {})
      : k_(std::move(k)), labels_(std::move(labels)), priors_(std::move(priors)) {
    const auto n = k_.rows();
    if (n < 1 || k_.cols() != n) throw ValidationError("commutation matrix must be square and non-empty");
    if (priors_.empty()) priors_.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    validate();
  }

  int size() const { return static_cast<int>(k_.rows()); }
  const CMatrix& k() const { return k_; }
  Complex k(int i, int j) const { return k_(i, j); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& priors() const { return priors_; }

  bool is_real(double tol = 0.0) const {
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j)
        if (std::abs(k_(i, j).imag()) > tol) return false;
    return true;
  }

  bool uniform_priors() const {
    for (double q : priors_)
      if (std::abs(q - 1.0 / size()) > 1e-15) return false;
    return true;
  }

  ModeFamily conjugated() const { return ModeFamily(k_.conjugate(), labels_, priors_); }
  ModeFamily with_priors(std::vector<double> priors) const { return ModeFamily(k_, labels_, std::move(priors)); }

  /// Stable 64-bit digest of k and the priors, used to key cached tables.
  std::string fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](double v) {
      char buf[32];
      const int len = std::snprintf(buf, sizeof buf, "%.17g;", v == 0.0 ? 0.0 : v);
      for (int c = 0; c < len; ++c) {
        h ^= static_cast<unsigned char>(buf[c]);
        h *= 1099511628211ULL;
      }
    };
    mix(size());
    for (int i = 0; i < size(); ++i)
      for (int j = 0; j < size(); ++j) {
        mix(k_(i, j).real());
        mix(k_(i, j).imag());
      }
    for (double q : priors_) mix(q);
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
  }

 private:
  static std::string entry_name(int i, int j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  }

  void validate() const {
    const int n = size();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Complex v = k_(i, j);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
          throw ValidationError("entry " + entry_name(i, j) + " is not finite");
        if (std::abs(v) > 1.0 + kBoundTol)
          throw ValidationError("entry " + entry_name(i, j) + " violates |k_ij| <= 1 (|k| = " +
                                std::to_string(std::abs(v)) + ")");
        if (std::abs(v - std::conj(k_(j, i))) > kBoundTol)
          throw ValidationError("entry " + entry_name(i, j) + " violates Hermiticity: k_ij != conj(k_ji)");
      }
      if (std::abs(k_(i, i) - 1.0) > kBoundTol)
        throw ValidationError("entry " + entry_name(i, i) + " violates k_ii = 1");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(k_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kPsdFloor)
      throw ValidationError("commutation matrix is not positive semidefinite (smallest eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()) + ")");
    if (static_cast<int>(priors_.size()) != n)
      throw ValidationError("priors must have one entry per mode");
    double total = 0.0;
    for (double q : priors_) {
      if (!(q >= 0.0)) throw ValidationError("priors must be nonnegative");
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("priors must sum to 1");
    if (!labels_.empty() && static_cast<int>(labels_.size()) != n)
      throw ValidationError("labels must have one entry per mode");
  }

  CMatrix k_;
  std::vector<std::string> labels_;
  std::vector<double> priors_;
};

/// Two modes with [a_1, a_2^dagger] = k.
inline ModeFamily make_two_mode(Complex k) {
  if (std::abs(k) > 1.0 + ModeFamily::kBoundTol) throw ValidationError("two-mode overlap requires |k| <= 1");
  CMatrix m(2, 2);
  m << 1.0, k, std::conj(k), 1.0;
  return ModeFamily(m, {"a1", "a2"});
}

/// Symmetric phase-shift family a_j = exp(i 2 pi j / N) a; entry (j,l) = exp(i 2 pi (j-l) / N).
inline ModeFamily make_phase_family(int n_outcomes) {
  if (n_outcomes < 2) throw ValidationError("phase family needs at least 2 outcomes");
  CMatrix m(n_outcomes, n_outcomes);
  std::vector<std::string> labels;
  for (int j = 0; j < n_outcomes; ++j) {
    labels.push_back("phi" + std::to_string(j));
    for (int l = 0; l < n_outcomes; ++l) {
      const int diff = ((j - l) % n_outcomes + n_outcomes) % n_outcomes;
      m(j, l) = std::polar(1.0, 2.0 * std::numbers::pi * diff / n_outcomes);
    }
  }
  // exact values where the phase is a multiple of pi/2
  for (int j = 0; j < n_outcomes; ++j)
    for (int l = 0; l < n_outcomes; ++l) {
      auto& v = m(j, l);
      if (std::abs(v.real()) < 1e-15) v.real(0.0);
      if (std::abs(v.imag()) < 1e-15) v.imag(0.0);
    }
  return ModeFamily(m, std::move(labels));
}

/// d computational modes followed by their d Fourier-transformed modes.
inline ModeFamily make_comp_ft_family(int d) {
  if (d < 2) throw ValidationError("computational/Fourier family needs d >= 2");
  const int n = 2 * d;
  CMatrix m = CMatrix::Identity(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<std::string> labels;
  for (int j = 0; j < d; ++j) labels.push_back("a" + std::to_string(j));
  for (int j = 0; j < d; ++j) labels.push_back("b" + std::to_string(j));
  for (int j = 0; j < d; ++j) {
    for (int l = 0; l < d; ++l) {
      // [a_j, b_l^dagger] = (1/sqrt d) conj(omega)^(j l)
      const int e = (j * l) % d;
      Complex v = std::polar(scale, -2.0 * std::numbers::pi * e / d);
      if (std::abs(v.imag()) < 1e-16) v.imag(0.0);
      if (std::abs(v.real()) < 1e-16) v.real(0.0);
      m(j, d + l) = v;
      m(d + l, j) = std::conj(v);
    }
  }
  return ModeFamily(m, std::move(labels));
}

inline constexpr int kDefaultDpsCap = 6;

/// Differential-phase-shift modes: one mode per ell-bit string, consecutive
/// pulse phases differing by x_i * pi, reference phase fixed to zero.
inline ModeFamily make_dps_family(int ell, int cap = kDefaultDpsCap) {
  if (ell < 1) throw ValidationError("DPS family needs ell >= 1");
  if (ell > cap) throw ValidationError("DPS family ell=" + std::to_string(ell) + " exceeds cap " + std::to_string(cap));
  const int n = 1 << ell;
  // phase[x][i] for i = 0..ell, stored as multiples of pi (0 or 1 mod 2)
  std::vector<std::vector<int>> phase(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(ell) + 1, 0));
  std::vector<std::string> labels;
  for (int x = 0; x < n; ++x) {
    std::string label;
    for (int i = 1; i <= ell; ++i) {
      const int bit = (x >> (ell - i)) & 1;  // x_1 is the most significant bit
      label.push_back(bit ? '1' : '0');
      phase[x][i] = (phase[x][i - 1] + bit) % 2;
    }
    labels.push_back(label);
  }
  CMatrix m(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      double sum = 0.0;
      for (int i = 0; i <= ell; ++i) sum += (phase[x][i] == phase[y][i]) ? 1.0 : -1.0;
      m(x, y) = sum / (ell + 1);
    }
  return ModeFamily(m, std::move(labels));
}

inline nlohmann::json to_json(const ModeFamily& f) {
  nlohmann::json k = nlohmann::json::array();
  for (int i = 0; i < f.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < f.size(); ++j) row.push_back({{"re", f.k(i, j).real()}, {"im", f.k(i, j).imag()}});
    k.push_back(row);
  }
  nlohmann::json out = {{"n_modes", f.size()}, {"k", k}, {"priors", f.priors()}};
  if (!f.labels().empty()) out["labels"] = f.labels();
  return out;
}

inline ModeFamily family_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("mode family JSON must be an object");
  if (!j.contains("n_modes") || !j["n_modes"].is_number_integer())
    throw ValidationError("mode family JSON needs integer 'n_modes'");
  const int n = j["n_modes"].get<int>();
  if (n < 1) throw ValidationError("'n_modes' must be positive");
  if (!j.contains("k") || !j["k"].is_array() || static_cast<int>(j["k"].size()) != n)
    throw ValidationError("'k' must be an array of " + std::to_string(n) + " rows");
  CMatrix k(n, n);
  for (int r = 0; r < n; ++r) {
    const auto& row = j["k"][static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ValidationError("row " + std::to_string(r) + " of 'k' must have " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) {
      const auto& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        k(r, c) = e.get<double>();
      } else if (e.is_object() && e.contains("re")) {
        k(r, c) = Complex(e["re"].get<double>(), e.value("im", 0.0));
      } else {
        throw ValidationError("entry (" + std::to_string(r) + "," + std::to_string(c) +
                              ") must be {\"re\": x, \"im\": y} or a number");
      }
    }
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  std::vector<double> priors;
  if (j.contains("priors")) priors = j["priors"].get<std::vector<double>>();
  return ModeFamily(k, std::move(labels), std::move(priors));
}

inline ModeFamily load_family(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open mode family file " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("parse error in " + file.string() + ": " + e.what());
  }
  try {
    return family_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed mode family in " + file.string() + ": " + e.what());
  }
}

inline void save_family(const ModeFamily& f, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw ValidationError("cannot write " + file.string());
  out << to_json(f).dump(2) << '\n';
}

}  // namespace modebound
