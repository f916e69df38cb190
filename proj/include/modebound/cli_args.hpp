#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "modebound/common.hpp"
#include "modebound/modes.hpp"

namespace modebound {

/// Parses "a", "bi", "a+bi", "a-bi" (also with j, "i" alone meaning 1i).
inline Complex parse_complex(std::string_view text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ValidationError("empty complex number");
  auto fail = [&] { return ValidationError("cannot parse complex number '" + std::string(text) + "'"); };
  auto parse_real = [&](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != part.size()) throw fail();
    return v;
  };
  const char last = s.back();
  if (last != 'i' && last != 'j') return {parse_real(s), 0.0};
  s.pop_back();
  // split at the last sign that is not part of an exponent and not leading
  std::size_t split = std::string::npos;
  for (std::size_t p = s.size(); p-- > 1;) {
    if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  if (split == std::string::npos) return {0.0, parse_real(s)};
  return {parse_real(s.substr(0, split)), parse_real(s.substr(split))};
}

struct FamilyArgs {
  std::string family = "two-mode";
  std::string k = "0";
  int n_outcomes = 2;
  int d = 2;
  int ell = 1;
  std::string kfile;
  std::string priors_file;
};

inline std::vector<double> load_priors(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot open priors file " + file.string());
  try {
    nlohmann::json j;
    in >> j;
    if (j.is_object() && j.contains("priors")) j = j["priors"];
    return j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed priors file " + file.string() + ": " + e.what());
  }
}

inline ModeFamily build_family(const FamilyArgs& a) {
  std::optional<ModeFamily> f;
  if (a.family == "two-mode") {
    f = make_two_mode(parse_complex(a.k));
  } else if (a.family == "phase") {
    f = make_phase_family(a.n_outcomes);
  } else if (a.family == "comp-ft") {
    f = make_comp_ft_family(a.d);
  } else if (a.family == "dps") {
    f = make_dps_family(a.ell);
  } else if (a.family == "custom") {
    if (a.kfile.empty()) throw ValidationError("--family custom needs --kfile");
    f = load_family(a.kfile);
  } else {
    throw ValidationError("unknown family '" + a.family + "'");
  }
  if (!a.priors_file.empty()) return f->with_priors(load_priors(a.priors_file));
  return *f;
}

/// Worker count from MODEBOUND_JOBS, or 1 when unset or malformed.
inline unsigned default_jobs() {
  if (const char* env = std::getenv("MODEBOUND_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace modebound
