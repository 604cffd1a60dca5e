#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spatent/lattice.hpp"
#include "spatent/simulate.hpp"

namespace spatent {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "key = value" lines; '#' and ';' start comments; [sections] are not used.
std::map<std::string, std::string> parse_key_values(std::string_view text);

struct ScenarioSpec {
  std::string name;
  double rho = 0.0;
};

// Settings of a simulation study. Keys (defaults in brackets):
//   rows [40], cols [40], scheme [12nn], tau [0.1],
//   scenarios [clustered,random], rho_<scenario> [clustered 0.99, random 0.0001],
//   replicates [200], p_min [0.1], p_max [0.9], seed [20190101],
//   model [car | autologistic], eta [0.5], sweeps [5000]
// With model = autologistic every scenario is a centered autologistic field
// with dependence eta, simulated by `sweeps` Gibbs sweeps.
struct StudyConfig {
  int rows = 40;
  int cols = 40;
  Scheme scheme = Scheme::TwelveNearest;
  double tau = 0.1;
  std::vector<ScenarioSpec> scenarios{{"clustered", 0.99}, {"random", 0.0001}};
  int replicates = 200;
  double p_min = 0.1;
  double p_max = 0.9;
  std::uint64_t seed = 20190101;
  std::string model = "car";
  double eta = 0.5;
  int sweeps = 5000;

  GridSpec grid() const { return GridSpec(rows, cols); }
  ScenarioConfig scenario(std::size_t index) const;
  // Canonical key = value text that parses back to the same config.
  std::string to_text() const;
};

// Throws ConfigError on unknown keys or invalid values.
StudyConfig parse_study_config(std::string_view text);

}  // namespace spatent
