#include "spatent/config.hpp"

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

namespace spatent {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto comment = line.find_first_of("#;"); comment != std::string_view::npos) {
      line = line.substr(0, comment);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError("duplicate config key '" + key + "'");
  }
  return out;
}

StudyConfig parse_study_config(std::string_view text) {
  auto values = parse_key_values(text);
  StudyConfig cfg;
  std::set<std::string> used;
  auto take = [&](const std::string& key) -> const std::string* {
    auto it = values.find(key);
    if (it == values.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  if (auto v = take("rows")) cfg.rows = parse_number<int>("rows", *v);
  if (auto v = take("cols")) cfg.cols = parse_number<int>("cols", *v);
  if (auto v = take("scheme")) {
    try {
      cfg.scheme = parse_scheme(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto v = take("tau")) cfg.tau = parse_number<double>("tau", *v);
  if (auto v = take("replicates")) cfg.replicates = parse_number<int>("replicates", *v);
  if (auto v = take("p_min")) cfg.p_min = parse_number<double>("p_min", *v);
  if (auto v = take("p_max")) cfg.p_max = parse_number<double>("p_max", *v);
  if (auto v = take("seed")) cfg.seed = parse_number<std::uint64_t>("seed", *v);
  if (auto v = take("model")) cfg.model = *v;
  if (auto v = take("eta")) cfg.eta = parse_number<double>("eta", *v);
  if (auto v = take("sweeps")) cfg.sweeps = parse_number<int>("sweeps", *v);

  std::vector<std::string> names{"clustered", "random"};
  if (auto v = take("scenarios")) names = split_list(*v);
  if (names.empty()) throw ConfigError("config key 'scenarios' lists no scenario");
  cfg.scenarios.clear();
  for (const auto& name : names) {
    ScenarioSpec spec{name, name == "clustered" ? 0.99 : name == "random" ? 0.0001 : 0.0};
    const std::string key = "rho_" + name;
    if (auto v = take(key)) {
      spec.rho = parse_number<double>(key, *v);
    } else if (name != "clustered" && name != "random" && cfg.model == "car") {
      throw ConfigError("scenario '" + name + "' needs a '" + key + "' key");
    }
    cfg.scenarios.push_back(spec);
  }

  for (const auto& [key, value] : values) {
    if (!used.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (cfg.rows < 2 || cfg.cols < 2) throw ConfigError("grid must be at least 2x2");
  if (!(cfg.tau > 0.0)) throw ConfigError("tau must be positive");
  if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (!(cfg.p_min > 0.0 && cfg.p_max < 1.0 && cfg.p_min <= cfg.p_max)) {
    throw ConfigError("need 0 < p_min <= p_max < 1");
  }
  if (cfg.model != "car" && cfg.model != "autologistic") {
    throw ConfigError("model must be 'car' or 'autologistic'");
  }
  if (cfg.model == "car") {
    for (const auto& s : cfg.scenarios)
      if (!(std::abs(s.rho) < 1.0)) throw ConfigError("rho_" + s.name + " must lie in (-1, 1)");
  }
  if (cfg.model == "autologistic" && cfg.sweeps < kGibbsBurnInFloor) {
    throw ConfigError("sweeps must be >= " + std::to_string(kGibbsBurnInFloor));
  }
  return cfg;
}

ScenarioConfig StudyConfig::scenario(std::size_t index) const {
  ScenarioConfig out;
  out.name = scenarios.at(index).name;
  out.grid = grid();
  out.scheme = scheme;
  out.tau = tau;
  out.rho = scenarios.at(index).rho;
  out.beta0_schedule = beta0_schedule(replicates, p_min, p_max);
  out.seed = seed;
  out.stream = index;
  return out;
}

std::string StudyConfig::to_text() const {
  std::ostringstream out;
  out << "rows = " << rows << "\ncols = " << cols << "\nscheme = " << to_string(scheme)
      << "\ntau = " << format_double(tau) << "\nscenarios = ";
  for (std::size_t i = 0; i < scenarios.size(); ++i) out << (i ? "," : "") << scenarios[i].name;
  out << '\n';
  for (const auto& s : scenarios) out << "rho_" << s.name << " = " << format_double(s.rho) << '\n';
  out << "replicates = " << replicates << "\np_min = " << format_double(p_min)
      << "\np_max = " << format_double(p_max) << "\nseed = " << seed << "\nmodel = " << model
      << "\neta = " << format_double(eta) << "\nsweeps = " << sweeps << '\n';
  return out.str();
}

}  // namespace spatent
