#include "spatent/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "spatent/config.hpp"
#include "spatent/entropy.hpp"
#include "spatent/manifest.hpp"
#include "spatent/parallel.hpp"

namespace spatent::cli {

namespace {

constexpr const char* kManifestName = "manifest.json";

std::string absolute_string(const std::string& path) {
  return fs::absolute(fs::path(path)).lexically_normal().string();
}

std::string rep_dir(const std::string& scenario, int r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%03d", r);
  return scenario + "/" + buf;
}

// Collects outputs as they are written so the manifest can list their checksums.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  void write(const std::string& relative, std::string_view content) {
    write_file_atomic(root_ / relative, content);
    files_.push_back({relative, sha256_hex(content)});
  }
  const fs::path& root() const { return root_; }
  std::vector<FileRecord> files() const {
    auto out = files_;
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.path < b.path; });
    return out;
  }
  void add(std::vector<FileRecord> more) { files_.insert(files_.end(), more.begin(), more.end()); }

 private:
  fs::path root_;
  std::vector<FileRecord> files_;
};

FileRecord input_record(const std::string& path) { return {path, sha256_file(path)}; }

json interval_json(const IntervalSummary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"lower", s.lower}, {"upper", s.upper}};
}

json stats_json(const SurfaceStats& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const json& args, std::ostream& out, std::ostream&) {
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.args = args;
  manifest.started = utc_timestamp();
  const StudyConfig cfg = parse_study_config(args.at("config_text").get<std::string>());
  manifest.config = cfg.to_text();
  manifest.seed = cfg.seed;
  if (const auto path = args.value("config", std::string()); !path.empty()) {
    manifest.inputs.push_back(input_record(path));
  }

  OutputDir dir(args.at("out").get<std::string>());
  dir.write("config.txt", manifest.config);

  struct Job {
    int scenario;
    int replicate;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s)
    for (int r = 0; r < cfg.replicates; ++r) jobs.push_back({static_cast<int>(s), r});

  std::vector<ScenarioConfig> scenarios;
  std::vector<std::optional<CholeskyFactor>> factors;
  const AdjacencyMatrix adjacency = build_adjacency(cfg.grid(), cfg.scheme);
  const DegreeMatrix degrees = degree_matrix(adjacency);
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    scenarios.push_back(cfg.scenario(s));
    if (cfg.model == "car") {
      factors.emplace_back(
          sparse_cholesky(build_precision(adjacency, degrees, cfg.tau, scenarios.back().rho)));
    } else {
      factors.emplace_back();
    }
  }

  std::vector<std::vector<FileRecord>> written(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), worker_count(), [&](int j) {
    const auto [s, r] = jobs[j];
    const ScenarioConfig& sc = scenarios[s];
    const std::string base = rep_dir(sc.name, r);
    BinaryField field;
    json truth;
    if (cfg.model == "car") {
      Replicate rep = simulate_replicate(sc, *factors[s], r);
      field = std::move(rep.field);
      truth = truth_to_json(rep.truth);
    } else {
      Rng rng = make_stream(sc.seed, sc.stream, static_cast<std::uint64_t>(r));
      AutologisticParams params{sc.beta0_schedule[r], cfg.eta, sc.grid, sc.scheme};
      field = gibbs_autologistic(params, cfg.sweeps, rng);
      truth = {{"replicate", r},   {"model", "autologistic"}, {"beta0", params.beta0},
               {"eta", cfg.eta},   {"sweeps", cfg.sweeps},    {"seed", sc.seed},
               {"stream", sc.stream}};
    }
    const std::string csv = format_field_csv(field);
    const std::string truth_text = truth.dump() + "\n";
    write_file_atomic(dir.root() / (base + "/field.csv"), csv);
    write_file_atomic(dir.root() / (base + "/truth.json"), truth_text);
    written[j] = {{base + "/field.csv", sha256_hex(csv)}, {base + "/truth.json", sha256_hex(truth_text)}};
  });
  for (auto& w : written) dir.add(std::move(w));

  json replicates = json::array();
  for (const auto& [s, r] : jobs) {
    const std::string base = rep_dir(scenarios[s].name, r);
    replicates.push_back({{"scenario", scenarios[s].name},
                          {"rho", cfg.scenarios[s].rho},
                          {"replicate", r},
                          {"beta0", scenarios[s].beta0_schedule[r]},
                          {"field", base + "/field.csv"},
                          {"truth", base + "/truth.json"},
                          {"fit_dir", base + "/fit"}});
  }
  manifest.extra["model"] = cfg.model;
  manifest.extra["scheme"] = std::string(to_string(cfg.scheme));
  manifest.extra["replicates"] = std::move(replicates);
  manifest.outputs = dir.files();
  manifest.finished = utc_timestamp();
  write_manifest(dir.root() / kManifestName, manifest);
  out << "simulated " << jobs.size() << " fields (" << cfg.scenarios.size() << " scenarios x "
      << cfg.replicates << " replicates) in " << dir.root().string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- fit

FitConfig fit_config_from(const json& args) {
  FitConfig fc;
  fc.chains = args.at("chains").get<int>();
  fc.iterations = args.at("iters").get<int>();
  fc.burn_in = args.at("burn_in").get<int>();
  fc.thin = args.at("thin").get<int>();
  fc.block_lines = args.at("block_lines").get<int>();
  fc.laplace_steps = args.at("laplace_steps").get<int>();
  fc.seed = args.at("seed").get<std::uint64_t>();
  fc.fail_on_divergence = false;
  try {
    fc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (fc.chains < 2) throw UsageError("at least 2 chains are needed for R-hat");
  return fc;
}

std::string diagnostics_text(const DiagnosticsReport& report, const PosteriorSamples& samples) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "parameter" << std::setw(14) << "rhat" << std::setw(14)
      << "ess" << "flag\n";
  for (const auto& p : report.parameters) {
    out << std::setw(12) << p.name << std::setw(14) << (p.degenerate ? "degenerate" : fmt(p.rhat))
        << std::setw(14) << fmt(p.ess) << (p.flagged ? "FLAG" : "ok") << '\n';
  }
  out << "\nacceptance after burn-in\n";
  for (const auto& r : samples.reports) {
    out << "chain " << r.chain << ':';
    for (const auto& m : r.moves) out << ' ' << m.name << '=' << fmt(m.rate());
    if (r.diverged) out << "  [" << r.divergence << ']';
    out << '\n';
  }
  out << "\nconverged: " << (report.converged() ? "yes" : "no") << " (threshold rhat <= "
      << kRhatThreshold << ")\n";
  return out.str();
}

int cmd_fit(const json& args, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = "fit";
  manifest.args = args;
  manifest.started = utc_timestamp();
  const FitConfig fc = fit_config_from(args);
  manifest.seed = fc.seed;

  const std::string field_path = args.at("field").get<std::string>();
  const BinaryField field = read_field_csv(field_path);
  manifest.inputs.push_back(input_record(field_path));
  const Scheme scheme = parse_scheme(args.at("scheme").get<std::string>());

  std::optional<TruthRecord> truth;
  if (const auto path = args.value("truth", std::string()); !path.empty()) {
    const json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw DataError(path + ": not valid JSON");
    if (j.value("model", std::string("car")) != "car") {
      throw DataError(path + ": truth record has no CAR parameters");
    }
    truth = truth_from_json(j);
    if (truth->phi.size() != field.size()) {
      throw DataError(path + ": truth record does not match the field's " +
                      std::to_string(field.grid.rows()) + "x" + std::to_string(field.grid.cols()) +
                      " grid");
    }
    manifest.inputs.push_back(input_record(path));
  }

  json warnings = json::array();
  if (field.successes() == 0 || field.successes() == field.size()) {
    const std::string msg = std::string("degenerate data: every cell is ") +
                            (field.successes() == 0 ? "0" : "1") +
                            "; the intercept is identified by its prior alone";
    warnings.push_back(msg);
    err << "warning: " << msg << '\n';
  }

  const AdjacencyMatrix adjacency = build_adjacency(field.grid, scheme);
  const DegreeMatrix degrees = degree_matrix(adjacency);
  const Priors priors;
  const PosteriorSamples samples = fit_mcmc(field, adjacency, degrees, priors, fc);
  const PosteriorSummary summary = posterior_summary(samples);
  const DiagnosticsReport diag = diagnostics(samples, fc.seed);
  const EntropySurface surface = posterior_entropy_surface(samples);

  bool diverged = false;
  json acceptance = json::array();
  for (const auto& r : samples.reports) {
    json moves = json::array();
    for (const auto& m : r.moves)
      moves.push_back({{"move", m.name}, {"rate", m.rate()}, {"scale", m.final_scale}});
    acceptance.push_back({{"chain", r.chain}, {"moves", moves}, {"diverged", r.diverged}});
    if (r.diverged) {
      diverged = true;
      warnings.push_back(r.divergence);
    }
  }
  json params = json::array();
  for (const auto& p : diag.parameters) {
    params.push_back({{"name", p.name}, {"rhat", p.degenerate ? json(nullptr) : json(p.rhat)},
                      {"ess", p.ess}, {"degenerate", p.degenerate}, {"flagged", p.flagged}});
  }

  json sidecar;
  sidecar["field"] = field_path;
  sidecar["grid"] = {{"rows", field.grid.rows()}, {"cols", field.grid.cols()}};
  sidecar["scheme"] = std::string(to_string(scheme));
  sidecar["successes"] = field.successes();
  sidecar["config"] = {{"chains", fc.chains},       {"iterations", fc.iterations},
                       {"burn_in", fc.burn_in},     {"thin", fc.thin},
                       {"block_lines", fc.block_lines}, {"laplace_steps", fc.laplace_steps},
                       {"seed", fc.seed}};
  sidecar["priors"] = {{"beta0", {{"normal_mean", priors.beta0_mean}, {"normal_sd", priors.beta0_sd}}},
                       {"tau", {{"gamma_shape", priors.tau_shape}, {"gamma_rate", priors.tau_rate}}},
                       {"atanh_rho", {{"normal_mean", 0.0}, {"normal_sd", priors.rho_tilde_sd}}}};
  sidecar["draws"] = "draws.bin";
  sidecar["retained_draws"] = samples.rows();
  sidecar["summary"] = {{"beta0", interval_json(summary.beta0)},
                        {"tau", interval_json(summary.tau)},
                        {"rho", interval_json(summary.rho)},
                        {"p_mean", stats_json(surface_stats(summary.p_mean))}};
  sidecar["entropy_surface"] = {{"point", stats_json(surface_stats(surface.point))},
                                {"mean", stats_json(surface_stats(surface.mean))}};
  sidecar["acceptance"] = acceptance;
  sidecar["diagnostics"] = {{"converged", diag.converged()},
                            {"max_rhat", std::isfinite(diag.max_rhat()) ? json(diag.max_rhat()) : json(nullptr)},
                            {"parameters", params}};
  if (truth) {
    sidecar["truth"] = {{"path", args.at("truth")},
                        {"beta0", truth->beta0},
                        {"tau", truth->tau},
                        {"rho", truth->rho},
                        {"covered",
                         {{"beta0", summary.beta0.covers(truth->beta0)},
                          {"tau", summary.tau.covers(truth->tau)},
                          {"rho", summary.rho.covers(truth->rho)}}}};
  }
  sidecar["warnings"] = warnings;

  OutputDir dir(args.at("out").get<std::string>());
  dir.write("draws.bin", encode_draws(samples));
  dir.write("fit.json", sidecar.dump(2) + "\n");
  dir.write("diagnostics.txt", diagnostics_text(diag, samples));
  manifest.outputs = dir.files();
  manifest.finished = utc_timestamp();
  write_manifest(dir.root() / kManifestName, manifest);

  out << "beta0 " << fmt(summary.beta0.mean) << " [" << fmt(summary.beta0.lower) << ", "
      << fmt(summary.beta0.upper) << "]\n"
      << "tau   " << fmt(summary.tau.mean) << " [" << fmt(summary.tau.lower) << ", "
      << fmt(summary.tau.upper) << "]\n"
      << "rho   " << fmt(summary.rho.mean) << " [" << fmt(summary.rho.lower) << ", "
      << fmt(summary.rho.upper) << "]\n"
      << "max rhat " << fmt(diag.max_rhat()) << '\n';
  if (truth) {
    out << "truth covered: beta0 " << summary.beta0.covers(truth->beta0) << ", tau "
        << summary.tau.covers(truth->tau) << ", rho " << summary.rho.covers(truth->rho) << '\n';
  }
  if (!diag.converged() || diverged) {
    err << "convergence failure: " << (diverged ? "adaptation diverged" : "R-hat above threshold")
        << "; see " << (dir.root() / "diagnostics.txt").string() << '\n';
    return kExitConvergence;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- entropy

int cmd_entropy(const json& args, std::ostream& out, std::ostream&) {
  RunManifest manifest;
  manifest.command = "entropy";
  manifest.args = args;
  manifest.started = utc_timestamp();
  const std::string draws_path = args.at("draws").get<std::string>();
  const PosteriorSamples samples = read_draws(draws_path);
  manifest.inputs.push_back(input_record(draws_path));
  manifest.seed = samples.seed;

  const EntropySurface surface = posterior_entropy_surface(samples);
  const double full = std::log(2.0);
  const std::vector<std::tuple<std::string, const Eigen::VectorXd*, double>> layers{
      {"point", &surface.point, full},
      {"mean", &surface.mean, full},
      {"sd", &surface.sd, full},
      {"lower", &surface.lower, full},
      {"upper", &surface.upper, full}};

  OutputDir dir(args.at("out").get<std::string>());
  json stats;
  for (const auto& [name, layer, scale] : layers) {
    dir.write(name + ".csv", format_layer_csv(surface.grid, *layer));
    dir.write(name + ".pgm", encode_pgm(surface.grid, *layer, scale, "entropy " + name));
    stats[name] = stats_json(surface_stats(*layer));
  }
  json summary = {{"grid", {{"rows", surface.grid.rows()}, {"cols", surface.grid.cols()}}},
                  {"draws", samples.rows()},
                  {"units", "nats"},
                  {"max_entropy", full},
                  {"layers", stats}};
  dir.write("surface.json", summary.dump(2) + "\n");
  manifest.outputs = dir.files();
  manifest.finished = utc_timestamp();
  write_manifest(dir.root() / kManifestName, manifest);

  const auto mean = surface_stats(surface.mean);
  out << "entropy surface over " << samples.rows() << " draws: mean layer average "
      << fmt(mean.mean) << " nats (" << fmt(mean.mean / full) << " log 2), sd " << fmt(mean.sd)
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const json& args, std::ostream& out, std::ostream&) {
  const BinaryField field = read_field_csv(args.at("field").get<std::string>());
  const std::int64_t ones = field.successes();
  const std::int64_t counts[2] = {field.size() - ones, ones};
  const std::int64_t n = field.size();
  const std::vector<std::pair<std::string, double>> rows{
      {"plugin", plugin_estimator(counts)},
      {"miller_madow", miller_madow(counts)},
      {"jackknife", jackknife_estimator(counts)}};
  if (args.value("json", false)) {
    json j = json::array();
    for (const auto& [name, value] : rows) j.push_back({{"estimator", name}, {"value", value}, {"n", n}});
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << std::left << std::setw(14) << "estimator" << std::setw(24) << "value" << "n\n";
  for (const auto& [name, value] : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << std::setw(14) << name << std::setw(24) << buf << n << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct GroupReport {
  double rho = 0.0;
  std::vector<std::string> scenarios;
  int replicates = 0;
  int completed = 0;
  int with_truth = 0;
  int covered_beta0 = 0, covered_tau = 0, covered_rho = 0;
  int not_converged = 0;
  std::vector<double> point_means, point_sds, mean_means;
};

int cmd_compare(const json& args, std::ostream& out, std::ostream&) {
  RunManifest manifest;
  manifest.command = "compare";
  manifest.args = args;
  manifest.started = utc_timestamp();
  const std::string sim_path = args.at("manifest").get<std::string>();
  const RunManifest sim = read_manifest(sim_path);
  if (sim.command != "simulate") throw DataError(sim_path + " is not a simulate manifest");
  manifest.inputs.push_back(input_record(sim_path));
  manifest.seed = sim.seed;
  const fs::path base = fs::path(sim_path).parent_path();
  const bool car = sim.extra.value("model", std::string("car")) == "car";

  std::map<double, GroupReport> groups;
  std::vector<std::string> pending;
  json rows = json::array();
  for (const auto& rep : sim.extra.at("replicates")) {
    const double rho = rep.at("rho").get<double>();
    auto& g = groups[rho];
    g.rho = rho;
    const std::string scenario = rep.at("scenario").get<std::string>();
    if (std::find(g.scenarios.begin(), g.scenarios.end(), scenario) == g.scenarios.end())
      g.scenarios.push_back(scenario);
    ++g.replicates;
    const std::string fit_dir = rep.at("fit_dir").get<std::string>();
    const fs::path fit_json = base / fit_dir / "fit.json";
    if (!fs::exists(fit_json)) {
      pending.push_back(fit_dir);
      continue;
    }
    manifest.inputs.push_back(input_record(fit_json.string()));
    const json fit = json::parse(read_file(fit_json), nullptr, false);
    if (fit.is_discarded()) throw DataError(fit_json.string() + ": not valid JSON");
    ++g.completed;
    json row = {{"scenario", scenario}, {"replicate", rep.at("replicate")}, {"fit_dir", fit_dir}};
    const auto& summary = fit.at("summary");
    if (!fit.at("diagnostics").at("converged").get<bool>()) ++g.not_converged;
    const auto& surf = fit.at("entropy_surface");
    g.point_means.push_back(surf.at("point").at("mean").get<double>());
    g.point_sds.push_back(surf.at("point").at("sd").get<double>());
    g.mean_means.push_back(surf.at("mean").at("mean").get<double>());
    row["entropy_point_mean"] = g.point_means.back();
    row["converged"] = fit.at("diagnostics").at("converged");
    if (car) {
      const json truth = json::parse(read_file(base / rep.at("truth").get<std::string>()));
      ++g.with_truth;
      json covered;
      const std::pair<const char*, int*> counters[] = {
          {"beta0", &g.covered_beta0}, {"tau", &g.covered_tau}, {"rho", &g.covered_rho}};
      for (const auto& [name, counter] : counters) {
        const double v = truth.at(name).get<double>();
        const auto& s = summary.at(name);
        const bool c = s.at("lower").get<double>() <= v && v <= s.at("upper").get<double>();
        covered[name] = c;
        *counter += c;
      }
      row["covered"] = covered;
    }
    rows.push_back(row);
  }

  int completed = 0;
  for (const auto& [rho, g] : groups) completed += g.completed;
  const bool allow_partial = args.value("allow_partial", false);
  if (completed == 0 || (!pending.empty() && !allow_partial)) {
    std::ostringstream msg;
    msg << pending.size() << " replicate(s) have no completed fit:";
    for (const auto& p : pending) msg << "\n  " << p;
    throw DataError(msg.str());
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
  };
  json group_json = json::array();
  std::ostringstream text;
  for (const auto& [rho, g] : groups) {
    json entry = {{"rho", rho},
                  {"scenarios", g.scenarios},
                  {"replicates", g.replicates},
                  {"completed", g.completed},
                  {"not_converged", g.not_converged},
                  {"entropy_point_mean", mean_of(g.point_means)},
                  {"entropy_point_sd", mean_of(g.point_sds)},
                  {"entropy_mean_mean", mean_of(g.mean_means)}};
    text << "rho = " << fmt(rho) << " (";
    for (std::size_t i = 0; i < g.scenarios.size(); ++i) text << (i ? ", " : "") << g.scenarios[i];
    text << "): " << g.completed << "/" << g.replicates << " fits, " << g.not_converged
         << " not converged\n";
    if (car) {
      entry["coverage"] = {{"beta0", g.covered_beta0}, {"tau", g.covered_tau}, {"rho", g.covered_rho},
                           {"out_of", g.with_truth}};
      text << "  95% interval coverage: beta0 " << g.covered_beta0 << "/" << g.with_truth
           << ", tau " << g.covered_tau << "/" << g.with_truth << ", rho " << g.covered_rho
           << "/" << g.with_truth << '\n';
    }
    text << "  entropy surface (point layer): average " << fmt(mean_of(g.point_means))
         << " nats, within-surface sd " << fmt(mean_of(g.point_sds)) << '\n';
    group_json.push_back(entry);
  }
  if (!pending.empty()) text << pending.size() << " replicate(s) pending\n";

  json report = {{"groups", group_json}, {"replicates", rows}, {"pending", pending}};
  OutputDir dir(args.at("out").get<std::string>());
  dir.write("compare.json", report.dump(2) + "\n");
  dir.write("compare.txt", text.str());
  manifest.outputs = dir.files();
  manifest.finished = utc_timestamp();
  write_manifest(dir.root() / kManifestName, manifest);
  out << text.str();
  return kExitOk;
}

}  // namespace

int run_command(const std::string& command, const json& args, std::ostream& out, std::ostream& err) {
  if (command == "simulate") return cmd_simulate(args, out, err);
  if (command == "fit") return cmd_fit(args, out, err);
  if (command == "entropy") return cmd_entropy(args, out, err);
  if (command == "estimate") return cmd_estimate(args, out, err);
  if (command == "compare") return cmd_compare(args, out, err);
  throw UsageError("unknown command '" + command + "'");
}

int replay(const fs::path& manifest_path, const fs::path& out_dir, std::ostream& out,
           std::ostream& err) {
  const RunManifest m = read_manifest(manifest_path);
  for (const auto& in : m.inputs) {
    if (!fs::exists(in.path)) throw DataError("input " + in.path + " no longer exists");
    if (sha256_file(in.path) != in.sha256) throw DataError("input " + in.path + " has changed");
  }
  json args = m.args;
  args["out"] = fs::absolute(out_dir).lexically_normal().string();
  if (fs::exists(out_dir) && !(fs::is_directory(out_dir) && fs::is_empty(out_dir))) {
    throw UsageError("replay needs a fresh output directory");
  }
  std::ostringstream quiet;
  const int code = run_command(m.command, args, quiet, err);
  int mismatches = 0;
  for (const auto& o : m.outputs) {
    const fs::path p = out_dir / o.path;
    if (!fs::exists(p)) {
      out << "missing   " << o.path << '\n';
      ++mismatches;
    } else if (sha256_file(p) != o.sha256) {
      out << "differs   " << o.path << '\n';
      ++mismatches;
    }
  }
  out << m.command << ": " << (m.outputs.size() - mismatches) << "/" << m.outputs.size()
      << " outputs identical\n";
  if (mismatches > 0) return kExitData;
  return code == kExitConvergence ? kExitOk : code;
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy of spatially correlated binary lattice data", "spatent"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "spatent 1.0");

  std::string config_path, out_dir;
  auto* simulate = app.add_subcommand("simulate", "Simulate replicate fields from a study config");
  simulate->add_option("--config", config_path, "key = value config file (defaults if omitted)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", out_dir, "output directory")->required();

  std::string field, scheme = "12nn", truth;
  int iters = 20000, chains = 4, thin = 10, block_lines = 0, laplace_steps = 3;
  int burn_in = -1;
  std::uint64_t seed = 1;
  auto* fit = app.add_subcommand("fit", "Fit the CAR-logit model by MCMC");
  fit->add_option("--field", field, "field CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--scheme", scheme, "neighbourhood: 4nn or 12nn")->capture_default_str();
  fit->add_option("--iters", iters, "iterations per chain")->capture_default_str();
  fit->add_option("--burn-in", burn_in, "burn-in iterations (default iters / 2)");
  fit->add_option("--thin", thin, "keep every thin-th draw")->capture_default_str();
  fit->add_option("--chains", chains, "number of chains")->capture_default_str();
  fit->add_option("--seed", seed, "master seed")->capture_default_str();
  fit->add_option("--block-lines", block_lines, "lattice lines per field block (0 = whole field)")
      ->capture_default_str();
  fit->add_option("--laplace-steps", laplace_steps, "Newton steps of the hyperparameter move")
      ->capture_default_str();
  fit->add_option("--truth", truth, "truth record for coverage flags")->check(CLI::ExistingFile);
  fit->add_option("--out", out_dir, "output directory")->required();

  std::string draws;
  auto* entropy = app.add_subcommand("entropy", "Entropy surfaces from posterior draws");
  entropy->add_option("--draws", draws, "draws.bin from fit")->required()->check(CLI::ExistingFile);
  entropy->add_option("--out", out_dir, "output directory")->required();

  bool as_json = false;
  auto* estimate = app.add_subcommand("estimate", "Classical global entropy estimates of a field");
  estimate->add_option("--field", field, "field CSV")->required()->check(CLI::ExistingFile);
  estimate->add_flag("--json", as_json, "print JSON instead of a table");

  std::string manifest_path;
  bool allow_partial = false;
  auto* compare = app.add_subcommand("compare", "Coverage and surface report over a simulation");
  compare->add_option("--manifest", manifest_path, "manifest.json written by simulate")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--out", out_dir, "report directory (default <manifest dir>/compare)");
  compare->add_flag("--allow-partial", allow_partial, "report even when some fits are missing");

  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare output checksums");
  replay_cmd->add_option("--manifest", manifest_path, "manifest.json of any run")
      ->required()
      ->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", out_dir, "fresh output directory")->required();

  std::vector<std::string> rest(argv.rbegin(), argv.rend() - (argv.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "spatent 1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << "run 'spatent --help' for usage\n";
    return kExitUsage;
  }

  try {
    json args = json::object();
    std::string command;
    if (*simulate) {
      command = "simulate";
      std::string text;
      if (!config_path.empty()) {
        config_path = absolute_string(config_path);
        text = read_file(config_path);
      }
      args = {{"config", config_path}, {"config_text", parse_study_config(text).to_text()},
              {"out", absolute_string(out_dir)}};
    } else if (*fit) {
      command = "fit";
      (void)parse_scheme(scheme);
      if (burn_in < 0) burn_in = iters / 2;
      args = {{"field", absolute_string(field)}, {"scheme", scheme},
              {"iters", iters},                  {"burn_in", burn_in},
              {"thin", thin},                    {"chains", chains},
              {"seed", seed},                    {"block_lines", block_lines},
              {"laplace_steps", laplace_steps},  {"truth", truth.empty() ? "" : absolute_string(truth)},
              {"out", absolute_string(out_dir)}};
    } else if (*entropy) {
      command = "entropy";
      args = {{"draws", absolute_string(draws)}, {"out", absolute_string(out_dir)}};
    } else if (*estimate) {
      command = "estimate";
      args = {{"field", field}, {"json", as_json}};
    } else if (*compare) {
      command = "compare";
      const std::string m = absolute_string(manifest_path);
      if (out_dir.empty()) out_dir = (fs::path(m).parent_path() / "compare").string();
      args = {{"manifest", m}, {"out", absolute_string(out_dir)}, {"allow_partial", allow_partial}};
    } else {
      return replay(manifest_path, out_dir, out, err);
    }
    return run_command(command, args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace spatent::cli
