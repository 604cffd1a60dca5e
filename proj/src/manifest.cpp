#include "spatent/manifest.hpp"

#include <chrono>
#include <ctime>

namespace spatent {

namespace {

json files_to_json(const std::vector<FileRecord>& files) {
  json out = json::array();
  for (const auto& f : files) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return out;
}

std::vector<FileRecord> files_from_json(const json& j) {
  std::vector<FileRecord> out;
  for (const auto& f : j) out.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

json manifest_to_json(const RunManifest& m) {
  json j;
  j["tool"] = m.tool;
  j["format"] = m.format;
  j["command"] = m.command;
  j["args"] = m.args;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["inputs"] = files_to_json(m.inputs);
  j["outputs"] = files_to_json(m.outputs);
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["extra"] = m.extra;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    if (m.tool != "spatent") throw DataError("not a spatent manifest");
    m.format = j.at("format").get<int>();
    if (m.format != 1) throw DataError("unsupported manifest format " + std::to_string(m.format));
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args");
    m.config = j.value("config", "");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.inputs = files_from_json(j.at("inputs"));
    m.outputs = files_from_json(j.at("outputs"));
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.extra = j.value("extra", json::object());
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const fs::path& path, const RunManifest& manifest) {
  write_file_atomic(path, manifest_to_json(manifest).dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace spatent
