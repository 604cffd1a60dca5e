#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spatent/io.hpp"

namespace spatent {

struct FileRecord {
  std::string path;  // outputs: relative to the output directory
  std::string sha256;
};

// Everything needed to re-run a command and check its outputs. `args` holds the
// resolved options (defaults filled in), so a replay does not depend on the
// defaults of a later build.
struct RunManifest {
  std::string tool = "spatent";
  int format = 1;
  std::string command;
  json args = json::object();
  std::string config;  // config snapshot, when the command reads one
  std::uint64_t seed = 0;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  std::string started;  // UTC, ISO 8601
  std::string finished;
  json extra = json::object();
};

json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const json& j);
void write_manifest(const fs::path& path, const RunManifest& manifest);
RunManifest read_manifest(const fs::path& path);

std::string utc_timestamp();

}  // namespace spatent
