#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "spatent/io.hpp"

namespace spatent {

void write_file_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                             ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i)
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

std::string format_field_csv(const BinaryField& field) {
  std::string out;
  out.reserve(static_cast<std::size_t>(field.size()) * 2);
  for (int r = 0; r < field.grid.rows(); ++r) {
    for (int c = 0; c < field.grid.cols(); ++c) {
      if (c > 0) out.push_back(',');
      out.push_back(field.x[field.grid.index(r, c)] ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

BinaryField parse_field_csv(std::string_view text) {
  std::vector<std::uint8_t> values;
  int rows = 0;
  int cols = -1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    int count = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos
                                                                                   : comma - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      if (cell != "0" && cell != "1") {
        throw DataError("field line " + std::to_string(rows + 1) + ": value '" +
                        std::string(cell) + "' is not 0 or 1");
      }
      values.push_back(cell == "1" ? 1 : 0);
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols >= 0 && count != cols) {
      throw DataError("field line " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                      " values, expected " + std::to_string(cols));
    }
    cols = count;
    ++rows;
  }
  if (rows < 2 || cols < 2) throw DataError("field must have at least 2 rows and 2 columns");
  return BinaryField{GridSpec(rows, cols), std::move(values)};
}

BinaryField read_field_csv(const fs::path& path) { return parse_field_csv(read_file(path)); }

void write_field_csv(const fs::path& path, const BinaryField& field) {
  write_file_atomic(path, format_field_csv(field));
}

json truth_to_json(const TruthRecord& truth) {
  json j;
  j["replicate"] = truth.replicate;
  j["beta0"] = truth.beta0;
  j["tau"] = truth.tau;
  j["rho"] = truth.rho;
  j["seed"] = truth.seed;
  j["stream"] = truth.stream;
  j["phi"] = std::vector<double>(truth.phi.begin(), truth.phi.end());
  j["p"] = std::vector<double>(truth.p.begin(), truth.p.end());
  return j;
}

TruthRecord truth_from_json(const json& j) {
  try {
    TruthRecord t;
    t.replicate = j.value("replicate", 0);
    t.beta0 = j.at("beta0").get<double>();
    t.tau = j.at("tau").get<double>();
    t.rho = j.at("rho").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.stream = j.value("stream", std::uint64_t{0});
    const auto phi = j.at("phi").get<std::vector<double>>();
    t.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
    if (j.contains("p")) {
      const auto p = j.at("p").get<std::vector<double>>();
      t.p = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    }
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed truth record: ") + e.what());
  }
}

}  // namespace spatent
