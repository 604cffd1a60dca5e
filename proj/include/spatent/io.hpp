#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

#include "spatent/entropy.hpp"
#include "spatent/infer.hpp"
#include "spatent/simulate.hpp"

namespace spatent {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Malformed or inconsistent input files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to a unique temporary sibling, then renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

// n1 lines of n2 comma-separated 0/1 values.
std::string format_field_csv(const BinaryField& field);
BinaryField parse_field_csv(std::string_view text);
BinaryField read_field_csv(const fs::path& path);
void write_field_csv(const fs::path& path, const BinaryField& field);

json truth_to_json(const TruthRecord& truth);
TruthRecord truth_from_json(const json& j);

// Draw table: "SPENTDRW", u32 version, u32 grid rows, u32 grid cols,
// u32 column count, u64 row count, column names (u32 length + bytes), then
// row-major float64 values. Every integer and float is little-endian. The
// first column is the chain label.
inline constexpr std::string_view kDrawsMagic = "SPENTDRW";
inline constexpr std::uint32_t kDrawsVersion = 1;
std::string encode_draws(const PosteriorSamples& samples);
PosteriorSamples decode_draws(std::string_view bytes);
void write_draws(const fs::path& path, const PosteriorSamples& samples);
PosteriorSamples read_draws(const fs::path& path);

// n1 lines of n2 values, printed with 17 significant digits.
std::string format_layer_csv(const GridSpec& grid, const Eigen::VectorXd& layer);
// Binary 16-bit P5 graymap: 0 -> 0 and `full_scale` -> 65535, clamped.
std::string encode_pgm(const GridSpec& grid, const Eigen::VectorXd& layer,
                       double full_scale, std::string_view label);

}  // namespace spatent
