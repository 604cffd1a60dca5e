#include <bit>
#include <cstring>

#include "spatent/io.hpp"

namespace spatent {

namespace {

template <typename T>
void put(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("draw file is truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_draws(const PosteriorSamples& samples) {
  std::string out(kDrawsMagic);
  const auto cols = static_cast<std::uint32_t>(samples.draws.cols() + 1);
  put(out, kDrawsVersion);
  put(out, static_cast<std::uint32_t>(samples.grid.rows()));
  put(out, static_cast<std::uint32_t>(samples.grid.cols()));
  put(out, cols);
  put(out, static_cast<std::uint64_t>(samples.rows()));
  std::vector<std::string> names{"chain"};
  names.insert(names.end(), samples.columns.begin(), samples.columns.end());
  for (const auto& name : names) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out += name;
  }
  out.reserve(out.size() + static_cast<std::size_t>(samples.rows()) * cols * 8);
  for (int r = 0; r < samples.rows(); ++r) {
    put(out, static_cast<double>(samples.chain[r]));
    for (Eigen::Index c = 0; c < samples.draws.cols(); ++c) put(out, samples.draws(r, c));
  }
  return out;
}

PosteriorSamples decode_draws(std::string_view bytes) {
  Reader in(bytes);
  if (in.take(kDrawsMagic.size()) != kDrawsMagic) throw DataError("not a draw file (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kDrawsVersion) {
    throw DataError("unsupported draw file version " + std::to_string(version));
  }
  const auto grid_rows = in.get<std::uint32_t>();
  const auto grid_cols = in.get<std::uint32_t>();
  const auto cols = in.get<std::uint32_t>();
  const auto rows = in.get<std::uint64_t>();
  GridSpec grid;
  try {
    grid = GridSpec(static_cast<int>(grid_rows), static_cast<int>(grid_cols));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("draw file: ") + e.what());
  }
  if (cols != static_cast<std::uint32_t>(1 + kHyperColumns + grid.size())) {
    throw DataError("draw file column count does not match its grid");
  }
  std::vector<std::string> names;
  for (std::uint32_t c = 0; c < cols; ++c) {
    const auto len = in.get<std::uint32_t>();
    names.emplace_back(in.take(len));
  }
  if (names.front() != "chain" || names[1] != "beta0" || names[2] != "tau" || names[3] != "rho") {
    throw DataError("draw file has unexpected column names");
  }
  if (in.remaining() != rows * cols * 8) throw DataError("draw file size does not match header");
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(rows), cols - 1);
  std::vector<int> chain(rows);
  for (std::uint64_t r = 0; r < rows; ++r) {
    const double label = in.get<double>();
    if (!(label >= 0.0) || label != std::floor(label)) throw DataError("bad chain label");
    chain[r] = static_cast<int>(label);
    for (std::uint32_t c = 0; c + 1 < cols; ++c) draws(static_cast<Eigen::Index>(r), c) = in.get<double>();
  }
  for (Eigen::Index r = 0; r < draws.rows(); ++r) {
    if (!(draws(r, 1) > 0.0) || !(std::abs(draws(r, 2)) < 1.0) || !draws.row(r).allFinite()) {
      throw DataError("draw file contains values outside the parameter support");
    }
  }
  auto samples = make_samples(grid, std::move(draws), std::move(chain));
  samples.columns.assign(names.begin() + 1, names.end());
  return samples;
}

void write_draws(const fs::path& path, const PosteriorSamples& samples) {
  write_file_atomic(path, encode_draws(samples));
}

PosteriorSamples read_draws(const fs::path& path) { return decode_draws(read_file(path)); }

}  // namespace spatent
