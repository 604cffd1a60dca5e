#include <doctest.h>

#include <cstring>
#include <filesystem>

#include <unistd.h>

#include "spatent/config.hpp"
#include "spatent/io.hpp"
#include "spatent/manifest.hpp"

using namespace spatent;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spatent_io_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

PosteriorSamples toy_samples() {
  const GridSpec g(2, 3);
  Eigen::MatrixXd draws(4, 9);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 9; ++c) draws(r, c) = 0.1 * r - 0.03 * c;
  draws.col(1).setConstant(2.5);
  draws.col(2) << 0.1, -0.2, 0.3, 0.999;
  draws(3, 8) = 1.0 / 3.0;  // needs all 17 digits
  return make_samples(g, draws, {0, 0, 1, 1});
}

void write_u64_le(std::string& bytes, std::size_t at, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) bytes[at + k] = static_cast<char>((v >> (8 * k)) & 0xFF);
}

}  // namespace

TEST_CASE("sha256 published vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("field CSV") {
  const std::string text = "0,1,1\n1,0,0\n";
  const auto f = parse_field_csv(text);
  CHECK(f.grid.rows() == 2);
  CHECK(f.grid.cols() == 3);
  CHECK(f.x == std::vector<std::uint8_t>{0, 1, 1, 1, 0, 0});
  CHECK(format_field_csv(f) == text);
  CHECK(parse_field_csv("0,1,1\r\n1,0,0\r\n").x == f.x);

  CHECK_THROWS_AS(parse_field_csv("0,1,2\n1,0,0\n"), DataError);
  CHECK_THROWS_AS(parse_field_csv("0,1,1\n1,0\n"), DataError);
  CHECK_THROWS_AS(parse_field_csv("0,1,1\n"), DataError);
  CHECK_THROWS_AS(parse_field_csv(""), DataError);
  try {
    parse_field_csv("0,1\n1,x\n");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  TempDir tmp;
  write_field_csv(tmp.path / "f.csv", f);
  CHECK(read_field_csv(tmp.path / "f.csv").x == f.x);
  CHECK(sha256_file(tmp.path / "f.csv") == sha256_hex(text));
  CHECK_THROWS_AS(read_field_csv(tmp.path / "missing.csv"), DataError);
}

TEST_CASE("truth records") {
  TruthRecord t;
  t.replicate = 7;
  t.beta0 = -1.25;
  t.tau = 0.1;
  t.rho = 0.99;
  t.seed = 18446744073709551615ull;
  t.stream = 3;
  t.phi = Eigen::VectorXd::LinSpaced(4, -1.0 / 3.0, 2.0);
  t.p = t.phi.array() + 0.5;
  const auto back = truth_from_json(json::parse(truth_to_json(t).dump()));
  CHECK(back.replicate == 7);
  CHECK(back.beta0 == t.beta0);
  CHECK(back.seed == t.seed);
  CHECK(back.phi == t.phi);
  CHECK(back.p == t.p);
  CHECK_THROWS_AS(truth_from_json(json::parse(R"({"beta0": 1})")), DataError);
  CHECK_THROWS_AS(truth_from_json(json::parse(R"({"beta0": "x", "tau": 1, "rho": 0, "seed": 1, "phi": []})")),
                  DataError);
}

TEST_CASE("draw files round trip exactly") {
  const auto s = toy_samples();
  const std::string bytes = encode_draws(s);
  CHECK(bytes.substr(0, 8) == "SPENTDRW");
  const auto back = decode_draws(bytes);
  CHECK(back.grid.rows() == 2);
  CHECK(back.grid.cols() == 3);
  CHECK(back.draws == s.draws);
  CHECK(back.chain == s.chain);
  CHECK(back.chains == 2);
  CHECK(back.columns == draw_columns(6));
  CHECK(encode_draws(back) == bytes);

  TempDir tmp;
  write_draws(tmp.path / "d.bin", s);
  CHECK(read_draws(tmp.path / "d.bin").draws == s.draws);
}

TEST_CASE("corrupt draw files are rejected") {
  const std::string good = encode_draws(toy_samples());
  CHECK_THROWS_AS(decode_draws(good.substr(0, good.size() - 1)), DataError);
  CHECK_THROWS_AS(decode_draws(good.substr(0, 10)), DataError);
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_draws(bad), DataError);
  bad = good;
  bad[8] = 9;  // version
  CHECK_THROWS_AS(decode_draws(bad), DataError);
  bad = good;
  write_u64_le(bad, 24, 5);  // row count disagrees with the payload
  CHECK_THROWS_AS(decode_draws(bad), DataError);

  // A negative tau in the last row.
  auto s = toy_samples();
  s.draws(3, 1) = -1.0;
  CHECK_THROWS_AS(decode_draws(encode_draws(s)), DataError);
  s = toy_samples();
  s.draws(0, 2) = 1.0;
  CHECK_THROWS_AS(decode_draws(encode_draws(s)), DataError);
}

TEST_CASE("layer CSV and PGM") {
  const GridSpec g(2, 3);
  Eigen::VectorXd layer(6);
  layer << 0.0, 0.25, 0.5, 1.0 / 3.0, 2.0, -1.0;
  const std::string csv = format_layer_csv(g, layer);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);

  const std::string pgm = encode_pgm(g, layer, 1.0, "test");
  const std::string header = "P5\n# test value = sample / 65535 * 1\n3 2\n65535\n";
  REQUIRE(pgm.substr(0, header.size()) == header);
  REQUIRE(pgm.size() == header.size() + 12);
  auto sample = [&](int u) {
    const auto* b = reinterpret_cast<const unsigned char*>(pgm.data() + header.size() + 2 * u);
    return (b[0] << 8) | b[1];
  };
  CHECK(sample(0) == 0);
  CHECK(sample(1) == 16384);  // round(0.25 * 65535)
  CHECK(sample(2) == 32768);
  CHECK(sample(4) == 65535);  // clamped
  CHECK(sample(5) == 0);
  CHECK_THROWS_AS(encode_pgm(g, layer, 0.0, "x"), std::invalid_argument);
  CHECK_THROWS_AS(encode_pgm(GridSpec(3, 3), layer, 1.0, "x"), std::invalid_argument);
}

TEST_CASE("study config") {
  const auto defaults = parse_study_config("");
  CHECK(defaults.rows == 40);
  CHECK(defaults.scheme == Scheme::TwelveNearest);
  CHECK(defaults.scenarios.size() == 2);
  CHECK(defaults.replicates == 200);

  const auto c = parse_study_config(
      "# small study\nrows = 5\ncols = 6 ; trailing\nscheme = 4nn\nscenarios = a, b\n"
      "rho_a = 0.5\nrho_b = -0.2\nreplicates = 3\nseed = 9\n");
  CHECK(c.rows == 5);
  CHECK(c.cols == 6);
  CHECK(c.scheme == Scheme::FourNearest);
  REQUIRE(c.scenarios.size() == 2);
  CHECK(c.scenarios[1].name == "b");
  CHECK(c.scenarios[1].rho == -0.2);
  CHECK(c.seed == 9);

  const auto again = parse_study_config(c.to_text());
  CHECK(again.to_text() == c.to_text());
  CHECK(again.scenarios[0].rho == 0.5);

  const auto scenario = c.scenario(1);
  CHECK(scenario.rho == -0.2);
  CHECK(scenario.beta0_schedule.size() == 3);

  for (const char* bad : {"rows = 1\n", "colour = red\n", "rows = five\n", "rows 5\n",
                          "rows = 5\nrows = 6\n", "tau = 0\n", "scenarios = a\n",
                          "scenarios = a\nrho_a = 1\n", "p_min = 0.9\np_max = 0.1\n",
                          "model = ising\n"}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_study_config(bad), ConfigError);
  }
  try {
    parse_study_config("colour = red\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
}

TEST_CASE("run manifests") {
  RunManifest m;
  m.command = "fit";
  m.args = {{"iters", 100}, {"field", "/x/field.csv"}};
  m.seed = 42;
  m.inputs = {{"/x/field.csv", sha256_hex("a")}};
  m.outputs = {{"draws.bin", sha256_hex("b")}, {"fit.json", sha256_hex("c")}};
  m.started = utc_timestamp();
  m.finished = utc_timestamp();
  m.extra = {{"note", "x"}};

  TempDir tmp;
  write_manifest(tmp.path / "manifest.json", m);
  const auto back = read_manifest(tmp.path / "manifest.json");
  CHECK(back.command == "fit");
  CHECK(back.args == m.args);
  CHECK(back.seed == 42);
  REQUIRE(back.outputs.size() == 2);
  CHECK(back.outputs[1].path == "fit.json");
  CHECK(back.outputs[1].sha256 == m.outputs[1].sha256);
  CHECK(manifest_to_json(back) == manifest_to_json(m));
  CHECK(m.started.size() == 20);
  CHECK(m.started.back() == 'Z');

  CHECK_THROWS_AS(manifest_from_json(json::parse(R"({"tool": "spatent"})")), DataError);
  write_file_atomic(tmp.path / "broken.json", "{not json");
  CHECK_THROWS_AS(read_manifest(tmp.path / "broken.json"), DataError);
}
