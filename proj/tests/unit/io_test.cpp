#include "ocd/dynamics.hpp"
#include "ocd/io.hpp"
#include "ocd/samplers.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace ocd;
using oracle::column;
using oracle::error_code_of;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "ocd_io_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("csv text format") {
  CHECK(format_samples_csv(column({0.0, 1.0})) == "x1\n0\n1\n");
  const Matrix m = parse_samples_csv("x1\n0\n1\n");
  CHECK(m == column({0.0, 1.0}));
  CHECK(parse_samples_csv("y1,y2\r\n1.5,-2\r\n\r\n3e-3,4\r\n") == oracle::from_rows({{1.5, -2}, {3e-3, 4}}));
  CHECK(format_samples_csv(oracle::from_rows({{1, 2}}), "y") == "y1,y2\n1,2\n");
}

TEST_CASE("csv parse errors name the position") {
  try {
    parse_samples_csv("x1,x2\n1,2\n3,abc\n", "data.csv");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find("data.csv:3:") != std::string::npos);
  }
  CHECK(error_code_of([] { parse_samples_csv("x1,x2\n1,2\n3\n"); }) == ErrorCode::ParseError);
  CHECK(error_code_of([] { parse_samples_csv("1,2\n3,4\n"); }) == ErrorCode::ParseError);
  CHECK(error_code_of([] { parse_samples_csv(""); }) == ErrorCode::ParseError);
  CHECK(error_code_of([] { read_samples_csv(temp_path("missing.csv")); }) == ErrorCode::IoError);
}

TEST_CASE("csv round trip is bit exact") {
  const std::string path = temp_path("roundtrip.csv");
  write_samples_csv(column({0.1}), path);
  CHECK(read_samples_csv(path)(0, 0) == 0.1);

  std::mt19937_64 rng(1);
  Matrix m = sample_standard_normal(200, 3, 0.0, rng);
  m(0, 0) = 5e-324;
  m(1, 1) = -1.7976931348623157e308;
  m(2, 2) = 1.0 / 3.0;
  write_samples_csv(m, path);
  CHECK(read_samples_csv(path) == m);
}

TEST_CASE("pairs file carries both halves") {
  const std::string path = temp_path("pairs.csv");
  write_pairs_csv(oracle::from_rows({{1, 2}}), oracle::from_rows({{3, 4}}), path);
  CHECK(read_text_file(path) == "x1,x2,y1,y2\n1,2,3,4\n");
  const Matrix pairs = read_samples_csv(path);
  const ParticleEnsemble e(pairs.leftCols(2), pairs.rightCols(2));
  CHECK(e.y()(0, 1) == 4.0);
}

TEST_CASE("ppm and pgm round trips") {
  ImageSamples img{Matrix(6, 3), 3, 2};
  for (Index i = 0; i < 6; ++i) img.pixels.row(i) << i / 5.0, 1.0 - i / 5.0, (i % 2) * 1.0;
  for (bool binary : {true, false}) {
    const std::string path = temp_path(binary ? "img_bin.ppm" : "img_txt.ppm");
    write_ppm(img, path, binary);
    const ImageSamples back = read_ppm(path);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK((back.pixels - img.pixels).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12);
    CHECK(read_text_file(path).substr(0, 2) == (binary ? "P6" : "P3"));
  }
  SquareMatrix gray(2, 3);
  gray << 0, 0.5, 1, 1, 0.25, 0;
  const std::string gpath = temp_path("img.pgm");
  write_pgm(gray, gpath);
  CHECK((read_pgm(gpath) - gray).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12);

  write_text_file(gpath, "P2\n# comment line\n2 1\n10\n0 10\n");
  const SquareMatrix parsed = read_pgm(gpath);
  CHECK(parsed(0, 1) == 1.0);
  write_text_file(gpath, "P2\n2 1\n1000\n0 10\n");
  CHECK(error_code_of([&] { read_pgm(gpath); }) == ErrorCode::ParseError);
  CHECK(error_code_of([&] { read_ppm(gpath); }) == ErrorCode::ParseError);
}

TEST_CASE("diagnostics lines have the fixed schema") {
  std::mt19937_64 rng(2);
  SolverConfig c;
  c.epsilon = 0.5;
  c.max_steps = 3;
  std::ostringstream out;
  const Matrix x = sample_standard_normal(50, 2, 0.0, rng), y = sample_standard_normal(50, 2, 1.0, rng);
  run(ParticleEnsemble(x, y), l2_cost_model(), c, [&](const StepDiagnostics& d) { write_diagnostics_line(out, d); });
  std::istringstream in(out.str());
  std::string line;
  int count = 0;
  const std::vector<std::string> keys{"cost", "drift_x", "drift_y", "min_sym_eig",
                                      "n_clusters_x", "n_clusters_y", "step", "time"};
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    std::vector<std::string> got;
    for (const auto& [k, v] : j.items()) {
      got.push_back(k);
      CHECK(v.is_number());
    }
    CHECK(got == keys);
    CHECK(j["step"].get<int>() == count);
    ++count;
  }
  CHECK(count == 4);
}

TEST_CASE("config and manifest round trips") {
  SolverConfig c;
  c.epsilon = 0.123;
  c.estimator = Estimator::PiecewiseConstant;
  c.stepper = Stepper::Euler;
  c.seed = 99;
  c.frozen_clusters = true;
  const SolverConfig back = config_from_json(config_json(c));
  CHECK(config_json(back) == config_json(c));
  CHECK(error_code_of([] { config_from_json(nlohmann::json{{"estimator", "bogus"}}); }) == ErrorCode::ParseError);

  RunManifest m;
  m.command = "solve";
  m.config = c;
  m.inputs = {{"x", "a.csv"}, {"y", "b.csv"}};
  m.output_dir = "out";
  m.options = {{"shuffle_y", true}};
  const std::string path = temp_path("manifest.json");
  write_manifest(m, path);
  const RunManifest r = read_manifest(path);
  CHECK(r.command == "solve");
  CHECK(r.inputs == m.inputs);
  CHECK(r.output_dir == "out");
  CHECK(r.options == m.options);
  CHECK(config_json(r.config) == config_json(c));
  CHECK(manifest_json(m)["format"] == std::string(kManifestFormat));

  nlohmann::json wrong = manifest_json(m);
  wrong["format"] = "something/else";
  CHECK(error_code_of([&] { manifest_from_json(wrong); }) == ErrorCode::ParseError);
}

TEST_CASE("shortest decimal formatting") {
  CHECK(format_double(4.0) == "4");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-10) == "-2.5e-10");
}
