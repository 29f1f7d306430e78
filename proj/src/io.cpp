#include "ocd/io.hpp"

#include "ocd/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ocd {

namespace {

[[noreturn]] void parse_error(std::string_view source, std::size_t line, std::size_t column,
                              const std::string& what) {
  throw Error(ErrorCode::ParseError, std::string(source) + ":" + std::to_string(line) + ":" +
                                         std::to_string(column) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end && !token.empty();
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Matrix parse_samples_csv(std::string_view text, std::string_view source) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    const auto fields = split_fields(line);
    if (cols < 0) {
      for (std::size_t f = 0; f < fields.size(); ++f) {
        double ignored = 0.0;
        const auto name = trim(fields[f]);
        if (name.empty() || parse_number(name, ignored)) {
          parse_error(source, line_no, f + 1, "expected a column name in the header");
        }
      }
      cols = static_cast<Index>(fields.size());
      continue;
    }
    if (static_cast<Index>(fields.size()) != cols) {
      parse_error(source, line_no, std::min(fields.size(), static_cast<std::size_t>(cols)) + 1,
                  "expected " + std::to_string(cols) + " fields, found " +
                      std::to_string(fields.size()));
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
      double v = 0.0;
      if (!parse_number(trim(fields[f]), v)) {
        parse_error(source, line_no, f + 1, "not a number: '" + std::string(fields[f]) + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (cols < 0) parse_error(source, 1, 1, "missing header line");
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path);
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

Matrix read_samples_csv(const std::string& path) {
  return parse_samples_csv(read_text_file(path), path);
}

std::string format_samples_csv(const Matrix& m, std::string_view prefix) {
  std::string out;
  for (Index a = 0; a < m.cols(); ++a) {
    if (a) out += ',';
    out += prefix;
    out += std::to_string(a + 1);
  }
  out += '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index a = 0; a < m.cols(); ++a) {
      if (a) out += ',';
      out += format_double(m(i, a));
    }
    out += '\n';
  }
  return out;
}

void write_samples_csv(const Matrix& m, const std::string& path, std::string_view prefix) {
  write_text_file(path, format_samples_csv(m, prefix));
}

void write_pairs_csv(const Matrix& x, const Matrix& y, const std::string& path) {
  if (x.rows() != y.rows()) throw Error(ErrorCode::ShapeMismatch, "pairs need equal row counts");
  std::string out;
  for (Index a = 0; a < x.cols(); ++a) out += (a ? ",x" : "x") + std::to_string(a + 1);
  for (Index a = 0; a < y.cols(); ++a) out += ",y" + std::to_string(a + 1);
  out += '\n';
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index a = 0; a < x.cols(); ++a) {
      if (a) out += ',';
      out += format_double(x(i, a));
    }
    for (Index a = 0; a < y.cols(); ++a) out += ',' + format_double(y(i, a));
    out += '\n';
  }
  write_text_file(path, out);
}

namespace {

// Netpbm header: magic, then integer fields separated by whitespace, with
// '#' comments running to the end of the line.
struct PnmHeader {
  std::string magic;
  Index width = 0;
  Index height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::string& data, const std::string& path) {
  PnmHeader h;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto integer = [&](const char* what) {
    skip();
    long value = 0;
    const auto [ptr, ec] = std::from_chars(data.data() + pos, data.data() + data.size(), value);
    if (ec != std::errc() || value <= 0) {
      throw Error(ErrorCode::ParseError, path + ": bad " + std::string(what) + " in header");
    }
    pos = static_cast<std::size_t>(ptr - data.data());
    return value;
  };
  if (data.size() < 2 || data[0] != 'P') throw Error(ErrorCode::ParseError, path + ": not a PNM file");
  h.magic = data.substr(0, 2);
  pos = 2;
  h.width = integer("width");
  h.height = integer("height");
  h.maxval = static_cast<int>(integer("maxval"));
  if (h.maxval > 255) throw Error(ErrorCode::ParseError, path + ": maxval above 255 is unsupported");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    throw Error(ErrorCode::ParseError, path + ": truncated header");
  }
  h.data_offset = pos + 1;
  return h;
}

std::vector<double> read_pnm_values(const std::string& data, const PnmHeader& h, Index count,
                                    bool binary, const std::string& path) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (binary) {
    if (data.size() - h.data_offset < static_cast<std::size_t>(count)) {
      throw Error(ErrorCode::ParseError, path + ": pixel data truncated");
    }
    for (Index k = 0; k < count; ++k) {
      const auto byte = static_cast<unsigned char>(data[h.data_offset + static_cast<std::size_t>(k)]);
      out[static_cast<std::size_t>(k)] = static_cast<double>(byte) / h.maxval;
    }
    return out;
  }
  std::istringstream in(data.substr(h.data_offset));
  for (Index k = 0; k < count; ++k) {
    int v = -1;
    if (!(in >> v) || v < 0 || v > h.maxval) {
      throw Error(ErrorCode::ParseError, path + ": bad or missing sample " + std::to_string(k));
    }
    out[static_cast<std::size_t>(k)] = static_cast<double>(v) / h.maxval;
  }
  return out;
}

int to_byte(double v) {
  return static_cast<int>(std::lround(std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0) * 255.0));
}

std::string pnm_body(const std::vector<int>& values, Index per_line, bool binary) {
  std::string out;
  if (binary) {
    out.reserve(values.size());
    for (int v : values) out += static_cast<char>(v);
    return out;
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    out += std::to_string(values[k]);
    out += (static_cast<Index>(k + 1) % per_line == 0) ? '\n' : ' ';
  }
  if (!out.empty() && out.back() == ' ') out.back() = '\n';
  return out;
}

}  // namespace

ImageSamples read_ppm(const std::string& path) {
  const std::string data = read_text_file(path);
  const PnmHeader h = parse_pnm_header(data, path);
  if (h.magic != "P6" && h.magic != "P3") {
    throw Error(ErrorCode::ParseError, path + ": expected P6 or P3, found " + h.magic);
  }
  const auto values = read_pnm_values(data, h, h.width * h.height * 3, h.magic == "P6", path);
  ImageSamples img{Matrix(h.width * h.height, 3), h.width, h.height};
  std::copy(values.begin(), values.end(), img.pixels.data());
  return img;
}

void write_ppm(const ImageSamples& image, const std::string& path, bool binary) {
  if (image.pixels.rows() != image.width * image.height || image.pixels.cols() != 3) {
    throw Error(ErrorCode::ShapeMismatch, "pixel matrix does not match width * height x 3");
  }
  std::vector<int> values(static_cast<std::size_t>(image.pixels.size()));
  for (Index k = 0; k < image.pixels.size(); ++k) values[static_cast<std::size_t>(k)] = to_byte(image.pixels.data()[k]);
  const std::string header = std::string(binary ? "P6" : "P3") + "\n" + std::to_string(image.width) +
                             " " + std::to_string(image.height) + "\n255\n";
  write_text_file(path, header + pnm_body(values, image.width * 3, binary));
}

SquareMatrix read_pgm(const std::string& path) {
  const std::string data = read_text_file(path);
  const PnmHeader h = parse_pnm_header(data, path);
  if (h.magic != "P5" && h.magic != "P2") {
    throw Error(ErrorCode::ParseError, path + ": expected P5 or P2, found " + h.magic);
  }
  const auto values = read_pnm_values(data, h, h.width * h.height, h.magic == "P5", path);
  SquareMatrix img(h.height, h.width);
  for (Index r = 0; r < h.height; ++r) {
    for (Index c = 0; c < h.width; ++c) img(r, c) = values[static_cast<std::size_t>(r * h.width + c)];
  }
  return img;
}

void write_pgm(const SquareMatrix& image, const std::string& path, bool binary) {
  std::vector<int> values;
  values.reserve(static_cast<std::size_t>(image.size()));
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) values.push_back(to_byte(image(r, c)));
  }
  const std::string header = std::string(binary ? "P5" : "P2") + "\n" + std::to_string(image.cols()) +
                             " " + std::to_string(image.rows()) + "\n255\n";
  write_text_file(path, header + pnm_body(values, image.cols(), binary));
}

nlohmann::json diagnostics_json(const StepDiagnostics& d) {
  return {{"step", d.step_index},         {"time", d.time},
          {"cost", d.transport_cost},     {"min_sym_eig", d.min_sym_eig},
          {"drift_x", d.marginal_drift_x}, {"drift_y", d.marginal_drift_y},
          {"n_clusters_x", d.n_clusters_x}, {"n_clusters_y", d.n_clusters_y}};
}

void write_diagnostics_line(std::ostream& out, const StepDiagnostics& d) {
  out << diagnostics_json(d).dump() << '\n';
}

nlohmann::json config_json(const SolverConfig& c) {
  return {{"epsilon", c.epsilon},
          {"epsilon_hat", c.epsilon_hat},
          {"dt", c.dt},
          {"max_steps", c.max_steps},
          {"gamma_abs", c.gamma_abs},
          {"gamma_rel", c.gamma_rel},
          {"stagnation_window", c.stagnation_window},
          {"estimator", std::string(to_string(c.estimator))},
          {"stepper", std::string(to_string(c.stepper))},
          {"seed", c.seed},
          {"record_diagnostics", c.record_diagnostics},
          {"frozen_clusters", c.frozen_clusters},
          {"threads", c.threads},
          {"leaf_size", c.leaf_size},
          {"cluster_count_every", c.cluster_count_every}};
}

SolverConfig config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  try {
    c.epsilon = j.value("epsilon", c.epsilon);
    c.epsilon_hat = j.value("epsilon_hat", c.epsilon_hat);
    c.dt = j.value("dt", c.dt);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.gamma_abs = j.value("gamma_abs", c.gamma_abs);
    c.gamma_rel = j.value("gamma_rel", c.gamma_rel);
    c.stagnation_window = j.value("stagnation_window", c.stagnation_window);
    const std::string estimator = j.value("estimator", std::string(to_string(c.estimator)));
    if (estimator == "piecewise-constant") {
      c.estimator = Estimator::PiecewiseConstant;
    } else if (estimator == "piecewise-linear") {
      c.estimator = Estimator::PiecewiseLinear;
    } else {
      throw Error(ErrorCode::ParseError, "unknown estimator '" + estimator + "'");
    }
    const std::string stepper = j.value("stepper", std::string(to_string(c.stepper)));
    if (stepper == "euler") {
      c.stepper = Stepper::Euler;
    } else if (stepper == "rk4") {
      c.stepper = Stepper::RK4;
    } else {
      throw Error(ErrorCode::ParseError, "unknown stepper '" + stepper + "'");
    }
    c.seed = j.value("seed", c.seed);
    c.record_diagnostics = j.value("record_diagnostics", c.record_diagnostics);
    c.frozen_clusters = j.value("frozen_clusters", c.frozen_clusters);
    c.threads = j.value("threads", c.threads);
    c.leaf_size = j.value("leaf_size", c.leaf_size);
    c.cluster_count_every = j.value("cluster_count_every", c.cluster_count_every);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return c;
}

nlohmann::json manifest_json(const RunManifest& m) {
  return {{"format", std::string(kManifestFormat)},
          {"command", m.command},
          {"config", config_json(m.config)},
          {"inputs", m.inputs},
          {"output_dir", m.output_dir},
          {"options", m.options}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    const std::string format = j.at("format").get<std::string>();
    if (format != kManifestFormat) {
      throw Error(ErrorCode::ParseError, "unsupported manifest format '" + format + "'");
    }
    m.command = j.at("command").get<std::string>();
    m.config = config_from_json(j.at("config"));
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.output_dir = j.value("output_dir", std::string());
    m.options = j.value("options", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  write_text_file(path, manifest_json(m).dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace ocd
