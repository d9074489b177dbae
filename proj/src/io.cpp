#include "kema/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "kema/errors.hpp"

namespace kema {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) throw Error(ErrorCode::Parse, where + ": empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw Error(ErrorCode::Parse, where + ": bad number '" + t + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::NotFinite, where + ": non-finite value");
  return v;
}

int parse_int(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || v < 0 ||
      v > std::numeric_limits<int>::max()) {
    throw Error(ErrorCode::Parse, where + ": bad label '" + t + "'");
  }
  return static_cast<int>(v);
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DomainDataset read_dataset_csv(const fs::path& path, const std::string& domain_id) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path.string() + ": empty file");
  const auto header = split(line, ',');
  if (header.size() < 2 || trim(header[0]) != "label") {
    throw Error(ErrorCode::Parse, path.string() + ": header must start with label,f0");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (trim(header[i]) != "f" + std::to_string(i - 1)) {
      throw Error(ErrorCode::Parse, path.string() + ": unexpected column '" + header[i] + "'");
    }
  }
  const auto d = static_cast<Index>(header.size() - 1);
  std::vector<double> vals;
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = path.string() + ":" + std::to_string(row);
    if (static_cast<Index>(cells.size()) != d + 1) {
      throw Error(ErrorCode::Parse, where + ": expected " + std::to_string(d + 1) + " fields");
    }
    labels.push_back(parse_int(cells[0], where));
    for (Index k = 1; k <= d; ++k) vals.push_back(parse_double(cells[k], where));
  }
  DomainDataset ds;
  ds.domain_id = domain_id;
  ds.labels = std::move(labels);
  ds.features = Eigen::Map<const Matrix>(vals.data(), d, static_cast<Index>(ds.labels.size()));
  validate_dataset(ds);
  return ds;
}

void write_dataset_csv(const fs::path& path, const DomainDataset& ds) {
  auto out = open_out(path);
  out << "label";
  for (Index k = 0; k < ds.dim(); ++k) out << ",f" << k;
  out << '\n';
  for (Index j = 0; j < ds.size(); ++j) {
    out << ds.labels[j];
    for (Index k = 0; k < ds.dim(); ++k) out << ',' << g17(ds.features(k, j));
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

Matrix read_matrix_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<double> r;
    for (const auto& c : split(line, ',')) {
      r.push_back(parse_double(c, path.string() + ":" + std::to_string(row)));
    }
    if (!rows.empty() && r.size() != rows.front().size()) {
      throw Error(ErrorCode::Parse, path.string() + ": ragged rows");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, path.string() + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  auto out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << g17(m(i, j));
    out << '\n';
  }
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::Parse, "bad encoded number '" + s + "'");
  }
  return v;
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) data.push_back(hex_double(m(i, j)));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"order", "column-major"}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  try {
    const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (r < 0 || c < 0 || static_cast<Index>(data.size()) != r * c) {
      throw Error(ErrorCode::Parse, "matrix payload size mismatch");
    }
    Matrix m(r, c);
    Index k = 0;
    for (Index jj = 0; jj < c; ++jj) {
      for (Index i = 0; i < r; ++i) m(i, jj) = parse_hex_double(data[k++].get<std::string>());
    }
    require_finite(m, "stored matrix");
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("matrix: ") + e.what());
  }
}

json kernel_to_json(const KernelSpec& spec) {
  json j = {{"kind", to_string(spec).substr(0, to_string(spec).find(':'))}};
  if (spec.sigma) j["sigma"] = hex_double(*spec.sigma);
  if (spec.kind == KernelKind::Precomputed) j["gram"] = matrix_to_json(spec.gram);
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "precomputed") return KernelSpec::precomputed(matrix_from_json(j.at("gram")));
    KernelSpec s = parse_kernel(kind == "rbf" || kind == "chi2" ? kind + ":auto" : kind);
    if (j.contains("sigma")) s.sigma = parse_hex_double(j.at("sigma").get<std::string>());
    validate_kernel(s);
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("kernel: ") + e.what());
  }
}

json model_to_json(const AlignmentModel& model) {
  json domains = json::array();
  for (const auto& b : model.domains) {
    json d = {{"id", b.domain_id},
              {"dim", b.dim},
              {"offset", b.offset},
              {"kernel", kernel_to_json(b.kernel)},
              {"range_rank", b.range_rank},
              {"coefficients", matrix_to_json(b.coefficients)}};
    if (model.mode != AlignmentMode::Primal) d["retained"] = matrix_to_json(b.retained);
    if (model.mode == AlignmentMode::Reduced) d["representatives"] = b.representatives;
    domains.push_back(std::move(d));
  }
  json eig = json::array();
  for (Index i = 0; i < model.eigenvalues.size(); ++i) eig.push_back(hex_double(model.eigenvalues(i)));
  const auto& dg = model.diagnostics;
  return {{"format", "kema-model"},
          {"version", kModelFormatVersion},
          {"library_version", kLibraryVersion},
          {"mode", to_string(model.mode)},
          {"mu", hex_double(model.mu)},
          {"reg", hex_double(model.reg)},
          {"num_features", model.num_features()},
          {"eigenvalues", eig},
          {"diagnostics",
           {{"max_residual", dg.max_residual},
            {"zero_threshold", dg.zero_threshold},
            {"candidates", dg.candidates},
            {"discarded", dg.discarded},
            {"deflated", dg.deflated},
            {"right_shift", hex_double(dg.right_shift)},
            {"left_shift", hex_double(dg.left_shift)},
            {"total_samples", dg.total_samples}}},
          {"domains", domains}};
}

AlignmentModel model_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "kema-model") {
      throw Error(ErrorCode::Parse, "not a model document");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::Parse, "unsupported model version");
    }
    AlignmentModel m;
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.mu = parse_hex_double(j.at("mu").get<std::string>());
    m.reg = parse_hex_double(j.at("reg").get<std::string>());
    const auto& eig = j.at("eigenvalues");
    m.eigenvalues.resize(static_cast<Index>(eig.size()));
    for (std::size_t i = 0; i < eig.size(); ++i) {
      m.eigenvalues(static_cast<Index>(i)) = parse_hex_double(eig[i].get<std::string>());
    }
    const auto& dg = j.at("diagnostics");
    m.diagnostics.max_residual = dg.at("max_residual").get<double>();
    m.diagnostics.zero_threshold = dg.at("zero_threshold").get<double>();
    m.diagnostics.candidates = dg.at("candidates").get<Index>();
    m.diagnostics.discarded = dg.at("discarded").get<Index>();
    m.diagnostics.deflated = dg.at("deflated").get<Index>();
    m.diagnostics.right_shift = parse_hex_double(dg.at("right_shift").get<std::string>());
    m.diagnostics.left_shift = parse_hex_double(dg.at("left_shift").get<std::string>());
    m.diagnostics.total_samples = dg.at("total_samples").get<Index>();
    for (const auto& d : j.at("domains")) {
      DomainBlock b;
      b.domain_id = d.at("id").get<std::string>();
      b.dim = d.at("dim").get<Index>();
      b.offset = d.at("offset").get<Index>();
      b.kernel = kernel_from_json(d.at("kernel"));
      b.range_rank = d.at("range_rank").get<Index>();
      b.coefficients = matrix_from_json(d.at("coefficients"));
      if (d.contains("retained")) b.retained = matrix_from_json(d.at("retained"));
      if (d.contains("representatives")) {
        b.representatives = d.at("representatives").get<std::vector<Index>>();
      }
      if (b.coefficients.cols() != m.eigenvalues.size()) {
        throw Error(ErrorCode::Parse, "coefficient columns differ from the eigenvalue count");
      }
      m.domains.push_back(std::move(b));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("model: ") + e.what());
  }
}

void save_model(const fs::path& path, const AlignmentModel& model) {
  write_json(path, model_to_json(model));
}

AlignmentModel load_model(const fs::path& path) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

json bounds_to_json(const BoundsReport& r) {
  std::vector<double> eig(r.empirical_eigenvalues.data(),
                          r.empirical_eigenvalues.data() + r.empirical_eigenvalues.size());
  return {{"m", r.m},
          {"delta", r.delta},
          {"n", r.n},
          {"R", r.radius},
          {"normalized", r.normalized},
          {"lower_residual", r.lower_residual},
          {"upper_residual", r.upper_residual},
          {"lower_projection", r.lower_projection},
          {"upper_projection", r.upper_projection},
          {"empirical_eigenvalues", eig}};
}

void write_eigenvalues_csv(const fs::path& path, const Vector& values) {
  auto out = open_out(path);
  out << "index,eigenvalue\n";
  for (Index i = 0; i < values.size(); ++i) out << i + 1 << ',' << g17(values(i)) << '\n';
}

Vector read_eigenvalues_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "index,eigenvalue") throw Error(ErrorCode::Parse, "bad eigenvalue header");
  std::vector<double> v;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 2) throw Error(ErrorCode::Parse, "bad eigenvalue row");
    v.push_back(parse_double(cells[1], path.string()));
  }
  return Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()));
}

void write_curves_csv(const fs::path& path, const std::vector<ErrorCurve>& curves) {
  auto out = open_out(path);
  write_curves_csv(out, curves);
}

FlatConfig parse_config(const std::string& text) {
  FlatConfig cfg;
  std::istringstream in(text);
  std::string line;
  bool versioned = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (!versioned) {
      if (body != "kema-config " + std::to_string(kConfigFormatVersion)) {
        throw Error(ErrorCode::Parse, where + ": expected 'kema-config " +
                                          std::to_string(kConfigFormatVersion) + "'");
      }
      versioned = true;
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Parse, where + ": missing '='");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) {
          return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        })) {
      throw Error(ErrorCode::Parse, where + ": bad key '" + key + "'");
    }
    if (cfg.count(key)) throw Error(ErrorCode::Parse, where + ": duplicate key '" + key + "'");
    cfg[key] = trim(body.substr(eq + 1));
  }
  if (!versioned) throw Error(ErrorCode::Parse, "config has no version line");
  return cfg;
}

FlatConfig read_config(const fs::path& path) { return parse_config(read_text(path)); }

std::string format_config(const FlatConfig& cfg) {
  std::string out = "kema-config " + std::to_string(kConfigFormatVersion) + "\n";
  for (const auto& [k, v] : cfg) out += k + " = " + v + "\n";
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  static constexpr double w = 480, h = 360, pad = 30;
  double sx(double x) const { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); }
  double sy(double y) const { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); }
  void fit(double xmin, double xmax, double ymin, double ymax) {
    x0 = xmin, x1 = xmax, y0 = ymin, y1 = ymax;
    if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  }
};

std::string svg_head(const std::string& title) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n"
                "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                Frame::w, Frame::h);
  std::string out = buf;
  out += "<text x=\"10\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" + title +
         "</text>\n";
  return out;
}

}  // namespace

std::string svg_scatter(const std::vector<ScatterPoint>& pts, const std::string& title) {
  Frame f;
  if (!pts.empty()) {
    double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
    }
    f.fit(xmin, xmax, ymin, ymax);
  }
  std::string out = svg_head(title);
  char buf[160];
  for (const auto& p : pts) {
    const int g = ((p.group % 8) + 8) % 8;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\" fill=\"%s\"/>\n",
                  f.sx(p.x), f.sy(p.y), kPalette[g]);
    out += buf;
  }
  return out + "</svg>\n";
}

std::string svg_polylines(const std::vector<std::vector<std::pair<double, double>>>& series,
                          const std::vector<std::string>& names, const std::string& title) {
  Frame f;
  bool any = false;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  for (const auto& s : series) {
    for (auto [x, y] : s) {
      if (!any) xmin = xmax = x, ymin = ymax = y, any = true;
      xmin = std::min(xmin, x), xmax = std::max(xmax, x);
      ymin = std::min(ymin, y), ymax = std::max(ymax, y);
    }
  }
  f.fit(xmin, xmax, ymin, ymax);
  std::string out = svg_head(title);
  char buf[160];
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"";
    out += kPalette[i % 8];
    out += "\" points=\"";
    for (auto [x, y] : series[i]) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.sx(x), f.sy(y));
      out += buf;
    }
    out += "\"/>\n";
    if (i < names.size()) {
      std::snprintf(buf, sizeof buf,
                    "<text x=\"%g\" y=\"%zu\" font-family=\"sans-serif\" font-size=\"11\" "
                    "fill=\"%s\">",
                    Frame::w - 110, 36 + 14 * i, kPalette[i % 8]);
      out += buf + names[i] + "</text>\n";
    }
  }
  return out + "</svg>\n";
}

}  // namespace kema
