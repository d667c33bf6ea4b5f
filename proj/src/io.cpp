#include "tangle/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tangle {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto r = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, r.ptr);
  return std::string(16 - s.size(), '0') + s;
}

namespace {
json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}
double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}
}  // namespace

json orbit_to_json(const OrbitSegment& o) {
  json pts = json::array();
  for (Eigen::Index c = 0; c < o.points.cols(); ++c)
    for (Eigen::Index r = 0; r < o.points.rows(); ++r) pts.push_back(o.points(r, c));
  return {{"lambda", o.lambda}, {"n_minus", o.n_minus}, {"n_plus", o.n_plus}, {"dim", o.points.rows()},
          {"points", pts},      {"bc", to_string(o.bc)}, {"residual", number(o.residual)}};
}

OrbitSegment orbit_from_json(const json& j) {
  try {
    OrbitSegment o;
    o.lambda = j.at("lambda").get<double>();
    o.n_minus = j.at("n_minus").get<int>();
    o.n_plus = j.at("n_plus").get<int>();
    const int k = j.at("dim").get<int>();
    const auto& pts = j.at("points");
    const int N = o.n_plus - o.n_minus + 1;
    if (k <= 0 || N <= 0 || pts.size() != static_cast<std::size_t>(k) * N)
      throw Error(ErrorCode::Io, "orbit points do not match dim and window");
    o.points.resize(k, N);
    for (int c = 0; c < N; ++c)
      for (int r = 0; r < k; ++r) o.points(r, c) = pts[static_cast<std::size_t>(c * k + r)].get<double>();
    o.bc = boundary_from_string(j.at("bc").get<std::string>());
    o.residual = number_from(j.at("residual"));
    return o;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("orbit JSON: ") + e.what());
  }
}

json fit_to_json(const FitReport& r) {
  return {{"tau_max", r.tau_max},  {"points", r.points}, {"slope", number(r.slope)},
          {"predicted", number(r.predicted)}, {"deviation", number(r.deviation)}, {"r2", number(r.r2)}};
}

json tangency_to_json(const TangencyData& d, const FitReport& fit) {
  return {{"lambda_bar", d.lambda_bar}, {"c_lambda", number(d.c_lambda)}, {"c_x", number(d.c_x)},
          {"ratio", number(d.ratio())},  {"fit_slope", number(fit.slope)},  {"fit_r2", number(fit.r2)},
          {"sv_gap", number(d.sv_gap())}};
}

json cycle_to_json(const LRCycle& c, int n) {
  json v = json::array(), l = json::array();
  for (Vertex x : c.vertices) v.push_back(vertex_string(x, n));
  std::string labels;
  for (EdgeLabel e : c.labels) labels.push_back(label_char(e));
  return {{"length", c.length()}, {"vertices", v}, {"labels", labels}};
}

LRCycle cycle_from_json(const json& j) {
  LRCycle c;
  for (const auto& v : j.at("vertices")) c.vertices.push_back(parse_vertex(v.get<std::string>()));
  for (char ch : j.at("labels").get<std::string>()) c.labels.push_back(ch == 'R' ? EdgeLabel::R : EdgeLabel::L);
  return c;
}

json partition_to_json(const CyclePartition& p, int n) {
  json cycles = json::array();
  for (const auto& c : p.cycles) cycles.push_back(cycle_to_json(c, n));
  return cycles;
}

json empirical_cycle_to_json(const EmpiricalCycle& c) {
  json v = json::array(), folds = json::array();
  for (const auto& s : c.vertices) v.push_back(symbol_string(s));
  for (double l : c.fold_lambdas) folds.push_back(l);
  std::string labels;
  for (FoldSide s : c.labels) labels.push_back(side_char(s));
  return {{"branch_id", c.branch_id}, {"closed", c.closed}, {"consistent", c.consistent}, {"length", c.vertices.size()},
          {"vertices", v}, {"labels", labels}, {"fold_lambdas", folds}, {"note", c.note}};
}

EmpiricalCycle empirical_cycle_from_json(const json& j) {
  try {
    EmpiricalCycle c;
    c.branch_id = j.at("branch_id").get<int>();
    c.closed = j.at("closed").get<bool>();
    c.consistent = j.at("consistent").get<bool>();
    for (const auto& v : j.at("vertices")) c.vertices.push_back(parse_symbol(v.get<std::string>()));
    for (char ch : j.at("labels").get<std::string>()) c.labels.push_back(ch == 'R' ? FoldSide::R : FoldSide::L);
    for (const auto& l : j.at("fold_lambdas")) c.fold_lambdas.push_back(l.get<double>());
    c.note = j.value("note", "");
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("cycle JSON: ") + e.what());
  }
}

std::string table_csv(int n, const std::map<int, int>& table) {
  std::string out = "n,cycle_length,count\n";
  for (const auto& [len, count] : table)
    out += std::to_string(n) + "," + std::to_string(len) + "," + std::to_string(count) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

}  // namespace tangle
