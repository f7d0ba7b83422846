#include "ibckit/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace ibckit::io {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::kSchema, what); }

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) schema(where + ": expected a number");
  return j.get<double>();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::pair<double, double> range(const Json& j, const std::string& where) {
  const Vec v = vec_from_json(j, where);
  if (v.size() != 2) schema(where + ": expected [lo, hi]");
  return {v[0], v[1]};
}

InputSet box_from_numbers(const std::vector<double>& xs, int m, const std::string& where) {
  Vec lo(m), hi(m);
  if (xs.size() == 1) {
    if (!(xs[0] > 0.0)) throw Error(ErrorCode::kInvalidArgument, where + ": limit must be positive");
    lo.setConstant(-xs[0]);
    hi.setConstant(xs[0]);
  } else if (xs.size() == 2 * static_cast<std::size_t>(m)) {
    for (int i = 0; i < m; ++i) {
      lo[i] = xs[2 * i];
      hi[i] = xs[2 * i + 1];
    }
  } else {
    schema(where + ": expected 1 or " + std::to_string(2 * m) + " numbers");
  }
  return InputSet::box(lo, hi);
}

}  // namespace

void check_fields(const Json& j, Fields required, Fields optional, const std::string& where) {
  if (!j.is_object()) schema(where + ": expected an object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!j.contains(k)) schema(where + ": missing field '" + k + "'");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& item : j.items())
    if (!known.count(item.key())) schema(where + ": unknown field '" + item.key() + "'");
}

Vec vec_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) schema(where + ": expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where);
  return v;
}

Mat mat_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema(where + ": expected a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) schema(where + ": rows must be nonempty arrays");
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) schema(where + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], where);
  }
  return m;
}

Json to_json(const Vec& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Json to_json(const Mat& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vec(m.row(r).transpose())));
  return j;
}

AffineSystem system_from_json(const Json& j) {
  check_fields(j, {"A", "B"}, {"a"}, "system");
  AffineSystem s;
  s.a_mat = mat_from_json(j["A"], "system.A");
  s.b_mat = mat_from_json(j["B"], "system.B");
  if (s.a_mat.rows() != s.a_mat.cols()) schema("system.A: must be square");
  if (s.b_mat.rows() != s.a_mat.rows()) schema("system.B: row count must match A");
  s.offset = j.contains("a") ? vec_from_json(j["a"], "system.a") : Vec::Zero(s.a_mat.rows());
  if (s.offset.size() != s.a_mat.rows()) schema("system.a: length must match A");
  return s;
}

Json system_to_json(const AffineSystem& s) {
  Json j{{"A", to_json(s.a_mat)}, {"B", to_json(s.b_mat)}};
  if (s.offset.size() > 0 && s.offset.cwiseAbs().maxCoeff() > 0.0) j["a"] = to_json(s.offset);
  return j;
}

Polytope polytope_from_json(const Json& j) {
  check_fields(j, {"dim"}, {"vertices", "halfspaces"}, "polytope");
  if (!j["dim"].is_number_integer() || j["dim"].get<int>() < 1) schema("polytope.dim: positive integer expected");
  const int dim = j["dim"].get<int>();
  if (j.contains("vertices")) {
    if (!j["vertices"].is_array()) schema("polytope.vertices: expected an array");
    std::vector<Vec> pts;
    for (const auto& v : j["vertices"]) {
      pts.push_back(vec_from_json(v, "polytope.vertices"));
      if (pts.back().size() != dim) schema("polytope.vertices: point dimension differs from dim");
    }
    return hull_from_points(pts);
  }
  if (!j.contains("halfspaces") || !j["halfspaces"].is_array())
    schema("polytope: 'vertices' or 'halfspaces' required");
  std::vector<Halfspace> hs;
  for (const auto& h : j["halfspaces"]) {
    check_fields(h, {"n", "c"}, {}, "polytope.halfspaces");
    hs.push_back({vec_from_json(h["n"], "polytope.halfspaces.n"), number(h["c"], "polytope.halfspaces.c")});
    if (hs.back().normal.size() != dim) schema("polytope.halfspaces.n: dimension differs from dim");
  }
  return from_halfspaces(hs);
}

Json polytope_to_json(const Polytope& p) {
  Json verts = Json::array();
  for (const Vec& v : p.vertices()) verts.push_back(to_json(v));
  Json hs = Json::array();
  for (const Halfspace& h : p.halfspaces()) hs.push_back({{"n", to_json(h.normal)}, {"c", h.offset}});
  return Json{{"dim", p.dim()}, {"vertices", verts}, {"halfspaces", hs}};
}

InputSet parse_input_box(const std::string& spec, int m) {
  std::vector<double> xs;
  for (const auto& tok : split(spec, ',')) xs.push_back(parse_double(trim(tok), "--input-box"));
  return box_from_numbers(xs, m, "--input-box");
}

InputSet input_box_from_json(const Json& j, int m) {
  const Vec v = vec_from_json(j, "input_box");
  return box_from_numbers(std::vector<double>(v.data(), v.data() + v.size()), m, "input_box");
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  for (const auto& tok : split(spec, ',')) {
    const double x = parse_double(trim(tok), "--lambda-grid");
    if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "--lambda-grid: values must lie in (0, 1]");
    out.push_back(x);
  }
  if (out.empty()) schema("--lambda-grid: empty");
  return out;
}

namespace {

Json lp_to_json(const std::optional<VertexLp>& lp) {
  if (!lp) return nullptr;
  return Json{{"feasible", lp->feasible}, {"margin", lp->margin}, {"witness", to_json(lp->witness)}};
}

}  // namespace

Json certificate_to_json(const IbcCertificate& c) {
  Json verts = Json::array();
  for (const auto& v : c.vertices)
    verts.push_back({{"vertex", to_json(v.vertex)},
                     {"in_equilibria", v.in_o},
                     {"invariance", lp_to_json(v.invariance)},
                     {"backward", lp_to_json(v.backward)},
                     {"cone_dip", lp_to_json(v.cone_dip)}});
  Json failing = Json::array();
  for (const auto& v : c.failing_vertices) failing.push_back(to_json(v));
  return Json{{"verdict", to_string(c.verdict)}, {"route", to_string(c.route)},
              {"controllable", c.controllable}, {"simplicial", c.simplicial},
              {"inputs_bounded", c.inputs_bounded}, {"failing_vertices", failing},
              {"reason", c.reason}, {"vertices", verts}};
}

Json controller_to_json(const PwlController& c) {
  const Triangulation& tri = c.triangulation();
  Json pts = Json::array();
  for (const Vec& p : tri.points) pts.push_back(to_json(p));
  Json simplices = Json::array();
  for (const auto& s : tri.simplices) simplices.push_back(s);
  Json gains = Json::array();
  for (const Mat& k : c.gains()) gains.push_back(to_json(k));
  Json controls = Json::array();
  for (const Vec& u : c.point_controls()) controls.push_back(to_json(u));
  return Json{{"n", c.n()}, {"m", c.m()}, {"points", pts}, {"simplices", simplices},
              {"gains", gains}, {"point_controls", controls}};
}

AxisSpec axis_spec_from_json(const Json& j) {
  check_fields(j, {"pos", "vel", "input"}, {"alpha", "pbox_half_width"}, "axis");
  AxisSpec s;
  std::tie(s.pos_lo, s.pos_hi) = range(j["pos"], "axis.pos");
  std::tie(s.vel_lo, s.vel_hi) = range(j["vel"], "axis.vel");
  std::tie(s.input_lo, s.input_hi) = range(j["input"], "axis.input");
  if (j.contains("alpha")) s.alpha = number(j["alpha"], "axis.alpha");
  if (j.contains("pbox_half_width")) s.pbox_half_width = number(j["pbox_half_width"], "axis.pbox_half_width");
  return s;
}

Json axis_spec_to_json(const AxisSpec& s) {
  Json j{{"pos", {s.pos_lo, s.pos_hi}}, {"vel", {s.vel_lo, s.vel_hi}}, {"input", {s.input_lo, s.input_hi}}};
  if (s.alpha) j["alpha"] = *s.alpha;
  if (s.pbox_half_width) j["pbox_half_width"] = *s.pbox_half_width;
  return j;
}

Json profile_to_json(const AxisProfile& p) {
  return Json{{"spec", axis_spec_to_json(p.spec)}, {"center", p.center},
              {"half_width", p.half_width}, {"alpha", p.alpha}, {"lambda", p.lambda},
              {"min_margin", p.min_margin}, {"region", polytope_to_json(p.region)},
              {"global_region", polytope_to_json(p.global_region())}};
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  if (!s.empty() && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) schema(where + ": not a number: '" + s + "'");
  return v;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  if (tr.samples.empty()) return;
  const auto n = tr.samples.front().x.size();
  const auto m = tr.samples.front().u.size();
  os << "t";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u" << i;
  os << ",V,violation\n";
  for (const auto& s : tr.samples) {
    os << format_double(s.t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(s.x[i]);
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << format_double(s.u[i]);
    os << ',' << format_double(s.v) << ',' << (s.violation ? 1 : 0) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) schema("trajectory csv: empty");
  const auto header = split(trim(line), ',');
  int n = 0, m = 0;
  for (const auto& h : header) {
    if (h.size() > 1 && h[0] == 'x') ++n;
    if (h.size() > 1 && h[0] == 'u') ++m;
  }
  if (header.size() != static_cast<std::size_t>(n + m + 3) || header.front() != "t" ||
      header[header.size() - 2] != "V" || header.back() != "violation")
    schema("trajectory csv: header must be t,x1..xn,u1..um,V,violation");
  Trajectory tr;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    const std::string where = "trajectory csv row " + std::to_string(row);
    if (cells.size() != header.size()) schema(where + ": wrong column count");
    TrajectorySample s;
    s.t = parse_double(cells[0], where);
    s.x.resize(n);
    s.u.resize(m);
    for (int i = 0; i < n; ++i) s.x[i] = parse_double(cells[1 + i], where);
    for (int i = 0; i < m; ++i) s.u[i] = parse_double(cells[1 + n + i], where);
    s.v = parse_double(cells[1 + n + m], where);
    s.violation = cells.back() == "1";
    tr.samples.push_back(std::move(s));
  }
  if (tr.samples.size() > 1) tr.dt = tr.samples[1].t - tr.samples[0].t;
  return tr;
}

void write_obstacle_csv(std::ostream& os, const ObstacleTrace& tr) {
  os << "t,x,y\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    os << format_double(tr.t[i]) << ',' << format_double(tr.pos[i][0]) << ','
       << format_double(tr.pos[i][1]) << '\n';
}

ObstacleTrace read_obstacle_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != "t,x,y") schema("obstacle csv: header must be t,x,y");
  ObstacleTrace tr;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    const std::string where = "obstacle csv row " + std::to_string(row);
    if (cells.size() != 3) schema(where + ": expected 3 columns");
    tr.t.push_back(parse_double(cells[0], where));
    Vec p(2);
    p << parse_double(cells[1], where), parse_double(cells[2], where);
    tr.pos.push_back(p);
  }
  try {
    tr.validate();
  } catch (const Error& e) {
    schema(std::string("obstacle csv: ") + e.what());
  }
  return tr;
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    schema(path.string() + ": " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace ibckit::io
