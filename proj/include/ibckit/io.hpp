#pragma once

#include "ibckit/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace ibckit::io {

using Json = nlohmann::json;
using Fields = std::initializer_list<const char*>;

/// Throws Schema when `j` is not an object, lacks a required field or carries
/// one outside required and optional. `where` prefixes the message.
void check_fields(const Json& j, Fields required, Fields optional, const std::string& where);

Vec vec_from_json(const Json& j, const std::string& where);
Mat mat_from_json(const Json& j, const std::string& where);
Json to_json(const Vec& v);
Json to_json(const Mat& m);

/// {"A": [[..]], "B": [[..]], "a"?: [..]}
AffineSystem system_from_json(const Json& j);
Json system_to_json(const AffineSystem& s);

/// {"dim", "vertices"?, "halfspaces"?: [{"n", "c"}]}; vertices take precedence.
Polytope polytope_from_json(const Json& j);
Json polytope_to_json(const Polytope& p);

/// "L" gives [-L, L]^m; "lo1,hi1,...,lom,him" gives the box.
InputSet parse_input_box(const std::string& spec, int m);
/// Same grammar as a JSON array of one or 2m numbers.
InputSet input_box_from_json(const Json& j, int m);

/// Comma-separated lambda values.
std::vector<double> parse_grid(const std::string& spec);

Json certificate_to_json(const IbcCertificate& c);
Json controller_to_json(const PwlController& c);

/// {"pos": [lo, hi], "vel": [lo, hi], "input": [lo, hi], "alpha"?, "pbox_half_width"?}
AxisSpec axis_spec_from_json(const Json& j);
Json axis_spec_to_json(const AxisSpec& s);
Json profile_to_json(const AxisProfile& p);

/// 17 significant digits, '.' decimal, independent of the locale.
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& where);

/// Header t, x1..xn, u1..um, V, violation.
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
Trajectory read_trajectory_csv(std::istream& is);

/// Header t, x, y.
void write_obstacle_csv(std::ostream& os, const ObstacleTrace& tr);
ObstacleTrace read_obstacle_csv(std::istream& is);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ibckit::io
