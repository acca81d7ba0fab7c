#include "fieldnav/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fieldnav/errors.hpp"

namespace fieldnav {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view token, const std::string& source, int line) {
  token = trim(token);
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw ValidationError(source + ":" + std::to_string(line) + ": expected a number, got '" +
                          std::string(token) + "'");
  }
  return value;
}

}  // namespace

Field parse_field_csv(const std::string& text, const std::string& source_name) {
  std::vector<Point2> points;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw ValidationError(source_name + ":" + std::to_string(line_no) +
                            ": expected 'x,y', got '" + std::string(view) + "'");
    }
    const double x = parse_double(view.substr(0, comma), source_name, line_no);
    const double y = parse_double(view.substr(comma + 1), source_name, line_no);
    points.push_back({x, y});
  }
  if (points.size() < 2) {
    throw ValidationError(source_name + ": need at least 2 targets, got " +
                          std::to_string(points.size()));
  }
  return Field::from_points(std::move(points));
}

Field load_field(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open field file '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_field_csv(buf.str(), file.string());
}

void write_field(const std::filesystem::path& file, const Field& field) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write field file '" + file.string() + "'");
  out << "# x,y in meters\n";
  out.precision(17);
  for (const auto& t : field.targets) out << t.x << "," << t.y << "\n";
}

Field generate_field(const GenerateOptions& options) {
  if (options.count < 2) throw ValidationError("target count must be >= 2");
  if (options.min_separation < 0.0 || !(options.width > 0.0) || !(options.height > 0.0)) {
    throw ValidationError("generator needs positive extents and nonnegative separation");
  }
  std::uint64_t state = options.seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
  auto next_uniform = [&state](double lo, double hi) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return lo + static_cast<double>(z >> 11) * 0x1.0p-53 * (hi - lo);
  };

  std::vector<Point2> points;
  points.reserve(options.count);
  long rejections = 0;
  while (static_cast<int>(points.size()) < options.count) {
    const Point2 cand{next_uniform(0.0, options.width), next_uniform(0.0, options.height)};
    bool ok = true;
    for (const auto& p : points) {
      if (std::hypot(p.x - cand.x, p.y - cand.y) < options.min_separation) {
        ok = false;
        break;
      }
    }
    if (ok) {
      points.push_back(cand);
    } else if (++rejections >= 100000) {
      throw PackingInfeasible("could not place " + std::to_string(options.count) +
                              " targets with separation " +
                              std::to_string(options.min_separation));
    }
  }
  return Field::from_points(std::move(points));
}

}  // namespace fieldnav
