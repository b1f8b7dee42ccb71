#include "mvreg/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_map>

#include "internal.hpp"

namespace mvreg {

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    const std::size_t start = k;
    while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Splits into lines, keeping 1-based line numbers.
std::vector<std::pair<int, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> out;
  int number = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(++number, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

template <class T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void store_le(std::string& out, T v) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

// ---- PLY ----

struct PlyProperty {
  std::string name;
  std::string type;
  std::size_t size = 0;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::uint64_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t ply_type_size(std::string_view t) {
  static const std::unordered_map<std::string_view, std::size_t> sizes{
      {"char", 1},  {"uchar", 1},  {"int8", 1},    {"uint8", 1},   {"short", 2},  {"ushort", 2},
      {"int16", 2}, {"uint16", 2}, {"int", 4},     {"uint", 4},    {"int32", 4},  {"uint32", 4},
      {"float", 4}, {"float32", 4}, {"double", 8}, {"float64", 8}};
  const auto it = sizes.find(t);
  return it == sizes.end() ? 0 : it->second;
}

bool is_float_type(std::string_view t) { return t == "float" || t == "float32" || t == "double" || t == "float64"; }

[[noreturn]] void ply_fail(ErrorCode code, const fs::path& path, const std::string& what) {
  throw Error(code, path.string() + ": " + what);
}

}  // namespace

Points read_ply_points(const fs::path& path) {
  const std::string data = read_file(path);
  const std::size_t header_end = data.find("end_header");
  if (data.rfind("ply", 0) != 0 || header_end == std::string::npos)
    ply_fail(ErrorCode::MalformedHeader, path, "missing ply magic or end_header");
  std::size_t payload = data.find('\n', header_end);
  if (payload == std::string::npos) ply_fail(ErrorCode::MalformedHeader, path, "header not newline-terminated");
  ++payload;

  bool binary = false;
  bool have_format = false;
  std::vector<PlyElement> elements;
  for (const auto& [number, line] : lines_of(std::string_view(data).substr(0, header_end))) {
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "ply" || tok[0] == "comment" || tok[0] == "obj_info") continue;
    const std::string where = "header line " + std::to_string(number);
    if (tok[0] == "format") {
      if (tok.size() != 3) ply_fail(ErrorCode::MalformedHeader, path, where + ": bad format line");
      if (tok[1] == "ascii") binary = false;
      else if (tok[1] == "binary_little_endian") binary = true;
      else if (tok[1] == "binary_big_endian") ply_fail(ErrorCode::UnsupportedFormat, path, "big-endian PLY");
      else ply_fail(ErrorCode::MalformedHeader, path, where + ": unknown format " + std::string(tok[1]));
      have_format = true;
    } else if (tok[0] == "element") {
      PlyElement e;
      if (tok.size() != 3 || !parse_number(tok[2], e.count))
        ply_fail(ErrorCode::MalformedHeader, path, where + ": bad element line");
      e.name = tok[1];
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) ply_fail(ErrorCode::MalformedHeader, path, where + ": property before element");
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        p.is_list = true;
        p.type = tok[3];
        p.name = tok[4];
        if (ply_type_size(tok[2]) == 0 || ply_type_size(tok[3]) == 0)
          ply_fail(ErrorCode::MalformedHeader, path, where + ": unknown list type");
      } else if (tok.size() == 3) {
        p.type = tok[1];
        p.name = tok[2];
        p.size = ply_type_size(tok[1]);
        if (p.size == 0) ply_fail(ErrorCode::MalformedHeader, path, where + ": unknown type " + p.type);
      } else {
        ply_fail(ErrorCode::MalformedHeader, path, where + ": bad property line");
      }
      elements.back().properties.push_back(std::move(p));
    } else {
      ply_fail(ErrorCode::MalformedHeader, path, where + ": unexpected keyword " + std::string(tok[0]));
    }
  }
  if (!have_format) ply_fail(ErrorCode::MalformedHeader, path, "missing format line");

  const auto vit = std::find_if(elements.begin(), elements.end(), [](const PlyElement& e) { return e.name == "vertex"; });
  if (vit == elements.end()) ply_fail(ErrorCode::MalformedHeader, path, "no vertex element");
  const PlyElement& vertex = *vit;
  std::array<int, 3> axis{-1, -1, -1};
  for (std::size_t k = 0; k < vertex.properties.size(); ++k) {
    const PlyProperty& p = vertex.properties[k];
    const int a = p.name == "x" ? 0 : p.name == "y" ? 1 : p.name == "z" ? 2 : -1;
    if (a < 0) continue;
    if (p.is_list || !is_float_type(p.type))
      ply_fail(ErrorCode::UnsupportedFormat, path, "coordinate " + p.name + " must be float or double");
    axis[static_cast<std::size_t>(a)] = static_cast<int>(k);
  }
  for (int a = 0; a < 3; ++a)
    if (axis[static_cast<std::size_t>(a)] < 0)
      ply_fail(ErrorCode::MalformedHeader, path, std::string("vertex lacks property ") + "xyz"[a]);
  for (const PlyProperty& p : vertex.properties)
    if (p.is_list) ply_fail(ErrorCode::UnsupportedFormat, path, "list properties on vertices");
  const bool vertex_last = &vertex == &elements.back();
  if (vertex.count > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
    ply_fail(ErrorCode::MalformedHeader, path, "vertex count too large");
  const auto n = static_cast<Eigen::Index>(vertex.count);
  Points pts(n, 3);
  const std::string_view body = std::string_view(data).substr(payload);

  if (!binary) {
    std::vector<std::string_view> tok = split_ws(body);
    std::size_t pos = 0;
    if (vit != elements.begin()) ply_fail(ErrorCode::UnsupportedFormat, path, "ascii elements before vertices");
    const std::size_t width = vertex.properties.size();
    if (tok.size() < width * static_cast<std::size_t>(n))
      ply_fail(ErrorCode::TruncatedPayload, path, "expected " + std::to_string(n) + " vertices");
    for (Eigen::Index r = 0; r < n; ++r) {
      for (int a = 0; a < 3; ++a) {
        double v = 0.0;
        const std::string_view s = tok[pos + static_cast<std::size_t>(axis[static_cast<std::size_t>(a)])];
        if (!parse_number(s, v)) ply_fail(ErrorCode::InvalidPointCloud, path, "bad vertex value '" + std::string(s) + "'");
        pts(r, a) = v;
      }
      pos += width;
    }
    if (vertex_last && pos < tok.size()) ply_fail(ErrorCode::TrailingData, path, "data after last vertex");
    return pts;
  }

  std::size_t offset = 0;
  for (auto e = elements.begin(); e != vit; ++e) {
    std::size_t stride = 0;
    for (const PlyProperty& p : e->properties) {
      if (p.is_list) ply_fail(ErrorCode::UnsupportedFormat, path, "list element before vertices");
      stride += p.size;
    }
    offset += stride * e->count;
  }
  std::size_t stride = 0;
  std::array<std::size_t, 3> at{};
  for (std::size_t k = 0; k < vertex.properties.size(); ++k) {
    for (int a = 0; a < 3; ++a)
      if (axis[static_cast<std::size_t>(a)] == static_cast<int>(k)) at[static_cast<std::size_t>(a)] = stride;
    stride += vertex.properties[k].size;
  }
  const std::uint64_t needed = offset + stride * vertex.count;
  if (body.size() < needed) ply_fail(ErrorCode::TruncatedPayload, path, "payload shorter than declared");
  if (vertex_last && body.size() > needed) ply_fail(ErrorCode::TrailingData, path, "data after last vertex");
  for (Eigen::Index r = 0; r < n; ++r) {
    const char* row = body.data() + offset + static_cast<std::size_t>(r) * stride;
    for (int a = 0; a < 3; ++a) {
      const PlyProperty& p = vertex.properties[static_cast<std::size_t>(axis[static_cast<std::size_t>(a)])];
      const char* src = row + at[static_cast<std::size_t>(a)];
      pts(r, a) = p.size == 4 ? static_cast<double>(load_le<float>(src)) : load_le<double>(src);
    }
  }
  return pts;
}

PointCloud read_ply(const fs::path& path) { return PointCloud(read_ply_points(path)); }

void write_ply(const fs::path& path, const Points& points, bool binary) {
  std::string out = "ply\nformat ";
  out += binary ? "binary_little_endian" : "ascii";
  out += " 1.0\nelement vertex " + std::to_string(points.rows()) +
         "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    if (binary) {
      for (int a = 0; a < 3; ++a) store_le(out, points(r, a));
    } else {
      out += detail::format_exact(points(r, 0)) + ' ' + detail::format_exact(points(r, 1)) + ' ' +
             detail::format_exact(points(r, 2)) + '\n';
    }
  }
  write_file(path, out);
}

// ---- features ----

Features read_features(const fs::path& path) {
  const std::string data = read_file(path);
  if (data.size() < 16) throw Error(ErrorCode::TruncatedPayload, path.string() + ": header shorter than 16 bytes");
  if (data.compare(0, 4, "FEAT") != 0) throw Error(ErrorCode::MalformedHeader, path.string() + ": bad magic");
  const auto n = load_le<std::uint32_t>(data.data() + 4);
  const auto d = load_le<std::uint32_t>(data.data() + 8);
  if (load_le<std::uint32_t>(data.data() + 12) != 0)
    throw Error(ErrorCode::MalformedHeader, path.string() + ": reserved header field must be 0");
  const std::uint64_t payload = static_cast<std::uint64_t>(n) * d * 4;
  const std::uint64_t actual = data.size() - 16;
  if (actual < payload)
    throw Error(ErrorCode::TruncatedPayload, path.string() + ": " + std::to_string(actual) + " payload bytes, expected " +
                                                 std::to_string(payload));
  if (actual > payload) throw Error(ErrorCode::TrailingData, path.string() + ": bytes after declared payload");
  Features f(n, d);
  const char* p = data.data() + 16;
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < d; ++c, p += 4) f(r, c) = static_cast<double>(load_le<float>(p));
  return f;
}

void write_features(const fs::path& path, const Features& features) {
  std::string out = "FEAT";
  store_le(out, static_cast<std::uint32_t>(features.rows()));
  store_le(out, static_cast<std::uint32_t>(features.cols()));
  store_le(out, std::uint32_t{0});
  out.reserve(out.size() + static_cast<std::size_t>(features.size()) * 4);
  for (Eigen::Index r = 0; r < features.rows(); ++r)
    for (Eigen::Index c = 0; c < features.cols(); ++c) store_le(out, static_cast<float>(features(r, c)));
  write_file(path, out);
}

// ---- trajectories ----

namespace {

TrajectoryFile parse_trajectory_from(std::string_view text, const std::string& source) {
  TrajectoryFile file;
  std::vector<std::pair<int, std::string_view>> lines;
  for (const auto& l : lines_of(text))
    if (!split_ws(l.second).empty()) lines.push_back(l);
  auto fail = [&](int line, const std::string& what) {
    throw Error(ErrorCode::MalformedEntry, source + "line " + std::to_string(line) + ": " + what);
  };
  for (std::size_t k = 0; k < lines.size();) {
    const auto meta = split_ws(lines[k].second);
    TrajectoryEntry e;
    if (meta.size() != 3 || !parse_number(meta[0], e.i) || !parse_number(meta[1], e.j) || !parse_number(meta[2], e.n))
      fail(lines[k].first, "expected metadata \"i j n\"");
    const int meta_line = lines[k].first;
    ++k;
    for (int r = 0; r < 4; ++r, ++k) {
      if (k >= lines.size()) fail(meta_line, "entry has only " + std::to_string(r) + " matrix rows");
      const auto row = split_ws(lines[k].second);
      if (row.size() != 4) fail(lines[k].first, "matrix row needs 4 values");
      for (int c = 0; c < 4; ++c) {
        double v = 0.0;
        if (!parse_number(row[static_cast<std::size_t>(c)], v) || !std::isfinite(v))
          fail(lines[k].first, "bad matrix value '" + std::string(row[static_cast<std::size_t>(c)]) + "'");
        e.matrix(r, c) = v;
      }
    }
    if ((e.matrix.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9)
      fail(meta_line, "bottom row is not (0, 0, 0, 1)");
    if (so3_violation(e.matrix.topLeftCorner<3, 3>()) > 1e-6)
      file.warnings.push_back(std::string(to_string(ErrorCode::NonRigidMatrix)) + ": entry at line " +
                              std::to_string(meta_line) + " has a non-rigid rotation block");
    file.entries.push_back(e);
  }
  return file;
}

}  // namespace

TrajectoryFile parse_trajectory(std::string_view text) { return parse_trajectory_from(text, ""); }

TrajectoryFile read_trajectory(const fs::path& path) {
  return parse_trajectory_from(read_file(path), path.string() + ": ");
}

std::string format_trajectory(std::span<const TrajectoryEntry> entries) {
  std::string out;
  for (const TrajectoryEntry& e : entries) {
    out += std::to_string(e.i) + ' ' + std::to_string(e.j) + ' ' + std::to_string(e.n) + '\n';
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (c > 0) out += ' ';
        out += detail::format_exact(e.matrix(r, c));
      }
      out += '\n';
    }
  }
  return out;
}

void write_trajectory(const fs::path& path, std::span<const TrajectoryEntry> entries) {
  write_file(path, format_trajectory(entries));
}

RigidMotion entry_motion(const TrajectoryEntry& entry) {
  const Mat3 r = entry.matrix.topLeftCorner<3, 3>();
  if (so3_violation(r) > 1e-6)
    throw Error(ErrorCode::NonRigidMatrix,
                "entry (" + std::to_string(entry.i) + ", " + std::to_string(entry.j) + ") is not a rigid motion");
  RigidMotion m;
  m.rotation = so3_violation(r) <= 1e-9 ? Rotation3::from_matrix(r) : project_to_so3(r);
  m.translation = entry.matrix.topRightCorner<3, 1>();
  return m;
}

TrajectoryEntry make_entry(int i, int j, int n, const RigidMotion& m) { return {i, j, n, m.matrix()}; }

std::vector<TrajectoryEntry> absolute_entries(std::span<const RigidMotion> poses) {
  std::vector<TrajectoryEntry> out;
  const int n = static_cast<int>(poses.size());
  for (int k = 0; k < n; ++k) out.push_back(make_entry(k, k, n, poses[static_cast<std::size_t>(k)]));
  return out;
}

bool is_absolute(std::span<const TrajectoryEntry> entries) {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.i == e.j; });
}

std::vector<RigidMotion> absolute_poses(std::span<const TrajectoryEntry> entries) {
  std::vector<RigidMotion> out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const TrajectoryEntry& e = entries[k];
    if (e.i != static_cast<int>(k) || e.j != e.i)
      throw Error(ErrorCode::MalformedEntry, "absolute entry " + std::to_string(k) + " is labelled (" +
                                                 std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
    out.push_back(entry_motion(e));
  }
  return out;
}

std::vector<RelativeEstimate> relative_estimates(std::span<const TrajectoryEntry> entries) {
  std::vector<RelativeEstimate> out;
  for (const TrajectoryEntry& e : entries) {
    if (e.i == e.j) throw Error(ErrorCode::MalformedEntry, "pairwise entry with i == j");
    out.push_back({e.i, e.j, entry_motion(e)});
  }
  return out;
}

std::vector<EdgeKey> read_edge_list(const fs::path& path) {
  std::vector<EdgeKey> out;
  const std::string text = read_file(path);
  for (const auto& [number, raw] : lines_of(text)) {
    std::string_view line = raw.substr(0, raw.find('#'));
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    EdgeKey e;
    if (tok.size() != 2 || !parse_number(tok[0], e.first) || !parse_number(tok[1], e.second))
      throw Error(ErrorCode::MalformedEntry, path.string() + ": line " + std::to_string(number) + ": expected \"i j\"");
    out.push_back(e);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw Error(ErrorCode::InvalidArgument, "voxel size must be positive");
  struct Cell {
    Vec3 sum = Vec3::Zero();
    Eigen::VectorXd feature_sum;
    int count = 0;
  };
  std::map<std::array<std::int64_t, 3>, Cell> cells;
  const Points& p = cloud.points();
  const Features& f = cloud.features();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    std::array<std::int64_t, 3> key{};
    for (int a = 0; a < 3; ++a) key[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor(p(r, a) / voxel));
    Cell& c = cells[key];
    c.sum += p.row(r).transpose();
    if (cloud.has_features()) {
      if (c.count == 0) c.feature_sum = Eigen::VectorXd::Zero(f.cols());
      c.feature_sum += f.row(r).transpose();
    }
    ++c.count;
  }
  Points out(static_cast<Eigen::Index>(cells.size()), 3);
  Features feats(cloud.has_features() ? out.rows() : 0, cloud.feature_dim());
  Eigen::Index k = 0;
  for (const auto& [key, c] : cells) {
    out.row(k) = (c.sum / c.count).transpose();
    if (cloud.has_features()) feats.row(k) = (c.feature_sum / c.count).transpose();
    ++k;
  }
  return PointCloud(std::move(out), std::move(feats));
}

std::vector<PointCloud> load_scan_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> plys;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& p = entry.path();
    if (p.extension() == ".ply" && p.filename().string().rfind("scan_", 0) == 0) plys.push_back(p);
  }
  std::sort(plys.begin(), plys.end());
  std::vector<PointCloud> out;
  for (const fs::path& p : plys) {
    fs::path feat = p;
    feat.replace_extension(".feat");
    if (!fs::exists(feat)) throw Error(ErrorCode::IoError, "missing feature file " + feat.string());
    out.emplace_back(read_ply_points(p), read_features(feat));
  }
  return out;
}

std::map<EdgeKey, RigidMotion> read_corruptions(const fs::path& path) {
  std::map<EdgeKey, RigidMotion> out;
  for (const TrajectoryEntry& e : read_trajectory(path).entries) out[{e.i, e.j}] = entry_motion(e);
  return out;
}

void write_scene(const fs::path& dir, const SyntheticScene& scene) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t k = 0; k < scene.clouds.size(); ++k) {
    std::string stem = std::to_string(k);
    stem = "scan_" + std::string(stem.size() < 3 ? 3 - stem.size() : 0, '0') + stem;
    write_ply(dir / (stem + ".ply"), scene.clouds[k].points());
    write_features(dir / (stem + ".feat"), scene.clouds[k].features());
  }
  write_trajectory(dir / "gt.log", absolute_entries(scene.ground_truth));
  std::vector<TrajectoryEntry> outliers;
  const int n = static_cast<int>(scene.clouds.size());
  for (const auto& [key, m] : scene.corruptions) outliers.push_back(make_entry(key.first, key.second, n, m));
  write_trajectory(dir / "outliers.log", outliers);
}

}  // namespace mvreg
