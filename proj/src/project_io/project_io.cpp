#include "emr/project_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emr/error.hpp"

namespace emr::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(EntryKind k) {
  switch (k) {
    case EntryKind::PointId: return "point_id";
    case EntryKind::SpectralImage: return "spectral_image";
    case EntryKind::Linescan: return "linescan";
    case EntryKind::JeolImage: return "jeol_image";
  }
  return "point_id";
}

std::optional<EntryKind> parse_entry_kind(std::string_view s) {
  if (s == "point_id") return EntryKind::PointId;
  if (s == "spectral_image") return EntryKind::SpectralImage;
  if (s == "linescan") return EntryKind::Linescan;
  if (s == "jeol_image") return EntryKind::JeolImage;
  return std::nullopt;
}

const EntryManifest* ProjectIndex::find(std::string_view id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), id,
                             [](const EntryManifest& e, std::string_view key) { return e.id < key; });
  return it != entries.end() && it->id == id ? &*it : nullptr;
}

fs::path ProjectIndex::dir_of(std::string_view id) const {
  const EntryManifest* e = find(id);
  if (!e) throw Error(Errc::UnknownEntry, std::string(id));
  return dirs[static_cast<std::size_t>(e - entries.data())];
}

Rgb parse_hex_color(std::string_view s) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (s.size() != 7 || s[0] != '#') throw Error(Errc::BadValue, "color", "expected #RRGGBB");
  std::uint8_t v[3];
  for (int i = 0; i < 3; ++i) {
    const int hi = hex(s[1 + 2 * i]);
    const int lo = hex(s[2 + 2 * i]);
    if (hi < 0 || lo < 0) throw Error(Errc::BadValue, "color", "expected #RRGGBB");
    v[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return {v[0], v[1], v[2]};
}

std::string format_hex_color(Rgb c) {
  static constexpr char digits[] = "0123456789ABCDEF";
  std::string s = "#";
  for (std::uint8_t v : {c.r, c.g, c.b}) {
    s += digits[v >> 4];
    s += digits[v & 15];
  }
  return s;
}

namespace {

// A reference must stay inside the entry directory: relative, no "..".
bool is_contained_ref(std::string_view ref) {
  if (ref.empty()) return false;
  const fs::path p(ref);
  if (p.is_absolute() || p.has_root_name() || p.has_root_directory()) return false;
  for (const auto& part : p)
    if (part == "..") return false;
  return true;
}

const json& require(const json& obj, const char* key, const std::string& field_path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw Error(Errc::MissingField, field_path);
  return *it;
}

double number(const json& obj, const char* key, const std::string& field_path) {
  const json& v = require(obj, key, field_path);
  if (!v.is_number()) throw Error(Errc::BadValue, field_path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(Errc::BadValue, field_path, "not finite");
  return d;
}

std::string text(const json& obj, const char* key, const std::string& field_path) {
  const json& v = require(obj, key, field_path);
  if (!v.is_string()) throw Error(Errc::BadValue, field_path, "expected a string");
  return v.get<std::string>();
}

int integer(const json& obj, const char* key, const std::string& field_path) {
  const double d = number(obj, key, field_path);
  if (d != std::floor(d) || d < -2147483648.0 || d > 2147483647.0)
    throw Error(Errc::BadValue, field_path, "expected an integer");
  return static_cast<int>(d);
}

void check_coord(double v, double limit, const std::string& field_path) {
  if (v < 0 || v > limit) throw Error(Errc::BadValue, field_path, "coordinate outside the image");
}

SpectrumPosition parse_position(const json& p, std::size_t i, int width, int height) {
  const std::string at = "positions[" + std::to_string(i) + "]";
  if (!p.is_object()) throw Error(Errc::BadValue, at, "expected an object");
  SpectrumPosition pos;
  pos.id = text(p, "id", at + ".id");
  const std::string type = text(p, "type", at + ".type");
  const double W = width, H = height;
  if (type == "point") {
    PointShape s{number(p, "x", at + ".x"), number(p, "y", at + ".y")};
    check_coord(s.x, W, at + ".x");
    check_coord(s.y, H, at + ".y");
    pos.shape = s;
  } else if (type == "rect") {
    RectShape s{number(p, "x", at + ".x"), number(p, "y", at + ".y"), number(p, "w", at + ".w"),
                number(p, "h", at + ".h")};
    if (s.w <= 0 || s.h <= 0) throw Error(Errc::BadValue, at, "rectangle must have positive size");
    check_coord(s.x, W, at + ".x");
    check_coord(s.y, H, at + ".y");
    check_coord(s.x + s.w, W, at + ".w");
    check_coord(s.y + s.h, H, at + ".h");
    pos.shape = s;
  } else if (type == "circle") {
    CircleShape s{number(p, "cx", at + ".cx"), number(p, "cy", at + ".cy"), number(p, "r", at + ".r")};
    if (s.r <= 0) throw Error(Errc::BadValue, at + ".r", "radius must be positive");
    check_coord(s.cx - s.r, W, at + ".r");
    check_coord(s.cx + s.r, W, at + ".r");
    check_coord(s.cy - s.r, H, at + ".r");
    check_coord(s.cy + s.r, H, at + ".r");
    pos.shape = s;
  } else if (type == "polygon") {
    const json& pts = require(p, "points", at + ".points");
    if (!pts.is_array()) throw Error(Errc::BadValue, at + ".points", "expected an array of [x,y]");
    PolygonShape s;
    for (const json& v : pts) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw Error(Errc::BadValue, at + ".points", "expected [x,y] pairs");
      Point2 q{v[0].get<double>(), v[1].get<double>()};
      check_coord(q.x, W, at + ".points");
      check_coord(q.y, H, at + ".points");
      s.vertices.push_back(q);
    }
    std::set<std::pair<double, double>> distinct;
    double area2 = 0;
    for (std::size_t k = 0; k < s.vertices.size(); ++k) {
      const Point2& a = s.vertices[k];
      const Point2& b = s.vertices[(k + 1) % s.vertices.size()];
      distinct.insert({a.x, a.y});
      area2 += a.x * b.y - b.x * a.y;
    }
    if (distinct.size() < 3 || area2 == 0.0)
      throw Error(Errc::BadValue, at + ".points", "polygon needs 3 distinct, non-collinear vertices");
    pos.shape = std::move(s);
  } else if (type == "line") {
    LineShape s{number(p, "x1", at + ".x1"), number(p, "y1", at + ".y1"), number(p, "x2", at + ".x2"),
                number(p, "y2", at + ".y2")};
    check_coord(s.x1, W, at + ".x1");
    check_coord(s.y1, H, at + ".y1");
    check_coord(s.x2, W, at + ".x2");
    check_coord(s.y2, H, at + ".y2");
    pos.shape = s;
  } else {
    throw Error(Errc::BadValue, at + ".type", "unknown shape '" + type + "'");
  }
  return pos;
}

json position_to_json(const SpectrumPosition& pos) {
  json j;
  j["id"] = pos.id;
  std::visit(
      [&j](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PointShape>) {
          j["type"] = "point";
          j["x"] = s.x;
          j["y"] = s.y;
        } else if constexpr (std::is_same_v<T, RectShape>) {
          j["type"] = "rect";
          j["x"] = s.x;
          j["y"] = s.y;
          j["w"] = s.w;
          j["h"] = s.h;
        } else if constexpr (std::is_same_v<T, CircleShape>) {
          j["type"] = "circle";
          j["cx"] = s.cx;
          j["cy"] = s.cy;
          j["r"] = s.r;
        } else if constexpr (std::is_same_v<T, PolygonShape>) {
          j["type"] = "polygon";
          json pts = json::array();
          for (const Point2& q : s.vertices) pts.push_back({q.x, q.y});
          j["points"] = std::move(pts);
        } else {
          j["type"] = "line";
          j["x1"] = s.x1;
          j["y1"] = s.y1;
          j["x2"] = s.x2;
          j["y2"] = s.y2;
        }
      },
      pos.shape);
  return j;
}

int line_of_offset(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

EntryManifest parse_entry_manifest(std::string_view input) {
  json doc;
  try {
    doc = json::parse(input.begin(), input.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(Errc::SyntaxError, "line " + std::to_string(line_of_offset(input, byte)), e.what());
  }
  if (!doc.is_object()) throw Error(Errc::SyntaxError, "line 1", "manifest must be a JSON object");

  EntryManifest m;
  m.id = text(doc, "id", "id");
  if (m.id.empty()) throw Error(Errc::BadValue, "id", "empty id");
  const std::string kind = text(doc, "kind", "kind");
  auto k = parse_entry_kind(kind);
  if (!k) throw Error(Errc::BadValue, "kind", "unknown kind '" + kind + "'");
  m.kind = *k;
  m.magnification = number(doc, "magnification", "magnification");
  if (!(m.magnification > 0)) throw Error(Errc::BadValue, "magnification", "must be > 0");
  m.image = text(doc, "image", "image");
  if (!is_contained_ref(m.image)) throw Error(Errc::BadValue, "image", "reference escapes the entry directory");
  m.width = integer(doc, "width", "width");
  m.height = integer(doc, "height", "height");
  if (m.width < 1) throw Error(Errc::BadValue, "width", "must be >= 1");
  if (m.height < 1) throw Error(Errc::BadValue, "height", "must be >= 1");

  if (auto it = doc.find("positions"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(Errc::BadValue, "positions", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < it->size(); ++i) {
      SpectrumPosition pos = parse_position((*it)[i], i, m.width, m.height);
      if (!ids.insert(pos.id).second) throw Error(Errc::BadValue, "positions[" + std::to_string(i) + "].id", "duplicate id");
      m.positions.push_back(std::move(pos));
    }
  }
  if (auto it = doc.find("layers"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(Errc::BadValue, "layers", "expected an array");
    std::set<int> orders;
    std::set<std::string> elements;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& l = (*it)[i];
      const std::string at = "layers[" + std::to_string(i) + "]";
      if (!l.is_object()) throw Error(Errc::BadValue, at, "expected an object");
      MapLayerRef ref;
      ref.element = text(l, "element", at + ".element");
      if (ref.element.empty()) throw Error(Errc::BadValue, at + ".element", "empty element");
      try {
        ref.color = parse_hex_color(text(l, "color", at + ".color"));
      } catch (const Error& e) {
        if (e.code() != Errc::BadValue) throw;
        throw Error(Errc::BadValue, at + ".color", "expected #RRGGBB");
      }
      ref.file = text(l, "file", at + ".file");
      if (!is_contained_ref(ref.file)) throw Error(Errc::BadValue, at + ".file", "reference escapes the entry directory");
      ref.order = integer(l, "order", at + ".order");
      if (auto v = l.find("visible"); v != l.end() && !v->is_null()) {
        if (!v->is_boolean()) throw Error(Errc::BadValue, at + ".visible", "expected a boolean");
        ref.visible = v->get<bool>();
      }
      if (!orders.insert(ref.order).second) throw Error(Errc::BadValue, at + ".order", "duplicate order");
      if (!elements.insert(ref.element).second) throw Error(Errc::BadValue, at + ".element", "duplicate element");
      m.layers.push_back(std::move(ref));
    }
  }
  if (auto it = doc.find("date"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(Errc::BadValue, "date", "expected an ISO-8601 string");
    m.date = it->get<std::string>();
  }
  return m;
}

std::string serialize_entry_manifest(const EntryManifest& m) {
  json j;
  j["id"] = m.id;
  j["kind"] = std::string(to_string(m.kind));
  j["magnification"] = m.magnification;
  j["image"] = m.image;
  j["width"] = m.width;
  j["height"] = m.height;
  j["positions"] = json::array();
  for (const auto& p : m.positions) j["positions"].push_back(position_to_json(p));
  j["layers"] = json::array();
  for (const auto& l : m.layers) {
    j["layers"].push_back({{"element", l.element},
                           {"color", format_hex_color(l.color)},
                           {"file", l.file},
                           {"order", l.order},
                           {"visible", l.visible}});
  }
  if (m.date) j["date"] = *m.date;
  return j.dump(2) + "\n";
}

JeolSidecar parse_jeol_sidecar(std::string_view input) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t start = 0;
  while (start <= input.size()) {
    std::size_t end = input.find('\n', start);
    if (end == std::string_view::npos) end = input.size();
    std::string_view line = input.substr(start, end - start);
    start = end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    std::string_view key = line.substr(0, eq);
    std::string_view value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.remove_suffix(1);
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.remove_prefix(1);
    kv.emplace(std::string(key), std::string(value));
  }

  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(Errc::MissingKey, key);
    return it->second;
  };
  auto parse_size = [](const std::string& v, const char* key) -> std::pair<int, int> {
    const std::size_t x = v.find_first_of("xX");
    if (x == std::string::npos) throw Error(Errc::BadValue, key, "expected <w>x<h>");
    int w = 0, h = 0;
    const char* b = v.data();
    auto r1 = std::from_chars(b, b + x, w);
    auto r2 = std::from_chars(b + x + 1, b + v.size(), h);
    if (r1.ec != std::errc{} || r1.ptr != b + x || r2.ec != std::errc{} || r2.ptr != b + v.size() || w < 1 || h < 1)
      throw Error(Errc::BadValue, key, "expected <w>x<h>");
    return {w, h};
  };

  JeolSidecar sc;
  const std::string& mag = get("MAG");
  const std::string& full = get("FULL_SIZE");
  const std::string& data = get("DATA_SIZE");
  {
    double m = 0;
    auto r = std::from_chars(mag.data(), mag.data() + mag.size(), m);
    if (r.ec != std::errc{} || r.ptr != mag.data() + mag.size() || !(m > 0) || !std::isfinite(m))
      throw Error(Errc::BadValue, "MAG", "expected a positive number");
    sc.magnification = m;
  }
  std::tie(sc.full_width, sc.full_height) = parse_size(full, "FULL_SIZE");
  std::tie(sc.data_width, sc.data_height) = parse_size(data, "DATA_SIZE");
  if (sc.data_height > sc.full_height) throw Error(Errc::BadValue, "DATA_SIZE", "data height exceeds full height");
  if (sc.data_width != sc.full_width) throw Error(Errc::BadValue, "DATA_SIZE", "data width must equal full width");
  return sc;
}

Raster crop_jeol_footer(const Raster& img, const JeolSidecar& sc) {
  if (img.width() != sc.full_width || img.height() != sc.full_height)
    throw Error(Errc::DimensionMismatch, {},
                "image is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) + ", sidecar says " +
                    std::to_string(sc.full_width) + "x" + std::to_string(sc.full_height));
  Raster out(img.width(), sc.data_height, img.format());
  if (img.format() == PixelFormat::Gray16)
    std::copy_n(img.data16().begin(), out.sample_count(), out.data16().begin());
  else
    std::copy_n(img.data8().begin(), out.sample_count(), out.data8().begin());
  return out;
}

Raster load_raster(const fs::path& path, std::optional<ImageFormat> hint) {
  if (!hint) hint = format_from_extension(path.extension().string());
  const std::vector<std::uint8_t> bytes = read_file(path);
  return decode_image(bytes, hint);
}

fs::path sidecar_path_for(const fs::path& image) {
  fs::path p = image;
  p.replace_extension(".txt");
  return p;
}

Raster load_entry_image(const fs::path& entry_dir, const EntryManifest& m) {
  const fs::path image = entry_dir / m.image;
  Raster img = load_raster(image);
  if (m.kind == EntryKind::JeolImage) {
    const std::vector<std::uint8_t> raw = read_file(sidecar_path_for(image));
    const JeolSidecar sc = parse_jeol_sidecar(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
    img = crop_jeol_footer(img, sc);
  }
  if (img.width() != m.width || img.height() != m.height)
    throw Error(Errc::DimensionMismatch, m.image,
                "decoded " + std::to_string(img.width()) + "x" + std::to_string(img.height()) + ", manifest says " +
                    std::to_string(m.width) + "x" + std::to_string(m.height));
  return img;
}

Raster load_layer_raster(const fs::path& entry_dir, const EntryManifest& m, const MapLayerRef& layer) {
  Raster img = load_raster(entry_dir / layer.file);
  if (!is_single_channel(img.format())) throw Error(Errc::NotSingleChannel, layer.file);
  if (img.width() != m.width || img.height() != m.height)
    throw Error(Errc::DimensionMismatch, layer.file, "layer does not match acquired dimensions");
  return img;
}

ProjectIndex scan_project(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::DirNotFound, dir.string());

  ProjectIndex index;
  index.root = dir;
  std::vector<fs::path> candidates;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    std::error_code sub;
    if (it->is_directory(sub) && fs::is_regular_file(it->path() / "entry.json", sub))
      candidates.push_back(it->path());
  }
  if (ec) throw Error(Errc::IoError, dir.string(), ec.message());
  if (candidates.empty()) throw Error(Errc::NotAProject, dir.string(), "no entry directories found");
  std::sort(candidates.begin(), candidates.end());

  std::map<std::string, std::pair<EntryManifest, fs::path>> by_id;
  for (const fs::path& cand : candidates) {
    const std::string label = cand.filename().string();
    try {
      const std::vector<std::uint8_t> raw = read_file(cand / "entry.json");
      EntryManifest m = parse_entry_manifest(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
      if (by_id.count(m.id)) {
        index.warnings.push_back(label + ": duplicate entry id '" + m.id + "' (skipped)");
        continue;
      }
      std::string id = m.id;
      by_id.emplace(std::move(id), std::make_pair(std::move(m), cand));
    } catch (const Error& e) {
      index.warnings.push_back(label + ": " + e.what());
    }
  }
  for (auto& [id, value] : by_id) {
    index.entries.push_back(std::move(value.first));
    index.dirs.push_back(std::move(value.second));
  }
  return index;
}

}  // namespace emr::io
