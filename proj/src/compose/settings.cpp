#include <algorithm>
#include <cmath>

#include "emr/compose.hpp"
#include "emr/error.hpp"

namespace emr::compose {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(Errc::InvalidSettings, field, why);
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  return j.get<double>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) bad(field, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) bad(field, "expected a string");
  return j.get<std::string>();
}

template <typename F>
void if_present(const json& obj, const char* key, F&& f) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) f(*it);
}

}  // namespace

void validate(const RenderSettings& s) {
  annotate::validate(s.scale_bar);
  annotate::validate(s.marker);
  if (!(s.layer_opacity >= 0 && s.layer_opacity <= 1)) bad("opacity", "must be in [0, 1]");
}

json to_json(const RenderSettings& s) {
  json sb = {
      {"enabled", s.scale_bar.enabled},
      {"position", std::string(annotate::to_string(s.scale_bar.position))},
      {"bar_height_pct", s.scale_bar.bar_height_pct},
      {"font_size_pct", s.scale_bar.font_size_pct},
      {"font_color", std::string(annotate::to_string(s.scale_bar.font_color))},
      {"background", std::string(annotate::to_string(s.scale_bar.background))},
      {"background_opacity", s.scale_bar.background_opacity},
      {"text_above_bar", s.scale_bar.text_above_bar},
  };
  if (s.scale_bar.fixed_length_um)
    sb["length"] = *s.scale_bar.fixed_length_um;
  else
    sb["length"] = "auto";

  json positions;
  switch (s.positions.mode) {
    case PositionSelection::Mode::All: positions = "all"; break;
    case PositionSelection::Mode::None: positions = "none"; break;
    case PositionSelection::Mode::Ids: positions = json(s.positions.ids); break;
  }
  json visible = json::object();
  for (const auto& [k, v] : s.layers.visibility) visible[k] = v;

  return {
      {"scale_bar", std::move(sb)},
      {"marker",
       {{"shape", std::string(annotate::to_string(s.marker.shape))},
        {"color", std::string(annotate::to_string(s.marker.color))},
        {"size_pct", s.marker.size_pct}}},
      {"positions", std::move(positions)},
      {"layers", {{"order", s.layers.order}, {"visible", std::move(visible)}, {"listed_only", s.layers.listed_only}}},
      {"opacity", s.layer_opacity},
      {"background", s.background.solid ? io::format_hex_color(s.background.color) : std::string("image")},
      {"intensity", s.intensity == IntensityMode::MinMax ? "minmax" : "full"},
  };
}

RenderSettings settings_from_json(const json& j) {
  if (!j.is_object()) bad("settings", "expected an object");
  RenderSettings s;
  if_present(j, "scale_bar", [&](const json& sb) {
    if (!sb.is_object()) bad("scale_bar", "expected an object");
    if_present(sb, "enabled", [&](const json& v) { s.scale_bar.enabled = get_bool(v, "scale_bar.enabled"); });
    if_present(sb, "position", [&](const json& v) {
      auto p = annotate::parse_scale_bar_position(get_string(v, "scale_bar.position"));
      if (!p) bad("scale_bar.position", "unknown position");
      s.scale_bar.position = *p;
    });
    if_present(sb, "length", [&](const json& v) {
      if (v.is_string()) {
        if (v.get<std::string>() != "auto") bad("scale_bar.length", "expected \"auto\" or a length in µm");
        s.scale_bar.fixed_length_um.reset();
      } else {
        s.scale_bar.fixed_length_um = get_number(v, "scale_bar.length");
      }
    });
    if_present(sb, "bar_height_pct",
               [&](const json& v) { s.scale_bar.bar_height_pct = get_number(v, "scale_bar.bar_height_pct"); });
    if_present(sb, "font_size_pct",
               [&](const json& v) { s.scale_bar.font_size_pct = get_number(v, "scale_bar.font_size_pct"); });
    if_present(sb, "font_color", [&](const json& v) {
      auto c = annotate::parse_font_color(get_string(v, "scale_bar.font_color"));
      if (!c) bad("scale_bar.font_color", "expected black or white");
      s.scale_bar.font_color = *c;
    });
    if_present(sb, "background", [&](const json& v) {
      auto b = annotate::parse_bar_background(get_string(v, "scale_bar.background"));
      if (!b) bad("scale_bar.background", "expected none, black or white");
      s.scale_bar.background = *b;
    });
    if_present(sb, "background_opacity", [&](const json& v) {
      s.scale_bar.background_opacity = get_number(v, "scale_bar.background_opacity");
    });
    if_present(sb, "text_above_bar",
               [&](const json& v) { s.scale_bar.text_above_bar = get_bool(v, "scale_bar.text_above_bar"); });
  });
  if_present(j, "marker", [&](const json& m) {
    if (!m.is_object()) bad("marker", "expected an object");
    if_present(m, "shape", [&](const json& v) {
      auto p = annotate::parse_marker_shape(get_string(v, "marker.shape"));
      if (!p) bad("marker.shape", "expected plus, cross, circle or dot");
      s.marker.shape = *p;
    });
    if_present(m, "color", [&](const json& v) {
      auto c = annotate::parse_marker_color(get_string(v, "marker.color"));
      if (!c) bad("marker.color", "expected red, yellow, white or black");
      s.marker.color = *c;
    });
    if_present(m, "size_pct", [&](const json& v) { s.marker.size_pct = get_number(v, "marker.size_pct"); });
  });
  if_present(j, "positions", [&](const json& v) {
    if (v.is_string()) {
      const std::string mode = v.get<std::string>();
      if (mode == "all")
        s.positions.mode = PositionSelection::Mode::All;
      else if (mode == "none")
        s.positions.mode = PositionSelection::Mode::None;
      else
        bad("positions", "expected \"all\", \"none\" or an id array");
    } else if (v.is_array()) {
      s.positions.mode = PositionSelection::Mode::Ids;
      for (const json& id : v) s.positions.ids.insert(get_string(id, "positions[]"));
    } else {
      bad("positions", "expected \"all\", \"none\" or an id array");
    }
  });
  if_present(j, "layers", [&](const json& l) {
    if (!l.is_object()) bad("layers", "expected an object");
    if_present(l, "order", [&](const json& v) {
      if (!v.is_array()) bad("layers.order", "expected an array");
      std::set<std::string> seen;
      for (const json& id : v) {
        std::string name = get_string(id, "layers.order[]");
        if (!seen.insert(name).second) bad("layers.order", "duplicate layer '" + name + "'");
        s.layers.order.push_back(std::move(name));
      }
    });
    if_present(l, "visible", [&](const json& v) {
      if (!v.is_object()) bad("layers.visible", "expected an object");
      for (const auto& [k, flag] : v.items()) s.layers.visibility[k] = get_bool(flag, "layers.visible." + k);
    });
    if_present(l, "listed_only", [&](const json& v) { s.layers.listed_only = get_bool(v, "layers.listed_only"); });
  });
  if_present(j, "opacity", [&](const json& v) { s.layer_opacity = get_number(v, "opacity"); });
  if_present(j, "background", [&](const json& v) {
    const std::string b = get_string(v, "background");
    if (b == "image") {
      s.background = {};
    } else {
      try {
        s.background = {true, io::parse_hex_color(b)};
      } catch (const Error&) {
        bad("background", "expected \"image\" or #RRGGBB");
      }
    }
  });
  if_present(j, "intensity", [&](const json& v) {
    const std::string m = get_string(v, "intensity");
    if (m == "full")
      s.intensity = IntensityMode::FullScale;
    else if (m == "minmax")
      s.intensity = IntensityMode::MinMax;
    else
      bad("intensity", "expected full or minmax");
  });
  validate(s);
  return s;
}

std::vector<ResolvedLayer> resolve_layers(const io::EntryManifest& m, const LayerSettings& s, bool strict) {
  std::vector<ResolvedLayer> out;
  std::vector<bool> placed(m.layers.size(), false);
  auto index_of = [&](const std::string& element) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < m.layers.size(); ++i)
      if (m.layers[i].element == element) return i;
    return std::nullopt;
  };
  auto visible = [&](std::size_t i, bool listed) {
    if (auto it = s.visibility.find(m.layers[i].element); it != s.visibility.end()) return it->second;
    if (s.listed_only && !listed) return false;
    return m.layers[i].visible;
  };
  for (const std::string& name : s.order) {
    auto i = index_of(name);
    if (!i) {
      if (strict) throw Error(Errc::InvalidSettings, "layers.order", "entry has no layer '" + name + "'");
      continue;
    }
    if (placed[*i]) continue;
    placed[*i] = true;
    out.push_back({*i, visible(*i, true)});
  }
  if (strict)
    for (const auto& [name, flag] : s.visibility)
      if (!index_of(name)) throw Error(Errc::InvalidSettings, "layers.visible", "entry has no layer '" + name + "'");

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < m.layers.size(); ++i)
    if (!placed[i]) rest.push_back(i);
  std::stable_sort(rest.begin(), rest.end(),
                   [&](std::size_t a, std::size_t b) { return m.layers[a].order < m.layers[b].order; });
  for (std::size_t i : rest) out.push_back({i, visible(i, false)});
  return out;
}

std::set<std::string> resolve_positions(const io::EntryManifest& m, const PositionSelection& s, bool strict) {
  std::set<std::string> out;
  switch (s.mode) {
    case PositionSelection::Mode::None: break;
    case PositionSelection::Mode::All:
      for (const auto& p : m.positions) out.insert(p.id);
      break;
    case PositionSelection::Mode::Ids:
      for (const std::string& id : s.ids) {
        const bool known =
            std::any_of(m.positions.begin(), m.positions.end(), [&](const auto& p) { return p.id == id; });
        if (known)
          out.insert(id);
        else if (strict)
          throw Error(Errc::UnknownPositionId, id);
      }
      break;
  }
  return out;
}

}  // namespace emr::compose
