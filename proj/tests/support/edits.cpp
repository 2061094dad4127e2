#include "edits.hpp"

#include <algorithm>

namespace emr::testing {

namespace {

template <typename T, std::size_t N>
T pick(std::mt19937& rng, const T (&options)[N]) {
  return options[rng() % N];
}

}  // namespace

Aspect random_edit(compose::RenderSettings& s, std::mt19937& rng) {
  using namespace annotate;
  const Aspect aspect = static_cast<Aspect>(rng() % 3);
  switch (aspect) {
    case Aspect::ScaleBar: {
      auto& sb = s.scale_bar;
      switch (rng() % 8) {
        case 0: sb.position = static_cast<ScaleBarPosition>(rng() % 8); break;
        case 1: {
          const double lengths[] = {0, 20, 50, 100};
          const double len = pick(rng, lengths);
          sb.fixed_length_um = len > 0 ? std::optional<double>(len) : std::nullopt;
          break;
        }
        case 2: {
          const double pct[] = {3, 4, 6, 8};
          sb.font_size_pct = pick(rng, pct);
          break;
        }
        case 3: {
          const double pct[] = {20, 30, 60};
          sb.bar_height_pct = pick(rng, pct);
          break;
        }
        case 4: sb.font_color = rng() & 1u ? FontColor::Black : FontColor::White; break;
        case 5: sb.background = static_cast<BarBackground>(rng() % 3); break;
        case 6: {
          const double op[] = {0.0, 0.25, 0.5, 1.0};
          sb.background_opacity = pick(rng, op);
          break;
        }
        default:
          if (rng() & 1u)
            sb.text_above_bar = !sb.text_above_bar;
          else
            sb.enabled = !sb.enabled;
          break;
      }
      break;
    }
    case Aspect::Markers: {
      switch (rng() % 4) {
        case 0: s.marker.shape = static_cast<MarkerShape>(rng() % 4); break;
        case 1: s.marker.color = static_cast<MarkerColor>(rng() % 4); break;
        case 2: {
          const double pct[] = {1, 2, 5};
          s.marker.size_pct = pick(rng, pct);
          break;
        }
        default: {
          const unsigned mode = rng() % 3;
          if (mode == 0) {
            s.positions = {compose::PositionSelection::Mode::All, {}};
          } else if (mode == 1) {
            s.positions = {compose::PositionSelection::Mode::None, {}};
          } else {
            s.positions.mode = compose::PositionSelection::Mode::Ids;
            s.positions.ids.clear();
            const char* ids[] = {"s1", "s2", "s3"};
            for (const char* id : ids)
              if (rng() & 1u) s.positions.ids.insert(id);
          }
          break;
        }
      }
      break;
    }
    case Aspect::Layers: {
      switch (rng() % 5) {
        case 0: {
          std::vector<std::string> order = {"Fe", "K", "Si"};
          std::shuffle(order.begin(), order.end(), rng);
          order.resize(1 + rng() % 3);
          s.layers.order = order;
          break;
        }
        case 1: {
          const char* names[] = {"Fe", "K", "Si"};
          s.layers.visibility[names[rng() % 3]] = (rng() & 1u) != 0;
          break;
        }
        case 2: {
          const double op[] = {0.0, 0.3, 0.5, 0.8, 1.0};
          s.layer_opacity = pick(rng, op);
          break;
        }
        case 3:
          if (rng() & 1u)
            s.background = {};
          else
            s.background = {true, Rgb{static_cast<std::uint8_t>(rng()), 0, 40}};
          break;
        default:
          if (rng() & 1u)
            s.intensity = s.intensity == compose::IntensityMode::FullScale ? compose::IntensityMode::MinMax
                                                                           : compose::IntensityMode::FullScale;
          else
            s.layers.listed_only = !s.layers.listed_only;
          break;
      }
      break;
    }
  }
  return aspect;
}

std::size_t first_changed_stage(const io::EntryManifest& m, const compose::RenderSettings& a,
                                const compose::RenderSettings& b) {
  const bool layers = compose::resolve_layers(m, a.layers, false) != compose::resolve_layers(m, b.layers, false) ||
                      a.layer_opacity != b.layer_opacity || a.background != b.background ||
                      a.intensity != b.intensity;
  if (layers) return compose::kLayers;
  const bool markers = a.marker != b.marker || compose::resolve_positions(m, a.positions, false) !=
                                                   compose::resolve_positions(m, b.positions, false);
  if (markers) return compose::kMarkers;
  if (a.scale_bar != b.scale_bar) return compose::kScaleBar;
  return 4;
}

}  // namespace emr::testing
