#include "mphate_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/random.hpp"

namespace mphate::cli {

namespace {

// Viridis sampled at 0, 1/4, 1/2, 3/4, 1.
constexpr std::array<std::array<int, 3>, 5> kViridis = {{
    {0x44, 0x01, 0x54},
    {0x3b, 0x52, 0x8b},
    {0x21, 0x91, 0x8c},
    {0x5e, 0xc9, 0x62},
    {0xfd, 0xe7, 0x25},
}};

constexpr double kMargin = 20.0;

std::string fixed(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

double fraction(std::size_t value, std::size_t count) {
  return count <= 1 ? 0.0 : static_cast<double>(value) / static_cast<double>(count - 1);
}

// Units drawn, ascending. Per layer a seeded shuffle picks the first `keep`.
std::vector<std::size_t> plotted_units(const Embedding& embedding, const PlotSpec& spec) {
  std::vector<std::size_t> all(embedding.n_units);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (!spec.subsample) return all;

  std::vector<std::size_t> kept;
  const std::vector<std::size_t> bounds = layer_boundaries_of(embedding.unit_layer);
  for (std::size_t layer = 0; layer + 1 < bounds.size(); ++layer) {
    std::vector<std::size_t> units(all.begin() + static_cast<std::ptrdiff_t>(bounds[layer]),
                                   all.begin() + static_cast<std::ptrdiff_t>(bounds[layer + 1]));
    Rng rng(mix_seed(spec.seed, layer));
    shuffle(units, rng);
    units.resize(std::min(units.size(), *spec.subsample));
    kept.insert(kept.end(), units.begin(), units.end());
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

std::string to_string(Coloring coloring) {
  switch (coloring) {
    case Coloring::kEpoch: return "epoch";
    case Coloring::kLayer: return "layer";
    case Coloring::kMostActiveLabel: return "most_active_label";
  }
  return "epoch";
}

Coloring parse_coloring(const std::string& name) {
  for (Coloring c : {Coloring::kEpoch, Coloring::kLayer, Coloring::kMostActiveLabel}) {
    if (to_string(c) == name) return c;
  }
  throw ValidationError("unknown coloring '" + name + "'");
}

void PlotSpec::validate(std::size_t n_units) const {
  if (width <= 0 || height <= 0) throw ValidationError("plot width and height must be positive");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("point radius must be positive");
  if (colormap != "viridis") throw ValidationError("unknown colormap '" + colormap + "'");
  if (subsample && (*subsample < 1 || *subsample > n_units)) {
    throw ValidationError("subsample must be between 1 and the unit count " + std::to_string(n_units));
  }
}

std::array<int, 3> viridis(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const double scaled = u * static_cast<double>(kViridis.size() - 1);
  const std::size_t lo = std::min(static_cast<std::size_t>(scaled), kViridis.size() - 2);
  const double w = scaled - static_cast<double>(lo);
  std::array<int, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    const double v = (1.0 - w) * kViridis[lo][c] + w * kViridis[lo + 1][c];
    out[c] = static_cast<int>(std::lround(v));
  }
  return out;
}

std::string hex_color(const std::array<int, 3>& rgb) {
  char buffer[8];
  std::snprintf(buffer, sizeof buffer, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buffer;
}

std::string render_svg(const Embedding& embedding, const TimeTrace& trace, const PlotSpec& spec) {
  spec.validate(embedding.n_units);
  if (embedding.dim() < 1) throw ValidationError("embedding has no coordinates");
  if (trace.n_epochs() != embedding.n_epochs || trace.n_units() != embedding.n_units) {
    throw ConsistencyError("trace is " + std::to_string(trace.n_epochs()) + "x" + std::to_string(trace.n_units()) +
                           " but the embedding is " + std::to_string(embedding.n_epochs) + "x" +
                           std::to_string(embedding.n_units));
  }

  std::vector<double> unit_value(embedding.n_units, 0.0);
  if (spec.coloring == Coloring::kLayer) {
    const int layers = embedding.unit_layer.empty()
                           ? 1
                           : *std::max_element(embedding.unit_layer.begin(), embedding.unit_layer.end()) + 1;
    for (std::size_t i = 0; i < embedding.n_units; ++i) {
      unit_value[i] = fraction(static_cast<std::size_t>(embedding.unit_layer[i]), static_cast<std::size_t>(layers));
    }
  } else if (spec.coloring == Coloring::kMostActiveLabel) {
    if (!trace.sample_labels()) throw ValidationError("most_active_label coloring needs probe labels in the trace");
    const auto& labels = *trace.sample_labels();
    const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
    for (std::size_t i = 0; i < embedding.n_units; ++i) {
      unit_value[i] = fraction(static_cast<std::size_t>(most_active_label(trace, i)), static_cast<std::size_t>(classes));
    }
  }

  const std::vector<std::size_t> units = plotted_units(embedding, spec);
  const bool has_y = embedding.dim() >= 2;
  double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
  for (std::size_t t = 0; t < embedding.n_epochs; ++t) {
    for (std::size_t i : units) {
      const auto r = static_cast<Eigen::Index>(embedding.row(t, i));
      x_min = std::min(x_min, embedding.coords(r, 0));
      x_max = std::max(x_max, embedding.coords(r, 0));
      const double y = has_y ? embedding.coords(r, 1) : 0.0;
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const double plot_w = std::max(1.0, spec.width - 2.0 * kMargin);
  const double plot_h = std::max(1.0, spec.height - 2.0 * kMargin);
  const double x_span = x_max > x_min ? x_max - x_min : 1.0;
  const double y_span = y_max > y_min ? y_max - y_min : 1.0;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
      << "<!-- method: " << to_string(embedding.method) << ", coloring: " << to_string(spec.coloring)
      << ", colormap: " << spec.colormap << " -->\n";
  if (spec.subsample) {
    out << "<!-- subsample: " << *spec.subsample << " units per layer, seed " << spec.seed << ", units:";
    for (std::size_t i : units) out << ' ' << i;
    out << " -->\n";
  }
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t t = 0; t < embedding.n_epochs; ++t) {
    const double epoch_value = fraction(t, embedding.n_epochs);
    for (std::size_t i : units) {
      const auto r = static_cast<Eigen::Index>(embedding.row(t, i));
      const double x = kMargin + (embedding.coords(r, 0) - x_min) / x_span * plot_w;
      const double y_raw = has_y ? embedding.coords(r, 1) : 0.0;
      const double y = kMargin + (y_max - y_raw) / y_span * plot_h;
      const double value = spec.coloring == Coloring::kEpoch ? epoch_value : unit_value[i];
      out << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(y) << "\" r=\"" << fixed(spec.radius)
          << "\" fill=\"" << hex_color(viridis(value)) << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace mphate::cli
