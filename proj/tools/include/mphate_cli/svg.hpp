#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "mphate/embed.hpp"
#include "mphate/trace.hpp"

namespace mphate::cli {

enum class Coloring { kEpoch, kLayer, kMostActiveLabel };

std::string to_string(Coloring coloring);
Coloring parse_coloring(const std::string& name);

struct PlotSpec {
  Coloring coloring = Coloring::kEpoch;
  double radius = 2.5;
  int width = 640;
  int height = 480;
  /// Only "viridis" is built in.
  std::string colormap = "viridis";
  /// Units kept per layer; every epoch of a kept unit is drawn.
  std::optional<std::size_t> subsample;
  std::uint64_t seed = 0;

  /// Positive dimensions and radius, known colormap, subsample in [1, m].
  void validate(std::size_t n_units) const;
};

/// Colormap value at u in [0, 1] as 8-bit RGB; u = 0 and u = 1 hit the end colors exactly.
std::array<int, 3> viridis(double u);
std::string hex_color(const std::array<int, 3>& rgb);

/// Scatter plot of the first two embedding coordinates. The trace supplies
/// probe labels for kMostActiveLabel and must be index-aligned with the embedding.
std::string render_svg(const Embedding& embedding, const TimeTrace& trace, const PlotSpec& spec);

}  // namespace mphate::cli
