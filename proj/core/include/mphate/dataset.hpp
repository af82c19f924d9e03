#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mphate/linalg.hpp"

namespace mphate {

/// Labelled samples, one row per sample, inputs scaled to [0, 1].
struct Dataset {
  Matrix inputs;
  std::vector<int> labels;
  std::size_t classes = 0;
  /// Labels before relabeling by split_tasks(); empty otherwise.
  std::vector<int> original_labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(inputs.cols()); }

  /// Inputs in [0, 1], labels in [0, classes), row count matches.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Isotropic Gaussian blobs around class centers drawn uniformly in
/// [0.2, 0.8]^dims, clipped to [0, 1]. Rows are grouped by class.
Dataset synth_dataset(std::size_t classes, std::size_t per_class, std::size_t dims, std::uint64_t seed,
                      double spread = 0.2);

/// IDX image/label pair (magics 0x00000803 and 0x00000801, big-endian).
/// Pixels are scaled by 1/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

enum class Corruption { kRandomLabels, kRandomPixels };

/// kRandomLabels permutes the labels uniformly; kRandomPixels replaces every
/// input by uniform [0, 1) noise.
Dataset corrupt(const Dataset& data, Corruption mode, std::uint64_t seed);

/// Task j holds classes {2j, 2j+1} relabeled {0, 1}.
std::vector<Dataset> split_tasks(const Dataset& data, std::size_t n_tasks);

/// Stacks datasets row-wise; the class count is the maximum.
Dataset concatenate(std::span<const Dataset> parts);

}  // namespace mphate
