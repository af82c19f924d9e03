#include "mphate/dataset.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/random.hpp"

namespace mphate {

void Dataset::validate() const {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size()) {
    throw ConsistencyError("dataset has " + std::to_string(inputs.rows()) + " inputs but " +
                           std::to_string(labels.size()) + " labels");
  }
  if (!original_labels.empty() && original_labels.size() != labels.size()) {
    throw ConsistencyError("dataset original labels do not match label count");
  }
  if (inputs.size() > 0 && (inputs.minCoeff() < 0.0 || inputs.maxCoeff() > 1.0)) {
    throw ValidationError("dataset inputs must lie in [0, 1]");
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ValidationError("label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.classes = classes;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= size()) throw ValidationError("dataset subset index out of range");
    out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(rows[r]));
    out.labels.push_back(labels[rows[r]]);
    if (!original_labels.empty()) out.original_labels.push_back(original_labels[rows[r]]);
  }
  return out;
}

Dataset synth_dataset(std::size_t classes, std::size_t per_class, std::size_t dims, std::uint64_t seed,
                      double spread) {
  if (classes == 0 || per_class == 0 || dims == 0) throw ValidationError("synth_dataset: counts must be positive");
  if (!(spread >= 0.0)) throw ValidationError("synth_dataset: spread must be nonnegative");
  Rng rng(seed);
  Matrix centers(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dims));
  for (Eigen::Index c = 0; c < centers.rows(); ++c)
    for (Eigen::Index d = 0; d < centers.cols(); ++d) centers(c, d) = 0.2 + 0.6 * uniform01(rng);

  Dataset data;
  data.classes = classes;
  data.inputs.resize(static_cast<Eigen::Index>(classes * per_class), static_cast<Eigen::Index>(dims));
  data.labels.reserve(classes * per_class);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      for (Eigen::Index d = 0; d < centers.cols(); ++d) {
        const double v = centers(static_cast<Eigen::Index>(c), d) + spread * standard_normal(rng);
        data.inputs(row, d) = std::clamp(v, 0.0, 1.0);
      }
      data.labels.push_back(static_cast<int>(c));
    }
  }
  return data;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw LengthError("'" + path + "' is truncated");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream images = open_binary(images_path);
  std::ifstream labels = open_binary(labels_path);
  if (read_be32(images, images_path) != 0x00000803u) throw FormatError("'" + images_path + "' is not an IDX image file");
  if (read_be32(labels, labels_path) != 0x00000801u) throw FormatError("'" + labels_path + "' is not an IDX label file");
  const std::uint32_t count = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);
  const std::uint32_t label_count = read_be32(labels, labels_path);
  if (count != label_count) {
    throw ConsistencyError("IDX files disagree: " + std::to_string(count) + " images, " +
                           std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = std::size_t{rows} * cols;

  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  std::vector<unsigned char> buffer(pixels);
  for (std::uint32_t s = 0; s < count; ++s) {
    if (!images.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(pixels))) {
      throw LengthError("'" + images_path + "' is truncated");
    }
    for (std::size_t p = 0; p < pixels; ++p) data.inputs(s, static_cast<Eigen::Index>(p)) = buffer[p] / 255.0;
  }
  std::vector<unsigned char> raw(count);
  if (!labels.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count))) {
    throw LengthError("'" + labels_path + "' is truncated");
  }
  int max_label = -1;
  for (unsigned char v : raw) {
    data.labels.push_back(v);
    max_label = std::max(max_label, static_cast<int>(v));
  }
  data.classes = static_cast<std::size_t>(max_label + 1);
  return data;
}

Dataset corrupt(const Dataset& data, Corruption mode, std::uint64_t seed) {
  Rng rng(seed);
  Dataset out = data;
  if (mode == Corruption::kRandomLabels) {
    shuffle(out.labels, rng);
  } else {
    for (Eigen::Index c = 0; c < out.inputs.cols(); ++c)
      for (Eigen::Index r = 0; r < out.inputs.rows(); ++r) out.inputs(r, c) = uniform01(rng);
  }
  return out;
}

std::vector<Dataset> split_tasks(const Dataset& data, std::size_t n_tasks) {
  if (n_tasks < 1 || data.classes < 2 * n_tasks) {
    throw ValidationError("split_tasks: " + std::to_string(data.classes) + " classes cannot form " +
                          std::to_string(n_tasks) + " binary tasks");
  }
  std::vector<Dataset> tasks;
  for (std::size_t j = 0; j < n_tasks; ++j) {
    std::vector<std::size_t> rows;
    for (std::size_t s = 0; s < data.size(); ++s) {
      if (data.labels[s] / 2 == static_cast<int>(j)) rows.push_back(s);
    }
    Dataset task = data.subset(rows);
    task.original_labels = task.labels;
    for (int& label : task.labels) label -= static_cast<int>(2 * j);
    task.classes = 2;
    tasks.push_back(std::move(task));
  }
  return tasks;
}

Dataset concatenate(std::span<const Dataset> parts) {
  Dataset out;
  Eigen::Index rows = 0;
  Eigen::Index cols = parts.empty() ? 0 : parts.front().inputs.cols();
  bool keep_original = !parts.empty();
  for (const Dataset& p : parts) {
    if (p.inputs.cols() != cols) throw ConsistencyError("concatenate: input widths differ");
    rows += p.inputs.rows();
    out.classes = std::max(out.classes, p.classes);
    keep_original = keep_original && !p.original_labels.empty();
  }
  out.inputs.resize(rows, cols);
  Eigen::Index at = 0;
  for (const Dataset& p : parts) {
    out.inputs.middleRows(at, p.inputs.rows()) = p.inputs;
    at += p.inputs.rows();
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    if (keep_original) out.original_labels.insert(out.original_labels.end(), p.original_labels.begin(), p.original_labels.end());
  }
  return out;
}

}  // namespace mphate
