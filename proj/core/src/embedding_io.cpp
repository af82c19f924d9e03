#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mphate/embed.hpp"
#include "mphate/error.hpp"

namespace mphate {

namespace {

constexpr const char* kAxes[] = {"x", "y", "z"};

std::string format_value(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.9g", v);
  return buffer;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

long long parse_integer(const std::string& text, std::size_t line_no) {
  long long value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw FormatError("embedding CSV line " + std::to_string(line_no) + ": bad integer '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw FormatError("embedding CSV line " + std::to_string(line_no) + ": bad number '" + text + "'");
}

}  // namespace

void write_embedding_csv(std::ostream& out, const Embedding& embedding) {
  const std::size_t dim = embedding.dim();
  if (dim < 1 || dim > 3) throw ValidationError("embedding CSV supports 1 to 3 dimensions");
  if (static_cast<std::size_t>(embedding.coords.rows()) != embedding.n_epochs * embedding.n_units ||
      embedding.unit_layer.size() != embedding.n_units) {
    throw ConsistencyError("embedding shape does not match its (epoch, unit) grid");
  }
  std::string text = "epoch,unit,layer";
  for (std::size_t c = 0; c < dim; ++c) text += std::string(",") + kAxes[c];
  text += '\n';
  for (std::size_t t = 0; t < embedding.n_epochs; ++t) {
    for (std::size_t i = 0; i < embedding.n_units; ++i) {
      text += std::to_string(t) + ',' + std::to_string(i) + ',' + std::to_string(embedding.unit_layer[i]);
      const auto row = static_cast<Eigen::Index>(embedding.row(t, i));
      for (std::size_t c = 0; c < dim; ++c) {
        text += ',' + format_value(embedding.coords(row, static_cast<Eigen::Index>(c)));
      }
      text += '\n';
    }
  }
  out << text;
  if (!out) throw IoError("failed to write embedding CSV");
}

void write_embedding_csv_file(const std::string& path, const Embedding& embedding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_embedding_csv(out, embedding);
}

Embedding read_embedding_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("embedding CSV is empty");
  const auto header = split(line);
  const std::size_t dim = header.size() < 4 ? 0 : header.size() - 3;
  bool header_ok = dim >= 1 && dim <= 3 && header[0] == "epoch" && header[1] == "unit" && header[2] == "layer";
  for (std::size_t c = 0; header_ok && c < dim; ++c) header_ok = header[3 + c] == kAxes[c];
  if (!header_ok) throw FormatError("embedding CSV header must be epoch,unit,layer,x,y[,z]");

  struct Row {
    long long epoch, unit, layer;
    std::vector<double> values;
  };
  std::vector<Row> rows;
  long long max_epoch = -1;
  long long max_unit = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 3 + dim) {
      throw FormatError("embedding CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(3 + dim) + " fields");
    }
    Row row{parse_integer(fields[0], line_no), parse_integer(fields[1], line_no),
            parse_integer(fields[2], line_no), {}};
    if (row.epoch < 0 || row.unit < 0) {
      throw FormatError("embedding CSV line " + std::to_string(line_no) + ": negative index");
    }
    for (std::size_t c = 0; c < dim; ++c) row.values.push_back(parse_real(fields[3 + c], line_no));
    max_epoch = std::max(max_epoch, row.epoch);
    max_unit = std::max(max_unit, row.unit);
    rows.push_back(std::move(row));
  }

  Embedding e;
  e.n_epochs = static_cast<std::size_t>(max_epoch + 1);
  e.n_units = static_cast<std::size_t>(max_unit + 1);
  if (rows.size() != e.n_epochs * e.n_units || rows.empty()) {
    throw ConsistencyError("embedding CSV does not cover a full (epoch, unit) grid");
  }
  e.coords = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  e.unit_layer.assign(e.n_units, 0);
  std::vector<bool> filled(rows.size(), false);
  std::vector<bool> layer_set(e.n_units, false);
  for (const Row& row : rows) {
    const auto unit = static_cast<std::size_t>(row.unit);
    const std::size_t index = e.row(static_cast<std::size_t>(row.epoch), unit);
    if (filled[index]) throw ConsistencyError("embedding CSV repeats a (epoch, unit) pair");
    filled[index] = true;
    if (layer_set[unit] && e.unit_layer[unit] != row.layer) {
      throw ConsistencyError("embedding CSV gives unit " + std::to_string(unit) + " two layers");
    }
    e.unit_layer[unit] = static_cast<int>(row.layer);
    layer_set[unit] = true;
    for (std::size_t c = 0; c < dim; ++c) {
      e.coords(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(c)) = row.values[c];
    }
  }
  if (!e.coords.allFinite()) throw ValidationError("embedding CSV has non-finite coordinates");
  return e;
}

Embedding read_embedding_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_embedding_csv(in);
}

}  // namespace mphate
