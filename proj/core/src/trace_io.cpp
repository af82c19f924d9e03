#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mphate/error.hpp"
#include "mphate/trace.hpp"

namespace mphate {

namespace {

using json = nlohmann::json;

// Annotation keys that carry TraceMetadata fields without their own JSON slot.
constexpr const char* kOptimizerKey = "optimizer";
constexpr const char* kLayerBoundariesKey = "layer_boundaries";
constexpr const char* kDroppedUnitsKey = "dropped_units";

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

void put_f32(std::string& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::string join_indices(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::size_t> split_indices(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw FormatError("bad index list '" + text + "'");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw FormatError("bad index list '" + text + "'");
    }
  }
  return out;
}

json metadata_json(const TimeTrace& trace, const TraceMetadata& meta) {
  json j = json::object();
  j["unit_layer"] = trace.unit_layer();
  if (trace.epoch_losses()) {
    json losses = json::array();
    for (const auto& rec : *trace.epoch_losses()) {
      losses.push_back({{"train_loss", rec.train_loss},
                        {"train_acc", rec.train_acc},
                        {"val_loss", rec.val_loss},
                        {"val_acc", rec.val_acc}});
    }
    j["epoch_losses"] = std::move(losses);
  } else {
    j["epoch_losses"] = nullptr;
  }
  j["sample_labels"] = trace.sample_labels() ? json(*trace.sample_labels()) : json(nullptr);
  j["task_switches"] = meta.task_switches;
  j["zscored"] = trace.zscored();

  json annotations = json::object();
  for (const auto& [k, v] : meta.annotations) annotations[k] = v;
  if (!meta.optimizer.empty()) annotations[kOptimizerKey] = meta.optimizer;
  if (!meta.layer_boundaries.empty())
    annotations[kLayerBoundariesKey] = join_indices(meta.layer_boundaries);
  if (!meta.dropped_units.empty()) annotations[kDroppedUnitsKey] = join_indices(meta.dropped_units);
  j["annotations"] = std::move(annotations);
  return j;
}

std::string header_bytes(std::uint64_t n, std::uint64_t m, std::uint64_t p) {
  std::string out(kTraceMagic, kTraceMagic + 4);
  put_u32(out, kTraceVersion);
  put_u64(out, n);
  put_u64(out, m);
  put_u64(out, p);
  return out;
}

void emit(std::ostream& sink, const std::string& bytes) {
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw IoError("failed writing trace stream");
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, std::size_t count, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in_.gcount()) != count) {
      throw LengthError(std::string("trace stream truncated while reading ") + what);
    }
  }

  std::uint32_t u32(const char* what) {
    std::array<unsigned char, 4> b{};
    bytes(reinterpret_cast<char*>(b.data()), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }

  std::uint64_t u64(const char* what) {
    std::array<unsigned char, 8> b{};
    bytes(reinterpret_cast<char*>(b.data()), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
};

std::uint64_t checked_product(std::uint64_t n, std::uint64_t m, std::uint64_t p) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max() / 4;
  std::uint64_t nm = 0;
  std::uint64_t nmp = 0;
  if (__builtin_mul_overflow(n, m, &nm) || __builtin_mul_overflow(nm, p, &nmp) || nmp > kMax ||
      nmp > std::numeric_limits<std::size_t>::max() / sizeof(double)) {
    throw ConsistencyError("trace header dimensions (" + std::to_string(n) + ", " +
                           std::to_string(m) + ", " + std::to_string(p) +
                           ") overflow any possible payload");
  }
  return nmp;
}

}  // namespace

void write_trace(std::ostream& sink, const TimeTrace& trace, const TraceMetadata& meta) {
  trace.validate();
  meta.validate(trace.n_epochs());
  for (const char* key : {kOptimizerKey, kLayerBoundariesKey, kDroppedUnitsKey}) {
    if (meta.annotations.count(key)) {
      throw ValidationError(std::string("annotation key '") + key + "' is reserved");
    }
  }

  std::string out = header_bytes(trace.n_epochs(), trace.n_units(), trace.n_samples());
  out.reserve(out.size() + trace.data().size() * 4 + 256);
  for (double v : trace.data()) put_f32(out, v);
  const std::string meta_text = metadata_json(trace, meta).dump();
  put_u64(out, meta_text.size());
  out += meta_text;
  emit(sink, out);
}

void write_matrix(std::ostream& sink, const Matrix& matrix, const std::string& content) {
  const auto rows = static_cast<std::size_t>(matrix.rows());
  const auto cols = static_cast<std::size_t>(matrix.cols());
  std::string out = header_bytes(1, rows, cols);
  out.reserve(out.size() + rows * cols * 4 + 256);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      put_f32(out, matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));

  json j = json::object();
  j["unit_layer"] = std::vector<int>(rows, 0);
  j["epoch_losses"] = nullptr;
  j["sample_labels"] = nullptr;
  j["task_switches"] = json::array();
  j["zscored"] = false;
  j["annotations"] = {{"content", content}};
  const std::string meta_text = j.dump();
  put_u64(out, meta_text.size());
  out += meta_text;
  emit(sink, out);
}

std::pair<TimeTrace, TraceMetadata> read_trace(std::istream& source) {
  Reader reader(source);
  char magic[4];
  reader.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kTraceMagic, 4) != 0) throw FormatError("not a trace file (bad magic)");
  const std::uint32_t version = reader.u32("version");
  if (version != kTraceVersion) {
    throw FormatError("unsupported trace version " + std::to_string(version));
  }
  const std::uint64_t n = reader.u64("n_epochs");
  const std::uint64_t m = reader.u64("n_units");
  const std::uint64_t p = reader.u64("n_samples");
  const std::uint64_t count = checked_product(n, m, p);

  // Chunked so a lying header fails on length rather than on allocation.
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 22)));
  std::vector<char> chunk;
  std::uint64_t remaining = count;
  while (remaining > 0) {
    const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, 1u << 20));
    chunk.resize(take * 4);
    reader.bytes(chunk.data(), chunk.size(), "tensor payload");
    for (std::size_t i = 0; i < take; ++i) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b)
        bits = (bits << 8) | static_cast<unsigned char>(chunk[i * 4 + static_cast<std::size_t>(b)]);
      data.push_back(static_cast<double>(std::bit_cast<float>(bits)));
    }
    remaining -= take;
  }

  const std::uint64_t meta_len = reader.u64("metadata length");
  if (meta_len > (1ull << 32)) throw ConsistencyError("metadata length is implausibly large");
  std::string meta_text(static_cast<std::size_t>(meta_len), '\0');
  reader.bytes(meta_text.data(), meta_text.size(), "metadata");
  if (!reader.at_end()) throw FormatError("trailing bytes after trace metadata");

  json j;
  try {
    j = json::parse(meta_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("trace metadata is not valid JSON: ") + e.what());
  }

  try {
    std::vector<int> unit_layer = j.at("unit_layer").get<std::vector<int>>();
    std::optional<std::vector<EpochRecord>> losses;
    if (!j.at("epoch_losses").is_null()) {
      losses.emplace();
      for (const auto& rec : j.at("epoch_losses")) {
        losses->push_back({rec.at("train_loss").get<double>(), rec.at("train_acc").get<double>(),
                           rec.at("val_loss").get<double>(), rec.at("val_acc").get<double>()});
      }
    }
    std::optional<std::vector<int>> labels;
    if (!j.at("sample_labels").is_null()) labels = j.at("sample_labels").get<std::vector<int>>();

    TraceMetadata meta;
    meta.task_switches = j.at("task_switches").get<std::vector<std::size_t>>();
    meta.annotations = j.at("annotations").get<std::map<std::string, std::string>>();
    if (auto it = meta.annotations.find(kOptimizerKey); it != meta.annotations.end()) {
      meta.optimizer = it->second;
      meta.annotations.erase(it);
    }
    if (auto it = meta.annotations.find(kLayerBoundariesKey); it != meta.annotations.end()) {
      meta.layer_boundaries = split_indices(it->second);
      meta.annotations.erase(it);
    }
    if (auto it = meta.annotations.find(kDroppedUnitsKey); it != meta.annotations.end()) {
      meta.dropped_units = split_indices(it->second);
      meta.annotations.erase(it);
    }

    TimeTrace trace(static_cast<std::size_t>(n), static_cast<std::size_t>(m),
                    static_cast<std::size_t>(p), std::move(data), std::move(unit_layer),
                    std::move(losses), std::move(labels), j.at("zscored").get<bool>());
    return {std::move(trace), std::move(meta)};
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed trace metadata: ") + e.what());
  }
}

void write_trace_file(const std::string& path, const TimeTrace& trace, const TraceMetadata& meta) {
  trace.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trace(out, trace, meta);
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::pair<TimeTrace, TraceMetadata> read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trace(in);
}

}  // namespace mphate
