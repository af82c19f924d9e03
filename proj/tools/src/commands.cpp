#include "mphate_cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mphate/error.hpp"
#include "mphate/kernel.hpp"
#include "mphate/trace.hpp"
#include "mphate_cli/presets.hpp"
#include "mphate_cli/svg.hpp"

namespace mphate::cli {

namespace {

/// Kernel and pipeline flags shared by `embed`.
struct EmbedFlags {
  std::string method = "mphate";
  std::size_t k = 2;
  double alpha = 5.0;
  std::size_t kappa = 25;
  double gamma = 0.0;
  std::size_t t_max = 100;
  std::size_t knn = 0;
  std::size_t dim = 2;
};

struct PlotFlags {
  std::string coloring = "epoch";
  std::size_t subsample = 0;
  double radius = 2.5;
  int width = 640;
  int height = 480;
};

struct Flags {
  std::uint64_t seed = 0;
  std::string output;

  // generate
  std::string preset;
  std::string optimizer = "adam";
  std::string scale = "desk";
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  std::string curves;
  std::string idx_images;
  std::string idx_labels;

  // embed / metrics / plot
  std::string trace_path;
  std::string embedding_path;
  EmbedFlags embed;
  PlotFlags plot;
  std::string svg;
  std::string dump_operator;
  bool drop_dead = false;
};

/// Error wrapper naming the pipeline stage that failed.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what) {}
};

template <typename F>
auto in_stage(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

const CLI::Validator& preset_validator() {
  static const CLI::Validator v(
      [](std::string& name) { return is_preset(name) ? std::string() : "unknown preset '" + name + "'"; },
      "PRESET", "preset");
  return v;
}

const CLI::Validator& method_validator() {
  static const CLI::Validator v(
      [](std::string& name) {
        try {
          parse_method(name);
          return std::string();
        } catch (const Error& e) {
          return std::string(e.what());
        }
      },
      "METHOD", "method");
  return v;
}

void add_seed(CLI::App* cmd, Flags& f) { cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str(); }

void add_plot_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--coloring", f.plot.coloring, "Point coloring")
      ->check(CLI::IsMember({"epoch", "layer", "most_active_label"}))
      ->capture_default_str();
  cmd->add_option("--subsample", f.plot.subsample, "Units plotted per layer (0 = all)")->capture_default_str();
  cmd->add_option("--radius", f.plot.radius, "Point radius in px")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--width", f.plot.width, "Width in px")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--height", f.plot.height, "Height in px")->check(CLI::PositiveNumber)->capture_default_str();
}

PlotSpec plot_spec(const Flags& f) {
  PlotSpec spec;
  spec.coloring = parse_coloring(f.plot.coloring);
  spec.radius = f.plot.radius;
  spec.width = f.plot.width;
  spec.height = f.plot.height;
  if (f.plot.subsample > 0) spec.subsample = f.plot.subsample;
  spec.seed = f.seed;
  return spec;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw IoError("failed writing '" + path + "'");
}

std::string curves_csv(const std::vector<EpochRecord>& curves) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char line[160];
  for (std::size_t e = 0; e < curves.size(); ++e) {
    const EpochRecord& r = curves[e];
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g,%.9g\n", e, r.train_loss, r.train_acc, r.val_loss,
                  r.val_acc);
    out << line;
  }
  return out.str();
}

/// Reads a trace and optionally removes degenerate units, recording them in the metadata.
std::pair<TimeTrace, TraceMetadata> load_trace(const std::string& path, bool drop_dead) {
  auto [trace, meta] = in_stage("read trace", [&] { return read_trace_file(path); });
  if (!drop_dead) return {std::move(trace), std::move(meta)};
  auto [kept, dropped] = in_stage("drop dead units", [&] { return drop_dead_units(trace); });
  if (!dropped.empty()) {
    meta.layer_boundaries = layer_boundaries_of(kept.unit_layer());
    meta.dropped_units = dropped;
  }
  return {std::move(kept), std::move(meta)};
}

int cmd_generate(const Flags& f, std::ostream& out) {
  PresetOptions options;
  options.seed = f.seed;
  options.optimizer = f.optimizer;
  options.scale = f.scale == "full" ? Scale::kFull : Scale::kDesk;
  if (f.epochs > 0) options.epochs = f.epochs;
  if (f.learning_rate > 0.0) options.learning_rate = f.learning_rate;
  options.idx_images = f.idx_images;
  options.idx_labels = f.idx_labels;

  const PresetRun run = in_stage("train", [&] { return run_preset(f.preset, options); });
  in_stage("write trace", [&] { write_trace_file(f.output, run.trace, run.meta); });
  const std::string curves_path = f.curves.empty() ? f.output + ".curves.csv" : f.curves;
  in_stage("write curves", [&] { write_text_file(curves_path, curves_csv(run.curves)); });
  out << "wrote " << f.output << " (" << run.trace.n_epochs() << " slices, " << run.trace.n_units() << " units, "
      << run.trace.n_samples() << " samples) and " << curves_path << '\n';
  return kExitOk;
}

EmbedOptions embed_options(const Flags& f) {
  EmbedOptions options;
  options.kernel.k = f.embed.k;
  options.kernel.alpha = f.embed.alpha;
  options.kernel.kappa = f.embed.kappa;
  options.standard_knn = f.embed.knn;
  options.gamma = f.embed.gamma;
  options.t_max = f.embed.t_max;
  options.dim = f.embed.dim;
  options.seed = f.seed;
  return options;
}

bool is_standard(Method method) {
  return method == Method::kPhateStandard || method == Method::kDmStandard || method == Method::kIsomapStandard;
}

int cmd_embed(const Flags& f, std::ostream& out) {
  const auto [trace, meta] = load_trace(f.trace_path, f.drop_dead);
  const Method method = parse_method(f.embed.method);
  const EmbedOptions options = embed_options(f);

  if (!f.dump_operator.empty()) {
    const DiffusionOperator op = in_stage("kernel", [&] {
      const TimeTrace z = trace.zscored() ? trace : zscore(trace);
      if (is_standard(method)) {
        KernelParams params = options.kernel;
        if (options.standard_knn > 0) params.k = options.standard_knn;
        return standard_kernel(z, params);
      }
      return to_operator(build_multislice_kernel(z, options.kernel));
    });
    in_stage("write operator", [&] {
      std::ofstream file(f.dump_operator, std::ios::binary);
      if (!file) throw IoError("cannot open '" + f.dump_operator + "' for writing");
      write_matrix(file, op.transition, "transition");
      if (!file) throw IoError("failed writing '" + f.dump_operator + "'");
    });
  }

  const Embedding embedding = in_stage(to_string(method), [&] { return embed(trace, method, options); });
  in_stage("write embedding", [&] { write_embedding_csv_file(f.output, embedding); });
  if (!f.svg.empty()) {
    const std::string svg = in_stage("plot", [&] { return render_svg(embedding, trace, plot_spec(f)); });
    in_stage("write svg", [&] { write_text_file(f.svg, svg); });
  }
  out << "wrote " << f.output << " (" << embedding.coords.rows() << " points, method " << to_string(method);
  if (embedding.t > 0) out << ", t=" << embedding.t;
  out << ")\n";
  return kExitOk;
}

/// Checks that an embedding read from CSV lines up with the trace.
void check_alignment(const Embedding& embedding, const TimeTrace& trace) {
  if (embedding.n_epochs != trace.n_epochs() || embedding.n_units != trace.n_units()) {
    throw ConsistencyError("embedding has " + std::to_string(embedding.n_epochs) + " epochs x " +
                           std::to_string(embedding.n_units) + " units but the trace has " +
                           std::to_string(trace.n_epochs()) + " x " + std::to_string(trace.n_units()));
  }
}

int cmd_metrics(const Flags& f, std::ostream& out) {
  const auto [trace, meta] = load_trace(f.trace_path, f.drop_dead);
  const Embedding embedding = in_stage("read embedding", [&] { return read_embedding_csv_file(f.embedding_path); });
  in_stage("align", [&] { check_alignment(embedding, trace); });
  const MetricsReport report = in_stage("metrics", [&] { return compute_metrics(embedding, trace, meta); });
  const std::string json = metrics_json(report);
  if (f.output.empty()) {
    out << json << '\n';
  } else {
    in_stage("write metrics", [&] { write_text_file(f.output, json + "\n"); });
  }
  return kExitOk;
}

int cmd_plot(const Flags& f, std::ostream& out) {
  const auto [trace, meta] = load_trace(f.trace_path, f.drop_dead);
  const Embedding embedding = in_stage("read embedding", [&] { return read_embedding_csv_file(f.embedding_path); });
  in_stage("align", [&] { check_alignment(embedding, trace); });
  const std::string svg = in_stage("plot", [&] { return render_svg(embedding, trace, plot_spec(f)); });
  in_stage("write svg", [&] { write_text_file(f.output, svg); });
  out << "wrote " << f.output << '\n';
  return kExitOk;
}

}  // namespace

std::string metrics_json(const MetricsReport& report) {
  using Json = nlohmann::ordered_json;
  const auto value = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json doc;
  doc["intraslice"] = {{"k10", value(report.intraslice_k10)}, {"k40", value(report.intraslice_k40)}};
  doc["interslice"] = {{"k10", value(report.interslice_k10)}, {"k40", value(report.interslice_k40)}};
  doc["loss_correlation"] = value(report.loss_correlation);
  doc["switch_ari"] = value(report.switch_ari);
  doc["per_slice_variance"] = report.per_slice_variance;
  return doc.dump(2);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app("Multislice PHATE embeddings of hidden-unit activations over training", "mphate");
  app.require_subcommand(1);
  app.set_version_flag("--version", "mphate 0.1.0");

  CLI::App* generate = app.add_subcommand("generate", "Train a preset network and write its activation trace");
  generate->add_option("--preset", f.preset, "Preset name")->required()->check(preset_validator());
  generate->add_option("--optimizer", f.optimizer, "Continual optimizer")
      ->check(CLI::IsMember(continual_optimizers()))
      ->capture_default_str();
  generate->add_option("--scale", f.scale, "Preset scale")->check(CLI::IsMember({"desk", "full"}))->capture_default_str();
  generate->add_option("--epochs", f.epochs, "Override epochs (per task for continual presets)")
      ->check(CLI::PositiveNumber);
  generate->add_option("--lr", f.learning_rate, "Override the learning rate")->check(CLI::PositiveNumber);
  generate->add_option("--curves", f.curves, "Training curves CSV (default <output>.curves.csv)");
  generate->add_option("--idx-images", f.idx_images, "IDX image file replacing the synthetic data");
  generate->add_option("--idx-labels", f.idx_labels, "IDX label file replacing the synthetic data");
  generate->add_option("-o,--output", f.output, "Trace file")->required();
  add_seed(generate, f);

  CLI::App* embed_cmd = app.add_subcommand("embed", "Embed a trace and write the coordinates as CSV");
  embed_cmd->add_option("trace", f.trace_path, "Trace file")->required();
  embed_cmd->add_option("-o,--output", f.output, "Embedding CSV")->required();
  embed_cmd->add_option("--method", f.embed.method, "Embedding method")
      ->check(method_validator())
      ->capture_default_str();
  embed_cmd->add_option("--k", f.embed.k, "Intraslice bandwidth neighbor")->check(CLI::PositiveNumber)->capture_default_str();
  embed_cmd->add_option("--alpha", f.embed.alpha, "Alpha-decay exponent")->check(CLI::PositiveNumber)->capture_default_str();
  embed_cmd->add_option("--kappa", f.embed.kappa, "Interslice bandwidth neighbor")->check(CLI::PositiveNumber)->capture_default_str();
  embed_cmd->add_option("--gamma", f.embed.gamma, "Potential transform (0 = sqrt, 1 = log)")->capture_default_str();
  embed_cmd->add_option("--t-max", f.embed.t_max, "Largest diffusion time considered")->check(CLI::PositiveNumber)->capture_default_str();
  embed_cmd->add_option("--knn", f.embed.knn, "Bandwidth neighbor for standard kernels (0 = --k)")->capture_default_str();
  embed_cmd->add_option("--dim", f.embed.dim, "Output dimensions")->check(CLI::Range(1, 3))->capture_default_str();
  embed_cmd->add_option("--svg", f.svg, "Also render an SVG scatter plot");
  embed_cmd->add_option("--dump-operator", f.dump_operator, "Write the diffusion operator P in the trace container");
  embed_cmd->add_flag("--drop-dead-units", f.drop_dead, "Remove units with zero-variance activations first");
  add_plot_flags(embed_cmd, f);
  add_seed(embed_cmd, f);

  CLI::App* metrics = app.add_subcommand("metrics", "Evaluate an embedding against its trace");
  metrics->add_option("trace", f.trace_path, "Trace file")->required();
  metrics->add_option("embedding", f.embedding_path, "Embedding CSV")->required();
  metrics->add_option("-o,--output", f.output, "JSON report (default stdout)");
  metrics->add_flag("--drop-dead-units", f.drop_dead, "Match an embedding computed with --drop-dead-units");

  CLI::App* plot = app.add_subcommand("plot", "Render an embedding as an SVG scatter plot");
  plot->add_option("trace", f.trace_path, "Trace file")->required();
  plot->add_option("embedding", f.embedding_path, "Embedding CSV")->required();
  plot->add_option("-o,--output", f.output, "SVG file")->required();
  plot->add_flag("--drop-dead-units", f.drop_dead, "Match an embedding computed with --drop-dead-units");
  add_plot_flags(plot, f);
  add_seed(plot, f);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == generate) return cmd_generate(f, out);
    if (chosen == embed_cmd) return cmd_embed(f, out);
    if (chosen == metrics) return cmd_metrics(f, out);
    return cmd_plot(f, out);
  } catch (const std::exception& e) {
    err << "mphate " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mphate::cli
