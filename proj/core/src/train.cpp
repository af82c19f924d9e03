#include "mphate/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mphate/error.hpp"
#include "mphate/random.hpp"

namespace mphate {

std::string to_string(LabelMode mode) {
  switch (mode) {
    case LabelMode::kTrue: return "true";
    case LabelMode::kRandomLabels: return "random_labels";
    case LabelMode::kRandomPixels: return "random_pixels";
  }
  return "true";
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (batch_size < 1) throw ValidationError("batch size must be at least 1");
  if (epochs < 1) throw ValidationError("training needs at least one epoch");
  if (!(arch.keep_prob > 0.0 && arch.keep_prob <= 1.0)) throw ValidationError("dropout keep probability must lie in (0, 1]");
}

LossResult evaluate(const Network& net, const Dataset& data, std::span<const int> heads) {
  return loss_and_grads(net, data.inputs, data.labels, heads, false, 0, nullptr);
}

namespace {

std::vector<int> unit_layers(const std::vector<std::size_t>& hidden) {
  std::vector<int> layers;
  for (std::size_t l = 0; l < hidden.size(); ++l) layers.insert(layers.end(), hidden[l], static_cast<int>(l));
  return layers;
}

void append_slice(std::vector<double>& data, const Matrix& activations) {
  // activations: units x samples; trace rows are unit-major.
  for (Eigen::Index u = 0; u < activations.rows(); ++u)
    for (Eigen::Index s = 0; s < activations.cols(); ++s) data.push_back(activations(u, s));
}

void check_probe(const Dataset& probe, std::size_t inputs) {
  if (probe.size() < 2) throw ValidationError("probe set needs at least 2 samples");
  if (probe.dims() != inputs) throw ConsistencyError("probe inputs do not match the network");
}

/// Sample-weighted running mean of training-mode batch statistics.
struct RunningMean {
  double loss = 0.0;
  double acc = 0.0;
  double count = 0.0;
  void add(const LossResult& r, std::size_t n) {
    loss += r.loss * static_cast<double>(n);
    acc += r.accuracy * static_cast<double>(n);
    count += static_cast<double>(n);
  }
  double mean_loss() const { return count > 0.0 ? loss / count : 0.0; }
  double mean_acc() const { return count > 0.0 ? acc / count : 0.0; }
};

}  // namespace

std::pair<TrainRun, TimeTrace> train(const TrainConfig& config, const Dataset& training,
                                     const Dataset& validation, const Dataset& probe) {
  config.validate();
  training.validate();
  validation.validate();
  if (training.size() == 0) throw ValidationError("empty training set");

  Architecture arch = config.arch;
  if (arch.inputs == 0) arch.inputs = training.dims();
  if (arch.outputs == 0) arch.outputs = std::max(training.classes, validation.classes);
  arch.heads = 1;
  arch.validate();
  check_probe(probe, arch.inputs);
  if (validation.dims() != arch.inputs) throw ConsistencyError("validation inputs do not match the network");

  Dataset data = training;
  if (config.label_mode == LabelMode::kRandomLabels) {
    data = corrupt(training, Corruption::kRandomLabels, mix_seed(config.seed, 1));
  } else if (config.label_mode == LabelMode::kRandomPixels) {
    data = corrupt(training, Corruption::kRandomPixels, mix_seed(config.seed, 1));
  }

  TrainRun run;
  run.network = init_network(arch, mix_seed(config.seed, 2));
  Network& net = run.network;
  OptimizerState optimizer = make_optimizer(config.optimizer, config.learning_rate, net);
  Rng order_rng(mix_seed(config.seed, 3));
  const std::uint64_t dropout_base = mix_seed(config.seed, 4);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> slices;
  Network grads = zeros_like(net);
  std::uint64_t batch_counter = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, order_rng);
    RunningMean running;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const Dataset batch = data.subset(std::span<const std::size_t>(order).subspan(start, end - start));
      LossResult r;
      try {
        r = loss_and_grads(net, batch.inputs, batch.labels, {}, true, mix_seed(dropout_base, batch_counter++), &grads);
      } catch (const NumericalError&) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch));
      }
      step(optimizer, net, grads);
      running.add(r, end - start);
    }
    const LossResult val = evaluate(net, validation);
    if (!std::isfinite(val.loss)) throw NumericalError("validation loss diverged at epoch " + std::to_string(epoch));
    run.curves.push_back({running.mean_loss(), running.mean_acc(), val.loss, val.accuracy});
    append_slice(slices, hidden_activations(net, probe.inputs));
  }
  run.memorization_error = run.curves.back().val_loss - run.curves.back().train_loss;

  TimeTrace trace(config.epochs, arch.hidden_units(), probe.size(), std::move(slices), unit_layers(arch.hidden),
                  run.curves, probe.labels, false);
  return {std::move(run), std::move(trace)};
}

// ---------------------------------------------------------------------------

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kTask: return "task";
    case Scenario::kDomain: return "domain";
    case Scenario::kClass: return "class";
  }
  return "task";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::kTask, Scenario::kDomain, Scenario::kClass}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown scenario '" + name + "'");
}

void ContinualConfig::validate() const {
  if (n_tasks < 2) throw ValidationError("continual training needs at least 2 tasks");
  if (slice_interval < 1) throw ValidationError("slice interval must be at least 1");
  if (epochs_per_task < 1) throw ValidationError("need at least one epoch per task");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (batch_size < 1 || (rehearsal && rehearsal_half_batch < 1)) throw ValidationError("batch size must be at least 1");
  if (hidden.empty()) throw ValidationError("continual network needs hidden layers");
}

namespace {

struct Sample {
  std::size_t task;
  std::size_t index;
};

/// Label and head of a binary-task sample under a scenario.
int scenario_label(Scenario scenario, std::size_t task, int label) {
  return scenario == Scenario::kClass ? static_cast<int>(2 * task) + label : label;
}

int scenario_head(Scenario scenario, std::size_t task) {
  return scenario == Scenario::kTask ? static_cast<int>(task) : 0;
}

}  // namespace

ContinualRun continual_train(const ContinualConfig& config, const std::vector<Dataset>& tasks,
                             const std::vector<Dataset>& validation, const Dataset& probe) {
  config.validate();
  if (tasks.size() != config.n_tasks || validation.size() != config.n_tasks) {
    throw ConsistencyError("continual training expects " + std::to_string(config.n_tasks) +
                           " training and validation tasks");
  }
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    tasks[j].validate();
    validation[j].validate();
    if (tasks[j].classes != 2 || validation[j].classes != 2) throw ValidationError("continual tasks must be binary");
    if (tasks[j].size() == 0 || validation[j].size() == 0) throw ValidationError("continual task is empty");
    if (tasks[j].dims() != tasks[0].dims() || validation[j].dims() != tasks[0].dims()) {
      throw ConsistencyError("continual tasks differ in input width");
    }
  }

  Architecture arch;
  arch.inputs = tasks[0].dims();
  arch.hidden = config.hidden;
  arch.activation = config.activation;
  arch.outputs = config.scenario == Scenario::kClass ? 2 * config.n_tasks : 2;
  arch.heads = config.scenario == Scenario::kTask ? config.n_tasks : 1;
  arch.validate();
  check_probe(probe, arch.inputs);

  // Validation sets relabeled and routed once.
  std::vector<Dataset> val_sets;
  std::vector<std::vector<int>> val_heads;
  for (std::size_t j = 0; j < validation.size(); ++j) {
    Dataset v = validation[j];
    for (int& y : v.labels) y = scenario_label(config.scenario, j, y);
    v.classes = arch.outputs;
    val_heads.emplace_back(v.size(), scenario_head(config.scenario, j));
    val_sets.push_back(std::move(v));
  }
  auto validate_all = [&](const Network& net, std::vector<double>* per_loss, std::vector<double>* per_acc) {
    double loss = 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < val_sets.size(); ++j) {
      const LossResult r = evaluate(net, val_sets[j], val_heads[j]);
      loss += r.loss;
      acc += r.accuracy;
      if (per_loss) per_loss->push_back(r.loss);
      if (per_acc) per_acc->push_back(r.accuracy);
    }
    const double count = static_cast<double>(val_sets.size());
    return std::pair{loss / count, acc / count};
  };

  ContinualRun result;
  TrainRun& run = result.run;
  run.network = init_network(arch, mix_seed(config.seed, 2));
  Network& net = run.network;
  OptimizerState optimizer = make_optimizer(config.optimizer, config.learning_rate, net);
  Rng rng(mix_seed(config.seed, 3));
  Network grads = zeros_like(net);

  const std::size_t new_per_batch = config.rehearsal ? config.rehearsal_half_batch : config.batch_size;
  std::vector<Sample> buffer;
  std::vector<double> slices;
  std::size_t batch_counter = 0;
  RunningMean running;

  for (std::size_t j = 0; j < config.n_tasks; ++j) {
    const Dataset& task = tasks[j];
    if (j > 0) result.task_switches.push_back(run.curves.size());
    std::vector<std::size_t> order(task.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs_per_task; ++epoch) {
      shuffle(order, rng);
      for (std::size_t start = 0; start < order.size(); start += new_per_batch) {
        const std::size_t end = std::min(order.size(), start + new_per_batch);
        std::vector<Sample> members;
        for (std::size_t s = start; s < end; ++s) members.push_back({j, order[s]});
        if (config.rehearsal && !buffer.empty()) {
          // Partial Fisher-Yates: distinct replayed examples.
          const std::size_t replay = std::min(config.rehearsal_half_batch, buffer.size());
          for (std::size_t r = 0; r < replay; ++r) {
            std::swap(buffer[r], buffer[r + uniform_index(rng, buffer.size() - r)]);
            members.push_back(buffer[r]);
          }
        }

        Matrix inputs(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(arch.inputs));
        std::vector<int> labels;
        std::vector<int> heads;
        std::vector<bool> active(net.params.size(), config.scenario != Scenario::kTask);
        for (std::size_t r = 0; r < members.size(); ++r) {
          const Dataset& source = tasks[members[r].task];
          inputs.row(static_cast<Eigen::Index>(r)) = source.inputs.row(static_cast<Eigen::Index>(members[r].index));
          labels.push_back(scenario_label(config.scenario, members[r].task, source.labels[members[r].index]));
          const int head = scenario_head(config.scenario, members[r].task);
          heads.push_back(head);
          active[net.head_index(static_cast<std::size_t>(head))] = true;
          active[net.head_index(static_cast<std::size_t>(head)) + 1] = true;
        }
        for (std::size_t l = 0; l < arch.hidden.size(); ++l) active[2 * l] = active[2 * l + 1] = true;

        LossResult r;
        try {
          r = loss_and_grads(net, inputs, labels, heads, true, 0, &grads);
        } catch (const NumericalError&) {
          throw NumericalError("training diverged on task " + std::to_string(j) + ", epoch " + std::to_string(epoch));
        }
        step(optimizer, net, grads, active);
        running.add(r, members.size());

        if (++batch_counter % config.slice_interval == 0) {
          const auto [val_loss, val_acc] = validate_all(net, nullptr, nullptr);
          run.curves.push_back({running.mean_loss(), running.mean_acc(), val_loss, val_acc});
          running = RunningMean{};
          append_slice(slices, hidden_activations(net, probe.inputs));
        }
      }
    }

    // Reservoir sample (algorithm R) over the task's examples.
    if (config.rehearsal) {
      std::vector<Sample> reservoir;
      for (std::size_t s = 0; s < task.size(); ++s) {
        if (reservoir.size() < config.buffer_per_task) {
          reservoir.push_back({j, s});
        } else {
          const std::size_t slot = uniform_index(rng, s + 1);
          if (slot < config.buffer_per_task) reservoir[slot] = {j, s};
        }
      }
      buffer.insert(buffer.end(), reservoir.begin(), reservoir.end());
    }
    result.task_end_networks.push_back(net);
  }

  if (run.curves.size() < 2) throw ValidationError("continual run recorded fewer than 2 slices; lower slice_interval");
  const auto [final_loss, final_acc] = validate_all(net, &result.task_val_loss, &result.task_val_acc);
  (void)final_acc;
  run.memorization_error = final_loss - run.curves.back().train_loss;

  const std::size_t n = run.curves.size();
  result.trace = TimeTrace(n, arch.hidden_units(), probe.size(), std::move(slices), unit_layers(arch.hidden),
                           run.curves, probe.labels, false);
  return result;
}

}  // namespace mphate
