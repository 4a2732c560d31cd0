#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <tuple>
#include <vector>

#include "dualgnn/graph/corrupt.hpp"
#include "dualgnn/graph/io.hpp"
#include "dualgnn/graph/sbm.hpp"
#include "dualgnn/train/trainer.hpp"

namespace dualgnn {

/// A grid of experiment cells: modes x labels_per_class x edge_drop x K/C x alpha.
struct ExperimentSpec {
  std::string dataset = "sbm:default";
  std::vector<TrainMode> modes{TrainMode::Dual};
  // 0 keeps the dataset's own train mask.
  std::vector<std::size_t> labels_per_class{0};
  std::vector<double> edge_drops{0.0};
  std::vector<double> k_multipliers{10.0};
  std::vector<double> alphas{0.7};
  std::size_t structures = 10;
  std::size_t repeats = 5;
  std::uint64_t base_seed = 0;
  std::size_t workers = 1;
  TrainConfig train{};
  ModelConfig model{};  // clusters and alpha are overridden per cell

  void validate() const {
    auto nonempty = [](bool e, const char* what) {
      if (e) throw std::invalid_argument(std::string(what) + " list is empty");
    };
    nonempty(modes.empty(), "mode");
    nonempty(labels_per_class.empty(), "labels");
    nonempty(edge_drops.empty(), "edge-drop");
    nonempty(k_multipliers.empty(), "k-mult");
    nonempty(alphas.empty(), "alpha");
    for (double p : edge_drops)
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge drop rates must lie in [0, 1]");
    for (double k : k_multipliers)
      if (!(k >= 1.0)) throw std::invalid_argument("k multipliers must be >= 1");
    for (double a : alphas)
      if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha values must lie in (0, 1)");
    if (structures < 1 || repeats < 1) throw std::invalid_argument("structures and repeats must be >= 1");
    train.validate();
  }
};

struct CellKey {
  TrainMode mode = TrainMode::Dual;
  std::size_t labels_per_class = 0;  // 0 = dataset split
  double edge_drop = 0.0;
  double k_multiplier = 10.0;
  std::size_t clusters = 0;
  double alpha = 0.7;
};

struct RunEntry {
  std::size_t structure = 0;
  std::size_t repeat = 0;
  RunRecord record;
};

struct CellResult {
  CellKey key;
  std::vector<RunEntry> runs;
  double mean = 0.0;
  double std = 0.0;
};

struct ExperimentResult {
  std::string dataset;
  std::uint64_t base_seed = 0;
  std::vector<CellResult> cells;
};

/// Arithmetic mean and population standard deviation (two-pass).
inline std::pair<double, double> aggregate(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("aggregate: no values");
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size()))};
}

/// Parses "sbm:default" or "sbm:key=value,..." (keys: blocks, nodes, p, q,
/// dim, noise, train, val, test, seed). Without seed=, the base seed is used.
inline Graph load_dataset(const std::string& dataset, std::uint64_t base_seed) {
  if (dataset.rfind("sbm:", 0) != 0) return load_graph(dataset);
  SbmConfig cfg;
  Seed seed{base_seed};
  std::string rest = dataset.substr(4);
  if (rest != "default" && !rest.empty()) {
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad sbm option '" + item + "'");
      const std::string k = item.substr(0, eq);
      const std::string v = item.substr(eq + 1);
      auto as_size = [&] {
        std::size_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
          throw std::invalid_argument("bad value for sbm option '" + k + "': " + v);
        return out;
      };
      auto as_double = [&] {
        double out = 0.0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size())
          throw std::invalid_argument("bad value for sbm option '" + k + "': " + v);
        return out;
      };
      if (k == "blocks") cfg.blocks = as_size();
      else if (k == "nodes") cfg.nodes_per_block = as_size();
      else if (k == "p") cfg.p_intra = as_double();
      else if (k == "q") cfg.q_inter = as_double();
      else if (k == "dim") cfg.feature_dim = as_size();
      else if (k == "noise") cfg.feature_noise = as_double();
      else if (k == "train") cfg.train_per_class = as_size();
      else if (k == "val") cfg.val_size = as_size();
      else if (k == "test") cfg.test_size = as_size();
      else if (k == "seed") seed.value = as_size();
      else throw std::invalid_argument("unknown sbm option '" + k + "'");
    }
  }
  return generate_sbm(cfg, seed);
}

namespace detail {

inline bool keeps_full_split(const Graph& g, std::size_t per_class) {
  if (per_class == 0) return true;
  for (auto c : train_counts(g))
    if (c != per_class) return false;
  return true;
}

}  // namespace detail

// Seed derivation. Tags keep the streams for label subsets, edge drops and
// training apart; none of them depends on the mode, K or alpha, so runs in
// different cells with the same structure index are paired.
inline Seed label_subset_seed(std::uint64_t base, std::size_t per_class, std::size_t structure) {
  return derive_seed({base}, {1, per_class, structure});
}
inline Seed edge_drop_seed(std::uint64_t base, double rate, std::size_t structure) {
  return derive_seed({base}, {2, double_bits(rate), structure});
}
inline Seed training_seed(std::uint64_t base, std::size_t structure, std::size_t repeat) {
  return derive_seed({base}, {3, structure, repeat});
}

/// Number of structural variants a cell uses: one when the cell neither
/// subsamples labels nor drops edges.
inline std::size_t structure_count(const Graph& g, const CellKey& key, std::size_t structures) {
  const bool random = !detail::keeps_full_split(g, key.labels_per_class) || key.edge_drop > 0.0;
  return random ? structures : 1;
}

/// Trains every (cell, structure, repeat) and aggregates test accuracy per cell.
/// Runs are independent and executed on up to spec.workers threads; results
/// are ordered by (cell, structure, repeat) regardless of completion order.
/// Throws std::runtime_error listing failed runs after all runs finish.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, const Graph& graph) {
  spec.validate();
  graph.validate();
  ExperimentResult result;
  result.dataset = spec.dataset;
  result.base_seed = spec.base_seed;

  for (auto mode : spec.modes)
    for (auto lpc : spec.labels_per_class)
      for (double drop : spec.edge_drops)
        for (double km : spec.k_multipliers)
          for (double alpha : spec.alphas) {
            CellKey key{mode, lpc, drop, km, static_cast<std::size_t>(std::llround(km * graph.num_classes)), alpha};
            CellResult cell;
            cell.key = key;
            const std::size_t ns = structure_count(graph, key, spec.structures);
            for (std::size_t s = 0; s < ns; ++s)
              for (std::size_t r = 0; r < spec.repeats; ++r) cell.runs.push_back({s, r, {}});
            result.cells.push_back(std::move(cell));
          }

  struct Job {
    std::size_t cell, run;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < result.cells.size(); ++c)
    for (std::size_t k = 0; k < result.cells[c].runs.size(); ++k) jobs.push_back({c, k});

  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::vector<std::string> errors;
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      CellResult& cell = result.cells[jobs[j].cell];
      RunEntry& entry = cell.runs[jobs[j].run];
      const CellKey& key = cell.key;
      try {
        Graph g = graph;
        if (key.labels_per_class != 0 && !detail::keeps_full_split(graph, key.labels_per_class))
          g = subsample_labels(g, key.labels_per_class, label_subset_seed(spec.base_seed, key.labels_per_class, entry.structure));
        if (key.edge_drop > 0.0)
          g = drop_edges(g, key.edge_drop, edge_drop_seed(spec.base_seed, key.edge_drop, entry.structure));
        ModelConfig mc = spec.model;
        mc.clusters = key.clusters;
        mc.alpha = key.alpha;
        TrainConfig tc = spec.train;
        tc.mode = key.mode;
        tc.seed = training_seed(spec.base_seed, entry.structure, entry.repeat);
        entry.record = train(g, mc, tc);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        std::ostringstream msg;
        msg << mode_name(key.mode) << " labels=" << key.labels_per_class << " drop=" << key.edge_drop
            << " K=" << key.clusters << " alpha=" << key.alpha << " structure=" << entry.structure
            << " repeat=" << entry.repeat << ": " << e.what();
        errors.push_back(msg.str());
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(spec.workers, jobs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end());
    std::string msg = std::to_string(errors.size()) + " run(s) failed:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }

  for (auto& cell : result.cells) {
    std::vector<double> acc;
    for (const auto& r : cell.runs) acc.push_back(r.record.test_accuracy);
    std::tie(cell.mean, cell.std) = aggregate(acc);
  }
  return result;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  return run_experiment(spec, load_dataset(spec.dataset, spec.base_seed));
}

}  // namespace dualgnn
