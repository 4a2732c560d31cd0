#pragma once

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dualgnn/exp/experiment.hpp"

namespace dualgnn {

enum class ResultFormat { Csv, Json };

inline ResultFormat parse_result_format(std::string_view s) {
  if (s == "csv") return ResultFormat::Csv;
  if (s == "json") return ResultFormat::Json;
  throw std::invalid_argument("unknown format '" + std::string(s) + "' (csv|json)");
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

inline constexpr std::string_view kCsvHeader = "mode,labels_per_class,edge_drop,K,alpha,runs,mean_acc,std_acc\n";

/// One row per cell. labels_per_class 0 means the dataset's own split.
inline std::string format_csv(const ExperimentResult& r) {
  std::string out(kCsvHeader);
  for (const auto& c : r.cells) {
    out += mode_name(c.key.mode);
    out += ',' + std::to_string(c.key.labels_per_class);
    out += ',' + format_number(c.key.edge_drop);
    out += ',' + std::to_string(c.key.clusters);
    out += ',' + format_number(c.key.alpha);
    out += ',' + std::to_string(c.runs.size());
    out += ',' + format_number(c.mean);
    out += ',' + format_number(c.std);
    out += '\n';
  }
  return out;
}

namespace detail {

inline nlohmann::json run_to_json(const RunEntry& e) {
  const RunRecord& r = e.record;
  nlohmann::json j{{"structure", e.structure},
                   {"repeat", e.repeat},
                   {"seed", r.seed},
                   {"test_accuracy", r.test_accuracy},
                   {"val_accuracy", r.val_accuracy},
                   {"primary_test_accuracy", r.primary_test_accuracy},
                   {"primary_val_accuracy", r.primary_val_accuracy}};
  j["aux_test_accuracy"] = r.aux_test_accuracy ? nlohmann::json(*r.aux_test_accuracy) : nlohmann::json(nullptr);
  j["aux_val_accuracy"] = r.aux_val_accuracy ? nlohmann::json(*r.aux_val_accuracy) : nlohmann::json(nullptr);
  // Only the last epoch's loss is kept; per-epoch curves would dominate the file.
  if (!r.losses.empty()) {
    const LossBreakdown& l = r.losses.back();
    j["final_loss"] = {{"l_ce", l.l_ce}, {"l_ce_aux", l.l_ce_aux}, {"l_sc", l.l_sc}, {"total", l.total}};
  } else {
    j["final_loss"] = nullptr;
  }
  return j;
}

inline RunEntry run_from_json(const nlohmann::json& j) {
  RunEntry e;
  e.structure = j.at("structure").get<std::size_t>();
  e.repeat = j.at("repeat").get<std::size_t>();
  RunRecord& r = e.record;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.test_accuracy = j.at("test_accuracy").get<double>();
  r.val_accuracy = j.at("val_accuracy").get<double>();
  r.primary_test_accuracy = j.at("primary_test_accuracy").get<double>();
  r.primary_val_accuracy = j.at("primary_val_accuracy").get<double>();
  if (!j.at("aux_test_accuracy").is_null()) r.aux_test_accuracy = j["aux_test_accuracy"].get<double>();
  if (!j.at("aux_val_accuracy").is_null()) r.aux_val_accuracy = j["aux_val_accuracy"].get<double>();
  if (const auto& l = j.at("final_loss"); !l.is_null())
    r.losses.push_back({l.at("l_ce").get<double>(), l.at("l_ce_aux").get<double>(), l.at("l_sc").get<double>(),
                        l.at("total").get<double>()});
  return e;
}

}  // namespace detail

inline std::string format_json(const ExperimentResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& e : c.runs) runs.push_back(detail::run_to_json(e));
    cells.push_back({{"mode", std::string(mode_name(c.key.mode))},
                     {"labels_per_class", c.key.labels_per_class},
                     {"edge_drop", c.key.edge_drop},
                     {"k_multiplier", c.key.k_multiplier},
                     {"K", c.key.clusters},
                     {"alpha", c.key.alpha},
                     {"runs", c.runs.size()},
                     {"mean_acc", c.mean},
                     {"std_acc", c.std},
                     {"records", std::move(runs)}});
  }
  nlohmann::json doc{{"dataset", r.dataset}, {"base_seed", r.base_seed}, {"cells", std::move(cells)}};
  return doc.dump(2) + "\n";
}

inline ExperimentResult parse_results_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  ExperimentResult r;
  r.dataset = doc.at("dataset").get<std::string>();
  r.base_seed = doc.at("base_seed").get<std::uint64_t>();
  for (const auto& jc : doc.at("cells")) {
    CellResult c;
    c.key.mode = parse_mode(jc.at("mode").get<std::string>());
    c.key.labels_per_class = jc.at("labels_per_class").get<std::size_t>();
    c.key.edge_drop = jc.at("edge_drop").get<double>();
    c.key.k_multiplier = jc.at("k_multiplier").get<double>();
    c.key.clusters = jc.at("K").get<std::size_t>();
    c.key.alpha = jc.at("alpha").get<double>();
    c.mean = jc.at("mean_acc").get<double>();
    c.std = jc.at("std_acc").get<double>();
    for (const auto& jr : jc.at("records")) c.runs.push_back(detail::run_from_json(jr));
    if (c.runs.size() != jc.at("runs").get<std::size_t>())
      throw std::runtime_error("results json: run count does not match records");
    r.cells.push_back(std::move(c));
  }
  return r;
}

inline ExperimentResult load_results_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_results_json(ss.str());
}

/// Plot series along one sweep axis. For every mode, each combination of the
/// other three axes becomes a block of "x mean std" rows; blocks are separated
/// by a blank line (gnuplot `index` style).
enum class PlotAxis { Labels, EdgeDrop, KMultiplier, Alpha };

inline std::string_view axis_name(PlotAxis a) {
  switch (a) {
    case PlotAxis::Labels: return "labels";
    case PlotAxis::EdgeDrop: return "edge_drop";
    case PlotAxis::KMultiplier: return "k_mult";
    case PlotAxis::Alpha: return "alpha";
  }
  return "?";
}

namespace detail {

inline double axis_value(const CellKey& k, PlotAxis a) {
  switch (a) {
    case PlotAxis::Labels: return static_cast<double>(k.labels_per_class);
    case PlotAxis::EdgeDrop: return k.edge_drop;
    case PlotAxis::KMultiplier: return k.k_multiplier;
    case PlotAxis::Alpha: return k.alpha;
  }
  return 0.0;
}

}  // namespace detail

inline std::string format_plot(const ExperimentResult& r, TrainMode mode, PlotAxis axis) {
  using Rest = std::tuple<double, double, double>;
  constexpr PlotAxis all[] = {PlotAxis::Labels, PlotAxis::EdgeDrop, PlotAxis::KMultiplier, PlotAxis::Alpha};
  std::vector<PlotAxis> others;
  for (auto a : all)
    if (a != axis) others.push_back(a);

  std::map<Rest, std::vector<const CellResult*>> blocks;
  for (const auto& c : r.cells) {
    if (c.key.mode != mode) continue;
    Rest rest{detail::axis_value(c.key, others[0]), detail::axis_value(c.key, others[1]),
              detail::axis_value(c.key, others[2])};
    blocks[rest].push_back(&c);
  }

  std::string out = "# mode " + std::string(mode_name(mode)) + ", x = " + std::string(axis_name(axis)) + "\n";
  bool first = true;
  for (auto& [rest, cells] : blocks) {
    std::stable_sort(cells.begin(), cells.end(), [&](const CellResult* a, const CellResult* b) {
      return detail::axis_value(a->key, axis) < detail::axis_value(b->key, axis);
    });
    if (!first) out += "\n\n";
    first = false;
    out += "# " + std::string(axis_name(others[0])) + "=" + format_number(std::get<0>(rest)) + " " +
           std::string(axis_name(others[1])) + "=" + format_number(std::get<1>(rest)) + " " +
           std::string(axis_name(others[2])) + "=" + format_number(std::get<2>(rest)) + "\n";
    out += "# x y err\n";
    for (const CellResult* c : cells)
      out += format_number(detail::axis_value(c->key, axis)) + " " + format_number(c->mean) + " " +
             format_number(c->std) + "\n";
  }
  return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

/// Writes results.csv or results.json into `dir`, plus plot_<axis>_<mode>.dat
/// for every axis that takes more than one value. Returns the written paths.
inline std::vector<std::filesystem::path> emit_results(const ExperimentResult& r, const std::filesystem::path& dir,
                                                       ResultFormat format) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto main = dir / (format == ResultFormat::Csv ? "results.csv" : "results.json");
  detail::write_file(main, format == ResultFormat::Csv ? format_csv(r) : format_json(r));
  written.push_back(main);

  std::vector<TrainMode> modes;
  for (const auto& c : r.cells)
    if (std::find(modes.begin(), modes.end(), c.key.mode) == modes.end()) modes.push_back(c.key.mode);
  for (auto axis : {PlotAxis::Labels, PlotAxis::EdgeDrop, PlotAxis::KMultiplier, PlotAxis::Alpha}) {
    std::set<double> xs;
    for (const auto& c : r.cells) xs.insert(detail::axis_value(c.key, axis));
    if (xs.size() < 2) continue;
    for (auto m : modes) {
      const auto p = dir / ("plot_" + std::string(axis_name(axis)) + "_" + std::string(mode_name(m)) + ".dat");
      detail::write_file(p, format_plot(r, m, axis));
      written.push_back(p);
    }
  }
  return written;
}

}  // namespace dualgnn
