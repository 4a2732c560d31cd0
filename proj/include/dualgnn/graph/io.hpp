#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dualgnn/errors.hpp"
#include "dualgnn/graph/graph.hpp"

namespace dualgnn {

// Neutral graph format, version 1 (see docs/graph-format.md):
//
//   dualgnn-graph 1
//   <n> <d> <num_classes>
//   <n lines of d decimals>
//   labels <n integers>
//   train <k> <k indices>
//   val <k> <k indices>
//   test <k> <k indices>
//   edges <m>
//   <m lines "i j" with i < j>

namespace detail {

class LineReader {
 public:
  explicit LineReader(std::string text) : text_(std::move(text)) {}

  // Next line without its terminator; FormatError at end of input.
  std::string_view next(const char* what) {
    if (pos_ >= text_.size())
      throw FormatError(line_ + 1, std::string("unexpected end of file, expected ") + what);
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    std::string_view line(text_.data() + pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    if (!line.empty() && line.back() == '\r') throw FormatError(line_, "CR line endings are not allowed");
    return line;
  }

  bool at_end() const {
    for (std::size_t i = pos_; i < text_.size(); ++i)
      if (text_[i] != '\n') return false;
    return true;
  }

  std::size_t line() const { return line_; }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

class Fields {
 public:
  Fields(std::string_view s, std::size_t line) : s_(s), line_(line) {}
  // Reads the next line first so the recorded number is that line's.
  Fields(LineReader& in, const char* what) : s_(in.next(what)), line_(in.line()) {}

  std::string_view word() {
    skip();
    if (pos_ >= s_.size()) throw FormatError(line_, "missing field");
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t') ++pos_;
    return s_.substr(start, pos_ - start);
  }

  template <class T>
  T number(const char* what) {
    std::string_view w = word();
    T v{};
    auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc() || p != w.data() + w.size())
      throw FormatError(line_, std::string("bad ") + what + " '" + std::string(w) + "'");
    return v;
  }

  void expect(std::string_view keyword) {
    std::string_view w = word();
    if (w != keyword)
      throw FormatError(line_, "expected '" + std::string(keyword) + "', found '" + std::string(w) + "'");
  }

  void finish() {
    skip();
    if (pos_ != s_.size()) throw FormatError(line_, "trailing fields");
  }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline std::vector<std::size_t> read_mask(LineReader& in, const char* name, std::size_t n) {
  std::string_view line = in.next(name);
  Fields f(line, in.line());
  f.expect(name);
  const auto k = f.number<std::size_t>("mask size");
  std::vector<std::size_t> nodes(k);
  for (auto& i : nodes) {
    i = f.number<std::size_t>("node index");
    if (i >= n) throw FormatError(in.line(), std::string(name) + " index " + std::to_string(i) + " >= n");
  }
  f.finish();
  std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
    throw FormatError(in.line(), std::string(name) + " mask lists a node twice");
  return nodes;
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

}  // namespace detail

/// Parses the neutral format. Errors carry the 1-based line number.
inline Graph parse_graph(std::string text) {
  detail::LineReader in(std::move(text));
  {
    detail::Fields f(in, "header");
    f.expect("dualgnn-graph");
    if (f.number<int>("version") != 1) throw FormatError(in.line(), "unsupported format version");
    f.finish();
  }
  Graph g;
  std::size_t n = 0, d = 0;
  {
    detail::Fields f(in, "dimensions");
    n = f.number<std::size_t>("node count");
    d = f.number<std::size_t>("feature dimension");
    g.num_classes = f.number<int>("class count");
    if (g.num_classes < 1) throw FormatError(in.line(), "class count must be positive");
    f.finish();
  }
  g.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    detail::Fields f(in, "feature row");
    for (std::size_t j = 0; j < d; ++j)
      g.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f.number<double>("feature");
    f.finish();
  }
  {
    detail::Fields f(in, "labels");
    f.expect("labels");
    g.labels.resize(n);
    for (auto& y : g.labels) {
      y = f.number<int>("label");
      if (y < -1 || y >= g.num_classes) throw FormatError(in.line(), "label " + std::to_string(y) + " out of range");
    }
    f.finish();
  }
  {
    std::vector<int> owner(n, -1);
    std::vector<std::size_t>* masks[] = {&g.train, &g.val, &g.test};
    const char* names[] = {"train", "val", "test"};
    for (int m = 0; m < 3; ++m) {
      *masks[m] = detail::read_mask(in, names[m], n);
      for (auto i : *masks[m]) {
        if (owner[i] >= 0)
          throw FormatError(in.line(), std::string(names[m]) + " mask overlaps " + names[owner[i]] +
                                           " at node " + std::to_string(i));
        if (g.labels[i] < 0)
          throw FormatError(in.line(), std::string(names[m]) + " node " + std::to_string(i) + " is unlabeled");
        owner[i] = m;
      }
    }
  }

  std::vector<Edge> edges;
  {
    detail::Fields f(in, "edges");
    f.expect("edges");
    edges.resize(f.number<std::size_t>("edge count"));
    f.finish();
  }
  std::vector<std::size_t> edge_line(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    detail::Fields f(in, "edge");
    auto i = f.number<std::size_t>("node index");
    auto j = f.number<std::size_t>("node index");
    f.finish();
    if (!(i < j)) throw FormatError(in.line(), "edge must satisfy i < j");
    if (j >= n) throw FormatError(in.line(), "edge endpoint " + std::to_string(j) + " >= n");
    edges[k] = {i, j};
    edge_line[k] = in.line();
  }
  if (!in.at_end()) throw FormatError(in.line() + 1, "content after edge list");
  {
    std::vector<std::size_t> order(edges.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return edges[a] < edges[b]; });
    for (std::size_t k = 1; k < order.size(); ++k)
      if (edges[order[k]] == edges[order[k - 1]])
        throw FormatError(std::max(edge_line[order[k]], edge_line[order[k - 1]]), "duplicate edge");
  }
  g.adjacency = adjacency_from_edges(n, edges);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(0, e.what());
  }
  return g;
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(0, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

inline std::string format_graph(const Graph& g) {
  g.validate();
  std::string out = "dualgnn-graph 1\n";
  out += std::to_string(g.num_nodes()) + " " + std::to_string(g.feature_dim()) + " " +
         std::to_string(g.num_classes) + "\n";
  for (Eigen::Index i = 0; i < g.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.features.cols(); ++j) {
      if (j) out += ' ';
      detail::append_double(out, g.features(i, j));
    }
    out += '\n';
  }
  out += "labels";
  for (int y : g.labels) out += " " + std::to_string(y);
  out += '\n';
  auto mask = [&](const char* name, const std::vector<std::size_t>& nodes) {
    out += std::string(name) + " " + std::to_string(nodes.size());
    for (auto i : nodes) out += " " + std::to_string(i);
    out += '\n';
  };
  mask("train", g.train);
  mask("val", g.val);
  mask("test", g.test);
  auto edges = undirected_edges(g.adjacency);
  out += "edges " + std::to_string(edges.size()) + "\n";
  for (auto [i, j] : edges) out += std::to_string(i) + " " + std::to_string(j) + "\n";
  return out;
}

inline void save_graph(const std::string& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_graph(g);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace dualgnn
