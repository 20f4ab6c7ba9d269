#pragma once

// Dataset ingestion and serialization. Two layouts are supported: the
// TUDataset benchmark directory layout and a line-oriented edgelist format.
// Label symbols are interned to dense int ids at load time; the original
// spellings stay in the dataset-level symbol tables.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace emba {

class Interner {
 public:
  int32_t intern(std::string_view s) {
    auto it = ids_.find(std::string(s));
    if (it != ids_.end()) return it->second;
    int32_t id = static_cast<int32_t>(names_.size());
    names_.emplace_back(s);
    ids_.emplace(names_.back(), id);
    return id;
  }

  const std::string& name(int32_t id) const { return names_.at(id); }

  int32_t find(std::string_view s) const {
    auto it = ids_.find(std::string(s));
    return it == ids_.end() ? -1 : it->second;
  }

  int32_t size() const { return static_cast<int32_t>(names_.size()); }

  friend bool operator==(const Interner& a, const Interner& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int32_t> ids_;
};

struct Dataset {
  std::vector<Graph> graphs;
  Interner vertex_labels;
  Interner edge_labels;

  // distinct vertex labels actually used
  int32_t label_count() const {
    std::vector<bool> seen(vertex_labels.size(), false);
    int32_t c = 0;
    for (const auto& g : graphs)
      for (int32_t l : g.labels)
        if (!seen[l]) {
          seen[l] = true;
          ++c;
        }
    return c;
  }
};

enum class DatasetFormat { tud, edgelist };

namespace detail {

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline int64_t parse_int(std::string_view tok, std::size_t line_no) {
  tok = trim(tok);
  int64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ParseError("expected integer, got '" + std::string(tok) + "'", line_no);
  return v;
}

inline double parse_double(std::string_view tok, std::size_t line_no) {
  tok = trim(tok);
  try {
    std::size_t pos = 0;
    double v = std::stod(std::string(tok), &pos);
    if (pos != tok.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected number, got '" + std::string(tok) + "'", line_no);
  }
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

// Locates the single "<prefix>_A.txt" under dir and returns dir/<prefix>.
inline std::string tud_prefix(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  std::string found;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (name.size() > 6 && name.substr(name.size() - 6) == "_A.txt") {
      if (!found.empty()) throw IoError("multiple *_A.txt files under " + dir);
      found = name.substr(0, name.size() - 6);
    }
  }
  if (found.empty()) throw IoError("no *_A.txt file under " + dir);
  return (fs::path(dir) / found).string();
}

inline Dataset load_tud(const std::string& dir) {
  std::string prefix = tud_prefix(dir);
  auto indicator = read_lines(prefix + "_graph_indicator.txt");
  auto node_labels = read_lines(prefix + "_node_labels.txt");
  auto adjacency = read_lines(prefix + "_A.txt");
  std::vector<std::string> edge_labels;
  bool has_edge_labels = std::filesystem::exists(prefix + "_edge_labels.txt");
  if (has_edge_labels) edge_labels = read_lines(prefix + "_edge_labels.txt");

  while (!indicator.empty() && trim(indicator.back()).empty()) indicator.pop_back();
  while (!node_labels.empty() && trim(node_labels.back()).empty()) node_labels.pop_back();
  while (!adjacency.empty() && trim(adjacency.back()).empty()) adjacency.pop_back();
  while (!edge_labels.empty() && trim(edge_labels.back()).empty()) edge_labels.pop_back();

  if (node_labels.size() != indicator.size())
    throw ParseError("node label count " + std::to_string(node_labels.size()) +
                     " does not match vertex count " + std::to_string(indicator.size()));
  if (has_edge_labels && edge_labels.size() != adjacency.size())
    throw ParseError("edge label count does not match adjacency row count");

  Dataset ds;
  std::size_t nv = indicator.size();
  std::vector<int32_t> graph_of(nv);
  std::vector<int32_t> local(nv);
  int64_t prev = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    int64_t gid = parse_int(indicator[i], i + 1);
    if (gid < 1 || gid < prev || gid > prev + 1)
      throw ParseError("inconsistent graph indicator value " + std::to_string(gid), i + 1);
    if (gid == prev + 1) {
      ds.graphs.emplace_back();
      ds.graphs.back().id = gid - 1;
      prev = gid;
    }
    Graph& g = ds.graphs.back();
    graph_of[i] = static_cast<int32_t>(gid - 1);
    local[i] = g.add_vertex(ds.vertex_labels.intern(trim(node_labels[i])));
  }

  // each undirected edge is listed in both directions; keep one copy and
  // insist the mirror carries the same label
  std::map<std::pair<int64_t, int64_t>, std::pair<int32_t, std::size_t>> seen;
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    if (trim(adjacency[i]).empty()) continue;
    auto parts = split(adjacency[i], ',');
    if (parts.size() != 2) throw ParseError("expected 'u, v' pair", i + 1);
    int64_t u = parse_int(parts[0], i + 1), v = parse_int(parts[1], i + 1);
    if (u < 1 || v < 1 || u > static_cast<int64_t>(nv) || v > static_cast<int64_t>(nv))
      throw ParseError("edge endpoint out of range", i + 1);
    if (graph_of[u - 1] != graph_of[v - 1])
      throw ParseError("edge crosses graph boundary", i + 1);
    int32_t lab = -1;
    if (has_edge_labels) lab = ds.edge_labels.intern(trim(edge_labels[i]));
    auto key = std::minmax(u, v);
    auto it = seen.find(key);
    if (it != seen.end()) {
      if (it->second.first != lab)
        throw ParseError("edge label disagrees with its mirror", i + 1);
      continue;
    }
    seen.emplace(key, std::make_pair(lab, i + 1));
    Graph& g = ds.graphs[graph_of[u - 1]];
    try {
      g.add_edge(local[u - 1], local[v - 1], lab);
    } catch (const Error& e) {
      throw ParseError(e.what(), i + 1);
    }
  }
  return ds;
}

inline Dataset load_edgelist(const std::string& path) {
  auto lines = read_lines(path);
  Dataset ds;
  Graph* cur = nullptr;
  std::vector<bool> labeled;
  std::size_t pending = 0;  // vertices of cur still missing a v line
  auto finish = [&](std::size_t line_no) {
    if (cur && pending)
      throw ParseError("graph " + std::to_string(cur->id) + " has " +
                           std::to_string(pending) + " unlabeled vertices",
                       line_no);
    cur = nullptr;
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t ln = i + 1;
    auto toks = split_ws(lines[i]);
    if (toks.empty()) {
      finish(ln);
      continue;
    }
    if (toks[0] == "g") {
      finish(ln);
      if (toks.size() != 3) throw ParseError("expected 'g <id> <n>'", ln);
      ds.graphs.emplace_back();
      cur = &ds.graphs.back();
      cur->id = parse_int(toks[1], ln);
      int64_t n = parse_int(toks[2], ln);
      if (n < 0) throw ParseError("negative vertex count", ln);
      cur->labels.assign(static_cast<std::size_t>(n), -1);
      labeled.assign(static_cast<std::size_t>(n), false);
      pending = static_cast<std::size_t>(n);
    } else if (toks[0] == "v") {
      if (!cur) throw ParseError("'v' before any 'g'", ln);
      if (toks.size() != 3) throw ParseError("expected 'v <idx> <label>'", ln);
      int64_t idx = parse_int(toks[1], ln);
      if (idx < 0 || idx >= cur->n()) throw ParseError("vertex index out of range", ln);
      if (labeled[idx]) throw ParseError("vertex labeled twice", ln);
      labeled[idx] = true;
      --pending;
      cur->labels[idx] = ds.vertex_labels.intern(toks[2]);
    } else if (toks[0] == "e") {
      if (!cur) throw ParseError("'e' before any 'g'", ln);
      if (toks.size() != 3 && toks.size() != 4)
        throw ParseError("expected 'e <u> <v> [label]'", ln);
      int64_t u = parse_int(toks[1], ln), v = parse_int(toks[2], ln);
      if (u < 0 || v < 0 || u >= cur->n() || v >= cur->n())
        throw ParseError("edge endpoint out of range", ln);
      int32_t lab = toks.size() == 4 ? ds.edge_labels.intern(toks[3]) : -1;
      try {
        cur->add_edge(static_cast<int32_t>(u), static_cast<int32_t>(v), lab);
      } catch (const Error& e) {
        throw ParseError(e.what(), ln);
      }
    } else {
      throw ParseError("unknown record '" + std::string(toks[0]) + "'", ln);
    }
  }
  finish(lines.size());
  return ds;
}

inline void write_edgelist(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  bool first = true;
  for (const auto& g : ds.graphs) {
    if (!first) out << "\n";
    first = false;
    out << "g " << g.id << " " << g.n() << "\n";
    for (int v = 0; v < g.n(); ++v)
      out << "v " << v << " " << ds.vertex_labels.name(g.labels[v]) << "\n";
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      out << "e " << g.edges[e].first << " " << g.edges[e].second;
      if (e < g.edge_labels.size() && g.edge_labels[e] >= 0)
        out << " " << ds.edge_labels.name(g.edge_labels[e]);
      out << "\n";
    }
  }
}

inline void write_tud(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::string prefix = (fs::path(dir) / fs::path(dir).filename()).string();
  std::ofstream fa(prefix + "_A.txt", std::ios::binary);
  std::ofstream fi(prefix + "_graph_indicator.txt", std::ios::binary);
  std::ofstream fn(prefix + "_node_labels.txt", std::ios::binary);
  if (!fa || !fi || !fn) throw IoError("cannot write dataset files under " + dir);
  bool any_edge_labels = false;
  for (const auto& g : ds.graphs)
    for (int32_t l : g.edge_labels) any_edge_labels |= l >= 0;
  std::ofstream fe;
  if (any_edge_labels) {
    fe.open(prefix + "_edge_labels.txt", std::ios::binary);
    if (!fe) throw IoError("cannot write dataset files under " + dir);
  }
  int64_t offset = 0, gid = 0;
  for (const auto& g : ds.graphs) {
    ++gid;
    std::vector<std::vector<std::pair<int32_t, int32_t>>> adj(g.n());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      int32_t lab = e < g.edge_labels.size() ? g.edge_labels[e] : -1;
      adj[g.edges[e].first].push_back({g.edges[e].second, lab});
      adj[g.edges[e].second].push_back({g.edges[e].first, lab});
    }
    for (int v = 0; v < g.n(); ++v) {
      fi << gid << "\n";
      fn << ds.vertex_labels.name(g.labels[v]) << "\n";
      std::sort(adj[v].begin(), adj[v].end());
      for (auto [w, lab] : adj[v]) {
        fa << (offset + v + 1) << ", " << (offset + w + 1) << "\n";
        if (any_edge_labels) fe << (lab >= 0 ? ds.edge_labels.name(lab) : "0") << "\n";
      }
    }
    offset += g.n();
  }
}

}  // namespace detail

inline Dataset load_dataset(const std::string& path, DatasetFormat fmt) {
  return fmt == DatasetFormat::tud ? detail::load_tud(path)
                                   : detail::load_edgelist(path);
}

inline void write_dataset(const Dataset& ds, const std::string& path,
                          DatasetFormat fmt) {
  if (fmt == DatasetFormat::tud)
    detail::write_tud(ds, path);
  else
    detail::write_edgelist(ds, path);
}

// CSV with label symbols in the first row and first column and a symmetric
// cost matrix as the body. Symbols are interned through the given table so
// ids line up with an already loaded dataset.
inline LabelCostTable load_label_costs_csv(const std::string& path,
                                           Interner& interner) {
  auto lines = detail::read_lines(path);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty label cost file");
  auto header = detail::split(lines[0], ',');
  if (header.size() < 2) throw ParseError("label cost header needs at least one symbol", 1);
  std::size_t L = header.size() - 1;
  if (lines.size() != L + 1)
    throw ParseError("label cost matrix must have one row per symbol");
  std::vector<int32_t> ids(L);
  for (std::size_t j = 0; j < L; ++j)
    ids[j] = interner.intern(detail::trim(header[j + 1]));
  std::vector<double> cost(L * L);
  for (std::size_t i = 0; i < L; ++i) {
    auto row = detail::split(lines[i + 1], ',');
    if (row.size() != L + 1) throw ParseError("ragged label cost row", i + 2);
    if (interner.intern(detail::trim(row[0])) != ids[i])
      throw ParseError("row symbols must repeat the header order", i + 2);
    for (std::size_t j = 0; j < L; ++j)
      cost[i * L + j] = detail::parse_double(row[j + 1], i + 2);
  }
  // reorder to ascending interned id, the canonical LabelCostTable layout
  std::vector<std::size_t> perm(L);
  for (std::size_t i = 0; i < L; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  LabelCostTable t;
  t.labels.resize(L);
  t.cost.resize(L * L);
  for (std::size_t i = 0; i < L; ++i) {
    t.labels[i] = ids[perm[i]];
    for (std::size_t j = 0; j < L; ++j)
      t.cost[i * L + j] = cost[perm[i] * L + perm[j]];
  }
  if (std::adjacent_find(t.labels.begin(), t.labels.end()) != t.labels.end())
    throw ParseError("duplicate symbol in label cost header");
  return t;
}

}  // namespace emba
