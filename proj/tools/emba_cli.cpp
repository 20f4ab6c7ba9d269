// Command line front end: dataset stats, index build, range / kNN queries,
// pairwise bounds, and a small filter benchmark.  TSV on stdout by default,
// one JSON object per line with --json.

#include <CLI11.hpp>
#include <json.hpp>

#include <emba/emba.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

struct Common {
  std::string dataset;
  std::string format;  // empty: auto-detect
  std::string costs = "1,1,1,1";
  std::string label_costs;
  std::string bound = "clb";
  std::string index;
  bool json_out = false;
  std::uint64_t seed = 17;
  int threads = default_threads();
};

void add_common(CLI::App* cmd, Common& c,
                const std::vector<std::string>& bounds = {"llb", "dlb", "clb"}) {
  cmd->add_option("--dataset", c.dataset,
                  "dataset path (TUDataset directory or edgelist file)")
      ->required();
  cmd->add_option("--format", c.format, "dataset format (default: auto-detect)")
      ->check(CLI::IsMember({"tud", "edgelist"}));
  cmd->add_option("--costs", c.costs, "edit costs cv,ce,cvl,cel")->capture_default_str();
  cmd->add_option("--label-costs", c.label_costs,
                  "vertex label substitution costs (CSV table)");
  cmd->add_option("--bound", c.bound, "filter bound")->capture_default_str()
      ->check(CLI::IsMember(bounds));
  cmd->add_option("--index", c.index, "index file (build: output, queries: input)");
  cmd->add_flag("--json", c.json_out, "emit one JSON object per line");
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--threads", c.threads,
                  "worker threads; 1 gives a fully reproducible run")
      ->capture_default_str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("bad ") + what + ": '" + s + "'");
  }
}

emba::DatasetFormat pick_format(const Common& c) {
  if (c.format == "tud") return emba::DatasetFormat::tud;
  if (c.format == "edgelist") return emba::DatasetFormat::edgelist;
  return std::filesystem::is_directory(c.dataset) ? emba::DatasetFormat::tud
                                                  : emba::DatasetFormat::edgelist;
}

emba::Dataset load_data(const Common& c) {
  return emba::load_dataset(c.dataset, pick_format(c));
}

emba::CostModel make_costs(const Common& c, emba::Dataset& ds) {
  auto parts = split(c.costs, ',');
  if (parts.size() != 4)
    throw UsageError("--costs expects four comma separated numbers");
  emba::CostModel m;
  m.vertex_indel = parse_double(parts[0], "--costs");
  m.edge_indel = parse_double(parts[1], "--costs");
  m.vertex_relabel = parse_double(parts[2], "--costs");
  m.edge_relabel = parse_double(parts[3], "--costs");
  if (!c.label_costs.empty())
    m.label_costs = emba::load_label_costs_csv(c.label_costs, ds.vertex_labels);
  emba::validate_cost_model(m);
  return m;
}

emba::BoundKind parse_bound(const std::string& s) {
  if (s == "llb") return emba::BoundKind::llb;
  if (s == "dlb") return emba::BoundKind::dlb;
  if (s == "clb") return emba::BoundKind::clb;
  throw UsageError("unknown bound '" + s + "'");
}

const emba::Graph& find_graph(const emba::Dataset& ds, std::int64_t id) {
  for (const auto& g : ds.graphs)
    if (g.id == id) return g;
  throw UsageError("no graph with id " + std::to_string(id) + " in the dataset");
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(12);
  o << v;
  return o.str();
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

void emit(const Common& c, json j) {
  if (!c.json_out) return;
  j["schema_version"] = 1;
  std::cout << j.dump() << "\n";
}

void comment(const Common& c, const std::string& s) {
  if (!c.json_out) std::cout << "# " << s << "\n";
}

std::string cost_string(const emba::CostModel& m) {
  std::string s = fmt(m.vertex_indel) + "," + fmt(m.edge_indel) + "," +
                  fmt(m.vertex_relabel) + "," + fmt(m.edge_relabel);
  if (m.label_costs) s += " + label table (" +
                          std::to_string(m.label_costs->size()) + " symbols)";
  return s;
}

bool unit_costs(const emba::CostModel& m) {
  return m.uniform() && m.vertex_indel == 1.0 && m.edge_indel == 1.0 &&
         m.vertex_relabel == 1.0;
}

// --- stats ------------------------------------------------------------------

int run_stats(const Common& c) {
  auto ds = load_data(c);
  std::size_t nv = 0, ne = 0;
  double dsum = 0.0, dsq = 0.0;
  for (const auto& g : ds.graphs) {
    nv += g.n();
    ne += g.m();
    for (int32_t d : g.degrees()) {
      dsum += d;
      dsq += double(d) * d;
    }
  }
  const double gn = ds.graphs.empty() ? 1.0 : double(ds.graphs.size());
  const double vn = nv == 0 ? 1.0 : double(nv);
  const double mean_deg = dsum / vn;
  const double var = std::max(0.0, dsq / vn - mean_deg * mean_deg);
  if (c.json_out) {
    emit(c, {{"type", "stats"},
             {"dataset", c.dataset},
             {"graphs", ds.graphs.size()},
             {"avg_vertices", double(nv) / gn},
             {"avg_edges", double(ne) / gn},
             {"avg_degree", mean_deg},
             {"degree_stddev", std::sqrt(var)},
             {"labels", ds.label_count()}});
  } else {
    comment(c, "dataset " + c.dataset);
    std::cout << "graphs\tavg_vertices\tavg_edges\tavg_degree\tdegree_stddev\tlabels\n"
              << ds.graphs.size() << "\t" << fmt(double(nv) / gn) << "\t"
              << fmt(double(ne) / gn) << "\t" << fmt(mean_deg) << "\t"
              << fmt(std::sqrt(var)) << "\t" << ds.label_count() << "\n";
  }
  return 0;
}

// --- build ------------------------------------------------------------------

int run_build(const Common& c) {
  if (c.index.empty()) throw UsageError("build requires --index <output file>");
  auto ds = load_data(c);
  auto cm = make_costs(c, ds);
  auto t0 = std::chrono::steady_clock::now();
  auto idx = emba::build_index(ds.graphs, cm, parse_bound(c.bound), c.threads);
  double build_ms = elapsed_ms(t0);
  emba::save_index(idx, c.index);
  auto bytes = std::filesystem::file_size(c.index);
  if (c.json_out) {
    emit(c, {{"type", "build"},
             {"dataset", c.dataset},
             {"bound", emba::to_string(idx.bound)},
             {"costs", cost_string(cm)},
             {"graphs", idx.size()},
             {"parts", idx.trees.size()},
             {"build_ms", build_ms},
             {"index_bytes", bytes},
             {"index", c.index}});
  } else {
    comment(c, "dataset " + c.dataset);
    comment(c, "bound " + std::string(emba::to_string(idx.bound)));
    comment(c, "costs " + cost_string(cm));
    std::cout << "graphs\tparts\tbuild_ms\tindex_bytes\n"
              << idx.size() << "\t" << idx.trees.size() << "\t" << fmt(build_ms)
              << "\t" << bytes << "\n";
  }
  return 0;
}

// --- range / knn ------------------------------------------------------------

struct Prepared {
  emba::Dataset ds;
  emba::SearchIndex idx;
};

Prepared prepare(const Common& c) {
  Prepared p{load_data(c), {}};
  if (!c.index.empty()) {
    p.idx = emba::load_index(c.index);
  } else {
    auto cm = make_costs(c, p.ds);
    p.idx = emba::build_index(p.ds.graphs, cm, parse_bound(c.bound), c.threads);
  }
  return p;
}

void print_answers(const Common& c, const emba::Dataset& ds,
                   const emba::QueryResult& r) {
  if (c.json_out) {
    for (const auto& a : r.answers)
      emit(c, {{"type", "answer"},
               {"id", ds.graphs[static_cast<std::size_t>(a.id)].id},
               {"distance", a.distance},
               {"exact", a.exact}});
  } else {
    comment(c, "candidates " + std::to_string(r.candidates));
    comment(c, "exact_computations " + std::to_string(r.exact_computations));
    comment(c, "filter_ms " + fmt(r.filter_ms));
    comment(c, "verify_ms " + fmt(r.verify_ms));
    std::cout << "id\tdistance\texact\n";
    for (const auto& a : r.answers)
      std::cout << ds.graphs[static_cast<std::size_t>(a.id)].id << "\t"
                << fmt(a.distance) << "\t" << (a.exact ? 1 : 0) << "\n";
  }
}

int run_range(const Common& c, std::int64_t query_id, double radius,
              const std::string& verify, const std::string& extra) {
  auto p = prepare(c);
  const auto& q = find_graph(p.ds, query_id);
  emba::RangeOptions opts;
  opts.radius = radius;
  opts.verify = verify == "none" ? emba::Verify::none : emba::Verify::exact;
  opts.extra = extra == "branch" ? emba::ExtraFilter::branch
                                 : emba::ExtraFilter::none;
  opts.threads = c.threads;
  auto r = emba::range_query(p.idx, p.ds.graphs, q, opts);
  comment(c, "dataset " + c.dataset);
  comment(c, "bound " + std::string(emba::to_string(p.idx.bound)));
  comment(c, "costs " + cost_string(p.idx.cost_model));
  comment(c, "query " + std::to_string(query_id) + " radius " + fmt(radius) +
                 " verify " + verify + " extra " + extra);
  print_answers(c, p.ds, r);
  emit(c, {{"type", "range_summary"},
           {"dataset", c.dataset},
           {"bound", emba::to_string(p.idx.bound)},
           {"query", query_id},
           {"radius", radius},
           {"verify", verify},
           {"extra", extra},
           {"answers", r.answers.size()},
           {"candidates", r.candidates},
           {"exact_computations", r.exact_computations},
           {"filter_ms", r.filter_ms},
           {"verify_ms", r.verify_ms}});
  return 0;
}

int run_knn(const Common& c, std::int64_t query_id, int k) {
  auto p = prepare(c);
  const auto& q = find_graph(p.ds, query_id);
  auto r = emba::knn_query(p.idx, p.ds.graphs, q, k);
  comment(c, "dataset " + c.dataset);
  comment(c, "bound " + std::string(emba::to_string(p.idx.bound)));
  comment(c, "costs " + cost_string(p.idx.cost_model));
  comment(c, "query " + std::to_string(query_id) + " k " + std::to_string(k));
  print_answers(c, p.ds, r);
  emit(c, {{"type", "knn_summary"},
           {"dataset", c.dataset},
           {"bound", emba::to_string(p.idx.bound)},
           {"query", query_id},
           {"k", k},
           {"answers", r.answers.size()},
           {"candidates", r.candidates},
           {"exact_computations", r.exact_computations},
           {"filter_ms", r.filter_ms},
           {"verify_ms", r.verify_ms}});
  return 0;
}

// --- bounds -----------------------------------------------------------------

int run_bounds(const Common& c, const std::vector<std::int64_t>& pair,
               bool with_exact) {
  auto ds = load_data(c);
  auto cm = make_costs(c, ds);
  const auto& g = find_graph(ds, pair[0]);
  const auto& h = find_graph(ds, pair[1]);
  auto rep = emba::compute_bounds(g, h, cm);
  std::optional<double> exact;
  if (with_exact) exact = emba::exact_ged(g, h, cm).distance;
  auto cell = [](const std::optional<double>& v) {
    return v ? fmt(*v) : std::string("-");
  };
  if (c.json_out) {
    json j = {{"type", "bounds"},
              {"pair", pair},
              {"costs", cost_string(cm)},
              {"llb", rep.llb},
              {"dlb", rep.dlb},
              {"clb", rep.clb},
              {"branch_lb", rep.branch_lb}};
    if (rep.slf) j["slf"] = *rep.slf;
    if (rep.branch_ub) j["branch_ub"] = *rep.branch_ub;
    if (exact) j["exact"] = *exact;
    emit(c, j);
  } else {
    comment(c, "dataset " + c.dataset);
    comment(c, "costs " + cost_string(cm));
    comment(c, "pair " + std::to_string(pair[0]) + " " + std::to_string(pair[1]));
    std::cout << "slf\tllb\tdlb\tclb\tbranch_lb\tbranch_ub\texact\n"
              << cell(rep.slf) << "\t" << fmt(rep.llb) << "\t" << fmt(rep.dlb)
              << "\t" << fmt(rep.clb) << "\t" << fmt(rep.branch_lb) << "\t"
              << cell(rep.branch_ub) << "\t" << cell(exact) << "\n";
  }
  return 0;
}

// --- bench ------------------------------------------------------------------

int run_bench(const Common& c, int n_queries, const std::string& radii_arg,
              const std::string& verify) {
  std::vector<double> radii;
  for (const auto& tok : split(radii_arg, ','))
    radii.push_back(parse_double(tok, "--radii"));
  if (radii.empty()) throw UsageError("--radii expects at least one radius");
  if (n_queries <= 0) throw UsageError("--queries must be positive");

  auto ds = load_data(c);
  if (ds.graphs.empty()) throw UsageError("bench requires a nonempty dataset");
  auto cm = make_costs(c, ds);
  const bool use_slf = c.bound == "slf";
  if (use_slf && !unit_costs(cm))
    throw emba::CostModelError("the slf bound is only defined for unit costs");

  emba::SearchIndex idx;
  if (!use_slf) {
    if (!c.index.empty())
      idx = emba::load_index(c.index);
    else
      idx = emba::build_index(ds.graphs, cm, parse_bound(c.bound), c.threads);
  }

  std::mt19937_64 rng(c.seed);
  std::vector<std::size_t> probes(static_cast<std::size_t>(n_queries));
  for (auto& p : probes) p = static_cast<std::size_t>(rng() % ds.graphs.size());

  comment(c, "dataset " + c.dataset + " (" + std::to_string(ds.graphs.size()) +
                 " graphs)");
  comment(c, "bound " + c.bound + " verify " + verify);
  comment(c, "costs " + cost_string(cm));
  comment(c, "seed " + std::to_string(c.seed) + " queries " +
                 std::to_string(n_queries) + " threads " +
                 std::to_string(c.threads));
  if (!c.json_out)
    std::cout << "radius\tmean_candidates\tmean_filter_ms\tmean_verify_ms\t"
                 "mean_answers\n";

  for (double r : radii) {
    double cand = 0.0, fms = 0.0, vms = 0.0, ans = 0.0;
    for (std::size_t p : probes) {
      const auto& q = ds.graphs[p];
      if (use_slf) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<const emba::Graph*> cands;
        for (const auto& o : ds.graphs)
          if (emba::slf(q, o) <= r + emba::kCostEps) cands.push_back(&o);
        fms += elapsed_ms(t0);
        cand += double(cands.size());
        if (verify == "exact") {
          auto t1 = std::chrono::steady_clock::now();
          for (const auto* o : cands) {
            emba::ExactGedOptions ego;
            ego.threshold = r;
            if (!emba::exact_ged(q, *o, cm, ego).exceeded) ans += 1.0;
          }
          vms += elapsed_ms(t1);
        } else {
          ans += double(cands.size());
        }
      } else {
        emba::RangeOptions opts;
        opts.radius = r;
        opts.verify =
            verify == "none" ? emba::Verify::none : emba::Verify::exact;
        opts.threads = c.threads;
        auto res = emba::range_query(idx, ds.graphs, q, opts);
        cand += double(res.candidates);
        fms += res.filter_ms;
        vms += res.verify_ms;
        ans += double(res.answers.size());
      }
    }
    const double n = double(n_queries);
    if (c.json_out) {
      emit(c, {{"type", "bench_row"},
               {"bound", c.bound},
               {"verify", verify},
               {"seed", c.seed},
               {"radius", r},
               {"mean_candidates", cand / n},
               {"mean_filter_ms", fms / n},
               {"mean_verify_ms", vms / n},
               {"mean_answers", ans / n}});
    } else {
      std::cout << fmt(r) << "\t" << fmt(cand / n) << "\t" << fmt(fms / n)
                << "\t" << fmt(vms / n) << "\t" << fmt(ans / n) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  CLI::App app{"metric tree embeddings for graph edit distance filtering"};
  app.require_subcommand(1);
  Common c;

  auto* s_stats = app.add_subcommand("stats", "summarize a dataset");
  add_common(s_stats, c);

  auto* s_build = app.add_subcommand("build", "build and save a search index");
  add_common(s_build, c);

  std::int64_t query_id = 0;
  double radius = 0.0;
  std::string verify = "exact";
  std::string extra = "none";
  auto* s_range = app.add_subcommand("range", "range query around a graph");
  add_common(s_range, c);
  s_range->add_option("--query", query_id, "query graph id")->required();
  s_range->add_option("--radius", radius, "query radius")->required();
  s_range->add_option("--verify", verify, "candidate verification")->capture_default_str()
      ->check(CLI::IsMember({"none", "exact"}));
  s_range->add_option("--extra-filter", extra, "extra candidate filter")->capture_default_str()
      ->check(CLI::IsMember({"none", "branch"}));

  int k = 1;
  auto* s_knn = app.add_subcommand("knn", "k nearest neighbours of a graph");
  add_common(s_knn, c);
  s_knn->add_option("--query", query_id, "query graph id")->required();
  s_knn->add_option("--k", k, "number of neighbours")->required();

  std::vector<std::int64_t> pair;
  bool with_exact = false;
  auto* s_bounds = app.add_subcommand("bounds", "bounds for one graph pair");
  add_common(s_bounds, c);
  s_bounds->add_option("--pair", pair, "two graph ids")->expected(2)->required();
  s_bounds->add_flag("--exact", with_exact, "also compute the exact distance");

  int n_queries = 50;
  std::string radii = "1,2,3,4,5";
  auto* s_bench = app.add_subcommand("bench", "filter benchmark over a dataset");
  add_common(s_bench, c, {"slf", "llb", "dlb", "clb"});
  s_bench->add_option("--queries", n_queries, "number of sampled queries")->capture_default_str();
  s_bench->add_option("--radii", radii, "comma separated radii")->capture_default_str();
  s_bench->add_option("--verify", verify, "candidate verification")->capture_default_str()
      ->check(CLI::IsMember({"none", "exact"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (s_stats->parsed()) return run_stats(c);
    if (s_build->parsed()) return run_build(c);
    if (s_range->parsed()) return run_range(c, query_id, radius, verify, extra);
    if (s_knn->parsed()) return run_knn(c, query_id, k);
    if (s_bounds->parsed()) return run_bounds(c, pair, with_exact);
    if (s_bench->parsed()) return run_bench(c, n_queries, radii, verify);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const emba::CostModelError& e) {
    std::cerr << "cost model error: " << e.what() << "\n";
    return 4;
  } catch (const emba::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const emba::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const emba::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
