#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <rcising/io.hpp>
#include <rcising/rcising.hpp>

using namespace rcising;
using namespace rcising::experiments;
using io::Config;
using io::Csv;
using io::fmt_double;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Output {
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::string summary;
  json diagnostics = json::object();
};

struct Command {
  std::string name;
  std::string help;    // one-line purpose
  std::string schema;  // CSV columns, shown in --help
  std::vector<std::pair<std::string, std::string>> keys;  // config key, description
  std::map<std::string, std::string> defaults;
  std::function<Output(const Config&, unsigned threads)> run;
};

// ---------------------------------------------------------------- shared config plumbing

const std::vector<std::pair<std::string, std::string>> kSamplerKeys{
    {"seed", "RNG seed (u64)"},
    {"sweeps", "total sweeps including burn-in"},
    {"burn_in", "discarded sweeps"},
    {"thinning", "keep every k-th sweep"},
    {"visits_per_sweep", "worm sector visits per sweep; 0 = one per vertex"},
};
const std::map<std::string, std::string> kSamplerDefaults{
    {"seed", "0"}, {"sweeps", "1000"}, {"burn_in", "100"}, {"thinning", "1"}, {"visits_per_sweep", "0"}};

const std::vector<std::pair<std::string, std::string>> kLatticeKeys{
    {"d", "lattice dimension"},
    {"L", "torus side, or box radius when geometry = box"},
    {"geometry", "torus or box"},
    {"graph", "explicit graph 'n:u-v,u-v,...' instead of a lattice"},
};

SamplerConfig sampler_config(const Config& c) {
  SamplerConfig s;
  s.seed = c.get_u64("seed");
  s.sweeps = c.get_u64("sweeps");
  s.burn_in = c.get_u64("burn_in");
  s.thinning = c.get_u64("thinning");
  s.visits_per_sweep = c.get_u64("visits_per_sweep");
  return s;
}

Geometry parse_geometry(const Config& c) {
  const std::string g = c.get_or("geometry", "torus");
  if (g == "torus") return Geometry::Torus;
  if (g == "box") return Geometry::FreeBox;
  throw ConfigError("field 'geometry': expected torus or box, got '" + g + "'");
}

Graph build_graph(const Config& c) {
  if (c.has("graph")) return graphs::parse(c.get("graph"));
  return build_lattice(static_cast<int>(c.get_int("d")), static_cast<int>(c.get_int("L")), parse_geometry(c));
}

Vertex parse_vertex(const Graph& g, const std::string& text, const std::string& field) {
  if (!g.has_coordinates()) {
    const std::uint64_t v = io::parse_u64(text, field);
    if (v >= g.num_vertices()) throw ConfigError("field '" + field + "': vertex " + text + " is out of range");
    return static_cast<Vertex>(v);
  }
  const Coord x = io::parse_coord(text, field);
  if (static_cast<int>(x.size()) != g.dimension())
    throw ConfigError("field '" + field + "': expected " + std::to_string(g.dimension()) + " coordinates 'a;b;...'");
  try {
    return g.vertex_at(x);
  } catch (const ConfigError&) {
    throw ConfigError("field '" + field + "': " + text + " lies outside the lattice");
  }
}

std::vector<Vertex> parse_vertices(const Graph& g, const Config& c, const std::string& key) {
  std::vector<Vertex> out;
  for (const std::string& t : io::tokens(c.get(key))) out.push_back(parse_vertex(g, t, key));
  return out;
}

std::string vertex_text(const Graph& g, Vertex v) {
  return g.has_coordinates() ? io::coord_text(g.coord(v)) : std::to_string(v);
}

// Literature estimates of β_c for the nearest-neighbour model. Only d = 2 is exact.
std::optional<double> literature_beta_c(int d) {
  switch (d) {
    case 2: return 0.44068679350977151;
    case 3: return 0.22165463;
    case 4: return 0.14969475;
    case 5: return 0.11391498;
    default: return std::nullopt;
  }
}

struct BetaC {
  double value;
  std::string provenance;
};

std::optional<BetaC> beta_c_of(const Config& c, int d) {
  if (!c.has("beta_c")) return std::nullopt;
  if (c.get("beta_c") == "literature") {
    const auto v = literature_beta_c(d);
    if (!v) throw ConfigError("field 'beta_c': no literature value for d = " + std::to_string(d));
    return BetaC{*v, d == 2 ? "exact (d = 2)" : "external, unverified by this artifact"};
  }
  const double v = c.get_double("beta_c");
  if (!(v > 0) || !std::isfinite(v)) throw ConfigError("field 'beta_c': must be positive");
  return BetaC{v, "user supplied"};
}

BetaC require_beta_c(const Config& c, int d) {
  if (auto b = beta_c_of(c, d)) return *b;
  throw ConfigError("missing required field 'beta_c'");
}

// beta, or beta_factor times beta_c.
double resolve_beta(const Config& c, int d) {
  if (c.has("beta")) {
    const double b = c.get_double("beta");
    if (!(b >= 0) || !std::isfinite(b)) throw ConfigError("field 'beta': must be finite and nonnegative");
    return b;
  }
  if (c.has("beta_factor")) return c.get_double("beta_factor") * require_beta_c(c, d).value;
  throw ConfigError("missing required field 'beta'");
}

const std::vector<std::pair<std::string, std::string>> kBetaKeys{
    {"beta", "inverse temperature"},
    {"beta_factor", "beta as a multiple of beta_c (used when beta is absent)"},
    {"beta_c", "critical point: a number or 'literature'"},
};

std::vector<Graph> load_corpus(const Config& c, std::size_t max_v, std::size_t max_e) {
  const std::string corpus = c.get("corpus");
  if (corpus == "small")
    return graphs::connected_corpus(static_cast<std::size_t>(c.get_int_or("max_vertices", static_cast<int>(max_v))),
                                    static_cast<std::size_t>(c.get_int_or("max_edges", static_cast<int>(max_e))));
  std::vector<Graph> out;
  std::istringstream in(io::read_file(corpus));
  for (std::string line; std::getline(in, line);) {
    const std::string t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(graphs::parse(t));
  }
  if (out.empty()) throw ConfigError("field 'corpus': file has no graphs");
  return out;
}

std::string name_of(const Graph& g) {
  std::string s = g.name().empty() ? graphs::describe(g) : g.name();
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  return s;
}

std::string set_text(const VertexSet& s) { return s.empty() ? "none" : oracles::set_label(s); }

std::string bool_text(bool b) { return b ? "true" : "false"; }

json estimate_json(const EstimateResult& r) {
  return json{{"mean", r.mean},           {"std_error", r.std_error}, {"n_samples", r.n_samples},
              {"n_batches", r.n_batches}, {"tau_int", r.tau_int},     {"acceptance_rate", r.acceptance_rate},
              {"unreliable", r.unreliable}, {"undersampled", r.undersampled}};
}

// ---------------------------------------------------------------- oracle commands

Output run_verify_switching(const Config& c, unsigned) {
  const auto corpus = load_corpus(c, 5, 6);
  const auto betas = c.get_doubles("betas");
  Csv csv({"graph", "beta", "s1", "s2", "n_events", "max_abs_diff", "max_rel_diff"});
  double worst = 0;
  std::size_t checks = 0;
  for (const Graph& g : corpus) {
    const auto events = oracles::standard_switching_events(g);
    std::vector<VertexSet> sets{VertexSet{}};
    for (Vertex a = 0; a < g.num_vertices(); ++a)
      for (Vertex b = a + 1; b < g.num_vertices(); ++b) sets.push_back({a, b});
    for (double beta : betas)
      for (const auto& s1 : sets)
        for (const auto& s2 : sets) {
          double abs_max = 0, rel_max = 0;
          for (const auto& r : oracles::verify_switching(g, beta, s1, s2, events)) {
            abs_max = std::max(abs_max, r.abs_diff);
            rel_max = std::max(rel_max, r.abs_diff / std::max(1.0, std::abs(r.lhs)));
          }
          checks += events.size();
          worst = std::max(worst, rel_max);
          csv.row({name_of(g), fmt_double(beta), set_text(s1), set_text(s2),
                   std::to_string(events.size()), fmt_double(abs_max), fmt_double(rel_max)});
        }
  }
  Output out;
  out.files.push_back({"switching.csv", csv.str()});
  out.summary = fmt::format("switching identity: {} graphs, {} checks, max |lhs - rhs| / max(1, |lhs|) = {}\n",
                            corpus.size(), checks, fmt_double(worst));
  out.diagnostics = {{"graphs", corpus.size()}, {"checks", checks}, {"max_rel_diff", worst}};
  return out;
}

Output run_verify_coupling(const Config& c, unsigned) {
  const auto corpus = load_corpus(c, 5, 4);
  const auto betas = c.get_doubles("betas");
  Csv csv({"graph", "beta", "S", "tv_distance"});
  double worst = 0;
  for (const Graph& g : corpus) {
    std::vector<VertexSet> sets{VertexSet{}};
    for (Vertex a = 0; a < g.num_vertices(); ++a)
      for (Vertex b = a + 1; b < g.num_vertices(); ++b) sets.push_back({a, b});
    for (double beta : betas)
      for (const auto& S : sets) {
        const double tv = oracles::coupling_tv_distance(g, beta, S);
        worst = std::max(worst, tv);
        csv.row({name_of(g), fmt_double(beta), set_text(S), fmt_double(tv)});
      }
  }
  const Graph k2 = graphs::complete2();
  std::string spot;
  double spot_err = 0;
  for (double beta : betas) {
    const double p = oracles::sprinkled_trace_law(k2, beta, {})[1];
    spot_err = std::max(spot_err, std::abs(p - std::tanh(beta)));
    spot += fmt::format("  K2 beta={}: P(open) = {}, tanh(beta) = {}\n", fmt_double(beta), fmt_double(p),
                        fmt_double(std::tanh(beta)));
  }
  Output out;
  out.files.push_back({"coupling.csv", csv.str()});
  out.summary = fmt::format("coupling exactness: {} graphs, max TV distance = {}\n{}", corpus.size(),
                            fmt_double(worst), spot);
  out.diagnostics = {{"graphs", corpus.size()}, {"max_tv", worst}, {"k2_spot_error", spot_err}};
  return out;
}

Output run_verify_backbone(const Config& c, unsigned) {
  const auto corpus = load_corpus(c, 5, 6);
  const auto betas = c.get_doubles("betas");
  Csv csv({"graph", "beta", "x", "y", "rho_total", "two_point", "abs_diff", "max_chain_excess"});
  double worst = 0, worst_chain = -std::numeric_limits<double>::infinity();
  for (const Graph& g : corpus) {
    const std::size_t n = g.num_vertices();
    for (double beta : betas)
      for (Vertex x = 0; x < n; ++x)
        for (Vertex y = x + 1; y < n; ++y) {
          const auto bd = oracles::backbone_weights(g, beta, x, y);
          const double diff = std::abs(bd.rho_total - bd.two_point_spin);
          double chain = -std::numeric_limits<double>::infinity();
          for (Vertex u = 0; u < n; ++u)
            for (Vertex v = 0; v < n; ++v) {
              if (u == v) continue;
              const auto p = oracles::chain_rule_probe(g, beta, x, y, u, v);
              chain = std::max(chain, p.lhs - p.bound);
            }
          worst = std::max(worst, diff);
          worst_chain = std::max(worst_chain, chain);
          csv.row({name_of(g), fmt_double(beta), std::to_string(x), std::to_string(y), fmt_double(bd.rho_total),
                   fmt_double(bd.two_point_spin), fmt_double(diff), fmt_double(chain)});
        }
  }
  Output out;
  out.files.push_back({"backbone.csv", csv.str()});
  out.summary = fmt::format(
      "backbone decomposition: max |sum rho - <sx sy>| = {}\nchain rule: max (P[u then v] - bound) = {}\n",
      fmt_double(worst), fmt_double(worst_chain));
  out.diagnostics = {{"max_abs_diff", worst}, {"max_chain_excess", worst_chain}};
  return out;
}

Output run_verify_derivative(const Config& c, unsigned) {
  const Graph g = build_graph(c);
  const double h = c.get_double("fd_step");
  const bool with_current = g.geometry() == Geometry::Torus;
  Csv csv({"beta", "chi", "fd", "spin_form", "current_form", "fd_vs_spin", "fd_vs_current", "spin_vs_current"});
  double worst_fd = 0, worst_forms = 0;
  for (double beta : c.get_doubles("betas")) {
    const auto r = oracles::derivative_identity_probe(g, beta, h, with_current);
    const double a = std::abs(r.fd - r.spin_form);
    const double b = with_current ? std::abs(r.fd - r.current_form) : std::nan("");
    const double f = with_current ? std::abs(r.spin_form - r.current_form) : std::nan("");
    worst_fd = std::max({worst_fd, a, with_current ? b : 0.0});
    if (with_current) worst_forms = std::max(worst_forms, f);
    csv.row({fmt_double(beta), fmt_double(r.chi), fmt_double(r.fd), fmt_double(r.spin_form),
             fmt_double(r.current_form), fmt_double(a), fmt_double(b), fmt_double(f)});
  }
  Output out;
  out.files.push_back({"derivative.csv", csv.str()});
  out.summary = fmt::format("derivative identity on {}: max |fd - exact| = {}, max |spin - current| = {}\n",
                            name_of(g), fmt_double(worst_fd), fmt_double(worst_forms));
  out.diagnostics = {{"max_fd_diff", worst_fd}, {"max_form_diff", worst_forms}};
  return out;
}

// ---------------------------------------------------------------- samplers

VertexSet sources_of(const Graph& g, const Config& c) {
  if (!c.has("sources")) return {};
  return make_vertex_set(parse_vertices(g, c, "sources"));
}

Output run_sample_current(const Config& c, unsigned) {
  const Graph g = build_graph(c);
  const double beta = resolve_beta(c, g.has_coordinates() ? g.dimension() : 0);
  const VertexSet S = sources_of(g, c);
  const SamplerConfig cfg = sampler_config(c);
  cfg.validate();
  WormSampler w(g, beta, S, cfg.seed, 0, cfg.visits_per_sweep);
  Philox refine(cfg.seed, 1);
  w.skip(cfg.burn_in);
  std::vector<ParityState> states;
  for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
    if ((s - cfg.burn_in) % cfg.thinning) {
      w.skip(1);
      continue;
    }
    states.push_back(refine_parity(w.next(), beta, refine));
  }
  std::ostringstream spool;
  write_parity_stream(spool, states);
  Csv csv({"edge", "u", "v", "p_zero", "p_even", "p_odd"});
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    double z = 0, ev = 0, od = 0;
    for (const auto& p : states) {
      if (p[e] == Parity::Zero) z += 1;
      if (p[e] == Parity::EvenPositive) ev += 1;
      if (p[e] == Parity::Odd) od += 1;
    }
    const double n = static_cast<double>(states.size());
    csv.row({std::to_string(e), vertex_text(g, g.edge(e).u), vertex_text(g, g.edge(e).v), fmt_double(z / n),
             fmt_double(ev / n), fmt_double(od / n)});
  }
  Output out;
  out.files.push_back({"currents.txt", spool.str()});
  out.files.push_back({"marginals.csv", csv.str()});
  out.summary = fmt::format("sampled {} parity states on {} at beta = {} with {} sources; acceptance rate {}\n",
                            states.size(), name_of(g), fmt_double(beta), S.size(), fmt_double(w.acceptance_rate()));
  out.diagnostics = {{"samples", states.size()}, {"acceptance_rate", w.acceptance_rate()}};
  return out;
}

Output run_sample_fk(const Config& c, unsigned) {
  const Graph g = build_graph(c);
  const double beta = resolve_beta(c, g.has_coordinates() ? g.dimension() : 0);
  const VertexSet S = sources_of(g, c);
  const SamplerConfig cfg = sampler_config(c);
  cfg.validate();
  const std::string method = c.get("method");
  std::vector<BondConfig> samples;
  double acceptance = 1.0;
  auto collect = [&](auto& sampler) {
    sampler.skip(cfg.burn_in);
    for (std::uint64_t s = cfg.burn_in; s < cfg.sweeps; ++s) {
      if ((s - cfg.burn_in) % cfg.thinning) {
        sampler.skip(1);
        continue;
      }
      samples.push_back(sampler.next());
    }
    acceptance = sampler.acceptance_rate();
  };
  if (method == "coupling") {
    FkCouplingSampler s(g, beta, S, cfg.seed, cfg.visits_per_sweep);
    collect(s);
  } else if (method == "sw") {
    if (!S.empty()) throw ConfigError("field 'method': sw samples the unconditioned measure; drop 'sources'");
    SwendsenWang s(g, beta, cfg.seed);
    collect(s);
  } else {
    throw ConfigError("field 'method': expected coupling or sw, got '" + method + "'");
  }
  Csv csv({"edge", "u", "v", "p_open", "se"});
  double density = 0;
  bool unreliable = false;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    std::vector<double> x;
    x.reserve(samples.size());
    for (const auto& b : samples) x.push_back(b[e] ? 1.0 : 0.0);
    const EstimateResult r = batch_means(x);
    unreliable = unreliable || r.unreliable;
    density += r.mean;
    csv.row({std::to_string(e), vertex_text(g, g.edge(e).u), vertex_text(g, g.edge(e).v), fmt_double(r.mean),
             fmt_double(r.std_error)});
  }
  density /= static_cast<double>(std::max<std::size_t>(1, g.num_edges()));
  Output out;
  out.files.push_back({"fk_marginals.csv", csv.str()});
  out.summary = fmt::format("FK samples via {}: {} samples on {} at beta = {}, mean edge density {}{}\n", method,
                            samples.size(), name_of(g), fmt_double(beta), fmt_double(density),
                            unreliable ? " (fewer than 30 batches: errors unreliable)" : "");
  out.diagnostics = {{"samples", samples.size()}, {"acceptance_rate", acceptance}, {"unreliable", unreliable}};
  return out;
}

// ---------------------------------------------------------------- experiments

LocalEvent named_event(const Graph& g, const std::string& name) {
  if (name == "origin_edge") return edge_open_event(g, g.origin(), g.unit(0), "origin_edge");
  if (name == "always") return always_event();
  throw ConfigError("field 'event': expected origin_edge or always, got '" + name + "'");
}

Output run_iic_scan(const Config& c, unsigned threads) {
  const Graph g = build_graph(c);
  if (!g.has_coordinates()) throw ConfigError("field 'graph': iic-scan needs a lattice");
  const double beta = resolve_beta(c, g.dimension());
  const LocalEvent ev = named_event(g, c.get("event"));
  const int radius = static_cast<int>(c.get_int("support_radius"));
  const auto xs = parse_vertices(g, c, "xs");
  const IicScan scan = iic_stabilization_scan(g, beta, ev, radius, xs, sampler_config(c), c.get_bool_or("fk", false),
                                              threads);
  Csv csv({"x", "prob", "se", "n_samples"});
  json rows = json::array();
  bool unreliable = false;
  for (const auto& r : scan.rows) {
    csv.row({vertex_text(g, r.x), fmt_double(r.prob), fmt_double(r.se), std::to_string(r.n_samples)});
    rows.push_back(estimate_json(r.diagnostics));
    unreliable = unreliable || r.diagnostics.unreliable || r.diagnostics.undersampled;
  }
  Csv deltas({"x_i", "x_j", "delta", "se"});
  std::string text;
  for (const auto& d : scan.deltas) {
    deltas.row({vertex_text(g, scan.rows[d.i].x), vertex_text(g, scan.rows[d.j].x), fmt_double(d.delta),
                fmt_double(d.se)});
    text += fmt::format("  |P[0,{}] - P[0,{}]| = {} +- {}\n", vertex_text(g, scan.rows[d.i].x),
                        vertex_text(g, scan.rows[d.j].x), fmt_double(d.delta), fmt_double(d.se));
  }
  Output out;
  out.files.push_back({"iic_scan.csv", csv.str()});
  out.files.push_back({"iic_deltas.csv", deltas.str()});
  out.summary = fmt::format("IIC stabilization scan on {} at beta = {}, event {}{}\n{}", name_of(g), fmt_double(beta),
                            ev.name, unreliable ? " (sampler diagnostics flag under-sampling)" : "", text);
  out.diagnostics = {{"rows", rows}, {"undersampled", unreliable}};
  return out;
}

std::vector<double> beta_grid(const Config& c, double beta_c) {
  if (c.has("betas")) return c.get_doubles("betas");
  std::vector<double> out;
  for (double f : c.get_doubles("beta_factors")) out.push_back(f * beta_c);
  return out;
}

Csv chi_csv(const ScanResult& r) {
  Csv csv({"beta", "chi", "chi_se", "scaled"});
  for (const auto& row : r.rows)
    csv.row({fmt_double(row.beta), fmt_double(row.chi), fmt_double(row.chi_se), fmt_double(row.scaled(r.beta_c))});
  return csv;
}

std::string scan_summary(const ScanResult& r) {
  std::string s = fmt::format("susceptibility scan, d = {}, beta_c = {}\n", r.d, fmt_double(r.beta_c));
  for (const auto& row : r.rows)
    s += fmt::format("  beta = {}: chi = {} +- {}, (1 - beta/beta_c) chi = {}{}{}\n", fmt_double(row.beta),
                     fmt_double(row.chi), fmt_double(row.chi_se), fmt_double(row.scaled(r.beta_c)),
                     row.converged ? "" : " [not converged: excluded from fit]",
                     row.finite_size_warning ? " [correlation length > L/4]" : "");
  s += fmt::format("  fit over {} rows: A = {} +- {} (95% CI [{}, {}])\n", r.rows_used, fmt_double(r.A_hat),
                   fmt_double(r.A_se), fmt_double(r.ci_low()), fmt_double(r.ci_high()));
  s += fmt::format("  lower bracket (2 d beta_c)^-1 = {} <= scaled + 3 SE on every row: {}\n",
                   fmt_double(r.lower_bracket), bool_text(r.lower_bracket_ok));
  return s;
}

json scan_json(const ScanResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j = estimate_json(row.diagnostics);
    j["xi"] = row.xi;
    j["finite_size_warning"] = row.finite_size_warning;
    rows.push_back(j);
  }
  return json{{"A_hat", r.A_hat},
              {"A_se", r.A_se},
              {"rows_used", r.rows_used},
              {"lower_bracket", r.lower_bracket},
              {"lower_bracket_ok", r.lower_bracket_ok},
              {"rows", rows}};
}

Output run_chi_scan(const Config& c, unsigned threads) {
  const int d = static_cast<int>(c.get_int("d"));
  const BetaC bc = require_beta_c(c, d);
  const auto grid = beta_grid(c, bc.value);
  const ScanResult r = chi_scan_and_fit(d, static_cast<int>(c.get_int("L")), grid, bc.value, sampler_config(c), threads);
  Output out;
  out.files.push_back({"chi_scan.csv", chi_csv(r).str()});
  out.summary = scan_summary(r) + "  beta_c provenance: " + bc.provenance + "\n";
  out.diagnostics = scan_json(r);
  out.diagnostics["beta_c_provenance"] = bc.provenance;
  return out;
}

Csv avoidance_csv(const AvoidanceResult& r) {
  Csv csv({"k", "p_avoid", "se", "gap", "gap_se"});
  for (std::size_t i = 0; i < r.ks.size(); ++i)
    csv.row({std::to_string(r.ks[i]), fmt_double(r.a_k[i].mean), fmt_double(r.a_k[i].std_error),
             fmt_double(r.gap[i].mean), fmt_double(r.gap[i].std_error)});
  csv.row({"full", fmt_double(r.full.mean), fmt_double(r.full.std_error), "0", "0"});
  return csv;
}

AvoidanceResult avoidance_from_config(const Config& c, const Graph& g, double beta) {
  const Vertex x = parse_vertex(g, c.get("x"), "x");
  const Vertex y = parse_vertex(g, c.get("y"), "y");
  const std::vector<int> ks = c.has("ks") ? c.get_ints("ks") : std::vector<int>{};
  if (g.has_coordinates()) return avoidance_estimate(g, beta, x, y, ks, sampler_config(c));
  return avoidance_estimate(g, beta, parse_vertex(g, c.get("o"), "o"), parse_vertex(g, c.get("e"), "e"), x, y, ks,
                            sampler_config(c));
}

Output run_avoidance(const Config& c, unsigned) {
  const Graph g = build_graph(c);
  const double beta = resolve_beta(c, g.has_coordinates() ? g.dimension() : 0);
  const AvoidanceResult r = avoidance_from_config(c, g, beta);
  std::string text;
  for (std::size_t i = 0; i < r.ks.size(); ++i)
    text += fmt::format("  P[A_{}] = {} +- {}, gap to full = {} +- {}\n", r.ks[i], fmt_double(r.a_k[i].mean),
                        fmt_double(r.a_k[i].std_error), fmt_double(r.gap[i].mean), fmt_double(r.gap[i].std_error));
  Output out;
  out.files.push_back({"avoidance.csv", avoidance_csv(r).str()});
  out.summary = fmt::format("avoidance on {} at beta = {}: full = {} +- {} over {} samples{}\n{}", name_of(g),
                            fmt_double(beta), fmt_double(r.full.mean), fmt_double(r.full.std_error), r.n_samples,
                            r.undersampled ? " (sampler diagnostics flag under-sampling)" : "", text);
  out.diagnostics = {{"full", estimate_json(r.full)}, {"acceptance_rate", r.acceptance_rate},
                     {"undersampled", r.undersampled}};
  return out;
}

// Two-point table from 'table' (CSV path) or from a worm run on the configured torus.
TwoPointTable table_from_config(const Config& c, Output& out) {
  if (c.has("table")) return io::parse_table_csv(io::read_file(c.get("table")), static_cast<int>(c.get_int_or("table_period", 0)));
  const int d = static_cast<int>(c.get_int("d"));
  if (parse_geometry(c) != Geometry::Torus) throw ConfigError("field 'geometry': two-point runs need a torus");
  const Graph torus = build_lattice(d, static_cast<int>(c.get_int("L")), Geometry::Torus);
  SamplerConfig cfg = sampler_config(c);
  cfg.beta = resolve_beta(c, d);
  TwoPointRun run = worm_two_point(torus, cfg);
  out.files.push_back({"two_point.csv", io::table_csv(run.table)});
  out.diagnostics["two_point"] = estimate_json(run.diagnostics);
  out.diagnostics["chi"] = run.chi;
  out.diagnostics["chi_se"] = run.chi_se;
  out.diagnostics["xi"] = run.xi;
  out.summary += fmt::format("two-point run on {}: chi = {} +- {}, xi = {}{}\n", torus.name(), fmt_double(run.chi),
                             fmt_double(run.chi_se), fmt_double(run.xi),
                             run.finite_size_warning ? " [correlation length > L/4]" : "");
  return std::move(run.table);
}

Csv bubbles_csv(const std::vector<BubbleRow>& rows) {
  Csv csv({"radius", "B_partial", "B_open_partial"});
  for (const auto& r : rows)
    csv.row({std::to_string(r.radius), fmt_double(r.bubble), fmt_double(r.open_bubble)});
  return csv;
}

Output run_bubbles(const Config& c, unsigned) {
  Output out;
  const TwoPointTable t = table_from_config(c, out);
  const auto rows = bubble_sums(t, static_cast<int>(c.get_int_or("radius", -1)));
  out.files.push_back({"bubbles.csv", bubbles_csv(rows).str()});
  const auto& last = rows.back();
  out.summary += fmt::format("bubble diagrams up to radius {}: B = {} +- {}, B_open = {} +- {}\n", last.radius,
                             fmt_double(last.bubble), fmt_double(last.bubble_se), fmt_double(last.open_bubble),
                             fmt_double(last.open_bubble_se));
  out.diagnostics["B"] = last.bubble;
  out.diagnostics["B_open"] = last.open_bubble;
  return out;
}

std::vector<std::pair<int, int>> parse_scales(const Config& c) {
  std::vector<std::pair<int, int>> out;
  for (const std::string& t : io::tokens(c.get("scales"))) {
    const auto parts = io::split(t, ':');
    if (parts.size() != 2) throw ConfigError("field 'scales': expected n:N pairs, got '" + t + "'");
    out.push_back({static_cast<int>(io::parse_int(parts[0], "scales")), static_cast<int>(io::parse_int(parts[1], "scales"))});
  }
  return out;
}

Output run_mixing_probe(const Config& c, unsigned threads) {
  const Graph g = build_graph(c);
  if (!g.has_coordinates()) throw ConfigError("field 'graph': mixing-probe needs a lattice");
  const double beta = resolve_beta(c, g.dimension());
  MixingSources src;
  const bool any = c.has("x") || c.has("y") || c.has("x_alt") || c.has("y_alt");
  if (any) {
    src.x = parse_vertex(g, c.get("x"), "x");
    src.y = parse_vertex(g, c.get("y"), "y");
    src.x_alt = parse_vertex(g, c.get("x_alt"), "x_alt");
    src.y_alt = parse_vertex(g, c.get("y_alt"), "y_alt");
  }
  const auto rows = mixing_scan(g, beta, parse_scales(c), src, sampler_config(c), c.get_bool_or("fk", false), threads);
  Csv csv({"n", "N", "p_e", "p_f", "p_ef", "cov_delta", "cov_se", "y_swap_delta", "y_swap_se", "x_swap_delta",
           "x_swap_se", "n_samples"});
  std::string text;
  bool unreliable = false;
  for (const auto& r : rows) {
    csv.row({std::to_string(r.n), std::to_string(r.N), fmt_double(r.p_e), fmt_double(r.p_f), fmt_double(r.p_ef),
             fmt_double(r.covariance_delta), fmt_double(r.covariance_se), fmt_double(r.y_swap_delta),
             fmt_double(r.y_swap_se), fmt_double(r.x_swap_delta), fmt_double(r.x_swap_se),
             std::to_string(r.n_samples)});
    text += fmt::format("  n = {}, N = {}: cov {} +- {}, y-swap {} +- {}, x-swap {} +- {}\n", r.n, r.N,
                        fmt_double(r.covariance_delta), fmt_double(r.covariance_se), fmt_double(r.y_swap_delta),
                        fmt_double(r.y_swap_se), fmt_double(r.x_swap_delta), fmt_double(r.x_swap_se));
    unreliable = unreliable || r.unreliable;
  }
  Output out;
  out.files.push_back({"mixing.csv", csv.str()});
  out.summary = fmt::format("mixing probe on {} at beta = {} ({}){}; trend report only\n{}", name_of(g),
                            fmt_double(beta), any ? "sourced" : "sourceless",
                            unreliable ? " (fewer than 30 batches somewhere)" : "", text);
  out.diagnostics = {{"unreliable", unreliable}};
  return out;
}

Output run_regular_scales(const Config& c, unsigned) {
  Output out;
  const TwoPointTable t = table_from_config(c, out);
  const auto rows = regular_scale_detect(t, c.get_double("c"), c.get_double("C"));
  Csv csv({"k", "n", "evaluated", "P1", "P2", "P3", "P4", "p4_vacuous", "p1_ratio", "p2_constant", "p3_growth",
           "p4_ratio", "regular", "reason"});
  for (const auto& r : rows) {
    const auto& m = r.measure;
    std::string reason = r.regular() ? "" : r.failed();
    for (char& ch : reason)
      if (ch == ',') ch = ';';
    csv.row({std::to_string(m.k), std::to_string(m.n), bool_text(m.evaluated), bool_text(r.p1), bool_text(r.p2),
             bool_text(r.p3), bool_text(r.p4), bool_text(r.p4_vacuous), fmt_double(m.p1_ratio),
             fmt_double(m.p2_constant), fmt_double(m.p3_growth), fmt_double(r.p4_ratio), bool_text(r.regular()),
             reason});
  }
  const auto ks = regular_scales(rows);
  std::string list;
  for (int k : ks) list += (list.empty() ? "" : " ") + std::to_string(k);
  out.files.push_back({"regular_scales.csv", csv.str()});
  out.summary += fmt::format("regular scales (c = {}, C = {}): [{}]\n", fmt_double(c.get_double("c")),
                             fmt_double(c.get_double("C")), list);
  out.diagnostics["regular"] = ks;
  return out;
}

std::string report_text(const ConstantReport& r, bool undersampled) {
  return fmt::format(
      "constant relation report (non-gating)\n"
      "  1/A            = {} +- {}\n"
      "  2 d beta_c P   = {} +- {}\n"
      "  difference     = {} +- {}\n"
      "  lower bound on P = 1/(1 + 2 d beta_c B_open) = {} +- {}\n"
      "  P below the bound by more than 3 sigma: {}{}\n",
      fmt_double(r.inverse_amplitude), fmt_double(r.inverse_amplitude_se), fmt_double(r.normalised_probability),
      fmt_double(r.normalised_probability_se), fmt_double(r.gap), fmt_double(r.gap_se), fmt_double(r.lower_bound),
      fmt_double(r.lower_bound_se), bool_text(r.lower_bound_violated),
      undersampled ? "\n  sampler diagnostics flag under-sampling: the check is not gating" : "");
}

Csv report_csv(const ConstantReport& r, bool undersampled) {
  Csv csv({"inverse_A", "inverse_A_se", "normalised_P", "normalised_P_se", "lower_bound", "lower_bound_se", "gap",
           "gap_se", "violated", "undersampled"});
  csv.row({fmt_double(r.inverse_amplitude), fmt_double(r.inverse_amplitude_se), fmt_double(r.normalised_probability),
           fmt_double(r.normalised_probability_se), fmt_double(r.lower_bound), fmt_double(r.lower_bound_se),
           fmt_double(r.gap), fmt_double(r.gap_se), bool_text(r.lower_bound_violated), bool_text(undersampled)});
  return csv;
}

Output run_report_constant(const Config& c, unsigned threads) {
  const int d = static_cast<int>(c.get_int("d"));
  const BetaC bc = require_beta_c(c, d);
  Output out;
  bool undersampled = false;
  double A, A_se, P, P_se, B, B_se;
  if (!c.get_bool_or("pipeline", false)) {
    A = c.get_double("A_hat");
    A_se = c.get_double_or("A_se", 0);
    P = c.get_double("p_hat");
    P_se = c.get_double_or("p_se", 0);
    B = c.get_double("b_open");
    B_se = c.get_double_or("b_open_se", 0);
  } else {
    const int L = static_cast<int>(c.get_int("L"));
    const SamplerConfig base = sampler_config(c);
    const ScanResult scan = chi_scan_and_fit(d, L, beta_grid(c, bc.value), bc.value, base, threads);
    out.files.push_back({"chi_scan.csv", chi_csv(scan).str()});
    out.summary += scan_summary(scan);
    out.diagnostics["scan"] = scan_json(scan);
    A = scan.A_hat;
    A_se = scan.A_se;
    undersampled = undersampled || scan.rows_used < scan.rows.size();

    const Graph torus = build_lattice(d, L, Geometry::Torus);
    SamplerConfig tp = base;
    tp.beta = bc.value;
    tp.seed = derive_seed(base.seed, 1000);
    const TwoPointRun run = worm_two_point(torus, tp);
    const auto bubbles = bubble_sums(run.table);
    out.files.push_back({"two_point.csv", io::table_csv(run.table)});
    out.files.push_back({"bubbles.csv", bubbles_csv(bubbles).str()});
    B = bubbles.back().open_bubble;
    B_se = bubbles.back().open_bubble_se;
    undersampled = undersampled || run.diagnostics.unreliable || run.diagnostics.undersampled;
    out.summary += fmt::format("two-point run at beta_c: chi = {} +- {}; B_open(R = {}) = {} +- {}\n",
                               fmt_double(run.chi), fmt_double(run.chi_se), bubbles.back().radius, fmt_double(B),
                               fmt_double(B_se));

    SamplerConfig av = base;
    av.seed = derive_seed(base.seed, 1001);
    const AvoidanceResult ar = avoidance_estimate(torus, bc.value, parse_vertex(torus, c.get("x"), "x"),
                                                  parse_vertex(torus, c.get("y"), "y"), {}, av);
    out.files.push_back({"avoidance.csv", avoidance_csv(ar).str()});
    P = ar.full.mean;
    P_se = ar.full.std_error;
    undersampled = undersampled || ar.undersampled;
    out.summary += fmt::format("avoidance at beta_c within the torus: P = {} +- {}\n", fmt_double(P), fmt_double(P_se));
  }
  const ConstantReport r = constant_relation_report(d, bc.value, A, A_se, P, P_se, B, B_se);
  out.files.push_back({"report_constant.csv", report_csv(r, undersampled).str()});
  out.summary += report_text(r, undersampled) + "  beta_c provenance: " + bc.provenance + "\n";
  out.diagnostics["violated"] = r.lower_bound_violated;
  out.diagnostics["undersampled"] = undersampled;
  out.diagnostics["beta_c_provenance"] = bc.provenance;
  return out;
}

// ---------------------------------------------------------------- command table

std::vector<std::pair<std::string, std::string>> concat(
    std::initializer_list<std::vector<std::pair<std::string, std::string>>> parts) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::map<std::string, std::string> with_sampler(std::map<std::string, std::string> m) {
  for (const auto& [k, v] : kSamplerDefaults) m.emplace(k, v);
  return m;
}

const std::vector<std::pair<std::string, std::string>> kCorpusKeys{
    {"corpus", "'small' (all connected graphs up to the size limits) or a file of 'n:u-v,...' lines"},
    {"max_vertices", "vertex limit for the small corpus"},
    {"max_edges", "edge limit for the small corpus"},
    {"betas", "comma-separated inverse temperatures"},
};

const std::vector<std::pair<std::string, std::string>> kTableKeys{
    {"table", "two-point table CSV (x,value,se); when absent, a worm run on the torus d, L at beta"},
    {"table_period", "torus side of the loaded table; 0 for none"},
};

std::vector<Command> commands() {
  return {
      {"verify-switching",
       "Exact check of the switching lemma on a graph corpus: sums over (n1, n2) with sources (S1, S2) against "
       "sums with sources (S1 xor S2, empty) restricted to F_S2, for F = 1, pair connections and F_S' indicators.",
       "switching.csv: graph,beta,s1,s2,n_events,max_abs_diff,max_rel_diff",
       kCorpusKeys,
       {{"corpus", "small"}, {"betas", "0.25,0.5,1.0"}},
       run_verify_switching},
      {"verify-coupling",
       "Exact total-variation distance between the sprinkled trace of a current with sources S and FK-Ising "
       "conditioned on F_S; spot value P(open) = tanh(beta) on K2.",
       "coupling.csv: graph,beta,S,tv_distance",
       kCorpusKeys,
       {{"corpus", "small"}, {"max_edges", "4"}, {"betas", "0.25,0.5,1.0"}},
       run_verify_coupling},
      {"verify-backbone",
       "Exact backbone decomposition (sum over backbones equals the two-point function) and the backbone chain "
       "rule bound on a graph corpus.",
       "backbone.csv: graph,beta,x,y,rho_total,two_point,abs_diff,max_chain_excess",
       kCorpusKeys,
       {{"corpus", "small"}, {"max_vertices", "4"}, {"max_edges", "5"}, {"betas", "0.25,0.5,1.0"}},
       run_verify_backbone},
      {"verify-derivative",
       "Derivative identity for the inverse susceptibility: central difference against the spin covariance form "
       "and, on tori, the two-current avoidance form.",
       "derivative.csv: beta,chi,fd,spin_form,current_form,fd_vs_spin,fd_vs_current,spin_vs_current",
       concat({kLatticeKeys, {{"betas", "comma-separated inverse temperatures"}, {"fd_step", "finite-difference step"}}}),
       {{"d", "1"}, {"L", "4"}, {"geometry", "torus"}, {"betas", "0.3,0.5"}, {"fd_step", "1e-4"}},
       run_verify_derivative},
      {"sample-current",
       "Worm sampler for random-current parity states with the given sources; even edges refined to zero or "
       "even-positive.",
       "currents.txt: one parity string per sample ('0', 'e', 'o' per edge); marginals.csv: edge,u,v,p_zero,p_even,p_odd",
       concat({kLatticeKeys, kBetaKeys, {{"sources", "whitespace-separated vertices (coordinates 'a;b' on lattices)"}},
               kSamplerKeys}),
       with_sampler({}),
       run_sample_current},
      {"sample-fk",
       "FK-Ising samples: the sprinkling coupling (conditioned on F_S when sources are given) or Swendsen-Wang.",
       "fk_marginals.csv: edge,u,v,p_open,se",
       concat({kLatticeKeys, kBetaKeys,
               {{"sources", "whitespace-separated vertices"}, {"method", "coupling or sw"}}, kSamplerKeys}),
       with_sampler({{"method", "coupling"}}),
       run_sample_fk},
      {"iic-scan",
       "Incipient-infinite-cluster stabilization: P^{0x}[event] for several far sources x and pairwise deltas.",
       "iic_scan.csv: x,prob,se,n_samples; iic_deltas.csv: x_i,x_j,delta,se",
       concat({kLatticeKeys, kBetaKeys,
               {{"event", "origin_edge or always"},
                {"support_radius", "sup-norm radius of the event support"},
                {"xs", "whitespace-separated source coordinates 'a;b;c'"},
                {"fk", "true: FK-Ising conditioned on 0 <-> x instead of the current trace"}},
               kSamplerKeys}),
       with_sampler({{"event", "origin_edge"}, {"support_radius", "1"}, {"fk", "false"}}),
       run_iic_scan},
      {"chi-scan",
       "Susceptibility scan below beta_c on a torus with a fit of 1/chi against (1 - beta/beta_c) through the "
       "origin; reports A and the lower bracket (2 d beta_c)^-1.",
       "chi_scan.csv: beta,chi,chi_se,scaled  (scaled = (1 - beta/beta_c) * chi)",
       concat({{{"d", "lattice dimension"}, {"L", "torus side"}},
               {{"beta_c", "critical point: a number or 'literature' (required)"},
                {"betas", "comma-separated grid"},
                {"beta_factors", "grid as multiples of beta_c (used when betas is absent)"}},
               kSamplerKeys}),
       with_sampler({}),
       run_chi_scan},
      {"avoidance",
       "Two independent currents with sources {0, x} and {e1, y}: probability that 0 and e1 are not connected in "
       "the trace of the sum, within Lambda_k for each k and within the whole graph.",
       "avoidance.csv: k,p_avoid,se,gap,gap_se  (last row k = full; gap = P[A_k] - P[full])",
       concat({kLatticeKeys, kBetaKeys,
               {{"x", "source paired with 0"},
                {"y", "source paired with e1"},
                {"ks", "comma-separated box radii k <= radius/2"},
                {"o", "base vertex (explicit graphs)"},
                {"e", "second base vertex (explicit graphs)"}},
               kSamplerKeys}),
       with_sampler({}),
       run_avoidance},
      {"bubbles",
       "Partial bubble diagram B(r) = sum G(x)^2 and open bubble sum G(x) G(x - e1) over Lambda_r.",
       "bubbles.csv: radius,B_partial,B_open_partial; two_point.csv: x,value,se when sampled",
       concat({kTableKeys, {{"radius", "largest radius; default the table radius"}}, kLatticeKeys, kBetaKeys,
               kSamplerKeys}),
       with_sampler({}),
       run_bubbles},
      {"mixing-probe",
       "Mixing of currents: |P[E and F] - P[E] P[F]| and source-swap deltas for E = {0 joined to the boundary of "
       "Lambda_n} and F = {edge ((N+1) e1, (N+2) e1) open}; trend report only.",
       "mixing.csv: n,N,p_e,p_f,p_ef,cov_delta,cov_se,y_swap_delta,y_swap_se,x_swap_delta,x_swap_se,n_samples",
       concat({kLatticeKeys, kBetaKeys,
               {{"scales", "whitespace-separated n:N pairs"},
                {"x", "source near the origin"},
                {"y", "far source"},
                {"x_alt", "replacement for x"},
                {"y_alt", "replacement for y"},
                {"fk", "true: read events on the FK coupling"}},
               kSamplerKeys}),
       with_sampler({{"fk", "false"}}),
       run_mixing_probe},
      {"regular-scales",
       "Regular-scale detector on dyadic annuli Ann(n/2, 8n): comparability (P1), Lipschitz bound (P2), growth of "
       "partial susceptibilities (P3) and decay beyond Lambda_{Cn} (P4).",
       "regular_scales.csv: k,n,evaluated,P1,P2,P3,P4,p4_vacuous,p1_ratio,p2_constant,p3_growth,p4_ratio,regular,reason",
       concat({kTableKeys, {{"c", "growth constant of (P3)"}, {"C", "constant of (P1), (P2), (P4)"}}, kLatticeKeys,
               kBetaKeys, kSamplerKeys}),
       with_sampler({}),
       run_regular_scales},
      {"report-constant",
       "Consistency report between 1/A and 2 d beta_c P[avoidance], with the open-bubble lower bound on P. "
       "Either from given estimates or, with pipeline = true, from a scan, a two-point run and an avoidance run "
       "on the torus.",
       "report_constant.csv: inverse_A,inverse_A_se,normalised_P,normalised_P_se,lower_bound,lower_bound_se,gap,"
       "gap_se,violated,undersampled",
       concat({{{"d", "lattice dimension"},
                {"beta_c", "critical point: a number or 'literature' (required)"},
                {"A_hat", "fitted amplitude"},
                {"A_se", "its standard error"},
                {"p_hat", "avoidance probability"},
                {"p_se", "its standard error"},
                {"b_open", "open bubble sum"},
                {"b_open_se", "its standard error"},
                {"pipeline", "true: estimate the inputs on the torus d, L"},
                {"L", "torus side (pipeline)"},
                {"beta_factors", "scan grid as multiples of beta_c (pipeline)"},
                {"betas", "scan grid (pipeline)"},
                {"x", "avoidance source paired with 0 (pipeline)"},
                {"y", "avoidance source paired with e1 (pipeline)"}},
               kSamplerKeys}),
       with_sampler({{"pipeline", "false"}}),
       run_report_constant},
  };
}

std::string help_text(const Command& cmd) {
  std::string s = cmd.help + "\n\nOutput: " + cmd.schema + ", manifest.json, summary.txt\n\nConfig keys:\n";
  for (const auto& [k, d] : cmd.keys) {
    const auto it = cmd.defaults.find(k);
    s += fmt::format("  {:<18} {}{}\n", k, d, it == cmd.defaults.end() ? "" : " [default " + it->second + "]");
  }
  return s;
}

int execute(const Command& cmd, Config cfg, const std::string& out_dir, unsigned threads) {
  for (const auto& [k, v] : cmd.defaults)
    if (!cfg.has(k)) cfg.set(k, v);
  std::set<std::string> known;
  for (const auto& [k, d] : cmd.keys) known.insert(k);
  cfg.check_known(known);

  const auto start = std::chrono::steady_clock::now();
  Output out = cmd.run(cfg, resolve_threads(threads));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir(out_dir);
  json files = json::array();
  for (const auto& [name, content] : out.files) {
    io::write_file(dir / name, content);
    files.push_back({{"file", name}, {"bytes", content.size()}});
  }
  const std::string summary = cmd.name + "\n" + out.summary;
  io::write_file(dir / "summary.txt", summary);

  json config = json::object();
  for (const auto& [k, v] : cfg.values()) config[k] = v;
  json manifest{{"tool", "rcising"},
                {"version", kVersion},
                {"command", cmd.name},
                {"config", config},
                {"seed", cfg.has("seed") ? cfg.get("seed") : "n/a"},
                {"threads", resolve_threads(threads)},
                {"outputs", files},
                {"diagnostics", out.diagnostics},
                {"wall_time_seconds", wall}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rcising: random-current representation of the Ising model. Exact identities on small graphs and "
               "Monte Carlo experiments on lattices.\nExit codes: 0 success, 2 configuration error, 3 oracle size "
               "limit exceeded, 1 other failure."};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const auto cmds = commands();
  struct Cli {
    std::string config, out = "rcising-out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::map<std::string, std::string> overrides;
  };
  std::vector<Cli> state(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    sub->footer(help_text(cmds[i]));
    sub->add_option("--config", state[i].config, "key = value config file, or a manifest.json to rerun");
    sub->add_option("--seed", state[i].seed, "RNG seed; overrides the config");
    sub->add_option("--out", state[i].out, "output directory")->capture_default_str();
    sub->add_option("--threads", state[i].threads, "worker threads (0 = auto); results do not depend on it");
    for (const auto& [k, d] : cmds[i].keys) {
      if (k == "seed") continue;
      sub->add_option_function<std::string>(
          "--" + k, [&st = state[i], key = k](const std::string& v) { st.overrides[key] = v; }, d);
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      Config cfg = state[i].config.empty() ? Config{} : Config::from_file(state[i].config);
      for (const auto& [k, v] : state[i].overrides) cfg.set(k, v);
      if (state[i].seed) cfg.set("seed", std::to_string(*state[i].seed));
      return execute(cmds[i], std::move(cfg), state[i].out, state[i].threads);
    } catch (const OracleSizeError& e) {
      std::cerr << "error: oracle size limit: " << e.what() << "\n";
      return 3;
    } catch (const ConfigError& e) {
      std::cerr << "error: invalid configuration: " << e.what() << "\n";
      return 2;
    } catch (const ZeroMassError& e) {
      std::cerr << "error: invalid configuration: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
