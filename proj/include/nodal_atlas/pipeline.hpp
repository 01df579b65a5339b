#pragma once

// Configuration-driven run: surface -> spectrum -> traces -> nodal graphs ->
// asymptotic statistics, written as a self-describing report bundle, plus the
// bundle verifier.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodal_atlas/asymptotics.hpp"
#include "nodal_atlas/error.hpp"
#include "nodal_atlas/generators.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/io.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/nodal.hpp"
#include "nodal_atlas/parallel.hpp"
#include "nodal_atlas/restriction.hpp"
#include "nodal_atlas/spectral.hpp"

namespace nodal_atlas {

inline constexpr int kSchemaVersion = 1;

struct Observable {
  std::string kind = "constant";  // constant | cosine | samples
  int harmonic = 0;
  std::vector<double> values;

  std::string label() const {
    if (kind == "cosine") return "cosine" + std::to_string(harmonic);
    return kind;
  }
};

struct PipelineConfig {
  // Mesh source: a generator, or files.
  std::string generator;  // "torus", "genus2" or empty
  int torus_n = 16;
  double torus_l1 = 2.0 * std::numbers::pi, torus_l2 = 2.0 * std::numbers::pi;
  int genus2_subdiv = 0;
  fs::path off_file, lengths_file, involution_file;

  int k = 30;
  double tolerance = 1e-9;
  MassKind mass = MassKind::lumped;
  std::uint64_t seed = 1;

  int fixed_component = 0;
  std::vector<int> curve_vertices;  // explicit loop; overrides fixed_component

  std::vector<Observable> observables{Observable{}};
  bool nodal = true, graph = true, kuznecov = false, qer = false, growth = false;
  std::vector<QerKind> qer_kinds{QerKind::dirichlet};
  bool dump_eigenpairs = true, dump_traces = true, dump_nodal_sets = true;
  fs::path output = "out";

  /// Structural checks. Throws Error{ConfigInvalid}.
  void validate() const {
    auto bad = [](const std::string& m) { return Error(ErrorCode::ConfigInvalid, m); };
    if (k < 2) throw bad("k must be at least 2, got " + std::to_string(k));
    if (!(tolerance > 0.0 && tolerance <= 1e-2)) throw bad("tolerance must lie in (0, 1e-2]");
    if (!(nodal || graph || kuznecov || qer || growth)) throw bad("no analysis enabled");
    if (generator.empty() && (off_file.empty() || lengths_file.empty()))
      throw bad("mesh needs a generator or both 'off' and 'lengths' files");
    if (!generator.empty() && generator != "torus" && generator != "genus2")
      throw bad("unknown generator '" + generator + "'");
    if (observables.empty()) throw bad("at least one observable is required");
    for (const auto& o : observables)
      if (o.kind != "constant" && o.kind != "cosine" && o.kind != "samples")
        throw bad("unknown observable '" + o.kind + "'");
    if (qer && qer_kinds.empty()) throw bad("qer enabled without kinds");
  }
};

/// Parses a JSON config; relative mesh paths resolve against base_dir.
/// Throws Error{ConfigInvalid}.
inline PipelineConfig parse_config(const json& j, const fs::path& base_dir = {}) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    const json& mesh = j.at("mesh");
    if (mesh.contains("generator")) {
      c.generator = mesh.at("generator").get<std::string>();
      c.torus_n = mesh.value("n", c.torus_n);
      c.torus_l1 = mesh.value("l1", c.torus_l1);
      c.torus_l2 = mesh.value("l2", c.torus_l2);
      c.genus2_subdiv = mesh.value("subdiv", c.genus2_subdiv);
    } else {
      c.off_file = base_dir / mesh.at("off").get<std::string>();
      c.lengths_file = base_dir / mesh.at("lengths").get<std::string>();
      if (mesh.contains("involution")) c.involution_file = base_dir / mesh.at("involution").get<std::string>();
    }
    c.k = j.value("k", c.k);
    c.tolerance = j.value("tolerance", c.tolerance);
    const std::string mass = j.value("mass", std::string("lumped"));
    if (mass != "lumped" && mass != "consistent") throw Error(ErrorCode::ConfigInvalid, "mass must be lumped or consistent");
    c.mass = mass == "lumped" ? MassKind::lumped : MassKind::consistent;
    c.seed = j.value("seed", c.seed);
    if (j.contains("curve")) {
      const json& cv = j.at("curve");
      c.fixed_component = cv.value("fixed_component", 0);
      if (cv.contains("vertices")) c.curve_vertices = cv.at("vertices").get<std::vector<int>>();
    }
    if (j.contains("observables")) {
      c.observables.clear();
      for (const auto& o : j.at("observables")) {
        Observable ob;
        ob.kind = o.at("name").get<std::string>();
        ob.harmonic = o.value("harmonic", 0);
        if (o.contains("values")) ob.values = o.at("values").get<std::vector<double>>();
        c.observables.push_back(std::move(ob));
      }
    }
    if (j.contains("analyses")) {
      const json& a = j.at("analyses");
      c.nodal = a.value("nodal", false);
      c.graph = a.value("graph", false);
      c.kuznecov = a.value("kuznecov", false);
      c.qer = a.value("qer", false);
      c.growth = a.value("growth", false);
    }
    if (j.contains("qer_kinds")) {
      c.qer_kinds.clear();
      for (const auto& s : j.at("qer_kinds")) c.qer_kinds.push_back(qer_kind_from_string(s.get<std::string>()));
    }
    if (j.contains("dump")) {
      const json& d = j.at("dump");
      c.dump_eigenpairs = d.value("eigenpairs", c.dump_eigenpairs);
      c.dump_traces = d.value("traces", c.dump_traces);
      c.dump_nodal_sets = d.value("nodal_sets", c.dump_nodal_sets);
    }
    c.output = j.value("output", std::string("out"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  const json j = read_json_file(path, ErrorCode::ConfigInvalid);
  return parse_config(j, path.parent_path());
}

inline json config_to_json(const PipelineConfig& c) {
  json mesh;
  if (c.generator == "torus") mesh = {{"generator", "torus"}, {"n", c.torus_n}, {"l1", c.torus_l1}, {"l2", c.torus_l2}};
  else if (c.generator == "genus2") mesh = {{"generator", "genus2"}, {"subdiv", c.genus2_subdiv}};
  else mesh = {{"off", c.off_file.string()}, {"lengths", c.lengths_file.string()}, {"involution", c.involution_file.string()}};
  json obs = json::array();
  for (const auto& o : c.observables) {
    json jo{{"name", o.kind}};
    if (o.kind == "cosine") jo["harmonic"] = o.harmonic;
    if (o.kind == "samples") jo["values"] = o.values;
    obs.push_back(jo);
  }
  json kinds = json::array();
  for (auto q : c.qer_kinds) kinds.push_back(to_string(q));
  json curve{{"fixed_component", c.fixed_component}};
  if (!c.curve_vertices.empty()) curve["vertices"] = c.curve_vertices;
  return {{"mesh", mesh},
          {"k", c.k},
          {"tolerance", c.tolerance},
          {"mass", c.mass == MassKind::lumped ? "lumped" : "consistent"},
          {"seed", c.seed},
          {"curve", curve},
          {"observables", obs},
          {"analyses",
           {{"nodal", c.nodal}, {"graph", c.graph}, {"kuznecov", c.kuznecov}, {"qer", c.qer}, {"growth", c.growth}}},
          {"qer_kinds", kinds}};
}

/// Weight samples of an observable along a path.
inline std::vector<double> sample_observable(const Observable& o, const CurvePath& path) {
  std::vector<double> f(path.size());
  if (o.kind == "samples") {
    if (static_cast<int>(o.values.size()) != path.size())
      throw Error(ErrorCode::ConfigInvalid, "observable samples do not match the path vertex count");
    return o.values;
  }
  for (int i = 0; i < path.size(); ++i)
    f[i] = o.kind == "cosine" ? std::cos(2.0 * std::numbers::pi * o.harmonic * path.s[i] / path.length) : 1.0;
  return f;
}

struct RunResult {
  json summary;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Surface {
  SurfaceMesh mesh;
  std::optional<Involution> involution;
};

inline Surface load_surface(const PipelineConfig& c) {
  Surface s;
  if (c.generator == "torus" || c.generator == "genus2") {
    auto gen = c.generator == "torus" ? gen_flat_torus(c.torus_n, c.torus_l1, c.torus_l2) : gen_genus2(c.genus2_subdiv);
    s.mesh = std::move(gen.mesh);
    s.involution = std::move(gen.involution);
    return s;
  }
  try {
    s.mesh = load_mesh(c.off_file, c.lengths_file);
    if (!c.involution_file.empty()) s.involution = validate_involution(s.mesh, load_permutation(c.involution_file));
  } catch (const Error& e) {
    throw Error(ErrorCode::MeshLoadFailed, std::string("mesh: ") + e.what());
  }
  return s;
}

// Solves past k until the last cluster is complete, splits parity, truncates to k.
inline std::vector<EigenPair> solve_spectrum(const OperatorPair& ops, const Involution* inv, int k, double tol,
                                             std::uint64_t seed) {
  const int n = static_cast<int>(ops.mass.rows());
  SolverOptions opts;
  opts.seed = seed;
  int extra = std::max(8, k / 10);
  for (;;) {
    const int want = std::min(n - 1, k + extra);
    std::vector<EigenPair> pairs = solve_eigenpairs(ops, want, tol, opts);
    const int prefix = want == n - 1 ? want : complete_cluster_prefix(pairs);
    if (prefix >= k || want == n - 1) {
      pairs.resize(prefix);
      if (inv) pairs = split_parity(pairs, *inv, ops);
      if (static_cast<int>(pairs.size()) > k) pairs.resize(k);
      return pairs;
    }
    extra *= 2;
  }
}

}  // namespace detail

/// Runs every enabled analysis and writes the bundle into config.output.
/// Throws Error{ConfigInvalid, MeshLoadFailed, SolverFailed}.
inline RunResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  detail::Surface surface = detail::load_surface(config);
  const SurfaceMesh& mesh = surface.mesh;
  const Involution* inv = surface.involution ? &*surface.involution : nullptr;
  const int g = genus(mesh);
  if (config.k >= mesh.vertex_count())
    throw Error(ErrorCode::ConfigInvalid, "k must be below the vertex count " + std::to_string(mesh.vertex_count()));

  // Curve.
  std::optional<FixedCurve> fixed;
  if (inv) fixed = fixed_point_set(mesh, *inv);
  std::optional<CurvePath> path;
  bool path_fixed = false;
  if (!config.curve_vertices.empty()) {
    path = make_path(mesh, config.curve_vertices);
    path_fixed = inv != nullptr;
    for (int v : path->vertices) path_fixed = path_fixed && inv->fixes(v);
  } else if (fixed && fixed->component_count() > 0) {
    if (config.fixed_component < 0 || config.fixed_component >= fixed->component_count())
      throw Error(ErrorCode::ConfigInvalid, "fixed_component out of range");
    path = make_path(mesh, fixed->components[config.fixed_component]);
    path_fixed = true;
  }
  const bool need_path = config.graph || config.kuznecov || config.qer || config.growth;
  if (need_path && !path)
    throw Error(ErrorCode::ConfigInvalid, "analyses need a curve: the involution has an empty fixed set and no "
                                          "explicit loop was given");
  if ((config.graph || config.qer) && (!inv || !path_fixed))
    throw Error(ErrorCode::ConfigInvalid, "graph and qer analyses need a path inside the fixed set of an involution");

  // Spectrum.
  std::vector<EigenPair> pairs;
  OperatorPair ops;
  try {
    ops = assemble_operators(mesh, config.mass);
    pairs = detail::solve_spectrum(ops, inv, config.k, config.tolerance, config.seed);
  } catch (const Error& e) {
    throw Error(ErrorCode::SolverFailed, std::string("spectral: ") + e.what());
  }

  const fs::path out = config.output;
  fs::create_directories(out);
  RunResult result;
  auto& violations = result.violations;

  // Per-pair analyses.
  const int np = static_cast<int>(pairs.size());
  std::vector<json> records(np);
  std::vector<std::string> trace_csv(np), nodal_csv(np);
  std::vector<std::vector<std::string>> pair_violations(np);
  std::vector<double> sign_counts(np, 0.0), domain_counts(np, 0.0), gamma_counts(np, 0.0);
  parallel_for(np, [&](int j) {
    const EigenPair& p = pairs[j];
    json r;
    r["j"] = p.index;
    r["lambda"] = p.eigenvalue;
    r["parity"] = to_string(p.parity);
    r["residual"] = p.residual;
    const double sup = sup_norm(p);
    r["sup_norm"] = sup;
    r["sup_ratio"] = p.eigenvalue > 1.0 ? detail::number_or_null(sup * std::pow(p.eigenvalue, -0.25) *
                                                                  std::log(p.eigenvalue))
                                        : json(nullptr);
    std::optional<NodalDomains> domains;
    if (config.nodal || config.graph || config.growth) {
      domains = count_nodal_domains(p, mesh, inv);
      r["N"] = domains->count;
      if (domains->tagged) {
        r["inert"] = domains->inert_count;
        r["split"] = domains->split_count;
      }
      domain_counts[j] = domains->count;
      if (config.nodal) r["nodal_length"] = extract_nodal_set(p, mesh).total_length;
      if (config.dump_nodal_sets) {
        std::ostringstream os;
        write_nodal_set_csv(os, mesh, extract_nodal_set(p, mesh));
        nodal_csv[j] = os.str();
      }
    }
    if (path) {
      const CurveTrace d = restrict(mesh, p, *path, TraceKind::dirichlet);
      try {
        const auto sc = count_sign_changes(d, default_zero_tol(p));
        r["sign_changes"] = sc.count;
        r["sign_ambiguous"] = sc.ambiguous;
        sign_counts[j] = sc.count;
      } catch (const Error&) {
        r["sign_changes"] = 0;
        r["sign_ambiguous"] = true;
      }
      std::ostringstream os;
      if (config.dump_traces) write_trace_csv(os, d, false);
      if (p.eigenvalue > 0.0) {
        const CurveTrace nn = restrict(mesh, p, *path, TraceKind::neumann_normalized);
        if (config.dump_traces) write_trace_csv(os, nn, false);
        if (path_fixed && p.parity != Parity::none) {
          const CurveTrace& vanishing = p.parity == Parity::even ? nn : d;
          double mx = 0.0;
          for (double v : vanishing.samples) mx = std::max(mx, std::abs(v));
          r["trace_vanishing"] = mx / sup;
          if (mx > 1e-6 * sup) pair_violations[j].push_back("trace vanishing j=" + std::to_string(p.index));
        }
      }
      trace_csv[j] = os.str();
    }
    if (config.graph && p.parity != Parity::none) {
      const NodalGraph gr = build_nodal_graph(p, mesh, *path);
      const DomainBound b = lemma1_bounds(*domains, gr, g);
      const bool euler_ok = euler_check(gr, g);
      r["v"] = gr.v;
      r["e"] = gr.e;
      r["f"] = gr.f;
      r["m"] = gr.m;
      r["n"] = gr.n;
      r["loop_markers"] = gr.loop_markers;
      r["min_special_degree"] = gr.min_special_degree;
      r["degree_sum"] = gr.degree_sum();
      if (p.parity == Parity::odd) r["trace_singular_points"] = gr.trace_singular_points;
      r["bound"] = b.bound;
      r["holds"] = b.holds;
      r["euler_ok"] = euler_ok;
      gamma_counts[j] = gr.n;
      if (!euler_ok) pair_violations[j].push_back("euler j=" + std::to_string(p.index));
      if (!b.holds) pair_violations[j].push_back("lemma bound j=" + std::to_string(p.index));
      if (gr.n > 0 && gr.min_special_degree < 4) pair_violations[j].push_back("special degree j=" + std::to_string(p.index));
      if (gr.degree_sum() != 2 * gr.e) pair_violations[j].push_back("degree sum j=" + std::to_string(p.index));
    }
    records[j] = std::move(r);
  });
  for (const auto& pv : pair_violations) violations.insert(violations.end(), pv.begin(), pv.end());

  json summary;
  summary["schema_version"] = kSchemaVersion;
  summary["tool"] = "nodal-atlas";
  summary["config"] = config_to_json(config);
  json surf{{"vertices", mesh.vertex_count()},
            {"edges", mesh.edge_count()},
            {"triangles", mesh.triangle_count()},
            {"genus", g},
            {"area", mesh.area()},
            {"involution", inv != nullptr}};
  if (fixed) {
    surf["fixed_components"] = fixed->component_count();
    surf["separating"] = fixed->separating;
  }
  if (path) {
    surf["path_vertices"] = path->size();
    surf["path_length"] = path->length;
    surf["path_in_fixed_set"] = path_fixed;
  }
  summary["surface"] = surf;
  double max_res = 0.0;
  for (const auto& p : pairs) max_res = std::max(max_res, p.residual);
  summary["spectrum"] = {{"count", np},
                         {"tolerance", config.tolerance},
                         {"max_residual", max_res},
                         {"mass", config.mass == MassKind::lumped ? "lumped" : "consistent"}};
  summary["weights"] = {{"inverse_sqrt", weight_integral_inverse_sqrt()}, {"sqrt", weight_integral_sqrt()}};

  // Kuznecov series.
  json kz = json::array();
  if (config.kuznecov) {
    for (const auto& ob : config.observables) {
      const auto f = sample_observable(ob, *path);
      for (TraceKind kind : {TraceKind::dirichlet, TraceKind::neumann_normalized}) {
        json entry{{"observable", ob.label()}, {"kind", to_string(kind)}};
        try {
          const auto series = kuznecov(mesh, pairs, *path, f, kind);
          entry["weight_integral"] = series.weight_integral;
          entry["fit_flagged"] = series.fit_flagged;
          if (series.fit) {
            entry["exponent"] = series.fit->exponent;
            entry["coefficient"] = series.fit->coefficient;
            entry["fit_points"] = series.fit->points;
          }
          json quart = json::array();
          const std::size_t n = series.partial_sums.size();
          for (int q = 1; q <= 4; ++q) {
            const std::size_t idx = std::max<std::size_t>(1, q * n / 4) - 1;
            quart.push_back({{"lambda", series.eigenvalues[idx]}, {"S", series.partial_sums[idx]}});
          }
          entry["trend"] = quart;
          json cheb = json::array();
          for (const auto& w : chebyshev_density(series, 1.0))
            cheb.push_back({{"T", w.t}, {"count", w.count}, {"fraction", w.fraction}});
          entry["chebyshev"] = cheb;
          std::ostringstream os;
          os << "lambda,p,S\n";
          os.precision(17);
          for (std::size_t i = 0; i < n; ++i)
            os << series.eigenvalues[i] << ',' << series.periods[i] << ',' << series.partial_sums[i] << '\n';
          const std::string file = "kuznecov_" + ob.label() + "_" + to_string(kind) + ".csv";
          write_text_file(out / file, os.str());
          entry["file"] = file;
        } catch (const Error& e) {
          entry["error"] = std::string(to_string(e.code()));
        }
        kz.push_back(entry);
      }
    }
  }
  summary["kuznecov"] = kz;

  // QER statistics over even pairs.
  json qj = json::array();
  if (config.qer) {
    std::vector<EigenPair> evens;
    for (const auto& p : pairs)
      if (p.parity == Parity::even && p.eigenvalue > 0.0) evens.push_back(p);
    for (std::size_t oi = 0; oi < config.observables.size(); ++oi) {
      const auto& ob = config.observables[oi];
      const auto f = sample_observable(ob, *path);
      double f_integral = 0.0;
      for (int i = 0; i < path->size(); ++i)
        f_integral += 0.5 * path->edge_lengths[i] * (f[i] + f[(i + 1) % path->size()]);
      for (QerKind kind : config.qer_kinds) {
        const QerSample q = qer_statistic(mesh, evens, *path, f, kind, inv);
        double gap = 0.0;
        if (kind == QerKind::cauchy)
          for (std::size_t i = 0; i < q.statistics.size(); ++i) {
            const double rel = std::abs(q.statistics[i] - q.dirichlet_parts[i]) /
                               std::max(std::abs(q.dirichlet_parts[i]), 1e-300);
            gap = std::max(gap, rel);
          }
        if (kind == QerKind::cauchy && gap > 1e-6) violations.push_back("cauchy-dirichlet gap " + ob.label());
        qj.push_back({{"observable", ob.label()},
                      {"kind", to_string(kind)},
                      {"f_integral", f_integral},
                      {"target", q.target},
                      {"target_sqrt_variant", q.target_sqrt_variant},
                      {"pairs", q.statistics.size()},
                      {"window", q.window},
                      {"window_variances", q.window_variances},
                      {"longest_nonincreasing_run", longest_nonincreasing_run(q.window_variances)},
                      {"max_cauchy_dirichlet_gap", gap}});
        if (oi == 0) {
          for (std::size_t i = 0; i < q.indices.size(); ++i)
            for (auto& r : records)
              if (r["j"] == q.indices[i]) r["qer"][to_string(kind)] = q.statistics[i];
        }
      }
    }
  }
  summary["qer"] = qj;

  // Growth along the density-one construction.
  json gj = json::array();
  if (config.growth) {
    auto add = [&](const std::vector<double>& counts, const std::string& label) {
      const auto gr = growth_report(counts, label);
      gj.push_back({{"label", gr.label},
                    {"extracted", gr.extracted},
                    {"message", gr.message},
                    {"density", gr.density},
                    {"selected", gr.subsequence.size()},
                    {"block_minimum", gr.block_minimum},
                    {"minimum_increasing", gr.minimum_increasing}});
    };
    add(sign_counts, "sign_changes");
    add(domain_counts, "nodal_domains");
    if (config.graph) add(gamma_counts, "gamma_points");
  }
  summary["growth"] = gj;

  summary["records"] = records;
  summary["violations"] = violations;
  summary["ok"] = violations.empty();

  write_text_file(out / "summary.json", summary.dump(1) + "\n");
  if (config.graph) {
    json graphs = json::array();
    for (const auto& r : records)
      if (r.contains("v"))
        graphs.push_back({{"j", r["j"]}, {"v", r["v"]}, {"e", r["e"]}, {"f", r["f"]}, {"m", r["m"]},
                          {"n", r["n"]}, {"parity", r["parity"]}, {"bound", r["bound"]}, {"holds", r["holds"]},
                          {"euler_ok", r["euler_ok"]}});
    write_text_file(out / "graphs.json", graphs.dump(1) + "\n");
  }
  if (config.dump_traces && path) {
    std::string all = "s,value,kind,j,lambda\n";
    for (const auto& t : trace_csv) all += t;
    write_text_file(out / "traces.csv", all);
  }
  if (config.dump_nodal_sets && (config.nodal || config.graph || config.growth)) {
    fs::create_directories(out / "nodal_sets");
    for (int j = 0; j < np; ++j)
      write_text_file(out / "nodal_sets" / ("nodal_" + std::to_string(pairs[j].index) + ".csv"), nodal_csv[j]);
  }
  if (config.dump_eigenpairs) dump_eigenpairs(out / "eigenpairs", pairs);

  result.summary = std::move(summary);
  return result;
}

// ------------------------------------------------------------------ verify

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  int failures() const {
    int n = 0;
    for (const auto& c : checks) n += !c.pass;
    return n;
  }
};

/// Re-checks the Euler inequality, the domain-count bounds, parity trace
/// vanishing, the QER target identities and the eigenpair dump from the
/// bundle files alone. Throws Error{BundleCorrupt}.
inline VerifyReport verify_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::BundleCorrupt, dir.string() + " is not a directory");
  if (!fs::exists(dir / "summary.json")) throw Error(ErrorCode::BundleCorrupt, "summary.json missing in " + dir.string());
  const json s = read_json_file(dir / "summary.json", ErrorCode::BundleCorrupt);
  VerifyReport rep;
  try {
    if (s.at("schema_version").get<int>() != kSchemaVersion)
      throw Error(ErrorCode::BundleCorrupt, "unsupported schema version");
    const int g = s.at("surface").at("genus").get<int>();
    const double area = s.at("surface").at("area").get<double>();
    for (const auto& r : s.at("records")) {
      const int j = r.at("j").get<int>();
      const std::string tag = " j=" + std::to_string(j);
      if (r.contains("v")) {
        const int v = r.at("v"), e = r.at("e"), f = r.at("f"), m = r.at("m");
        const int lhs = v - e + f - m;
        rep.checks.push_back({"euler" + tag, lhs >= 1 - 2 * g,
                              "v-e+f-m=" + std::to_string(lhs) + " vs 1-2g=" + std::to_string(1 - 2 * g)});
        const int n = r.at("n"), big_n = r.at("N");
        const bool odd = r.at("parity").get<std::string>() == "odd";
        const int bound = odd ? n + 2 - 2 * g : n / 2 + 1 - g;
        rep.checks.push_back({"domain bound" + tag, big_n >= bound && r.at("bound").get<int>() == bound,
                              "N=" + std::to_string(big_n) + " bound=" + std::to_string(bound)});
      }
      if (r.contains("trace_vanishing")) {
        const double t = r.at("trace_vanishing").get<double>();
        std::ostringstream os;
        os << "max/sup=" << t;
        rep.checks.push_back({"trace vanishing" + tag, t <= 1e-6, os.str()});
      }
    }
    const double w_inv = s.at("weights").at("inverse_sqrt").get<double>();
    const double w_sqrt = s.at("weights").at("sqrt").get<double>();
    rep.checks.push_back({"weight integrals",
                          std::abs(w_inv - std::numbers::pi) <= 1e-6 && std::abs(w_sqrt - std::numbers::pi / 2) <= 1e-6,
                          ""});
    for (const auto& q : s.at("qer")) {
      const std::string kind = q.at("kind");
      const double fi = q.at("f_integral").get<double>(), target = q.at("target").get<double>();
      const double expect = (kind == "dirichlet" ? 2.0 : 1.0) * fi / area;
      const bool ok = std::abs(target - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
      rep.checks.push_back({"qer target " + kind + " " + q.at("observable").get<std::string>(), ok, ""});
      if (kind == "cauchy")
        rep.checks.push_back({"cauchy dirichlet gap " + q.at("observable").get<std::string>(),
                              q.at("max_cauchy_dirichlet_gap").get<double>() <= 1e-6, ""});
    }
    if (fs::exists(dir / "eigenpairs" / "index.json")) {
      const auto pairs = load_eigenpairs(dir / "eigenpairs");
      bool ok = pairs.size() == s.at("records").size();
      for (std::size_t i = 0; ok && i < pairs.size(); ++i)
        ok = pairs[i].eigenvalue == s.at("records")[i].at("lambda").get<double>() &&
             pairs[i].coefficients.size() == s.at("surface").at("vertices").get<int>();
      rep.checks.push_back({"eigenpair dump", ok, std::to_string(pairs.size()) + " pairs"});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BundleCorrupt, std::string("summary.json: ") + e.what());
  }
  return rep;
}

}  // namespace nodal_atlas
