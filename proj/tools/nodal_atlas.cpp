#include <chrono>
#include <iostream>

#include "CLI11.hpp"
#include "nodal_atlas.hpp"

namespace na = nodal_atlas;

namespace {

int run(const std::string& config_path, std::optional<int> k, std::optional<std::string> out,
        std::optional<std::uint64_t> seed) {
  na::PipelineConfig cfg = na::load_config(config_path);
  if (k) cfg.k = *k;
  if (out) cfg.output = *out;
  if (seed) cfg.seed = *seed;
  const auto t0 = std::chrono::steady_clock::now();
  const na::RunResult res = na::run_pipeline(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "wrote " << cfg.output.string() << " (" << res.summary["records"].size() << " eigenpairs, " << secs
            << " s)\n";
  for (const auto& v : res.violations) std::cout << "violation: " << v << '\n';
  std::cout << (res.ok() ? "ok" : "invariant violations found") << '\n';
  return res.ok() ? 0 : 1;
}

int verify(const std::string& dir) {
  const na::VerifyReport rep = na::verify_bundle(dir);
  for (const auto& c : rep.checks)
    if (!c.pass) std::cout << "FAIL " << c.name << (c.detail.empty() ? "" : "  " + c.detail) << '\n';
  std::cout << rep.checks.size() - rep.failures() << " passed, " << rep.failures() << " failed\n";
  return rep.failures() == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nodal sets, restriction statistics and nodal graphs of Laplace eigenfunctions on symmetric surfaces"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run the analysis pipeline from a JSON config");
  std::string config_path;
  std::optional<int> k;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("--k", k, "Number of eigenpairs");
  run_cmd->add_option("--out", out, "Output directory");
  run_cmd->add_option("--seed", seed, "Solver seed");

  auto* verify_cmd = app.add_subcommand("verify", "Re-check the invariants recorded in a bundle");
  std::string bundle;
  verify_cmd->add_option("dir", bundle, "Bundle directory")->required();

  auto* gen_cmd = app.add_subcommand("gen", "Write a generated surface (mesh.off, lengths.json, involution.json)");
  std::string kind;
  int n = 16, subdiv = 0;
  double l1 = 2.0 * std::numbers::pi, l2 = 2.0 * std::numbers::pi;
  std::string gen_out;
  gen_cmd->add_option("kind", kind, "torus or genus2")->required()->check(CLI::IsMember({"torus", "genus2"}));
  gen_cmd->add_option("--n", n, "Torus divisions per side");
  gen_cmd->add_option("--l1", l1, "Torus side length in x");
  gen_cmd->add_option("--l2", l2, "Torus side length in y");
  gen_cmd->add_option("--subdiv", subdiv, "Genus-2 refinement level");
  gen_cmd->add_option("-o,--out", gen_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, k, out, seed);
    if (*verify_cmd) return verify(bundle);
    if (*gen_cmd) {
      const auto s = kind == "torus" ? na::gen_flat_torus(n, l1, l2) : na::gen_genus2(subdiv);
      na::write_surface(gen_out, s.mesh, s.involution);
      std::cout << kind << ": " << s.mesh.vertex_count() << " vertices, " << s.mesh.triangle_count()
                << " triangles, genus " << na::genus(s.mesh) << " -> " << gen_out << '\n';
      return 0;
    }
  } catch (const na::Error& e) {
    std::cerr << "error [" << na::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
