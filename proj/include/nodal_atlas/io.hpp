#pragma once

// File formats: OFF triangle lists with an edge-length sidecar, involution
// permutations, and raw eigenpair dumps.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nodal_atlas/error.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/spectral.hpp"

namespace nodal_atlas {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// OFF text. The metric is intrinsic, so vertex coordinates are written as zeros.
inline void write_off(std::ostream& os, const SurfaceMesh& mesh) {
  os << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
  for (int v = 0; v < mesh.vertex_count(); ++v) os << "0 0 0\n";
  for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

struct OffData {
  int vertex_count = 0;
  std::vector<Triangle> triangles;
};

/// Reads the vertex count and triangle list of an OFF file; coordinates are
/// ignored. Throws Error{MeshLoadFailed}.
inline OffData read_off(std::istream& is) {
  auto fail = [](const std::string& what) { return Error(ErrorCode::MeshLoadFailed, "OFF: " + what); };
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next_int = [&]() -> long {
    if (pos >= tokens.size()) throw fail("unexpected end of file");
    try {
      std::size_t used = 0;
      const long v = std::stol(tokens[pos], &used);
      if (used != tokens[pos].size()) throw fail("expected an integer, got '" + tokens[pos] + "'");
      ++pos;
      return v;
    } catch (const std::logic_error&) {
      throw fail("expected an integer, got '" + tokens[pos] + "'");
    }
  };
  if (tokens.empty() || tokens[0] != "OFF") throw fail("missing OFF header");
  pos = 1;
  OffData out;
  const long nv = next_int(), nf = next_int();
  next_int();
  if (nv <= 0 || nf <= 0) throw fail("vertex and face counts must be positive");
  out.vertex_count = static_cast<int>(nv);
  pos += 3 * static_cast<std::size_t>(nv);
  for (long f = 0; f < nf; ++f) {
    if (next_int() != 3) throw fail("only triangular faces are supported");
    Triangle t{};
    for (int& v : t) v = static_cast<int>(next_int());
    out.triangles.push_back(t);
  }
  return out;
}

/// {"edges": [[a, b, length], ...]}
inline json lengths_to_json(const SurfaceMesh& mesh) {
  json edges = json::array();
  for (int e = 0; e < mesh.edge_count(); ++e) edges.push_back({mesh.edge(e).a, mesh.edge(e).b, mesh.edge_length(e)});
  return json{{"edges", edges}};
}

inline EdgeLengths lengths_from_json(const json& j) {
  EdgeLengths out;
  try {
    for (const auto& row : j.at("edges")) {
      const int a = row.at(0).get<int>(), b = row.at(1).get<int>();
      out[edge_key(a, b)] = row.at(2).get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MeshLoadFailed, std::string("edge lengths: ") + e.what());
  }
  return out;
}

inline json read_json_file(const fs::path& path, ErrorCode code) {
  std::ifstream in(path);
  if (!in) throw Error(code, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(code, path.string() + ": " + e.what());
  }
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  out << text;
}

/// Mesh from an OFF file and a lengths JSON sidecar. Throws Error{MeshLoadFailed}
/// for unreadable input and the build_mesh errors for invalid meshes.
inline SurfaceMesh load_mesh(const fs::path& off_path, const fs::path& lengths_path) {
  std::ifstream in(off_path);
  if (!in) throw Error(ErrorCode::MeshLoadFailed, "cannot open " + off_path.string());
  OffData off = read_off(in);
  const EdgeLengths lengths = lengths_from_json(read_json_file(lengths_path, ErrorCode::MeshLoadFailed));
  return build_mesh(off.vertex_count, std::move(off.triangles), lengths);
}

/// JSON array perm[i] = sigma(i).
inline std::vector<int> load_permutation(const fs::path& path) {
  const json j = read_json_file(path, ErrorCode::MeshLoadFailed);
  try {
    return j.get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MeshLoadFailed, path.string() + ": " + e.what());
  }
}

/// Writes mesh.off, lengths.json and involution.json into dir.
inline void write_surface(const fs::path& dir, const SurfaceMesh& mesh, const Involution& inv) {
  fs::create_directories(dir);
  std::ostringstream off;
  write_off(off, mesh);
  write_text_file(dir / "mesh.off", off.str());
  write_text_file(dir / "lengths.json", lengths_to_json(mesh).dump() + "\n");
  const auto vm = inv.vertex_map();
  write_text_file(dir / "involution.json", json(std::vector<int>(vm.begin(), vm.end())).dump() + "\n");
}

// ---------------------------------------------------------------- eigen dump

inline void write_f64_le(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    os.write(buf, 8);
  }
}

inline Eigen::VectorXd read_f64_le(std::istream& is, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw Error(ErrorCode::BundleCorrupt, "truncated coefficient file");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    v[i] = std::bit_cast<double>(bits);
  }
  return v;
}

/// dir/index.json plus one little-endian float64 file per pair.
inline void dump_eigenpairs(const fs::path& dir, const std::vector<EigenPair>& pairs) {
  fs::create_directories(dir);
  json index = json::array();
  for (const auto& p : pairs) {
    std::ostringstream name;
    name << "pair_" << std::setw(4) << std::setfill('0') << p.index << ".bin";
    std::ofstream out(dir / name.str(), std::ios::binary);
    write_f64_le(out, p.coefficients);
    index.push_back({{"j", p.index},
                     {"lambda", p.eigenvalue},
                     {"parity", to_string(p.parity)},
                     {"residual", p.residual},
                     {"size", p.coefficients.size()},
                     {"file", name.str()}});
  }
  write_text_file(dir / "index.json", json{{"schema_version", 1}, {"pairs", index}}.dump(1) + "\n");
}

inline std::vector<EigenPair> load_eigenpairs(const fs::path& dir) {
  const json index = read_json_file(dir / "index.json", ErrorCode::BundleCorrupt);
  std::vector<EigenPair> out;
  try {
    for (const auto& e : index.at("pairs")) {
      EigenPair p;
      p.index = e.at("j").get<int>();
      p.eigenvalue = e.at("lambda").get<double>();
      p.parity = parity_from_string(e.at("parity").get<std::string>());
      p.residual = e.at("residual").get<double>();
      std::ifstream in(dir / e.at("file").get<std::string>(), std::ios::binary);
      if (!in) throw Error(ErrorCode::BundleCorrupt, "missing coefficient file " + e.at("file").get<std::string>());
      p.coefficients = read_f64_le(in, e.at("size").get<Eigen::Index>());
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BundleCorrupt, std::string("eigenpair index: ") + e.what());
  }
  return out;
}

}  // namespace nodal_atlas
