#include "malin/serialize.hpp"

#include "malin/errors.hpp"

#include <iomanip>
#include <sstream>

namespace malin {

namespace {

nlohmann::json point(const Vector& x) { return to_std(x); }

Vector read_point(const nlohmann::json& j, int n) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != n) throw ContractError("point has the wrong dimension");
  return from_std(v);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

nlohmann::json to_json(const Polytope& body) {
  nlohmann::json j;
  j["n"] = body.dimension();
  j["vertices"] = nlohmann::json::array();
  for (const auto& v : body.vertices()) j["vertices"].push_back(point(v));
  j["provenance"] = to_string(body.provenance());
  j["interior"] = point(body.interior_point());
  return j;
}

Polytope polytope_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  std::vector<Vector> vertices;
  for (const auto& v : j.at("vertices")) vertices.push_back(read_point(v, n));
  Vector interior;
  if (j.contains("interior")) {
    interior = read_point(j["interior"], n);
  } else {
    interior = Vector::Zero(n);
    for (const auto& v : vertices) interior += v;
    interior /= static_cast<double>(vertices.size());
  }
  return Polytope(n, std::move(vertices), provenance_from_string(j.at("provenance").get<std::string>()),
                  std::move(interior));
}

nlohmann::json to_json(const Mesh& mesh) {
  nlohmann::json j;
  const int n = mesh.dimension();
  j["n"] = n;
  j["nodes"] = nlohmann::json::array();
  for (const auto& x : mesh.nodes()) j["nodes"].push_back(point(x));
  j["simplices"] = nlohmann::json::array();
  for (std::size_t k = 0; k < mesh.simplex_count(); ++k) {
    const auto s = mesh.simplex(k);
    j["simplices"].push_back(std::vector<int>(s.begin(), s.end()));
  }
  j["boundary"] = mesh.boundary_flags();
  j["h_mesh"] = mesh.h_mesh();
  j["hash"] = hash_hex(mesh.hash());
  j["body"] = to_json(mesh.body());
  return j;
}

Mesh mesh_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  std::vector<Vector> nodes;
  for (const auto& x : j.at("nodes")) nodes.push_back(read_point(x, n));
  std::vector<int> conn;
  for (const auto& s : j.at("simplices")) {
    const auto idx = s.get<std::vector<int>>();
    if (static_cast<int>(idx.size()) != n + 1) throw ContractError("simplex has the wrong arity");
    conn.insert(conn.end(), idx.begin(), idx.end());
  }
  auto body = std::make_shared<const Polytope>(polytope_from_json(j.at("body")));
  return Mesh(n, std::move(nodes), std::move(conn), j.at("boundary").get<std::vector<bool>>(), std::move(body));
}

nlohmann::json solve_snapshot(const SolveResult& result, std::uint64_t config_hash) {
  nlohmann::json j;
  const Vector& v = result.solution.values();
  j["values"] = std::vector<double>(v.data(), v.data() + v.size());
  j["mesh_hash"] = hash_hex(result.solution.mesh().hash());
  j["config_hash"] = hash_hex(config_hash);
  j["residual"] = result.residual;
  j["weak_residual_sample"] = result.weak_residual_sample;
  j["iterations"] = result.iterations;
  j["method"] = result.method;
  j["condition_estimate"] = result.condition_estimate;
  j["max_peclet"] = result.max_peclet;
  return j;
}

}  // namespace malin
