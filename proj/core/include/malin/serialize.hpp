#pragma once

#include "malin/mesh.hpp"
#include "malin/polytope.hpp"
#include "malin/solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace malin {

// {"n":2,"vertices":[[x,y],...],"provenance":"SectionLevelSet"}; n = 3
// bodies also carry "interior".
nlohmann::json to_json(const Polytope& body);
Polytope polytope_from_json(const nlohmann::json& j);

// {"n", "nodes", "simplices", "boundary", "h_mesh", "hash", "body"}
nlohmann::json to_json(const Mesh& mesh);
Mesh mesh_from_json(const nlohmann::json& j);

// Nodal values with the mesh hash and the hash of the producing config.
nlohmann::json solve_snapshot(const SolveResult& result, std::uint64_t config_hash);

// FNV-1a over a string (used for config hashes).
std::uint64_t fnv1a(const std::string& bytes);
std::string hash_hex(std::uint64_t value);

}  // namespace malin
