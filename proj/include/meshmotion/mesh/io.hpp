#pragma once

#include "meshmotion/mesh/mesh.hpp"

#include "json.hpp"

#include <filesystem>

namespace meshmotion {

using Json = nlohmann::json;

Json mesh_to_json(const TriMesh& mesh);
MeshPtr mesh_from_json(const Json& j);

Json field_to_json(const Field& field);
Field field_from_json(const Json& j, const MeshPtr& mesh);

Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

MeshPtr load_mesh(const std::filesystem::path& path);
void save_mesh(const std::filesystem::path& path, const TriMesh& mesh);
Field load_field(const std::filesystem::path& path, const MeshPtr& mesh);
void save_field(const std::filesystem::path& path, const Field& field);

}  // namespace meshmotion
