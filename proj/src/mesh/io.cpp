#include "meshmotion/mesh/io.hpp"

#include "meshmotion/errors.hpp"

#include <fstream>

namespace meshmotion {

Json mesh_to_json(const TriMesh& mesh) {
  Json vertices = Json::array(), cells = Json::array(), boundary = Json::array();
  for (const Vec2& v : mesh.vertices()) vertices.push_back({v.x(), v.y()});
  for (const Cell& c : mesh.cells()) cells.push_back({c[0], c[1], c[2]});
  for (const BoundaryEdge& e : mesh.boundary_edges()) {
    boundary.push_back({{"edge", {e.vertices[0], e.vertices[1]}}, {"tag", e.tag}});
  }
  return {{"vertices", vertices}, {"cells", cells}, {"boundary", boundary}};
}

MeshPtr mesh_from_json(const Json& j) {
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<BoundaryEdge> boundary;
  for (const Json& v : j.at("vertices")) vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  for (const Json& c : j.at("cells")) cells.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
  for (const Json& b : j.at("boundary")) {
    boundary.push_back({{b.at("edge").at(0).get<int>(), b.at("edge").at(1).get<int>()}, b.at("tag").get<std::string>()});
  }
  return make_mesh(std::move(vertices), std::move(cells), std::move(boundary));
}

Json field_to_json(const Field& field) {
  const Eigen::VectorXd& c = field.coefficients();
  return {{"space", to_string(field.space())},
          {"value_dim", field.value_dim()},
          {"coefficients", std::vector<double>(c.data(), c.data() + c.size())}};
}

Field field_from_json(const Json& j, const MeshPtr& mesh) {
  const auto values = j.at("coefficients").get<std::vector<double>>();
  return Field(mesh, space_from_string(j.at("space").get<std::string>()), j.at("value_dim").get<int>(),
               Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

MeshPtr load_mesh(const std::filesystem::path& path) { return mesh_from_json(read_json(path)); }
void save_mesh(const std::filesystem::path& path, const TriMesh& mesh) { write_json(path, mesh_to_json(mesh)); }
Field load_field(const std::filesystem::path& path, const MeshPtr& mesh) { return field_from_json(read_json(path), mesh); }
void save_field(const std::filesystem::path& path, const Field& field) { write_json(path, field_to_json(field)); }

}  // namespace meshmotion
