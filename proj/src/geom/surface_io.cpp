#include "holefill/geom/surface_io.hpp"

#include <fstream>

namespace holefill::geom {

nlohmann::json surface_to_json(const BSplineSurface& surface) {
  nlohmann::json j;
  j["degree_u"] = surface.degree_u();
  j["degree_v"] = surface.degree_v();
  j["knots_u"] = surface.knots_u.values;
  j["knots_v"] = surface.knots_v.values;
  auto& cps = j["control_points"] = nlohmann::json::array();
  for (const auto& p : surface.control_points) cps.push_back({p.x(), p.y(), p.z()});
  return j;
}

BSplineSurface surface_from_json(const nlohmann::json& j) {
  BSplineSurface s;
  s.knots_u.degree = j.at("degree_u").get<int>();
  s.knots_v.degree = j.at("degree_v").get<int>();
  s.knots_u.values = j.at("knots_u").get<std::vector<double>>();
  s.knots_v.values = j.at("knots_v").get<std::vector<double>>();
  for (const auto& p : j.at("control_points"))
    s.control_points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                                  p.at(2).get<double>());
  s.validate();
  return s;
}

void save_surface(const BSplineSurface& surface, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write surface file: " + path);
  out << surface_to_json(surface).dump(2) << "\n";
}

BSplineSurface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open surface file: " + path);
  nlohmann::json j;
  in >> j;
  return surface_from_json(j);
}

}  // namespace holefill::geom
