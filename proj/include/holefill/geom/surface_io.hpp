#pragma once

#include <string>

#include <json.hpp>

#include "holefill/geom/bspline_surface.hpp"

namespace holefill::geom {

// {"degree_u", "degree_v", "knots_u": [...], "knots_v": [...],
//  "control_points": [[x,y,z], ...] row-major with the u index as row}
nlohmann::json surface_to_json(const BSplineSurface& surface);
BSplineSurface surface_from_json(const nlohmann::json& j);

void save_surface(const BSplineSurface& surface, const std::string& path);
BSplineSurface load_surface(const std::string& path);

}  // namespace holefill::geom
