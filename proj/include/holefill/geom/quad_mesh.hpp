#pragma once

#include <string>
#include <vector>

#include "holefill/common.hpp"

namespace holefill::geom {

// Polygonal mesh, manifold with boundary. Faces are quads after one
// subdivision step; general N-gons are permitted before.
struct QuadMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;

  void validate() const;  // throws TopologyError
};

// One Catmull-Clark step. Interior vertices use the standard
// face-point / edge-point / vertex-point rules; boundary edges split at
// their midpoint and boundary vertices use the 1/8-6/8-1/8 cubic
// B-spline mask. Every output face is a quad.
QuadMesh catmull_clark_subdivide(const QuadMesh& mesh);

// Ordered vertex loop enclosing the faces incident to `vertex`
// (the N-sided hole left when those faces are removed).
std::vector<int> hole_ring_around_vertex(const QuadMesh& mesh, int vertex);

QuadMesh load_obj(const std::string& path);
void save_obj(const QuadMesh& mesh, const std::string& path);

}  // namespace holefill::geom
