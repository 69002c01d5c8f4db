#include "holefill/geom/quad_mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace holefill::geom {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

struct EdgeInfo {
  int id = -1;
  std::vector<int> faces;
};

std::map<EdgeKey, EdgeInfo> build_edges(const QuadMesh& mesh) {
  std::map<EdgeKey, EdgeInfo> edges;
  int next = 0;
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    const int k = static_cast<int>(face.size());
    for (int i = 0; i < k; ++i) {
      auto& info = edges[edge_key(face[i], face[(i + 1) % k])];
      if (info.id < 0) info.id = next++;
      info.faces.push_back(static_cast<int>(f));
    }
  }
  for (const auto& [key, info] : edges)
    if (info.faces.size() > 2)
      throw TopologyError("non-manifold edge shared by more than two faces");
  return edges;
}

}  // namespace

void QuadMesh::validate() const {
  for (const auto& face : faces) {
    if (face.size() < 3) throw TopologyError("face with fewer than three vertices");
    std::set<int> seen;
    for (int v : face) {
      if (v < 0 || v >= static_cast<int>(vertices.size()))
        throw TopologyError("face references missing vertex");
      if (!seen.insert(v).second) throw TopologyError("degenerate face: repeated vertex");
    }
  }
  build_edges(*this);
}

QuadMesh catmull_clark_subdivide(const QuadMesh& mesh) {
  mesh.validate();
  const auto edges = build_edges(mesh);
  const int nv = static_cast<int>(mesh.vertices.size());
  const int nf = static_cast<int>(mesh.faces.size());
  const int ne = static_cast<int>(edges.size());

  QuadMesh out;
  out.vertices.resize(nv + ne + nf);

  // Face points: centroid.
  std::vector<Vec3> face_point(nf);
  for (int f = 0; f < nf; ++f) {
    Vec3 c = Vec3::Zero();
    for (int v : mesh.faces[f]) c += mesh.vertices[v];
    face_point[f] = c / double(mesh.faces[f].size());
    out.vertices[nv + ne + f] = face_point[f];
  }

  // Edge points: boundary edges split at midpoints, interior edges
  // average endpoints with the two adjacent face points.
  for (const auto& [key, info] : edges) {
    const Vec3 mid = 0.5 * (mesh.vertices[key.first] + mesh.vertices[key.second]);
    Vec3 ep;
    if (info.faces.size() == 1) {
      ep = mid;
    } else {
      ep = (mesh.vertices[key.first] + mesh.vertices[key.second] + face_point[info.faces[0]] +
            face_point[info.faces[1]]) /
           4.0;
    }
    out.vertices[nv + info.id] = ep;
  }

  // Per-vertex adjacency.
  std::vector<std::vector<const EdgeInfo*>> vertex_edges(nv);
  std::vector<std::vector<EdgeKey>> vertex_edge_keys(nv);
  for (const auto& [key, info] : edges) {
    vertex_edges[key.first].push_back(&info);
    vertex_edge_keys[key.first].push_back(key);
    vertex_edges[key.second].push_back(&info);
    vertex_edge_keys[key.second].push_back(key);
  }
  std::vector<std::vector<int>> vertex_faces(nv);
  for (int f = 0; f < nf; ++f)
    for (int v : mesh.faces[f]) vertex_faces[v].push_back(f);

  for (int v = 0; v < nv; ++v) {
    std::vector<int> boundary_neighbors;
    for (size_t e = 0; e < vertex_edges[v].size(); ++e) {
      if (vertex_edges[v][e]->faces.size() == 1) {
        const auto& key = vertex_edge_keys[v][e];
        boundary_neighbors.push_back(key.first == v ? key.second : key.first);
      }
    }
    if (vertex_edges[v].empty()) {
      out.vertices[v] = mesh.vertices[v];  // isolated vertex, keep
      continue;
    }
    if (!boundary_neighbors.empty()) {
      if (boundary_neighbors.size() != 2)
        throw TopologyError("boundary vertex without exactly two boundary edges");
      out.vertices[v] = 0.125 * mesh.vertices[boundary_neighbors[0]] +
                        0.75 * mesh.vertices[v] +
                        0.125 * mesh.vertices[boundary_neighbors[1]];
      continue;
    }
    const double n = static_cast<double>(vertex_edges[v].size());
    Vec3 favg = Vec3::Zero();
    for (int f : vertex_faces[v]) favg += face_point[f];
    favg /= double(vertex_faces[v].size());
    Vec3 ravg = Vec3::Zero();
    for (size_t e = 0; e < vertex_edges[v].size(); ++e) {
      const auto& key = vertex_edge_keys[v][e];
      ravg += 0.5 * (mesh.vertices[key.first] + mesh.vertices[key.second]);
    }
    ravg /= n;
    out.vertices[v] = (favg + 2.0 * ravg + (n - 3.0) * mesh.vertices[v]) / n;
  }

  // One quad per face corner.
  for (int f = 0; f < nf; ++f) {
    const auto& face = mesh.faces[f];
    const int k = static_cast<int>(face.size());
    for (int i = 0; i < k; ++i) {
      const int prev = face[(i + k - 1) % k];
      const int cur = face[i];
      const int next = face[(i + 1) % k];
      const int e_in = nv + edges.at(edge_key(prev, cur)).id;
      const int e_out = nv + edges.at(edge_key(cur, next)).id;
      out.faces.push_back({cur, e_out, nv + ne + f, e_in});
    }
  }
  return out;
}

std::vector<int> hole_ring_around_vertex(const QuadMesh& mesh, int vertex) {
  mesh.validate();
  // Ring edges: edges of the incident faces that do not touch `vertex`.
  std::map<int, std::vector<int>> next_of;
  for (const auto& face : mesh.faces) {
    const int k = static_cast<int>(face.size());
    if (std::find(face.begin(), face.end(), vertex) == face.end()) continue;
    for (int i = 0; i < k; ++i) {
      const int a = face[i], b = face[(i + 1) % k];
      if (a == vertex || b == vertex) continue;
      next_of[a].push_back(b);
    }
  }
  if (next_of.empty()) throw TopologyError("vertex has no incident faces");
  std::vector<int> loop;
  const int start = next_of.begin()->first;
  int cur = start;
  do {
    loop.push_back(cur);
    const auto it = next_of.find(cur);
    if (it == next_of.end() || it->second.empty())
      throw TopologyError("hole ring is not a closed loop");
    cur = it->second.front();
    if (loop.size() > next_of.size() + 1)
      throw TopologyError("hole ring walk did not close");
  } while (cur != start);
  return loop;
}

QuadMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open OBJ file: " + path);
  QuadMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      ls >> p.x() >> p.y() >> p.z();
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string tok;
      while (ls >> tok) {
        const auto slash = tok.find('/');
        if (slash != std::string::npos) tok = tok.substr(0, slash);
        face.push_back(std::stoi(tok) - 1);
      }
      mesh.faces.push_back(std::move(face));
    }
  }
  return mesh;
}

void save_obj(const QuadMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write OBJ file: " + path);
  out.precision(17);
  for (const auto& p : mesh.vertices)
    out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
  for (const auto& face : mesh.faces) {
    out << "f";
    for (int v : face) out << " " << v + 1;
    out << "\n";
  }
}

}  // namespace holefill::geom
