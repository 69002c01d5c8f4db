#include "holefill/data/record.hpp"

#include <fstream>

#include "holefill/geom/surface_io.hpp"

namespace holefill::data {

nlohmann::json record_to_json(const DatasetRecord& r) {
  nlohmann::json j;
  j["surface"] = geom::surface_to_json(r.target_surface);
  j["boundary"] = param::boundary_to_json(r.boundary);
  j["pcurve_gt"] = param::pcurve_to_json(r.pcurve_gt);
  nlohmann::json labels;
  labels["dv_low"] = r.labels.coarse.resolution;
  labels["factor"] = r.labels.factor;
  labels["coarse"] = r.labels.coarse.indices;
  labels["sub"] = r.labels.sub;
  j["labels"] = std::move(labels);
  j["knots_u_interior"] = r.knots_u_interior;
  j["knots_v_interior"] = r.knots_v_interior;
  j["surface_id"] = r.surface_id;
  j["seed"] = r.seed;
  j["noise_level"] = r.noise_level;
  j["norm_scale"] = r.norm_scale;
  j["norm_offset"] = {r.norm_offset.x(), r.norm_offset.y(), r.norm_offset.z()};
  return j;
}

DatasetRecord record_from_json(const nlohmann::json& j) {
  DatasetRecord r;
  r.target_surface = geom::surface_from_json(j.at("surface"));
  r.boundary = param::boundary_from_json(j.at("boundary"));
  r.pcurve_gt = param::pcurve_from_json(j.at("pcurve_gt"));
  const auto& labels = j.at("labels");
  r.labels.coarse.resolution = labels.at("dv_low").get<double>();
  r.labels.factor = labels.at("factor").get<int>();
  r.labels.coarse.indices = labels.at("coarse").get<std::vector<std::array<int, 3>>>();
  r.labels.sub = labels.at("sub").get<std::vector<std::array<int, 3>>>();
  r.knots_u_interior = j.at("knots_u_interior").get<std::vector<double>>();
  r.knots_v_interior = j.at("knots_v_interior").get<std::vector<double>>();
  r.surface_id = j.at("surface_id").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.noise_level = j.at("noise_level").get<double>();
  r.norm_scale = j.at("norm_scale").get<double>();
  const auto& off = j.at("norm_offset");
  r.norm_offset = Vec3(off.at(0).get<double>(), off.at(1).get<double>(), off.at(2).get<double>());
  return r;
}

void save_dataset(const std::vector<DatasetRecord>& records, const DatasetManifest& manifest,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";

  nlohmann::json m;
  m["version"] = manifest.version;
  m["corpus_seed"] = manifest.corpus_seed;
  m["count"] = static_cast<int>(records.size());
  m["split_ratio"] = manifest.split_ratio;
  m["generator"] = manifest.generator;
  std::ofstream mout(path + ".manifest.json");
  if (!mout) throw std::runtime_error("cannot write dataset manifest: " + path);
  mout << m.dump(2) << "\n";
}

std::vector<DatasetRecord> load_dataset(const std::string& path, DatasetManifest* manifest) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<DatasetRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  if (manifest) {
    std::ifstream min(path + ".manifest.json");
    if (min) {
      nlohmann::json m;
      min >> m;
      manifest->version = m.value("version", 1);
      manifest->corpus_seed = m.value("corpus_seed", std::uint64_t{0});
      manifest->count = m.value("count", static_cast<int>(records.size()));
      manifest->split_ratio = m.value("split_ratio", 0.9);
      manifest->generator = m.value("generator", std::string("unknown"));
    }
  }
  return records;
}

}  // namespace holefill::data
