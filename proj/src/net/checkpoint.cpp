#include "holefill/net/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace holefill::net {

namespace {

nlohmann::json config_to_json(const NetConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["d"] = cfg.d;
  j["l"] = cfg.l;
  j["heads"] = cfg.heads;
  j["cp_tokens"] = cfg.cp_tokens;
  j["knot_tokens"] = cfg.knot_tokens;
  j["bins_low"] = cfg.bins_low;
  j["refine"] = cfg.refine;
  j["dropout"] = cfg.dropout;
  j["seed"] = cfg.seed;
  j["single_stage"] = cfg.single_stage;
  j["high_absolute"] = cfg.high_absolute;
  return j;
}

NetConfig config_from_json(const nlohmann::json& j) {
  NetConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.d = j.at("d").get<int>();
  cfg.l = j.at("l").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.cp_tokens = j.at("cp_tokens").get<int>();
  cfg.knot_tokens = j.at("knot_tokens").get<int>();
  cfg.bins_low = j.at("bins_low").get<int>();
  cfg.refine = j.at("refine").get<int>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.single_stage = j.at("single_stage").get<bool>();
  cfg.high_absolute = j.at("high_absolute").get<bool>();
  return cfg;
}

}  // namespace

void save_checkpoint(Model& model, const std::string& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["config"] = config_to_json(model.config());
  j["seed"] = model.config().seed;
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& p : model.all_params()) {
    nlohmann::json t;
    t["rows"] = p.value->rows();
    t["cols"] = p.value->cols();
    std::vector<double> data(p.value->data(), p.value->data() + p.value->size());
    t["data"] = std::move(data);
    tensors[p.name] = std::move(t);
  }
  j["tensors"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump() << "\n";
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("checkpoint: unsupported version");
  Model model(config_from_json(j.at("config")));
  const auto& tensors = j.at("tensors");
  for (const auto& p : model.all_params()) {
    const auto it = tensors.find(p.name);
    if (it == tensors.end())
      throw std::runtime_error("checkpoint: missing tensor " + p.name);
    const auto rows = it->at("rows").get<Eigen::Index>();
    const auto cols = it->at("cols").get<Eigen::Index>();
    if (rows != p.value->rows() || cols != p.value->cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
    const auto data = it->at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != p.value->size())
      throw std::runtime_error("checkpoint: size mismatch for " + p.name);
    std::copy(data.begin(), data.end(), p.value->data());
  }
  return model;
}

}  // namespace holefill::net
