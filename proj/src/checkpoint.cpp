#include "iat/checkpoint.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace iat::ckpt {

using nlohmann::json;

namespace {

json mat_to_json(const Mat& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  json data = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  out["data"] = std::move(data);
  return out;
}

Mat mat_from_json(const json& j, const std::string& path) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<int>(data.size()) != rows * cols)
    throw std::runtime_error("checkpoint: matrix shape mismatch in " + path);
  Mat m(rows, cols);
  int i = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[i++].get<Real>();
  return m;
}

json params_to_json(const nn::ParamStore& store) {
  json out = json::object();
  for (const std::string& name : store.names())
    out[name] = mat_to_json(store.get(name).value());
  return out;
}

void params_from_json(const json& j, nn::ParamStore& store, const std::string& path) {
  if (j.size() != store.names().size())
    throw std::runtime_error("checkpoint: parameter set mismatch in " + path);
  for (const std::string& name : store.names()) {
    if (!j.contains(name))
      throw std::runtime_error("checkpoint: missing parameter " + name + " in " + path);
    const Mat stored = mat_from_json(j.at(name), path);
    const Mat& current = store.get(name).value();
    if (stored.rows() != current.rows() || stored.cols() != current.cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + name + " in " + path);
    store.set_value(name, stored);
  }
}

json projection_to_json(const pe::PcaProjection& p) {
  json out;
  out["d"] = p.d;
  out["rank_deficient"] = p.rank_deficient;
  out["p"] = mat_to_json(p.p);
  json mean = json::array();
  for (int i = 0; i < p.mean.size(); ++i) mean.push_back(p.mean(i));
  out["mean"] = std::move(mean);
  return out;
}

pe::PcaProjection projection_from_json(const json& j, const std::string& path) {
  pe::PcaProjection p;
  p.d = j.at("d").get<int>();
  p.rank_deficient = j.at("rank_deficient").get<bool>();
  p.p = mat_from_json(j.at("p"), path);
  const json& mean = j.at("mean");
  p.mean = Vec(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) p.mean(i) = mean[i].get<Real>();
  return p;
}

json load_document(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: parse failure in " + path + ": " + e.what());
  }
  if (doc.value("kind", "") != kind)
    throw std::runtime_error("checkpoint: " + path + " is not a " + kind);
  return doc;
}

void write_document(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << doc.dump(1, '\t') << '\n';
  if (!out) throw std::runtime_error("checkpoint: write failure on " + path);
}

}  // namespace

void save_pvae(const pvae::PvaeResult& r, const pvae::PvaeTrainConfig& config,
               const std::string& path) {
  json doc;
  doc["kind"] = "pvae-checkpoint";
  doc["arch"] = {{"channels", r.pair.arch.channels},
                 {"t", r.pair.arch.t},
                 {"m", r.pair.arch.m},
                 {"hidden", r.pair.arch.hidden}};
  doc["config"] = {{"epochs", config.epochs}, {"lambda_kl", config.lambda_kl},
                   {"d", config.d},           {"rate", config.rate},
                   {"rate_pe", config.rate_pe}, {"m", config.m},
                   {"hidden", config.hidden}, {"pe_enabled", config.pe_enabled},
                   {"seed", config.seed}};
  doc["params"] = params_to_json(r.pair.params);
  doc["p_s"] = projection_to_json(r.p_s);
  doc["p_r"] = projection_to_json(r.p_r);
  write_document(doc, path);
}

PvaeCheckpoint load_pvae(const std::string& path) {
  const json doc = load_document(path, "pvae-checkpoint");
  pvae::VaeArch arch;
  const json& ja = doc.at("arch");
  arch.channels = ja.at("channels").get<int>();
  arch.t = ja.at("t").get<int>();
  arch.m = ja.at("m").get<int>();
  arch.hidden = ja.at("hidden").get<std::array<int, 3>>();
  arch.validate();

  pvae::PvaeTrainConfig config;
  const json& jc = doc.at("config");
  config.epochs = jc.at("epochs").get<int>();
  config.lambda_kl = jc.at("lambda_kl").get<Real>();
  config.d = jc.at("d").get<int>();
  config.rate = jc.at("rate").get<Real>();
  config.rate_pe = jc.at("rate_pe").get<Real>();
  config.m = jc.at("m").get<int>();
  config.hidden = jc.at("hidden").get<std::array<int, 3>>();
  config.pe_enabled = jc.at("pe_enabled").get<bool>();
  config.seed = jc.at("seed").get<std::uint64_t>();

  PvaeCheckpoint out{arch, config, pvae::PvaePair(arch, config.seed),
                     projection_from_json(doc.at("p_s"), path),
                     projection_from_json(doc.at("p_r"), path)};
  params_from_json(doc.at("params"), out.pair.params, path);
  return out;
}

void save_gan(const gan::GanResult& r, const gan::GanConfig& config,
              const std::string& path) {
  json doc;
  doc["kind"] = "act2act-checkpoint";
  doc["arch"] = {{"channels", r.model.arch.channels},
                 {"t", r.model.arch.t},
                 {"dim_c", r.model.arch.dim_c},
                 {"dim_z", r.model.arch.dim_z},
                 {"hidden", r.model.arch.hidden}};
  doc["config"] = {{"epochs", config.epochs},
                   {"critic_steps", config.critic_steps},
                   {"lambda_gp", config.lambda_gp},
                   {"rate", config.rate},
                   {"beta1", config.beta1},
                   {"beta2", config.beta2},
                   {"dim_c", config.dim_c},
                   {"dim_z", config.dim_z},
                   {"hidden", config.hidden},
                   {"batch_size", config.batch_size},
                   {"seed", config.seed}};
  doc["params"] = params_to_json(r.model.params);
  write_document(doc, path);
}

GanCheckpoint load_gan(const std::string& path) {
  const json doc = load_document(path, "act2act-checkpoint");
  gan::GanArch arch;
  const json& ja = doc.at("arch");
  arch.channels = ja.at("channels").get<int>();
  arch.t = ja.at("t").get<int>();
  arch.dim_c = ja.at("dim_c").get<int>();
  arch.dim_z = ja.at("dim_z").get<int>();
  arch.hidden = ja.at("hidden").get<std::array<int, 3>>();
  arch.validate();

  gan::GanConfig config;
  const json& jc = doc.at("config");
  config.epochs = jc.at("epochs").get<int>();
  config.critic_steps = jc.at("critic_steps").get<int>();
  config.lambda_gp = jc.at("lambda_gp").get<Real>();
  config.rate = jc.at("rate").get<Real>();
  config.beta1 = jc.at("beta1").get<Real>();
  config.beta2 = jc.at("beta2").get<Real>();
  config.dim_c = jc.at("dim_c").get<int>();
  config.dim_z = jc.at("dim_z").get<int>();
  config.hidden = jc.at("hidden").get<std::array<int, 3>>();
  config.batch_size = jc.at("batch_size").get<int>();
  config.seed = jc.at("seed").get<std::uint64_t>();

  GanCheckpoint out{arch, config, gan::Act2ActModel(arch, config.seed)};
  params_from_json(doc.at("params"), out.model.params, path);
  return out;
}

}  // namespace iat::ckpt
