#include "iat/pipeline.hpp"

#include "iat/checkpoint.hpp"
#include "iat/datasets.hpp"
#include "iat/manifest.hpp"
#include "iat/pe.hpp"
#include "iat/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace iat::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::none: return "none";
    case AugmentMode::pe: return "pe";
    case AugmentMode::reassign: return "reassign";
  }
  throw std::invalid_argument("pipeline: unknown augmentation mode");
}

AugmentMode augment_mode_from_string(const std::string& name) {
  if (name == "none") return AugmentMode::none;
  if (name == "pe") return AugmentMode::pe;
  if (name == "reassign") return AugmentMode::reassign;
  throw std::invalid_argument("pipeline: unknown augmentation mode '" + name + "'");
}

void PeConfig::validate() const {
  if (s <= 0) throw std::invalid_argument("pe config: s must be positive");
  if (d < 1) throw std::invalid_argument("pe config: d must be >= 1");
  if (multiplier < 0) throw std::invalid_argument("pe config: multiplier must be >= 0");
}

void EvalConfig::validate() const {
  if (kfolds < 2) throw std::invalid_argument("eval config: kfolds must be >= 2");
  if (per_stim < 1) throw std::invalid_argument("eval config: per_stim must be >= 1");
  if (max_per_class < 1)
    throw std::invalid_argument("eval config: max_per_class must be >= 1");
  classifier.validate();
}

void ExperimentConfig::validate() const {
  if (source != "synth" && source != "manifest")
    throw std::invalid_argument("experiment config: source must be synth or manifest");
  if (source == "synth") {
    synth.validate();
  } else {
    if (manifest_path.empty() || rules_path.empty())
      throw std::invalid_argument(
          "experiment config: manifest source needs manifest_path and rules_path");
  }
  if (!(split > 0 && split < 1))
    throw std::invalid_argument("experiment config: split must lie in (0, 1)");
  pvae.validate();
  pe.validate();
  gan.validate();
  eval.validate();
}

namespace {

template <class T, size_t N>
json array_to_json(const std::array<T, N>& a) {
  json out = json::array();
  for (const T& v : a) out.push_back(v);
  return out;
}

template <class T, size_t N>
void array_from_json(const json& j, std::array<T, N>& a, const std::string& key) {
  if (!j.is_array() || j.size() != N)
    throw std::runtime_error("experiment config: " + key + " must be an array of " +
                             std::to_string(N));
  for (size_t i = 0; i < N; ++i) a[i] = j[i].get<T>();
}

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

json vec_to_json(const std::vector<Real>& v) {
  json out = json::array();
  for (Real x : v) out.push_back(x);
  return out;
}

std::vector<Real> vec_from_json(const json& j) {
  std::vector<Real> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(x.get<Real>());
  return out;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["source"] = c.source;
  j["synth"] = {{"k", c.synth.k},
                {"per_class", c.synth.per_class},
                {"t", c.synth.t},
                {"amplitude_jitter", c.synth.amplitude_jitter},
                {"speed_jitter", c.synth.speed_jitter},
                {"phase_jitter", c.synth.phase_jitter},
                {"seed", c.synth.seed}};
  j["manifest_path"] = c.manifest_path;
  j["rules_path"] = c.rules_path;
  j["split"] = c.split;
  j["seed"] = c.seed;
  j["pvae"] = {{"epochs", c.pvae.epochs},   {"lambda_kl", c.pvae.lambda_kl},
               {"d", c.pvae.d},             {"rate", c.pvae.rate},
               {"rate_pe", c.pvae.rate_pe}, {"m", c.pvae.m},
               {"hidden", array_to_json(c.pvae.hidden)},
               {"pe_enabled", c.pvae.pe_enabled},
               {"seed", c.pvae.seed}};
  j["pe"] = {{"s", c.pe.s}, {"d", c.pe.d}, {"multiplier", c.pe.multiplier}};
  j["gan"] = {{"epochs", c.gan.epochs},
              {"critic_steps", c.gan.critic_steps},
              {"lambda_gp", c.gan.lambda_gp},
              {"rate", c.gan.rate},
              {"beta1", c.gan.beta1},
              {"beta2", c.gan.beta2},
              {"dim_c", c.gan.dim_c},
              {"dim_z", c.gan.dim_z},
              {"hidden", array_to_json(c.gan.hidden)},
              {"batch_size", c.gan.batch_size},
              {"seed", c.gan.seed}};
  j["eval"] = {{"kfolds", c.eval.kfolds},
               {"per_stim", c.eval.per_stim},
               {"max_per_class", c.eval.max_per_class},
               {"classifier",
                {{"epochs", c.eval.classifier.epochs},
                 {"rate", c.eval.classifier.rate},
                 {"batch_size", c.eval.classifier.batch_size},
                 {"hidden", array_to_json(c.eval.classifier.hidden)}}}};
  j["mode"] = to_string(c.mode);
  j["artifact_dir"] = c.artifact_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.source = j.value("source", c.source);
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    c.synth.k = s.value("k", c.synth.k);
    c.synth.per_class = s.value("per_class", c.synth.per_class);
    c.synth.t = s.value("t", c.synth.t);
    c.synth.amplitude_jitter = s.value("amplitude_jitter", c.synth.amplitude_jitter);
    c.synth.speed_jitter = s.value("speed_jitter", c.synth.speed_jitter);
    c.synth.phase_jitter = s.value("phase_jitter", c.synth.phase_jitter);
    c.synth.seed = s.value("seed", c.synth.seed);
  }
  c.manifest_path = j.value("manifest_path", c.manifest_path);
  c.rules_path = j.value("rules_path", c.rules_path);
  c.split = j.value("split", c.split);
  c.seed = j.value("seed", c.seed);
  if (j.contains("pvae")) {
    const json& p = j.at("pvae");
    c.pvae.epochs = p.value("epochs", c.pvae.epochs);
    c.pvae.lambda_kl = p.value("lambda_kl", c.pvae.lambda_kl);
    c.pvae.d = p.value("d", c.pvae.d);
    c.pvae.rate = p.value("rate", c.pvae.rate);
    c.pvae.rate_pe = p.value("rate_pe", c.pvae.rate_pe);
    c.pvae.m = p.value("m", c.pvae.m);
    if (p.contains("hidden")) array_from_json(p.at("hidden"), c.pvae.hidden, "pvae.hidden");
    c.pvae.pe_enabled = p.value("pe_enabled", c.pvae.pe_enabled);
    c.pvae.seed = p.value("seed", c.pvae.seed);
  }
  if (j.contains("pe")) {
    const json& p = j.at("pe");
    c.pe.s = p.value("s", c.pe.s);
    c.pe.d = p.value("d", c.pe.d);
    c.pe.multiplier = p.value("multiplier", c.pe.multiplier);
  }
  if (j.contains("gan")) {
    const json& g = j.at("gan");
    c.gan.epochs = g.value("epochs", c.gan.epochs);
    c.gan.critic_steps = g.value("critic_steps", c.gan.critic_steps);
    c.gan.lambda_gp = g.value("lambda_gp", c.gan.lambda_gp);
    c.gan.rate = g.value("rate", c.gan.rate);
    c.gan.beta1 = g.value("beta1", c.gan.beta1);
    c.gan.beta2 = g.value("beta2", c.gan.beta2);
    c.gan.dim_c = g.value("dim_c", c.gan.dim_c);
    c.gan.dim_z = g.value("dim_z", c.gan.dim_z);
    if (g.contains("hidden")) array_from_json(g.at("hidden"), c.gan.hidden, "gan.hidden");
    c.gan.batch_size = g.value("batch_size", c.gan.batch_size);
    c.gan.seed = g.value("seed", c.gan.seed);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    c.eval.kfolds = e.value("kfolds", c.eval.kfolds);
    c.eval.per_stim = e.value("per_stim", c.eval.per_stim);
    c.eval.max_per_class = e.value("max_per_class", c.eval.max_per_class);
    if (e.contains("classifier")) {
      const json& cl = e.at("classifier");
      c.eval.classifier.epochs = cl.value("epochs", c.eval.classifier.epochs);
      c.eval.classifier.rate = cl.value("rate", c.eval.classifier.rate);
      c.eval.classifier.batch_size = cl.value("batch_size", c.eval.classifier.batch_size);
      if (cl.contains("hidden"))
        array_from_json(cl.at("hidden"), c.eval.classifier.hidden, "classifier.hidden");
    }
  }
  if (j.contains("mode")) c.mode = augment_mode_from_string(j.at("mode").get<std::string>());
  c.artifact_dir = j.value("artifact_dir", c.artifact_dir);
  return c;
}

Mat mat_from_json(const json& j, const std::string& path) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<int>(data.size()) != rows * cols)
    throw std::runtime_error("paired set: matrix shape mismatch in " + path);
  Mat m(rows, cols);
  int i = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[i++].get<Real>();
  return m;
}

json load_json_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(what + ": cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(what + ": malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::string& path, const std::string& what) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(what + ": cannot write " + path);
  out << j.dump(1, '\t') << '\n';
  if (!out) throw std::runtime_error(what + ": cannot write " + path);
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  ExperimentConfig c = config_from_json(load_json_file(path, "experiment config"));
  c.validate();
  return c;
}

void save_experiment_config(const ExperimentConfig& config, const std::string& path) {
  write_json_file(config_to_json(config), path, "experiment config");
}

void save_report(const ExperimentReport& report, const std::string& path) {
  json j;
  j["mode"] = report.mode;
  j["train_pairs"] = report.train_pairs;
  j["gan_train_pairs"] = report.gan_train_pairs;
  j["eval_instances"] = report.eval_instances;
  j["pvae_history"] = {{"vae_s", vec_to_json(report.pvae_history.vae_s)},
                       {"vae_r", vec_to_json(report.pvae_history.vae_r)},
                       {"pe", vec_to_json(report.pvae_history.pe)}};
  if (report.has_fr) {
    j["f"] = report.f;
    j["r"] = report.r;
  }
  j["cv_mean"] = report.cv_mean;
  j["cv_std"] = report.cv_std;
  j["iat_test"] = report.iat_test;
  j["iat_train"] = report.iat_train;
  json timings = json::array();
  for (const StageTiming& t : report.timings)
    timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}, {"resumed", t.resumed}});
  j["timings"] = std::move(timings);
  json seeds = json::object();
  for (const auto& [name, value] : report.seeds) seeds[name] = value;
  j["seeds"] = std::move(seeds);
  j["artifacts"] = report.artifacts;
  write_json_file(j, path, "experiment report");
}

void save_paired_set(const PairedSet& set, const std::string& path) {
  set.validate();
  json j;
  j["kind"] = "paired-set";
  json pairs = json::array();
  for (const ActionPair& p : set.pairs)
    pairs.push_back({{"stim", mat_to_json(p.stim)},
                     {"resp", mat_to_json(p.resp)},
                     {"stim_category", p.stim_category},
                     {"resp_category", p.resp_category},
                     {"provenance",
                      p.provenance == Provenance::original ? "original" : "augmented"}});
  j["pairs"] = std::move(pairs);
  write_json_file(j, path, "paired set");
}

PairedSet load_paired_set(const std::string& path) {
  const json j = load_json_file(path, "paired set");
  if (j.value("kind", "") != "paired-set")
    throw std::runtime_error("paired set: " + path + " is not a paired-set file");
  PairedSet set;
  for (const json& p : j.at("pairs")) {
    ActionPair pair;
    pair.stim = mat_from_json(p.at("stim"), path);
    pair.resp = mat_from_json(p.at("resp"), path);
    pair.stim_category = p.value("stim_category", "");
    pair.resp_category = p.value("resp_category", "");
    pair.provenance = p.value("provenance", "original") == "augmented"
                          ? Provenance::augmented
                          : Provenance::original;
    set.pairs.push_back(std::move(pair));
  }
  set.validate();
  return set;
}

void save_eval_set(const EvalSet& set, const std::string& path) {
  json j;
  j["kind"] = "eval-set";
  json instances = json::array();
  for (const EvalInstance& inst : set.instances)
    instances.push_back({{"action", mat_to_json(inst.action)},
                         {"id", inst.id},
                         {"category", inst.category},
                         {"role", to_string(inst.role)}});
  j["instances"] = std::move(instances);
  j["pos_pairs"] = set.pos_pairs;
  j["neg_pairs"] = set.neg_pairs;
  write_json_file(j, path, "eval set");
}

EvalSet load_eval_set(const std::string& path) {
  const json j = load_json_file(path, "eval set");
  if (j.value("kind", "") != "eval-set")
    throw std::runtime_error("eval set: " + path + " is not an eval-set file");
  EvalSet set;
  for (const json& i : j.at("instances")) {
    EvalInstance inst;
    inst.action = mat_from_json(i.at("action"), path);
    inst.id = i.value("id", "");
    inst.category = i.value("category", "");
    const std::string role = i.value("role", "stimulative");
    if (role != "stimulative" && role != "responsive")
      throw std::runtime_error("eval set: unknown role '" + role + "' in " + path);
    inst.role = role == "stimulative" ? Role::stimulative : Role::responsive;
    set.instances.push_back(std::move(inst));
  }
  const int n = set.size();
  auto read_pairs = [&](const char* key) {
    std::vector<std::pair<int, int>> out;
    for (const json& p : j.at(key)) {
      const int s = p.at(0).get<int>();
      const int r = p.at(1).get<int>();
      if (s < 0 || s >= n || r < 0 || r >= n)
        throw std::runtime_error("eval set: pair index out of range in " + path);
      out.emplace_back(s, r);
    }
    return out;
  };
  set.pos_pairs = read_pairs("pos_pairs");
  set.neg_pairs = read_pairs("neg_pairs");
  return set;
}

namespace {

// One eager encoder pass per role over the training pairs; mirrors the
// post-training pass a fresh fit reports, so resumed runs see identical
// latent statistics.
void encode_set(const pvae::PvaePair& pair, const PairedSet& a, Mat& mu_s, Mat& sigma_s,
                Mat& mu_r, Mat& sigma_r) {
  const int n = a.size();
  const int m = pair.arch.m;
  mu_s.resize(m, n);
  sigma_s.resize(m, n);
  mu_r.resize(m, n);
  sigma_r.resize(m, n);
  for (int i = 0; i < n; ++i) {
    auto [ms, ss] = pair.vae_s().encode(a.pairs[i].stim);
    auto [mr, sr] = pair.vae_r().encode(a.pairs[i].resp);
    mu_s.col(i) = ms;
    sigma_s.col(i) = ss;
    mu_r.col(i) = mr;
    sigma_r.col(i) = sr;
  }
}

}  // namespace

pvae::PvaeResult restore_pvae(const std::string& checkpoint_path, const PairedSet& a) {
  ckpt::PvaeCheckpoint loaded = ckpt::load_pvae(checkpoint_path);
  pvae::PvaeResult out{std::move(loaded.pair), {}, Mat(), Mat(), Mat(), Mat(),
                       loaded.p_s, loaded.p_r};
  encode_set(out.pair, a, out.mu_s, out.sigma_s, out.mu_r, out.sigma_r);
  return out;
}

PeAugmentation augment_with_confidence(const pvae::PvaeResult& trained,
                                       const PairedSet& a, const PeConfig& config,
                                       std::uint64_t seed) {
  config.validate();
  const pe::PcaProjection p_s = config.d == trained.p_s.d
                                    ? trained.p_s
                                    : pe::fit_pca(trained.mu_s, config.d);
  const pe::PcaProjection p_r = config.d == trained.p_r.d
                                    ? trained.p_r
                                    : pe::fit_pca(trained.mu_r, config.d);
  PeAugmentation out;
  out.nc_s = pe::row_normalize(
      pe::compute_confidence(pe::project_all(p_s, trained.mu_s), trained.sigma_s, p_s,
                             config.s),
      Role::stimulative);
  out.nc_r = pe::row_normalize(
      pe::compute_confidence(pe::project_all(p_r, trained.mu_r), trained.sigma_r, p_r,
                             config.s),
      Role::responsive);
  if (a.labeled()) {
    std::vector<std::string> stim_labels;
    stim_labels.reserve(a.pairs.size());
    for (const ActionPair& p : a.pairs) stim_labels.push_back(p.stim_category);
    out.has_fr = true;
    out.f = pe::effectiveness(out.nc_s);
    out.r = pe::reliability(out.nc_s, stim_labels);
  }
  out.pairs = pe::sample_augmented_pairs(a, out.nc_s, out.nc_r, config.multiplier, seed);
  return out;
}

PairedSet reassign_pairs(const PairedSet& a_labeled, const InteractionRuleSet& rules) {
  if (a_labeled.pairs.empty())
    throw std::invalid_argument("reassign: paired set is empty");
  if (!a_labeled.labeled())
    throw std::invalid_argument("reassign: paired set lacks category labels");
  rules.validate();
  a_labeled.validate();

  std::map<std::string, std::vector<int>> stims_by_cat;
  std::map<std::string, std::vector<int>> resps_by_cat;
  for (size_t i = 0; i < a_labeled.pairs.size(); ++i) {
    const ActionPair& p = a_labeled.pairs[i];
    if (!rules.is_rule(p.stim_category, p.resp_category))
      throw std::invalid_argument("reassign: pair " + std::to_string(i) +
                                  " violates the rules (" + p.stim_category + " -> " +
                                  p.resp_category + ")");
    stims_by_cat[p.stim_category].push_back(static_cast<int>(i));
    resps_by_cat[p.resp_category].push_back(static_cast<int>(i));
  }

  PairedSet out;
  for (const auto& [stim_cat, resp_cat] : rules.rules) {
    auto si = stims_by_cat.find(stim_cat);
    auto ri = resps_by_cat.find(resp_cat);
    if (si == stims_by_cat.end() || ri == resps_by_cat.end()) continue;
    for (int s : si->second)
      for (int r : ri->second)
        out.pairs.push_back({a_labeled.pairs[s].stim, a_labeled.pairs[r].resp,
                             s == r ? Provenance::original : Provenance::augmented,
                             stim_cat, resp_cat});
  }
  return out;
}

namespace {

struct StageRunner {
  ExperimentReport& report;

  template <class F>
  auto operator()(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    bool resumed = false;
    try {
      if constexpr (std::is_void_v<decltype(f(resumed))>) {
        f(resumed);
        finish(name, start, resumed);
      } else {
        auto out = f(resumed);
        finish(name, start, resumed);
        return out;
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + name + ": " + e.what());
    }
  }

  void finish(const std::string& name,
              std::chrono::steady_clock::time_point start, bool resumed) {
    const std::chrono::duration<Real> dt = std::chrono::steady_clock::now() - start;
    report.timings.push_back({name, dt.count(), resumed});
  }
};

// Artifact bookkeeping: path layout, existence checks, and the report's file
// list. Inactive (empty root) skips all persistence.
struct ArtifactStore {
  std::string root;
  ExperimentReport* report = nullptr;

  bool active() const { return !root.empty(); }
  std::string path(const std::string& name) const {
    return (fs::path(root) / name).string();
  }
  bool has(const std::string& name) const {
    return active() && fs::exists(path(name));
  }
  void record(const std::string& name) {
    report->artifacts.push_back(path(name));
  }
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  ExperimentReport report;
  report.mode = to_string(config.mode);

  Rng root(config.seed);
  const std::uint64_t posneg_seed = root.fork(1).seed();
  const std::uint64_t augment_seed = root.fork(2).seed();
  const std::uint64_t classifier_seed = root.fork(3).seed();
  const std::uint64_t bg_test_seed = root.fork(4).seed();
  const std::uint64_t bg_train_seed = root.fork(5).seed();
  const std::uint64_t iat_train_seed = root.fork(6).seed();
  report.seeds = {{"experiment", config.seed}, {"split", config.seed},
                  {"pos_neg", posneg_seed},    {"pvae", config.pvae.seed},
                  {"augment", augment_seed},   {"gan", config.gan.seed},
                  {"classifier", classifier_seed},
                  {"bg_test", bg_test_seed},   {"bg_train", bg_train_seed},
                  {"iat_train", iat_train_seed}};

  StageRunner stage{report};
  ArtifactStore art{config.artifact_dir, &report};

  if (art.active()) {
    stage("artifacts", [&](bool& resumed) {
      fs::create_directories(art.root);
      const std::string cfg_path = art.path("config.json");
      const json current = config_to_json(config);
      if (fs::exists(cfg_path)) {
        if (load_json_file(cfg_path, "experiment config") != current)
          throw std::invalid_argument("artifact dir " + art.root +
                                      " belongs to a different config");
        resumed = true;
      } else {
        write_json_file(current, cfg_path, "experiment config");
      }
      art.record("config.json");
    });
  }

  struct Data {
    std::vector<ActionClip> clips;
    SkeletonTopology topology;
    InteractionRuleSet rules;
  };
  Data data = stage("data", [&](bool&) {
    Data d;
    if (config.source == "synth") {
      SynthCorpus corpus = generate_synthetic(config.synth);
      d.clips = std::move(corpus.clips);
      d.topology = corpus.oracle.topology;
      d.rules = std::move(corpus.rules);
    } else {
      Manifest m = load_manifest(config.manifest_path);
      d.clips = std::move(m.clips);
      d.topology = m.topology;
      d.rules = load_rules(config.rules_path);
    }
    if (art.active()) {
      const std::string rules_path = art.path("rules.json");
      if (!fs::exists(rules_path)) save_rules(d.rules, rules_path);
      art.record("rules.json");
    }
    return d;
  });

  BuiltSets sets = stage("split", [&](bool&) {
    BuiltSets s = build_sets(data.clips, data.topology, data.rules, config.split,
                             config.seed);
    derive_pos_neg(s.b, data.rules, config.eval.max_per_class, posneg_seed);
    return s;
  });
  report.train_pairs = sets.a.size();
  report.eval_instances = sets.b.size();

  PairedSet gan_train;
  if (config.mode == AugmentMode::pe) {
    pvae::PvaeResult trained = stage("pvae", [&](bool& resumed) {
      const std::string ckpt = "pvae_checkpoint.json";
      const std::string hist = "pvae_history.json";
      if (art.has(ckpt)) {
        pvae::PvaeResult out = restore_pvae(art.path(ckpt), sets.a);
        if (art.has(hist)) {
          const json h = load_json_file(art.path(hist), "pvae history");
          out.history.vae_s = vec_from_json(h.at("vae_s"));
          out.history.vae_r = vec_from_json(h.at("vae_r"));
          out.history.pe = vec_from_json(h.at("pe"));
        }
        resumed = true;
        art.record(ckpt);
        art.record(hist);
        return out;
      }
      pvae::PvaeResult out = pvae::train_pvaes(sets.a, config.pvae);
      if (art.active()) {
        ckpt::save_pvae(out, config.pvae, art.path(ckpt));
        write_json_file({{"vae_s", vec_to_json(out.history.vae_s)},
                         {"vae_r", vec_to_json(out.history.vae_r)},
                         {"pe", vec_to_json(out.history.pe)}},
                        art.path(hist), "pvae history");
        art.record(ckpt);
        art.record(hist);
      }
      return out;
    });
    report.pvae_history = trained.history;

    gan_train = stage("augment", [&](bool&) {
      PeAugmentation aug =
          augment_with_confidence(trained, sets.a, config.pe, augment_seed);
      report.has_fr = aug.has_fr;
      report.f = aug.f;
      report.r = aug.r;
      if (art.active()) {
        json nc;
        nc["s"] = config.pe.s;
        nc["d"] = config.pe.d;
        nc["stimulative"] = mat_to_json(aug.nc_s.values);
        nc["responsive"] = mat_to_json(aug.nc_r.values);
        if (aug.has_fr) {
          nc["f"] = aug.f;
          nc["r"] = aug.r;
        }
        write_json_file(nc, art.path("nc.json"), "confidence matrices");
        art.record("nc.json");
      }
      return std::move(aug.pairs);
    });
  } else if (config.mode == AugmentMode::reassign) {
    gan_train = stage("augment", [&](bool&) {
      return reassign_pairs(sets.a, data.rules);
    });
  } else {
    gan_train = sets.a;
  }
  report.gan_train_pairs = gan_train.size();

  gan::GanResult adversarial = stage("gan", [&](bool& resumed) {
    const std::string ckpt = "gan_checkpoint.json";
    const std::string hist = "gan_history.json";
    if (art.has(ckpt)) {
      ckpt::GanCheckpoint loaded = ckpt::load_gan(art.path(ckpt));
      gan::GanHistory history;
      if (art.has(hist)) {
        const json h = load_json_file(art.path(hist), "gan history");
        history.critic = vec_from_json(h.at("critic"));
        history.generator = vec_from_json(h.at("generator"));
        for (const auto& term : h.at("loss_terms"))
          history.loss_terms.push_back(term.get<std::string>());
      }
      resumed = true;
      art.record(ckpt);
      art.record(hist);
      return gan::GanResult{std::move(loaded.model), std::move(history)};
    }
    gan::GanResult out = gan::train_act2act(gan_train, config.gan);
    if (art.active()) {
      ckpt::save_gan(out, config.gan, art.path(ckpt));
      write_json_file({{"critic", vec_to_json(out.history.critic)},
                       {"generator", vec_to_json(out.history.generator)},
                       {"loss_terms", out.history.loss_terms}},
                      art.path(hist), "gan history");
      art.record(ckpt);
      art.record(hist);
    }
    return out;
  });

  stage("eval", [&](bool&) {
    const auto b_pos = sets.b.materialize(sets.b.pos_pairs);
    const auto b_neg = sets.b.materialize(sets.b.neg_pairs);
    metrics::ClassifierResult judge = metrics::train_pair_classifier(
        b_pos, b_neg, config.eval.kfolds, config.eval.classifier, classifier_seed);
    report.cv_mean = judge.cv.mean;
    report.cv_std = judge.cv.std_dev;

    std::vector<EvalInstance> stims;
    for (const EvalInstance& inst : sets.b.instances)
      if (inst.role == Role::stimulative) stims.push_back(inst);

    const metrics::GeneratedSet bg_test = metrics::build_generated_set(
        adversarial.model.generator(), stims, 1, bg_test_seed);
    report.iat_test = metrics::iat_test(judge.classifier, bg_test);

    const metrics::GeneratedSet bg_train = metrics::build_generated_set(
        adversarial.model.generator(), stims, config.eval.per_stim, bg_train_seed);
    report.iat_train = metrics::iat_train(bg_train, b_neg, sets.a, config.eval.kfolds,
                                          config.eval.classifier, iat_train_seed);
  });

  if (art.active()) {
    stage("report", [&](bool&) {
      art.record("report.json");
      save_report(report, art.path("report.json"));
    });
  }
  return report;
}

}  // namespace iat::pipeline
