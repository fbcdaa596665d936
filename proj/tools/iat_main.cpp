#include "iat/checkpoint.hpp"
#include "iat/datasets.hpp"
#include "iat/manifest.hpp"
#include "iat/pipeline.hpp"
#include "iat/plots.hpp"
#include "iat/rng.hpp"
#include "iat/skeleton.hpp"
#include "iat/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iat;

namespace {

// Relative outputs land under IAT_ARTIFACT_ROOT when it is set.
std::string resolve_out(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const char* root = std::getenv("IAT_ARTIFACT_ROOT");
  if (!root || !*root) return path;
  return (fs::path(root) / path).string();
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string sibling(const std::string& path, const std::string& name) {
  return (fs::path(path).parent_path() / name).string();
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

void write_json_file(const json& j, const std::string& path, const std::string& what) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(what + ": cannot write " + path);
  out << j.dump(1, '\t') << '\n';
  if (!out) throw std::runtime_error(what + ": cannot write " + path);
}

std::array<int, 3> to_hidden(const std::vector<int>& v, const std::string& flag) {
  if (v.size() != 3)
    throw CLI::ValidationError(flag, "expects exactly three comma-separated sizes");
  return {v[0], v[1], v[2]};
}

void cmd_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "generate a synthetic corpus manifest");
  auto spec = std::make_shared<SynthSpec>();
  auto out = std::make_shared<std::string>("manifest.json");
  auto rules_out = std::make_shared<std::string>();
  cmd->add_option("--k", spec->k, "interaction rule count");
  cmd->add_option("--per-class", spec->per_class, "clips per category");
  cmd->add_option("--t", spec->t, "frames per clip");
  cmd->add_option("--amplitude-jitter", spec->amplitude_jitter, "per-clip amplitude spread");
  cmd->add_option("--speed-jitter", spec->speed_jitter, "per-clip frequency spread");
  cmd->add_option("--phase-jitter", spec->phase_jitter, "per-clip phase spread, radians");
  cmd->add_option("--seed", spec->seed, "corpus seed");
  cmd->add_option("--out", *out, "manifest output path");
  cmd->add_option("--rules-out", *rules_out, "rules output path (default: rules.json beside the manifest)");
  cmd->callback([spec, out, rules_out] {
    const std::string manifest_path = resolve_out(*out);
    const std::string rules_path =
        rules_out->empty() ? sibling(manifest_path, "rules.json") : resolve_out(*rules_out);
    SynthCorpus corpus = generate_synthetic(*spec);
    ensure_parent_dir(manifest_path);
    save_manifest({"synthetic", corpus.oracle.topology, 0, corpus.clips}, manifest_path);
    ensure_parent_dir(rules_path);
    save_rules(corpus.rules, rules_path);
    std::cout << "synth: " << corpus.clips.size() << " clips, " << corpus.rules.rule_count()
              << " rules -> " << manifest_path << ", " << rules_path << "\n";
  });
}

void cmd_ingest(CLI::App& app) {
  auto* cmd = app.add_subcommand("ingest", "load a manifest and build training/eval sets");
  struct Args {
    std::string manifest, rules, out = "sets";
    Real split = 0.5;
    std::uint64_t seed = 17;
    int max_per_class = 200;
    int t_out = 0;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--manifest", a->manifest, "clip manifest path")->required();
  cmd->add_option("--rules", a->rules, "interaction rules path")->required();
  cmd->add_option("--split", a->split, "training fraction");
  cmd->add_option("--seed", a->seed, "pairing seed");
  cmd->add_option("--max-per-class", a->max_per_class, "cap on derived pos/neg eval pairs");
  cmd->add_option("--t-out", a->t_out, "resample clips to this many frames (0: keep)");
  cmd->add_option("--out", a->out, "output directory");
  cmd->callback([a] {
    const Manifest manifest = load_manifest(a->manifest);
    const InteractionRuleSet rules = load_rules(a->rules);
    BuiltSets sets = build_sets(manifest.clips, manifest.topology, rules, a->split,
                                a->seed, a->t_out);
    derive_pos_neg(sets.b, rules, a->max_per_class, Rng(a->seed).fork(1).seed());
    const std::string dir = resolve_out(a->out);
    fs::create_directories(dir);
    pipeline::save_paired_set(sets.a, (fs::path(dir) / "pairs.json").string());
    pipeline::save_eval_set(sets.b, (fs::path(dir) / "eval.json").string());
    std::cout << "ingest: " << sets.a.size() << " training pairs, " << sets.b.size()
              << " eval instances (" << sets.b.pos_pairs.size() << " pos / "
              << sets.b.neg_pairs.size() << " neg) -> " << dir << "\n";
  });
}

void cmd_train_pvae(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-pvae", "fit the paired autoencoders on a pair set");
  struct Args {
    std::string pairs, out = "pvae_checkpoint.json";
    pvae::PvaeTrainConfig config;
    std::vector<int> hidden;
    bool no_pe = false;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--pairs", a->pairs, "directory holding pairs.json")->required();
  cmd->add_option("--epochs", a->config.epochs, "training epochs");
  cmd->add_option("--lkl", a->config.lambda_kl, "KL weight");
  cmd->add_option("--dim", a->config.d, "paired-embedding dimension");
  cmd->add_option("--rate", a->config.rate, "reconstruction step rate");
  cmd->add_option("--rate-pe", a->config.rate_pe, "paired step rate");
  cmd->add_option("--m", a->config.m, "latent width");
  cmd->add_option("--hidden", a->hidden, "encoder channel sizes, e.g. 64,128,256")
      ->delimiter(',');
  cmd->add_flag("--no-pe", a->no_pe, "disable the paired step (ablation)");
  cmd->add_option("--seed", a->config.seed, "training seed");
  cmd->add_option("--out", a->out, "checkpoint output path");
  cmd->callback([a] {
    const PairedSet pairs =
        pipeline::load_paired_set((fs::path(a->pairs) / "pairs.json").string());
    if (!a->hidden.empty()) a->config.hidden = to_hidden(a->hidden, "--hidden");
    a->config.pe_enabled = !a->no_pe;
    const pvae::PvaeResult result = pvae::train_pvaes(pairs, a->config);
    const std::string out = resolve_out(a->out);
    ensure_parent_dir(out);
    ckpt::save_pvae(result, a->config, out);
    write_json_file({{"vae_s", result.history.vae_s},
                     {"vae_r", result.history.vae_r},
                     {"pe", result.history.pe}},
                    sibling(out, fs::path(out).stem().string() + "_history.json"),
                    "pvae history");
    std::cout << "train-pvae: " << pairs.size() << " pairs, " << a->config.epochs
              << " epochs";
    if (!result.history.vae_s.empty())
      std::cout << ", final losses s=" << result.history.vae_s.back()
                << " r=" << result.history.vae_r.back();
    std::cout << " -> " << out << "\n";
  });
}

void cmd_augment(CLI::App& app) {
  auto* cmd = app.add_subcommand("augment", "confidence-matrix augmentation of a pair set");
  struct Args {
    std::string ckpt, pairs, out = "augmented";
    pipeline::PeConfig pe;
    std::uint64_t seed = 17;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--ckpt", a->ckpt, "paired-autoencoder checkpoint")->required();
  cmd->add_option("--pairs", a->pairs, "directory holding pairs.json")->required();
  cmd->add_option("--s", a->pe.s, "confidence bandwidth scale");
  cmd->add_option("--dim", a->pe.d, "embedding dimension");
  cmd->add_option("--mult", a->pe.multiplier, "sampled pairs per original");
  cmd->add_option("--seed", a->seed, "sampling seed");
  cmd->add_option("--out", a->out, "output directory");
  cmd->callback([a] {
    const PairedSet pairs =
        pipeline::load_paired_set((fs::path(a->pairs) / "pairs.json").string());
    const pvae::PvaeResult trained = pipeline::restore_pvae(a->ckpt, pairs);
    const pipeline::PeAugmentation aug =
        pipeline::augment_with_confidence(trained, pairs, a->pe, a->seed);
    const std::string dir = resolve_out(a->out);
    fs::create_directories(dir);
    pipeline::save_paired_set(aug.pairs, (fs::path(dir) / "pairs.json").string());
    json nc;
    nc["s"] = a->pe.s;
    nc["d"] = a->pe.d;
    nc["stimulative"] = mat_to_json(aug.nc_s.values);
    nc["responsive"] = mat_to_json(aug.nc_r.values);
    write_json_file(nc, (fs::path(dir) / "nc.json").string(), "confidence matrices");
    std::cout << "augment: " << pairs.size() << " -> " << aug.pairs.size() << " pairs";
    if (aug.has_fr) {
      write_json_file({{"f", aug.f}, {"r", aug.r}, {"s", a->pe.s}, {"d", a->pe.d}},
                      (fs::path(dir) / "fr.json").string(), "fr report");
      std::cout << ", F=" << aug.f << " R=" << aug.r;
    }
    std::cout << " -> " << dir << "\n";
  });
}

void cmd_train_act2act(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-act2act", "adversarial response-generator training");
  struct Args {
    std::string pairs, out = "act2act_checkpoint.json";
    gan::GanConfig config;
    std::vector<int> hidden;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--pairs", a->pairs, "directory holding pairs.json")->required();
  cmd->add_option("--epochs", a->config.epochs, "training epochs");
  cmd->add_option("--critic-steps", a->config.critic_steps, "critic updates per generator update");
  cmd->add_option("--lambda-gp", a->config.lambda_gp, "gradient penalty weight");
  cmd->add_option("--rate", a->config.rate, "optimizer rate");
  cmd->add_option("--dim-c", a->config.dim_c, "stimulus code width");
  cmd->add_option("--dim-z", a->config.dim_z, "noise width");
  cmd->add_option("--hidden", a->hidden, "channel sizes, e.g. 32,64,96")->delimiter(',');
  cmd->add_option("--batch", a->config.batch_size, "minibatch size (<=0: full set)");
  cmd->add_option("--seed", a->config.seed, "training seed");
  cmd->add_option("--out", a->out, "checkpoint output path");
  cmd->callback([a] {
    const PairedSet pairs =
        pipeline::load_paired_set((fs::path(a->pairs) / "pairs.json").string());
    if (!a->hidden.empty()) a->config.hidden = to_hidden(a->hidden, "--hidden");
    const gan::GanResult result = gan::train_act2act(pairs, a->config);
    const std::string out = resolve_out(a->out);
    ensure_parent_dir(out);
    ckpt::save_gan(result, a->config, out);
    write_json_file({{"critic", result.history.critic},
                     {"generator", result.history.generator},
                     {"loss_terms", result.history.loss_terms}},
                    sibling(out, fs::path(out).stem().string() + "_history.json"),
                    "gan history");
    std::cout << "train-act2act: " << pairs.size() << " pairs, " << a->config.epochs
              << " epochs -> " << out << "\n";
  });
}

void cmd_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand("generate", "sample responses for manifest clips");
  struct Args {
    std::string ckpt, input, out = "generated";
    int samples = 3;
    std::uint64_t seed = 7;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--ckpt", a->ckpt, "generator checkpoint")->required();
  cmd->add_option("--input", a->input, "manifest of stimulus clips")->required();
  cmd->add_option("--samples", a->samples, "responses per clip");
  cmd->add_option("--seed", a->seed, "noise seed root");
  cmd->add_option("--out", a->out, "output directory");
  cmd->callback([a] {
    if (a->samples < 1) throw CLI::ValidationError("--samples", "must be >= 1");
    const ckpt::GanCheckpoint loaded = ckpt::load_gan(a->ckpt);
    const Manifest manifest = load_manifest(a->input);
    const std::string dir = resolve_out(a->out);
    fs::create_directories(dir);
    const Rng root(a->seed);

    json table = json::array();
    Manifest rendered{"generated responses", manifest.topology, manifest.fps, {}};
    int produced = 0;
    for (size_t i = 0; i < manifest.clips.size(); ++i) {
      const ActionClip& clip = manifest.clips[i];
      const FlatAction stim =
          flatten_clip(clip, manifest.topology, loaded.model.arch.t);
      const LimbSequence stim_limbs = joints_to_limbs(
          resample_temporal(clip, loaded.model.arch.t), manifest.topology);
      for (int k = 0; k < a->samples; ++k) {
        const std::uint64_t seed =
            root.fork(i * static_cast<size_t>(a->samples) + k + 1).seed();
        const FlatAction resp =
            gan::generate_response(loaded.model.generator(), stim, seed);
        table.push_back({{"stim_id", clip.id}, {"seed", seed}, {"response", mat_to_json(resp)}});
        LimbSequence limbs = from_flat(resp, manifest.topology);
        limbs.limb_lengths = stim_limbs.limb_lengths;
        ActionClip out_clip = limbs_to_joints(
            limbs, limbs.limb_lengths, Mat::Zero(resp.rows(), 3));
        out_clip.id = clip.id + "_resp_" + std::to_string(k);
        out_clip.role = Role::responsive;
        rendered.clips.push_back(std::move(out_clip));
        ++produced;
      }
    }
    write_json_file(table, (fs::path(dir) / "generated.json").string(), "generated set");
    save_manifest(rendered, (fs::path(dir) / "generated_manifest.json").string());
    std::cout << "generate: " << produced << " responses -> " << dir << "\n";
  });
}

void cmd_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "score a generator with the paired metrics");
  struct Args {
    std::string gen_ckpt, eval_set, out = "report.json";
    int kfolds = 5;
    int per_stim = 3;
    metrics::ClassifierConfig classifier;
    std::uint64_t seed = 17;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--gen-ckpt", a->gen_ckpt, "generator checkpoint")->required();
  cmd->add_option("--eval-set", a->eval_set, "directory from ingest (pairs.json + eval.json)")
      ->required();
  cmd->add_option("--kfolds", a->kfolds, "cross-validation folds");
  cmd->add_option("--per-stim", a->per_stim, "generated responses per stimulation (training-side metric)");
  cmd->add_option("--cls-epochs", a->classifier.epochs, "classifier epochs");
  cmd->add_option("--cls-rate", a->classifier.rate, "classifier rate");
  cmd->add_option("--seed", a->seed, "evaluation seed");
  cmd->add_option("--out", a->out, "report output path");
  cmd->callback([a] {
    const ckpt::GanCheckpoint loaded = ckpt::load_gan(a->gen_ckpt);
    const PairedSet pairs =
        pipeline::load_paired_set((fs::path(a->eval_set) / "pairs.json").string());
    const EvalSet b = pipeline::load_eval_set((fs::path(a->eval_set) / "eval.json").string());

    const Rng root(a->seed);
    const std::uint64_t classifier_seed = root.fork(3).seed();
    const std::uint64_t bg_test_seed = root.fork(4).seed();
    const std::uint64_t bg_train_seed = root.fork(5).seed();
    const std::uint64_t iat_train_seed = root.fork(6).seed();

    const auto b_pos = b.materialize(b.pos_pairs);
    const auto b_neg = b.materialize(b.neg_pairs);
    const metrics::ClassifierResult judge = metrics::train_pair_classifier(
        b_pos, b_neg, a->kfolds, a->classifier, classifier_seed);

    std::vector<EvalInstance> stims;
    for (const EvalInstance& inst : b.instances)
      if (inst.role == Role::stimulative) stims.push_back(inst);

    const metrics::GeneratedSet bg_test = metrics::build_generated_set(
        loaded.model.generator(), stims, 1, bg_test_seed);
    const Real iat_test = metrics::iat_test(judge.classifier, bg_test);
    const metrics::GeneratedSet bg_train = metrics::build_generated_set(
        loaded.model.generator(), stims, a->per_stim, bg_train_seed);
    const Real iat_train = metrics::iat_train(bg_train, b_neg, pairs, a->kfolds,
                                              a->classifier, iat_train_seed);

    json report;
    report["cv_mean"] = judge.cv.mean;
    report["cv_std"] = judge.cv.std_dev;
    report["iat_test"] = iat_test;
    report["iat_train"] = iat_train;
    report["config"] = {{"gen_ckpt", a->gen_ckpt},
                        {"eval_set", a->eval_set},
                        {"kfolds", a->kfolds},
                        {"per_stim", a->per_stim},
                        {"classifier",
                         {{"epochs", a->classifier.epochs},
                          {"rate", a->classifier.rate},
                          {"batch_size", a->classifier.batch_size}}}};
    report["seeds"] = {{"evaluate", a->seed},
                       {"classifier", classifier_seed},
                       {"bg_test", bg_test_seed},
                       {"bg_train", bg_train_seed},
                       {"iat_train", iat_train_seed}};
    const std::string out = resolve_out(a->out);
    write_json_file(report, out, "evaluation report");
    std::cout << "evaluate: cv_mean=" << judge.cv.mean << " iat_test=" << iat_test
              << " iat_train=" << iat_train << " -> " << out << "\n";
  });
}

void cmd_run(CLI::App& app) {
  auto* cmd = app.add_subcommand("run", "full experiment from a config file");
  struct Args {
    std::string config;
    std::string artifacts;
    std::uint64_t seed = 0;
    bool seed_set = false;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--config", a->config, "experiment config JSON")->required();
  cmd->add_option("--artifacts", a->artifacts, "artifact directory (overrides config)");
  cmd->add_option("--seed", a->seed, "override the experiment seed")
      ->each([a](const std::string&) { a->seed_set = true; });
  cmd->callback([a] {
    pipeline::ExperimentConfig config = pipeline::load_experiment_config(a->config);
    if (!a->artifacts.empty()) config.artifact_dir = a->artifacts;
    config.artifact_dir = resolve_out(config.artifact_dir);
    if (a->seed_set) config.seed = a->seed;
    const pipeline::ExperimentReport report = pipeline::run_experiment(config);
    std::cout << "run[" << report.mode << "]: pairs=" << report.train_pairs
              << " gan_pairs=" << report.gan_train_pairs
              << " cv_mean=" << report.cv_mean << " iat_test=" << report.iat_test
              << " iat_train=" << report.iat_train;
    if (report.has_fr) std::cout << " F=" << report.f << " R=" << report.r;
    std::cout << "\n";
    for (const pipeline::StageTiming& t : report.timings)
      std::cout << "  stage " << t.stage << ": " << t.seconds << "s"
                << (t.resumed ? " (resumed)" : "") << "\n";
    if (!config.artifact_dir.empty())
      std::cout << "  report: " << (fs::path(config.artifact_dir) / "report.json").string()
                << "\n";
  });
}

void cmd_plot(CLI::App& app) {
  auto* cmd = app.add_subcommand("plot", "render skeleton grids, embeddings, or F/R curves");
  struct Args {
    std::string kind;
    std::string manifest, ckpt, pairs, out = "plot.svg";
    std::string role = "stimulative";
    std::vector<std::string> ids;
    int samples = 8;
    std::vector<Real> s_grid{0.01, 0.05, 0.1, 0.5, 1.0};
    std::vector<int> d_grid{1, 2, 3};
    Real s_fixed = 0.1;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--kind", a->kind, "skeleton | embeddings | fr")->required();
  cmd->add_option("--manifest", a->manifest, "clip manifest (skeleton)");
  cmd->add_option("--ids", a->ids, "clip ids to draw (default: all)")->delimiter(',');
  cmd->add_option("--samples", a->samples, "frames sampled per clip (skeleton)");
  cmd->add_option("--ckpt", a->ckpt, "paired-autoencoder checkpoint (embeddings, fr)");
  cmd->add_option("--pairs", a->pairs, "directory holding pairs.json (embeddings, fr)");
  cmd->add_option("--role", a->role, "stimulative | responsive (embeddings)");
  cmd->add_option("--s-grid", a->s_grid, "bandwidth sweep (fr)")->delimiter(',');
  cmd->add_option("--d-grid", a->d_grid, "dimension sweep (fr)")->delimiter(',');
  cmd->add_option("--s", a->s_fixed, "bandwidth held fixed during the dimension sweep (fr)");
  cmd->add_option("--out", a->out, "SVG output path");
  cmd->callback([a] {
    const std::string out = resolve_out(a->out);
    ensure_parent_dir(out);
    if (a->kind == "skeleton") {
      if (a->manifest.empty())
        throw CLI::ValidationError("--manifest", "required for skeleton plots");
      const Manifest manifest = load_manifest(a->manifest);
      std::vector<ActionClip> clips;
      if (a->ids.empty()) {
        clips = manifest.clips;
      } else {
        for (const std::string& id : a->ids) {
          bool found = false;
          for (const ActionClip& c : manifest.clips)
            if (c.id == id) {
              clips.push_back(c);
              found = true;
              break;
            }
          if (!found) throw std::runtime_error("plot: no clip with id '" + id + "'");
        }
      }
      plots::render_skeleton_grid(clips, manifest.topology, a->samples, out);
      std::cout << "plot: " << clips.size() << " clips -> " << out << "\n";
      return;
    }
    if (a->ckpt.empty() || a->pairs.empty())
      throw CLI::ValidationError("--ckpt/--pairs", "required for embeddings and fr plots");
    const PairedSet pairs =
        pipeline::load_paired_set((fs::path(a->pairs) / "pairs.json").string());
    const pvae::PvaeResult trained = pipeline::restore_pvae(a->ckpt, pairs);
    if (a->kind == "embeddings") {
      const bool stim_side = a->role == "stimulative";
      if (!stim_side && a->role != "responsive")
        throw CLI::ValidationError("--role", "must be stimulative or responsive");
      std::vector<std::string> labels;
      for (const ActionPair& p : pairs.pairs)
        labels.push_back(stim_side ? p.stim_category : p.resp_category);
      const Mat embeddings = stim_side ? pe::project_all(trained.p_s, trained.mu_s)
                                       : pe::project_all(trained.p_r, trained.mu_r);
      const Real silhouette = plots::plot_embeddings(embeddings, labels, out);
      std::cout << "plot: silhouette=" << silhouette << " -> " << out << "\n";
      return;
    }
    if (a->kind == "fr") {
      std::vector<std::string> labels;
      for (const ActionPair& p : pairs.pairs) labels.push_back(p.stim_category);
      plots::plot_fr_curves(trained, labels, a->s_grid, a->d_grid, a->s_fixed, out);
      std::cout << "plot: " << a->s_grid.size() + a->d_grid.size() << " grid points -> "
                << out << " (+ " << out << ".json)\n";
      return;
    }
    throw CLI::ValidationError("--kind", "must be skeleton, embeddings, or fr");
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interactive action translation: augmentation, training, evaluation"};
  app.require_subcommand(1);
  cmd_synth(app);
  cmd_ingest(app);
  cmd_train_pvae(app);
  cmd_augment(app);
  cmd_train_act2act(app);
  cmd_generate(app);
  cmd_evaluate(app);
  cmd_run(app);
  cmd_plot(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "iat: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
