#pragma once

#include "iat/act2act.hpp"
#include "iat/iat_metrics.hpp"
#include "iat/pvae.hpp"
#include "iat/synth.hpp"
#include "iat/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace iat::pipeline {

enum class AugmentMode { none, pe, reassign };

std::string to_string(AugmentMode mode);
AugmentMode augment_mode_from_string(const std::string& name);

// Confidence-matrix augmentation knobs: bandwidth scale, embedding dimension,
// and extra sampled pairs per original (output size N * (multiplier + 1)).
// d different from the training-time dimension refits the projection on the
// stored latent means at this d.
struct PeConfig {
  Real s = 0.1;
  int d = 3;
  int multiplier = 1;

  void validate() const;
};

// kfolds drives every cross-validated classifier fit. per_stim sizes the
// generated set scored by the training-side metric; the test-side metric
// always generates one response per held-out stimulation. max_per_class caps
// the positive/negative evaluation pairs derived from the held-out split.
struct EvalConfig {
  int kfolds = 5;
  int per_stim = 3;
  int max_per_class = 200;
  metrics::ClassifierConfig classifier;

  void validate() const;
};

struct ExperimentConfig {
  std::string source = "synth";  // "synth" | "manifest"
  SynthSpec synth;
  std::string manifest_path;  // required when source == "manifest"
  std::string rules_path;     // required when source == "manifest"

  Real split = 0.5;
  std::uint64_t seed = 17;  // split / pairing / evaluation streams

  pvae::PvaeTrainConfig pvae;
  PeConfig pe;
  gan::GanConfig gan;
  EvalConfig eval;
  AugmentMode mode = AugmentMode::pe;

  // Stage artifacts (checkpoints, histories, report) live here; empty runs
  // everything in memory with no resume.
  std::string artifact_dir;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& config, const std::string& path);

struct StageTiming {
  std::string stage;
  Real seconds = 0;
  bool resumed = false;  // loaded from an artifact instead of computed
};

struct ExperimentReport {
  std::string mode;
  int train_pairs = 0;      // size of set A
  int gan_train_pairs = 0;  // A plus whatever the mode added
  int eval_instances = 0;

  pvae::PvaeHistory pvae_history;  // empty outside pe mode
  bool has_fr = false;
  Real f = 0;  // stimulative-role effectiveness
  Real r = 0;  // stimulative-role reliability

  Real cv_mean = 0;  // real-pair classifier ceiling
  Real cv_std = 0;
  Real iat_test = 0;
  Real iat_train = 0;

  std::vector<StageTiming> timings;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::string> artifacts;  // files this run wrote or reused
};

void save_report(const ExperimentReport& report, const std::string& path);

// On-disk interchange for the CLI stages: a paired training set and a
// held-out evaluation set, both JSON with embedded flat-action matrices.
void save_paired_set(const PairedSet& set, const std::string& path);
PairedSet load_paired_set(const std::string& path);
void save_eval_set(const EvalSet& set, const std::string& path);
EvalSet load_eval_set(const std::string& path);

// Every rule-conformant re-pairing of A's instances: for each rule, the full
// cross product of A's stimulations of that stimulus category with A's
// responses of the mandated response category. Throws when labels are absent.
PairedSet reassign_pairs(const PairedSet& a_labeled, const InteractionRuleSet& rules);

// Rebuild a checkpointed paired-autoencoder fit against a training set: one
// eager encoder pass recreates the latent statistics a fresh fit reports
// (history stays empty; it lives in its own artifact).
pvae::PvaeResult restore_pvae(const std::string& checkpoint_path, const PairedSet& a);

struct PeAugmentation {
  PairedSet pairs;  // originals plus multiplier * |A| sampled pairs
  pe::NcMatrix nc_s;
  pe::NcMatrix nc_r;
  bool has_fr = false;  // labels were present
  Real f = 0;
  Real r = 0;
};

// Confidence-matrix augmentation of A under a trained fit: project the latent
// means (refit at config.d when it differs from the trained dimension), build
// per-role row-stochastic confidence matrices, draw replacement pairs, and
// report the stimulative-role diagnostics when A carries labels.
PeAugmentation augment_with_confidence(const pvae::PvaeResult& trained,
                                       const PairedSet& a, const PeConfig& config,
                                       std::uint64_t seed);

// load/synth -> split -> mode-specific augmentation -> adversarial training
// on originals plus augmented pairs -> evaluation. Heavy stages (paired
// autoencoders, generator) checkpoint under artifact_dir and are reloaded on
// rerun; errors carry the stage name.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace iat::pipeline
