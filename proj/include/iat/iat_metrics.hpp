#pragma once

#include "iat/act2act.hpp"
#include "iat/nn.hpp"
#include "iat/rng.hpp"
#include "iat/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace iat::metrics {

using FlatPair = std::pair<FlatAction, FlatAction>;

struct ClassifierConfig {
  int epochs = 60;
  Real rate = 1e-3;
  int batch_size = 32;  // <= 0 means full set
  std::array<int, 3> hidden = {32, 64, 96};

  void validate() const;
};

// Binary judge for (stimulation, response) pairs: the critic body with a
// sigmoid head. `training_tag` records which data trained it so scoring
// functions can assert the split between real and generated sources.
class PairClassifier {
 public:
  PairClassifier(const gan::GanArch& arch, std::uint64_t seed);

  ad::Var logit_graph(const ad::Var& stim, const ad::Var& resp, int batch) const;
  Real probability(const FlatAction& stim, const FlatAction& resp) const;
  int classify(const FlatAction& stim, const FlatAction& resp) const;  // threshold 0.5

  std::vector<ad::Var> params() const { return body_.params(); }
  const gan::GanArch& arch() const { return arch_; }

  const std::string& training_tag() const { return training_tag_; }
  void set_training_tag(std::string tag) { training_tag_ = std::move(tag); }

 private:
  gan::GanArch arch_;
  nn::ParamStore store_;
  Rng init_rng_;
  gan::PairDiscriminator body_;
  std::string training_tag_ = "untrained";
};

struct CvReport {
  std::vector<Real> folds;  // per-fold validation accuracy in [0,1]
  Real mean = 0;
  Real std_dev = 0;
};

struct ClassifierResult {
  PairClassifier classifier;
  CvReport cv;
};

// Stratified K-fold cross-validation first (the reference ceiling), then a
// refit on all data. `tag` is stamped on the returned classifier.
ClassifierResult train_pair_classifier(const std::vector<FlatPair>& pos,
                                       const std::vector<FlatPair>& neg, int kfolds,
                                       const ClassifierConfig& config, std::uint64_t seed,
                                       const std::string& tag = "real-pairs");

struct GeneratedPair {
  FlatAction stim;
  FlatAction resp;
  std::string stim_id;
  std::string stim_category;
  std::uint64_t seed = 0;  // noise seed that produced resp
};

struct GeneratedSet {
  std::vector<GeneratedPair> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
};

// per_stim responses per stimulation, each from a distinct derived seed.
GeneratedSet build_generated_set(const gan::Act2ActGenerator& g,
                                 const std::vector<EvalInstance>& stims, int per_stim,
                                 std::uint64_t seed);

// 100 x fraction of generated pairs the classifier accepts. The classifier
// must come from real pairs only; a generated-pair training tag is rejected.
Real iat_test(const PairClassifier& e, const GeneratedSet& bg);

// Trains a fresh judge with generated pairs as positives and real violations
// as negatives, then scores the (all-positive) training set A with it.
Real iat_train(const GeneratedSet& bg, const std::vector<FlatPair>& b_neg,
               const PairedSet& a, int kfolds, const ClassifierConfig& config,
               std::uint64_t seed);

}  // namespace iat::metrics
