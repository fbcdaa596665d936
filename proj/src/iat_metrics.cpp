#include "iat/iat_metrics.hpp"

#include "iat/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace iat::metrics {
namespace {

void ensure_finite(Real v, int epoch, const char* label) {
  if (!std::isfinite(v))
    throw std::runtime_error("pair classifier training diverged at epoch " +
                             std::to_string(epoch) + " (" + std::string(label) + ")");
}

gan::GanArch arch_from(const FlatPair& pair, const ClassifierConfig& config) {
  gan::GanArch arch;
  arch.t = static_cast<int>(pair.first.rows());
  arch.channels = static_cast<int>(pair.first.cols());
  arch.hidden = config.hidden;
  arch.validate();
  return arch;
}

void check_shapes(const std::vector<FlatPair>& pairs, const gan::GanArch& arch,
                  const char* name) {
  for (const auto& [s, r] : pairs)
    if (s.rows() != arch.t || s.cols() != arch.channels || r.rows() != arch.t ||
        r.cols() != arch.channels)
      throw std::invalid_argument(std::string(name) +
                                  ": pair shape disagrees with the first pair");
}

struct LabeledPairs {
  std::vector<FlatPair> pairs;
  std::vector<Real> labels;
};

// One full training run of a fresh classifier on the given labeled pairs.
void fit(PairClassifier& e, const LabeledPairs& data, const ClassifierConfig& config,
         Rng& order_rng) {
  const int n = static_cast<int>(data.pairs.size());
  const gan::GanArch& arch = e.arch();
  const int bs = config.batch_size <= 0 ? n : std::min(config.batch_size, n);
  nn::Adam opt(e.params(), config.rate);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (int start = 0; start < n; start += bs) {
      const int b = std::min(bs, n - start);
      std::vector<FlatAction> stims(b), resps(b);
      Mat y(1, b);
      for (int i = 0; i < b; ++i) {
        const int idx = order[start + i];
        stims[i] = data.pairs[idx].first;
        resps[i] = data.pairs[idx].second;
        y(0, i) = data.labels[idx];
      }
      ad::Var stim = ad::constant(nn::pack_batch(stims));
      ad::Var resp = ad::constant(nn::pack_batch(resps));
      ad::Var logits = e.logit_graph(stim, resp, b);
      ad::Var loss = ad::smul(Real(1) / b, ad::sum(ad::softplus(logits) -
                                                   ad::cmul(ad::constant(y), logits)));
      ensure_finite(ad::scalar_value(loss), epoch, "bce");
      opt.step(ad::gradients(loss, e.params()));
    }
  }
}

Real accuracy(const PairClassifier& e, const LabeledPairs& data) {
  int correct = 0;
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    const int predicted = e.classify(data.pairs[i].first, data.pairs[i].second);
    if (predicted == static_cast<int>(data.labels[i])) ++correct;
  }
  return static_cast<Real>(correct) / static_cast<Real>(data.pairs.size());
}

}  // namespace

void ClassifierConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("classifier config: epochs must be >= 1");
  if (rate <= 0) throw std::invalid_argument("classifier config: rate must be positive");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("classifier config: hidden dims must be >= 1");
}

PairClassifier::PairClassifier(const gan::GanArch& arch, std::uint64_t seed)
    : arch_(arch), init_rng_(seed), body_(arch_, store_, "e", init_rng_) {
  arch_.validate();
}

ad::Var PairClassifier::logit_graph(const ad::Var& stim, const ad::Var& resp,
                                    int batch) const {
  return body_.forward_graph(stim, resp, batch);
}

Real PairClassifier::probability(const FlatAction& stim, const FlatAction& resp) const {
  const Real logit = body_.forward(stim, resp);
  return logit >= 0 ? 1 / (1 + std::exp(-logit))
                    : std::exp(logit) / (1 + std::exp(logit));
}

int PairClassifier::classify(const FlatAction& stim, const FlatAction& resp) const {
  return probability(stim, resp) > 0.5 ? 1 : 0;
}

ClassifierResult train_pair_classifier(const std::vector<FlatPair>& pos,
                                       const std::vector<FlatPair>& neg, int kfolds,
                                       const ClassifierConfig& config, std::uint64_t seed,
                                       const std::string& tag) {
  config.validate();
  if (pos.empty() || neg.empty())
    throw std::invalid_argument("train_pair_classifier: empty class");
  if (kfolds < 2) throw std::invalid_argument("train_pair_classifier: kfolds must be >= 2");
  if (static_cast<int>(pos.size()) < kfolds || static_cast<int>(neg.size()) < kfolds)
    throw std::invalid_argument(
        "train_pair_classifier: a class has fewer samples than folds");

  const gan::GanArch arch = arch_from(pos[0], config);
  check_shapes(pos, arch, "train_pair_classifier");
  check_shapes(neg, arch, "train_pair_classifier");

  Rng root(seed);
  // stratified folds: shuffle within each class, then deal round-robin
  std::vector<int> pos_order(pos.size()), neg_order(neg.size());
  std::iota(pos_order.begin(), pos_order.end(), 0);
  std::iota(neg_order.begin(), neg_order.end(), 0);
  Rng split_rng = root.fork(1);
  split_rng.shuffle(pos_order);
  split_rng.shuffle(neg_order);

  CvReport cv;
  for (int f = 0; f < kfolds; ++f) {
    LabeledPairs train, val;
    for (std::size_t i = 0; i < pos_order.size(); ++i) {
      LabeledPairs& dst = static_cast<int>(i) % kfolds == f ? val : train;
      dst.pairs.push_back(pos[pos_order[i]]);
      dst.labels.push_back(1);
    }
    for (std::size_t i = 0; i < neg_order.size(); ++i) {
      LabeledPairs& dst = static_cast<int>(i) % kfolds == f ? val : train;
      dst.pairs.push_back(neg[neg_order[i]]);
      dst.labels.push_back(0);
    }
    PairClassifier fold_e(arch, root.fork(10 + f).seed());
    Rng order_rng = root.fork(100 + f);
    fit(fold_e, train, config, order_rng);
    cv.folds.push_back(accuracy(fold_e, val));
  }
  cv.mean = std::accumulate(cv.folds.begin(), cv.folds.end(), Real(0)) /
            static_cast<Real>(cv.folds.size());
  Real var = 0;
  for (Real a : cv.folds) var += (a - cv.mean) * (a - cv.mean);
  cv.std_dev = std::sqrt(var / static_cast<Real>(cv.folds.size()));

  LabeledPairs all;
  for (const auto& p : pos) {
    all.pairs.push_back(p);
    all.labels.push_back(1);
  }
  for (const auto& p : neg) {
    all.pairs.push_back(p);
    all.labels.push_back(0);
  }
  ClassifierResult result{PairClassifier(arch, root.fork(2).seed()), std::move(cv)};
  Rng order_rng = root.fork(3);
  fit(result.classifier, all, config, order_rng);
  result.classifier.set_training_tag(tag);
  return result;
}

GeneratedSet build_generated_set(const gan::Act2ActGenerator& g,
                                 const std::vector<EvalInstance>& stims, int per_stim,
                                 std::uint64_t seed) {
  if (per_stim < 1)
    throw std::invalid_argument("build_generated_set: per_stim must be >= 1");
  Rng root(seed);
  GeneratedSet out;
  out.pairs.reserve(stims.size() * static_cast<std::size_t>(per_stim));
  for (std::size_t i = 0; i < stims.size(); ++i) {
    for (int r = 0; r < per_stim; ++r) {
      const std::uint64_t noise_seed =
          root.fork(i * static_cast<std::size_t>(per_stim) + r + 1).seed();
      GeneratedPair pair;
      pair.stim = stims[i].action;
      pair.resp = gan::generate_response(g, stims[i].action, noise_seed);
      pair.stim_id = stims[i].id;
      pair.stim_category = stims[i].category;
      pair.seed = noise_seed;
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

Real iat_test(const PairClassifier& e, const GeneratedSet& bg) {
  if (bg.pairs.empty()) throw std::invalid_argument("iat_test: empty generated set");
  if (e.training_tag().find("generated") != std::string::npos)
    throw std::logic_error(
        "iat_test: classifier was trained on generated pairs; it must only see "
        "real pairs before scoring");
  int positive = 0;
  for (const auto& p : bg.pairs) positive += e.classify(p.stim, p.resp);
  return 100.0 * static_cast<Real>(positive) / static_cast<Real>(bg.pairs.size());
}

Real iat_train(const GeneratedSet& bg, const std::vector<FlatPair>& b_neg,
               const PairedSet& a, int kfolds, const ClassifierConfig& config,
               std::uint64_t seed) {
  if (a.pairs.empty()) throw std::invalid_argument("iat_train: empty reference set");
  std::vector<FlatPair> pos;
  pos.reserve(bg.pairs.size());
  for (const auto& p : bg.pairs) pos.emplace_back(p.stim, p.resp);
  ClassifierResult trained =
      train_pair_classifier(pos, b_neg, kfolds, config, seed, "generated-pairs");
  int positive = 0;
  for (const auto& p : a.pairs) positive += trained.classifier.classify(p.stim, p.resp);
  return 100.0 * static_cast<Real>(positive) / static_cast<Real>(a.pairs.size());
}

}  // namespace iat::metrics
