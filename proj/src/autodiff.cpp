#include "iat/autodiff.hpp"

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace iat::ad {
namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("autodiff: ") + what);
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string("autodiff: shape mismatch in ") + op + ": " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
}

}  // namespace

Var::Var(Mat value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

const Mat& Var::value() const {
  check(defined(), "use of undefined Var");
  return node_->value;
}

bool Var::requires_grad() const { return defined() && node_->requires_grad; }

Var Var::detach() const { return constant(value()); }

Var make_op(Mat value, std::vector<Var> parents,
            std::vector<std::function<Var(const Var&)>> pulls) {
  Var out(std::move(value), false);
  for (const Var& p : parents)
    if (p.requires_grad()) out.node_->requires_grad = true;
  out.node_->parents = std::move(parents);
  out.node_->pulls = std::move(pulls);
  return out;
}

std::vector<Var> gradients(const Var& root, const std::vector<Var>& wrt, const Var& seed) {
  check(root.defined(), "gradients of undefined Var");
  // reverse topological order over the reachable differentiable subgraph
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  if (root.requires_grad()) stack.emplace_back(root.node(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next == 0 && seen.count(node)) {
      stack.pop_back();
      continue;
    }
    seen.insert(node);
    bool descended = false;
    while (next < node->parents.size()) {
      Node* parent = node->parents[next].node();
      ++next;
      if (parent && parent->requires_grad && !seen.count(parent)) {
        stack.emplace_back(parent, 0);
        descended = true;
        break;
      }
    }
    if (!descended && next >= node->parents.size()) {
      order.push_back(node);
      stack.pop_back();
    }
  }

  std::unordered_map<Node*, Var> grad;
  if (root.requires_grad()) {
    grad[root.node()] =
        seed.defined() ? seed : constant(Mat::Ones(root.rows(), root.cols()));
    check(grad[root.node()].rows() == root.rows() && grad[root.node()].cols() == root.cols(),
          "seed shape mismatch");
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    auto found = grad.find(node);
    if (found == grad.end()) continue;
    const Var g = found->second;
    for (size_t i = 0; i < node->parents.size(); ++i) {
      const Var& parent = node->parents[i];
      if (!parent.requires_grad() || !node->pulls[i]) continue;
      Var piece = node->pulls[i](g);
      auto slot = grad.find(parent.node());
      if (slot == grad.end())
        grad.emplace(parent.node(), piece);
      else
        slot->second = add(slot->second, piece);
    }
  }

  std::vector<Var> out;
  out.reserve(wrt.size());
  for (const Var& w : wrt) {
    auto it = grad.find(w.node());
    out.push_back(it != grad.end() ? it->second
                                   : constant(Mat::Zero(w.rows(), w.cols())));
  }
  return out;
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return make_op(a.value() + b.value(), {a, b},
                 {[](const Var& g) { return g; }, [](const Var& g) { return g; }});
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return make_op(a.value() - b.value(), {a, b},
                 {[](const Var& g) { return g; }, [](const Var& g) { return neg(g); }});
}

Var neg(const Var& a) {
  return make_op(-a.value(), {a}, {[](const Var& g) { return neg(g); }});
}

Var cmul(const Var& a, const Var& b) {
  check_same_shape(a, b, "cmul");
  return make_op(a.value().cwiseProduct(b.value()), {a, b},
                 {[b](const Var& g) { return cmul(g, b); },
                  [a](const Var& g) { return cmul(g, a); }});
}

Var cdiv(const Var& a, const Var& b) {
  check_same_shape(a, b, "cdiv");
  return make_op(a.value().cwiseQuotient(b.value()), {a, b},
                 {[b](const Var& g) { return cdiv(g, b); },
                  [a, b](const Var& g) {
                    return neg(cdiv(cmul(g, a), cmul(b, b)));
                  }});
}

Var smul(Real c, const Var& a) {
  return make_op(c * a.value(), {a}, {[c](const Var& g) { return smul(c, g); }});
}

Var add_scalar(const Var& a, Real c) {
  return make_op(a.value().array() + c, {a}, {[](const Var& g) { return g; }});
}

Var matmul(const Var& a, const Var& b) {
  check(a.cols() == b.rows(), "inner dimension mismatch in matmul");
  return make_op(a.value() * b.value(), {a, b},
                 {[b](const Var& g) { return matmul(g, transpose(b)); },
                  [a](const Var& g) { return matmul(transpose(a), g); }});
}

Var transpose(const Var& a) {
  return make_op(a.value().transpose(), {a},
                 {[](const Var& g) { return transpose(g); }});
}

Var sum(const Var& a) {
  const int r = a.rows(), c = a.cols();
  return make_op(Mat::Constant(1, 1, a.value().sum()), {a},
                 {[r, c](const Var& g) { return repscalar(g, r, c); }});
}

Var rowsum(const Var& a) {
  const int c = a.cols();
  return make_op(a.value().rowwise().sum(), {a},
                 {[c](const Var& g) { return repcols(g, c); }});
}

Var colsum(const Var& a) {
  const int r = a.rows();
  return make_op(a.value().colwise().sum(), {a},
                 {[r](const Var& g) { return reprows(g, r); }});
}

Var repcols(const Var& a, int n) {
  check(a.cols() == 1, "repcols needs a column vector");
  return make_op(a.value().replicate(1, n), {a},
                 {[](const Var& g) { return rowsum(g); }});
}

Var reprows(const Var& a, int n) {
  check(a.rows() == 1, "reprows needs a row vector");
  return make_op(a.value().replicate(n, 1), {a},
                 {[](const Var& g) { return colsum(g); }});
}

Var repscalar(const Var& a, int r, int c) {
  check(a.rows() == 1 && a.cols() == 1, "repscalar needs a 1x1");
  return make_op(Mat::Constant(r, c, a.value()(0, 0)), {a},
                 {[](const Var& g) { return sum(g); }});
}

Var vexp(const Var& a) {
  return make_op(a.value().array().exp(), {a},
                 {[a](const Var& g) { return cmul(g, vexp(a)); }});
}

Var vlog(const Var& a) {
  return make_op(a.value().array().log(), {a},
                 {[a](const Var& g) { return cdiv(g, a); }});
}

Var vtanh(const Var& a) {
  return make_op(a.value().array().tanh(), {a}, {[a](const Var& g) {
                   Var t = vtanh(a);
                   return cmul(g, sub(constant(Mat::Ones(a.rows(), a.cols())),
                                      cmul(t, t)));
                 }});
}

Var sigmoid(const Var& a) {
  Mat v = (1.0 / (1.0 + (-a.value().array()).exp()));
  return make_op(std::move(v), {a}, {[a](const Var& g) {
                   Var s = sigmoid(a);
                   return cmul(g, cmul(s, sub(constant(Mat::Ones(a.rows(), a.cols())), s)));
                 }});
}

Var softplus(const Var& a) {
  // log(1 + e^x), stable form x_+ + log1p(e^{-|x|})
  Mat v = a.value().array().max(0.0) + (-a.value().array().abs()).exp().log1p();
  return make_op(std::move(v), {a},
                 {[a](const Var& g) { return cmul(g, sigmoid(a)); }});
}

Var leaky_relu(const Var& a, Real slope) {
  Mat mask = (a.value().array() > 0.0).select(Mat::Ones(a.rows(), a.cols()),
                                              Mat::Constant(a.rows(), a.cols(), slope));
  Mat v = a.value().cwiseProduct(mask);
  // the mask is constant almost everywhere, so it re-enters the graph as data
  return make_op(std::move(v), {a}, {[mask](const Var& g) {
                   return cmul(g, constant(mask));
                 }});
}

Var powc(const Var& a, Real exponent) {
  return make_op(a.value().array().pow(exponent), {a},
                 {[a, exponent](const Var& g) {
                   return cmul(g, smul(exponent, powc(a, exponent - 1)));
                 }});
}

Var gather_cols(const Var& a, std::vector<int> indices) {
  Mat v(a.rows(), static_cast<int>(indices.size()));
  for (size_t j = 0; j < indices.size(); ++j) {
    const int src = indices[j];
    check(src < a.cols(), "gather index out of range");
    if (src < 0)
      v.col(j).setZero();
    else
      v.col(j) = a.value().col(src);
  }
  const int cols = a.cols();
  return make_op(std::move(v), {a}, {[indices, cols](const Var& g) {
                   return scatter_cols(g, indices, cols);
                 }});
}

Var scatter_cols(const Var& a, std::vector<int> indices, int out_cols) {
  check(static_cast<int>(indices.size()) == a.cols(),
        "scatter needs one index per column");
  Mat v = Mat::Zero(a.rows(), out_cols);
  for (size_t j = 0; j < indices.size(); ++j) {
    const int dst = indices[j];
    check(dst < out_cols, "scatter index out of range");
    if (dst >= 0) v.col(dst) += a.value().col(j);
  }
  return make_op(std::move(v), {a}, {[indices](const Var& g) {
                   return gather_cols(g, indices);
                 }});
}

Var reshape(const Var& a, int r, int c) {
  check(static_cast<long>(r) * c == static_cast<long>(a.rows()) * a.cols(),
        "reshape size mismatch");
  Mat v = Eigen::Map<const Mat>(a.value().data(), r, c);
  const int pr = a.rows(), pc = a.cols();
  return make_op(std::move(v), {a},
                 {[pr, pc](const Var& g) { return reshape(g, pr, pc); }});
}

Var vcat(const Var& a, const Var& b) {
  check(a.cols() == b.cols(), "vcat column mismatch");
  Mat v(a.rows() + b.rows(), a.cols());
  v.topRows(a.rows()) = a.value();
  v.bottomRows(b.rows()) = b.value();
  const int ra = a.rows(), rb = b.rows();
  return make_op(std::move(v), {a, b},
                 {[ra](const Var& g) { return slice_rows(g, 0, ra); },
                  [ra, rb](const Var& g) { return slice_rows(g, ra, rb); }});
}

Var slice_rows(const Var& a, int start, int n) {
  check(start >= 0 && n >= 1 && start + n <= a.rows(), "slice_rows out of range");
  Mat v = a.value().middleRows(start, n);
  const int above = start, below = a.rows() - start - n, cols = a.cols();
  return make_op(std::move(v), {a}, {[above, below, cols](const Var& g) {
                   Var out = g;
                   if (above > 0) out = vcat(constant(Mat::Zero(above, cols)), out);
                   if (below > 0) out = vcat(out, constant(Mat::Zero(below, cols)));
                   return out;
                 }});
}

}  // namespace iat::ad
