#pragma once

#include "iat/types.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace iat::ad {

// Reverse-mode automatic differentiation on dense matrices. Every value is a
// Mat (scalars are 1x1). Each vjp is itself built from the ops below, so
// gradients() returns differentiable Vars and gradients of gradients work;
// that property carries the critic's gradient penalty.

struct Node;

class Var {
 public:
  Var() = default;
  explicit Var(Mat value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  bool requires_grad() const;

  // same value, cut out of the graph
  Var detach() const;

  Node* node() const { return node_.get(); }

 private:
  friend Var make_op(Mat, std::vector<Var>, std::vector<std::function<Var(const Var&)>>);
  std::shared_ptr<Node> node_;
};

struct Node {
  Mat value;
  std::vector<Var> parents;
  // pulls[i] maps the upstream gradient to parent i's contribution;
  // null for non-differentiable parents
  std::vector<std::function<Var(const Var&)>> pulls;
  bool requires_grad = false;
};

Var make_op(Mat value, std::vector<Var> parents,
            std::vector<std::function<Var(const Var&)>> pulls);

inline Var constant(Mat value) { return Var(std::move(value), false); }
inline Var scalar(Real v) { return constant(Mat::Constant(1, 1, v)); }

// d(root)/d(wrt), seeded with d(root)/d(root) = seed (default: all ones).
// Returned Vars stay differentiable with respect to the original leaves.
// Leaves outside root's graph get zero gradients of their own shape.
std::vector<Var> gradients(const Var& root, const std::vector<Var>& wrt,
                           const Var& seed = {});

// arithmetic
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var neg(const Var& a);
Var cmul(const Var& a, const Var& b);  // elementwise
Var cdiv(const Var& a, const Var& b);  // elementwise
Var smul(Real c, const Var& a);
Var add_scalar(const Var& a, Real c);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

// reductions and broadcasts
Var sum(const Var& a);                    // 1x1
Var rowsum(const Var& a);                 // R x 1
Var colsum(const Var& a);                 // 1 x C
Var repcols(const Var& a, int n);         // R x 1 -> R x n
Var reprows(const Var& a, int n);         // 1 x C -> n x C
Var repscalar(const Var& a, int r, int c);  // 1x1 -> r x c

// elementwise nonlinearities
Var vexp(const Var& a);
Var vlog(const Var& a);
Var vtanh(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a);
Var leaky_relu(const Var& a, Real slope);
Var powc(const Var& a, Real exponent);  // elementwise a^exponent

// structure
// columns picked by index; index -1 yields a zero column (zero padding)
Var gather_cols(const Var& a, std::vector<int> indices);
// adjoint of gather: out_cols columns, a's column j accumulated into
// indices[j]; -1 entries dropped
Var scatter_cols(const Var& a, std::vector<int> indices, int out_cols);
Var reshape(const Var& a, int r, int c);  // column-major relayout
Var vcat(const Var& a, const Var& b);
Var slice_rows(const Var& a, int start, int n);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator*(Real c, const Var& a) { return smul(c, a); }

inline Real scalar_value(const Var& v) { return v.value()(0, 0); }

}  // namespace iat::ad
