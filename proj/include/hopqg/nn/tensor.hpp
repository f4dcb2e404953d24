#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace hopqg::nn {

// Row-major 2-D shape. Vectors are 1 x n (row) or n x 1 (column); scalars 1 x 1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  BackwardFn backward;  // empty for leaves
};

// Handle to a node of the computation graph. Copies share the node; leaves
// created with requires_grad accumulate gradients across backward() calls.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(std::size_t rows, std::size_t cols, bool requires_grad = false);
  static Tensor full(std::size_t rows, std::size_t cols, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor row(std::vector<double> values, bool requires_grad = false);

  // Records an operation; the result is a constant (no parents kept) when
  // recording is disabled or no parent requires gradients.
  static Tensor make(Shape shape, std::vector<double> value, std::vector<Tensor> parents, BackwardFn fn);

  bool defined() const { return node_ != nullptr; }
  Shape shape() const { return node_->shape; }
  std::size_t rows() const { return node_->shape.rows; }
  std::size_t cols() const { return node_->shape.cols; }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> values() const { return node_->value; }
  // Meant for leaves (parameters, inputs); editing an interior value does not
  // invalidate recorded backward closures.
  std::span<double> mutable_values() { return node_->value; }
  double operator()(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  void zero_grad();

  // Reverse-mode sweep from a 1 x 1 output. Interior gradients are reset on
  // every call; leaf gradients accumulate. Throws NonScalarOutput.
  void backward() const;

  Node* node() const { return node_.get(); }
  const NodePtr& node_ptr() const { return node_; }

 private:
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

}  // namespace hopqg::nn
