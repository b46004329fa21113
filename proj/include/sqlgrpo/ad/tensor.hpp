// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/common/error.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sqlgrpo::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Operand shapes are incompatible with the op.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// One value in the dynamic graph. Interior nodes hold a backward closure that
/// reads `grad` and accumulates into the grads of `inputs`.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward;

    /// Zero-filled grad buffer, allocated on demand.
    std::vector<double>& grad_buffer();
};

/// Shared handle to a graph node. Copies alias the same storage.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

    static Tensor constant(Shape shape, std::vector<double> value);
    static Tensor zeros(Shape shape);
    /// Leaf whose gradient is kept across backward passes.
    static Tensor parameter(Shape shape, std::vector<double> value);
    static Tensor scalar(double v) { return constant({}, {v}); }

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    /// Last dimension (1 for scalars).
    std::size_t cols() const { return node_->shape.empty() ? 1 : node_->shape.back(); }
    /// Product of all dimensions but the last.
    std::size_t rows() const { return numel() / cols(); }
    std::size_t numel() const { return node_->value.size(); }

    const std::vector<double>& value() const { return node_->value; }
    std::vector<double>& value() { return node_->value; }
    const std::vector<double>& grad() const { return node_->grad; }
    std::vector<double>& grad() { return node_->grad_buffer(); }
    bool requires_grad() const { return node_->requires_grad; }
    double item() const;
    void zero_grad() { node_->grad.clear(); }

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& shared() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

/// Reverse pass from a single-element root. Accumulates into parameter grads
/// and releases the graph behind the root.
void backward(const Tensor& root);

/// Disables graph construction in its scope (inference).
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

/// Builds an op result. The node joins the graph only when grads are enabled
/// and some input requires them.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward);

} // namespace sqlgrpo::ad
