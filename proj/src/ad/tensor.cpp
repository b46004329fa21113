// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/ad/tensor.hpp"

#include <unordered_set>

namespace sqlgrpo::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += (i ? ", " : "") + std::to_string(shape[i]);
    }
    return s + "]";
}

std::vector<double>& Node::grad_buffer() {
    if (grad.empty()) {
        grad.assign(value.size(), 0.0);
    }
    return grad;
}

Tensor Tensor::constant(Shape shape, std::vector<double> value) {
    if (ad::numel(shape) != value.size()) {
        throw ShapeError("tensor shape " + shape_string(shape) + " does not match " + std::to_string(value.size()) +
                         " values");
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape) {
    const auto n = ad::numel(shape);
    return constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> value) {
    Tensor t = constant(std::move(shape), std::move(value));
    t.node()->requires_grad = true;
    return t;
}

double Tensor::item() const {
    if (numel() != 1) {
        throw ShapeError("item() on tensor of shape " + shape_string(shape()));
    }
    return node_->value[0];
}

void backward(const Tensor& root) {
    if (root.numel() != 1) {
        throw ShapeError("backward root must have one element, got " + shape_string(root.shape()));
    }
    if (!root.requires_grad()) {
        return;
    }
    // Iterative post-order DFS: `order` ends up topologically sorted with
    // inputs before consumers.
    // Owning references keep interior nodes alive while consumers release
    // their inputs.
    std::vector<std::shared_ptr<Node>> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack{{root.shared(), 0}};
    visited.insert(root.node());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            const std::shared_ptr<Node>& child = node->inputs[next++];
            if (child->requires_grad && visited.insert(child.get()).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root.node()->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = it->get();
        if (n->backward) {
            if (!n->grad.empty()) {
                n->backward(*n);
            }
            n->backward = nullptr;
            n->inputs.clear();
            n->grad.clear();
            n->grad.shrink_to_fit();
        }
    }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Tensor make_result(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
                   std::function<void(Node&)> backward) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    if (g_grad_enabled) {
        bool any = false;
        for (const auto& t : inputs) {
            any = any || t.requires_grad();
        }
        if (any) {
            n->requires_grad = true;
            n->backward = std::move(backward);
            n->inputs.reserve(inputs.size());
            for (auto& t : inputs) {
                n->inputs.push_back(t.shared());
            }
        }
    }
    return Tensor(std::move(n));
}

} // namespace sqlgrpo::ad
