// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/tensor.hpp"

#include <cstdint>
#include <vector>

namespace sqlgrpo::ad {

// Shapes follow row-major conventions: "rows" is every dimension but the
// last. Binary elementwise ops broadcast `b` over the leading dimensions of
// `a` when b's shape is a suffix of a's.

/// [..., k] x [k, n] -> [..., n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor exp(const Tensor& a);
Tensor relu(const Tensor& a);

Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Rows of `table` [V, d] at `ids` -> [n, d].
Tensor embedding(const Tensor& table, const std::vector<std::int64_t>& ids);
/// Concatenation along dimension 0 (axis = 0) or the last dimension (axis = -1).
Tensor concat(const std::vector<Tensor>& parts, int axis);
/// Rows [begin, end) of a rank-2 tensor.
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// [..., d] -> [...]
Tensor sum_last(const Tensor& a);
/// [n, d] -> [d]
Tensor mean_rows(const Tensor& a);

/// Inverted dropout; identity when !train or p == 0. The mask is a pure
/// function of `seed`.
Tensor dropout(const Tensor& a, double p, bool train, std::uint64_t seed);

/// Unit L2 norm along the last dimension. Zero rows stay zero.
Tensor l2_normalize(const Tensor& a);
/// Cosine along the last dimension: [..., d] x [..., d] -> [...]
Tensor cosine_similarity(const Tensor& a, const Tensor& b);
/// Per-row negative log-likelihood of `targets` under logits [n, V] -> [n].
Tensor cross_entropy(const Tensor& logits, const std::vector<std::int64_t>& targets);

/// Multi-head causal self-attention over q, k, v [T, d] with d divisible by
/// `heads`; row t attends to rows 0..t. -> [T, d]
Tensor causal_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads);

} // namespace sqlgrpo::ad
