// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/ad/ops.hpp"

#include "sqlgrpo/common/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqlgrpo::ad {

namespace {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

CMapR cmap(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return CMapR(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
MapR map(std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return MapR(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

/// Grad buffer of input i, or nullptr when that input needs none.
std::vector<double>* input_grad(Node& self, std::size_t i) {
    Node& in = *self.inputs[i];
    return in.requires_grad ? &in.grad_buffer() : nullptr;
}

const std::vector<double>& input_value(Node& self, std::size_t i) { return self.inputs[i]->value; }

/// Number of times b repeats across a for suffix broadcasting.
std::size_t broadcast_repeats(const Tensor& a, const Tensor& b, const char* op) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sb.size() > sa.size() || !std::equal(sb.begin(), sb.end(), sa.end() - static_cast<long>(sb.size()))) {
        throw ShapeError(std::string(op) + ": cannot broadcast " + shape_string(sb) + " onto " + shape_string(sa));
    }
    return a.numel() / std::max<std::size_t>(b.numel(), 1);
}

Tensor unary_map(const Tensor& a, double (*f)(double), double (*df)(double x, double y)) {
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = f(a.value()[i]);
    }
    return make_result(a.shape(), std::move(out), {a}, [df](Node& self) {
        auto* ga = input_grad(self, 0);
        const auto& x = input_value(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            (*ga)[i] += self.grad[i] * df(x[i], self.value[i]);
        }
    });
}

Shape drop_last(const Shape& s) { return s.empty() ? s : Shape(s.begin(), s.end() - 1); }

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() < 1 || b.rank() != 2 || a.cols() != b.dim(0)) {
        throw ShapeError("matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.dim(1);
    std::vector<double> out(m * n);
    map(out, m, n).noalias() = cmap(a.value(), m, k) * cmap(b.value(), k, n);
    Shape shape = a.shape();
    shape.back() = n;
    return make_result(std::move(shape), std::move(out), {a, b}, [m, k, n](Node& self) {
        const auto g = cmap(self.grad, m, n);
        if (auto* ga = input_grad(self, 0)) {
            map(*ga, m, k).noalias() += g * cmap(input_value(self, 1), k, n).transpose();
        }
        if (auto* gb = input_grad(self, 1)) {
            map(*gb, k, n).noalias() += cmap(input_value(self, 0), m, k).transpose() * g;
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    const std::size_t reps = broadcast_repeats(a, b, "add");
    const std::size_t nb = b.numel();
    std::vector<double> out(a.value());
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t j = 0; j < nb; ++j) {
            out[r * nb + j] += b.value()[j];
        }
    }
    return make_result(a.shape(), std::move(out), {a, b}, [reps, nb](Node& self) {
        if (auto* ga = input_grad(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
        }
        if (auto* gb = input_grad(self, 1)) {
            for (std::size_t r = 0; r < reps; ++r) {
                for (std::size_t j = 0; j < nb; ++j) (*gb)[j] += self.grad[r * nb + j];
            }
        }
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    const std::size_t reps = broadcast_repeats(a, b, "sub");
    const std::size_t nb = b.numel();
    std::vector<double> out(a.value());
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t j = 0; j < nb; ++j) {
            out[r * nb + j] -= b.value()[j];
        }
    }
    return make_result(a.shape(), std::move(out), {a, b}, [reps, nb](Node& self) {
        if (auto* ga = input_grad(self, 0)) {
            for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
        }
        if (auto* gb = input_grad(self, 1)) {
            for (std::size_t r = 0; r < reps; ++r) {
                for (std::size_t j = 0; j < nb; ++j) (*gb)[j] -= self.grad[r * nb + j];
            }
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    const std::size_t reps = broadcast_repeats(a, b, "mul");
    const std::size_t nb = b.numel();
    std::vector<double> out(a.value());
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t j = 0; j < nb; ++j) {
            out[r * nb + j] *= b.value()[j];
        }
    }
    return make_result(a.shape(), std::move(out), {a, b}, [reps, nb](Node& self) {
        const auto& av = input_value(self, 0);
        const auto& bv = input_value(self, 1);
        if (auto* ga = input_grad(self, 0)) {
            for (std::size_t r = 0; r < reps; ++r) {
                for (std::size_t j = 0; j < nb; ++j) (*ga)[r * nb + j] += self.grad[r * nb + j] * bv[j];
            }
        }
        if (auto* gb = input_grad(self, 1)) {
            for (std::size_t r = 0; r < reps; ++r) {
                for (std::size_t j = 0; j < nb; ++j) (*gb)[j] += self.grad[r * nb + j] * av[r * nb + j];
            }
        }
    });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.value());
    for (auto& x : out) x *= s;
    return make_result(a.shape(), std::move(out), {a}, [s](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += s * self.grad[i];
    });
}

Tensor exp(const Tensor& a) {
    return unary_map(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor relu(const Tensor& a) {
    return unary_map(
        a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor softmax(const Tensor& a) {
    const std::size_t rows = a.rows(), cols = a.cols();
    std::vector<double> out(a.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = &a.value()[r * cols];
        double* y = &out[r * cols];
        const double mx = *std::max_element(x, x + cols);
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) z += (y[j] = std::exp(x[j] - mx));
        for (std::size_t j = 0; j < cols; ++j) y[j] /= z;
    }
    return make_result(a.shape(), std::move(out), {a}, [rows, cols](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = &self.value[r * cols];
            const double* g = &self.grad[r * cols];
            double dot = 0.0;
            for (std::size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
            for (std::size_t j = 0; j < cols; ++j) (*ga)[r * cols + j] += y[j] * (g[j] - dot);
        }
    });
}

Tensor log_softmax(const Tensor& a) {
    const std::size_t rows = a.rows(), cols = a.cols();
    std::vector<double> out(a.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = &a.value()[r * cols];
        double* y = &out[r * cols];
        const double mx = *std::max_element(x, x + cols);
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) z += std::exp(x[j] - mx);
        const double lse = mx + std::log(z);
        for (std::size_t j = 0; j < cols; ++j) y[j] = x[j] - lse;
    }
    return make_result(a.shape(), std::move(out), {a}, [rows, cols](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = &self.value[r * cols];
            const double* g = &self.grad[r * cols];
            double total = 0.0;
            for (std::size_t j = 0; j < cols; ++j) total += g[j];
            for (std::size_t j = 0; j < cols; ++j) (*ga)[r * cols + j] += g[j] - std::exp(y[j]) * total;
        }
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    const std::size_t rows = x.rows(), d = x.cols();
    if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
        throw ShapeError("layer_norm: parameters must have shape [" + std::to_string(d) + "]");
    }
    std::vector<double> out(x.numel());
    std::vector<double> xhat(x.numel());
    std::vector<double> rstd(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = &x.value()[r * d];
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) mu += xr[j];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
        var /= static_cast<double>(d);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            const double h = (xr[j] - mu) * rstd[r];
            xhat[r * d + j] = h;
            out[r * d + j] = h * gamma.value()[j] + beta.value()[j];
        }
    }
    return make_result(x.shape(), std::move(out), {x, gamma, beta},
                       [rows, d, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
                           const auto& g = input_value(self, 1);
                           auto* gx = input_grad(self, 0);
                           auto* gg = input_grad(self, 1);
                           auto* gb = input_grad(self, 2);
                           for (std::size_t r = 0; r < rows; ++r) {
                               const double* dy = &self.grad[r * d];
                               const double* h = &xhat[r * d];
                               if (gg) for (std::size_t j = 0; j < d; ++j) (*gg)[j] += dy[j] * h[j];
                               if (gb) for (std::size_t j = 0; j < d; ++j) (*gb)[j] += dy[j];
                               if (!gx) continue;
                               double m1 = 0.0, m2 = 0.0;
                               for (std::size_t j = 0; j < d; ++j) {
                                   const double dh = dy[j] * g[j];
                                   m1 += dh;
                                   m2 += dh * h[j];
                               }
                               m1 /= static_cast<double>(d);
                               m2 /= static_cast<double>(d);
                               for (std::size_t j = 0; j < d; ++j) {
                                   (*gx)[r * d + j] += rstd[r] * (dy[j] * g[j] - m1 - h[j] * m2);
                               }
                           }
                       });
}

Tensor embedding(const Tensor& table, const std::vector<std::int64_t>& ids) {
    if (table.rank() != 2) {
        throw ShapeError("embedding: table must be rank 2, got " + shape_string(table.shape()));
    }
    const std::size_t vocab = table.dim(0), d = table.dim(1);
    std::vector<double> out(ids.size() * d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
            throw ShapeError("embedding: id " + std::to_string(ids[i]) + " outside vocabulary of " +
                             std::to_string(vocab));
        }
        std::copy_n(&table.value()[static_cast<std::size_t>(ids[i]) * d], d, &out[i * d]);
    }
    return make_result({ids.size(), d}, std::move(out), {table}, [ids, d](Node& self) {
        auto* gt = input_grad(self, 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            double* dst = &(*gt)[static_cast<std::size_t>(ids[i]) * d];
            for (std::size_t j = 0; j < d; ++j) dst[j] += self.grad[i * d + j];
        }
    });
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) {
        throw ShapeError("concat: no inputs");
    }
    if (axis != 0 && axis != -1) {
        throw ShapeError("concat: axis must be 0 or -1");
    }
    const Shape& first = parts[0].shape();
    if (first.empty()) {
        throw ShapeError("concat: scalar inputs");
    }
    const std::size_t ax = axis == 0 ? 0 : first.size() - 1;
    Shape out_shape = first;
    out_shape[ax] = 0;
    for (const auto& p : parts) {
        Shape s = p.shape();
        if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
        out_shape[ax] += s[ax];
        s[ax] = first[ax];
        if (s != first) throw ShapeError("concat: incompatible shapes " + shape_string(p.shape()));
    }
    // outer blocks, each made of per-part contiguous chunks
    std::size_t outer = 1;
    for (std::size_t i = 0; i < ax; ++i) outer *= first[i];
    std::vector<std::size_t> chunk(parts.size());
    std::size_t row = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        chunk[p] = parts[p].numel() / outer;
        row += chunk[p];
    }
    std::vector<double> out(outer * row);
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t off = o * row;
        for (std::size_t p = 0; p < parts.size(); ++p) {
            std::copy_n(&parts[p].value()[o * chunk[p]], chunk[p], &out[off]);
            off += chunk[p];
        }
    }
    return make_result(std::move(out_shape), std::move(out), parts, [outer, row, chunk](Node& self) {
        for (std::size_t o = 0; o < outer; ++o) {
            std::size_t off = o * row;
            for (std::size_t p = 0; p < chunk.size(); ++p) {
                if (auto* g = input_grad(self, p)) {
                    for (std::size_t j = 0; j < chunk[p]; ++j) (*g)[o * chunk[p] + j] += self.grad[off + j];
                }
                off += chunk[p];
            }
        }
    });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
    if (a.rank() != 2 || begin > end || end > a.dim(0)) {
        throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                         shape_string(a.shape()));
    }
    const std::size_t d = a.dim(1);
    std::vector<double> out(a.value().begin() + static_cast<long>(begin * d),
                            a.value().begin() + static_cast<long>(end * d));
    return make_result({end - begin, d}, std::move(out), {a}, [begin, d](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[begin * d + i] += self.grad[i];
    });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double x : a.value()) s += x;
    return make_result({}, {s}, {a}, [](Node& self) {
        auto* ga = input_grad(self, 0);
        for (auto& g : *ga) g += self.grad[0];
    });
}

Tensor mean(const Tensor& a) {
    if (a.numel() == 0) {
        throw ShapeError("mean of an empty tensor");
    }
    return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum_last(const Tensor& a) {
    const std::size_t rows = a.rows(), cols = a.cols();
    std::vector<double> out(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) out[r] += a.value()[r * cols + j];
    }
    return make_result(drop_last(a.shape()), std::move(out), {a}, [rows, cols](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < cols; ++j) (*ga)[r * cols + j] += self.grad[r];
        }
    });
}

Tensor mean_rows(const Tensor& a) {
    if (a.rank() != 2 || a.dim(0) == 0) {
        throw ShapeError("mean_rows: need a non-empty rank-2 tensor, got " + shape_string(a.shape()));
    }
    const std::size_t n = a.dim(0), d = a.dim(1);
    std::vector<double> out(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) out[j] += a.value()[i * d + j];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : out) x *= inv;
    return make_result({d}, std::move(out), {a}, [n, d, inv](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) (*ga)[i * d + j] += inv * self.grad[j];
        }
    });
}

Tensor dropout(const Tensor& a, double p, bool train, std::uint64_t seed) {
    if (p < 0.0 || p >= 1.0) {
        throw ShapeError("dropout: p must be in [0, 1)");
    }
    if (!train || p == 0.0) {
        return a;
    }
    Rng rng(seed);
    const double keep = 1.0 / (1.0 - p);
    std::vector<double> mask(a.numel());
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = rng.bernoulli(p) ? 0.0 : keep;
        out[i] = a.value()[i] * mask[i];
    }
    return make_result(a.shape(), std::move(out), {a}, [mask = std::move(mask)](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t i = 0; i < mask.size(); ++i) (*ga)[i] += self.grad[i] * mask[i];
    });
}

Tensor l2_normalize(const Tensor& a) {
    const std::size_t rows = a.rows(), cols = a.cols();
    std::vector<double> out(a.numel());
    std::vector<double> inv_norm(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += a.value()[r * cols + j] * a.value()[r * cols + j];
        inv_norm[r] = s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
        for (std::size_t j = 0; j < cols; ++j) out[r * cols + j] = a.value()[r * cols + j] * inv_norm[r];
    }
    return make_result(a.shape(), std::move(out), {a}, [rows, cols, inv_norm = std::move(inv_norm)](Node& self) {
        auto* ga = input_grad(self, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = &self.value[r * cols];
            const double* g = &self.grad[r * cols];
            double dot = 0.0;
            for (std::size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
            for (std::size_t j = 0; j < cols; ++j) (*ga)[r * cols + j] += inv_norm[r] * (g[j] - y[j] * dot);
        }
    });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("cosine_similarity: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
    return sum_last(mul(l2_normalize(a), l2_normalize(b)));
}

Tensor cross_entropy(const Tensor& logits, const std::vector<std::int64_t>& targets) {
    if (logits.rank() != 2 || logits.dim(0) != targets.size()) {
        throw ShapeError("cross_entropy: logits " + shape_string(logits.shape()) + " for " +
                         std::to_string(targets.size()) + " targets");
    }
    const std::size_t n = logits.dim(0), v = logits.dim(1);
    std::vector<double> out(n);
    std::vector<double> probs(n * v);
    for (std::size_t r = 0; r < n; ++r) {
        if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= v) {
            throw ShapeError("cross_entropy: target " + std::to_string(targets[r]) + " out of range");
        }
        const double* x = &logits.value()[r * v];
        const double mx = *std::max_element(x, x + v);
        double z = 0.0;
        for (std::size_t j = 0; j < v; ++j) z += (probs[r * v + j] = std::exp(x[j] - mx));
        for (std::size_t j = 0; j < v; ++j) probs[r * v + j] /= z;
        out[r] = mx + std::log(z) - x[targets[r]];
    }
    return make_result({n}, std::move(out), {logits}, [n, v, targets, probs = std::move(probs)](Node& self) {
        auto* gl = input_grad(self, 0);
        for (std::size_t r = 0; r < n; ++r) {
            const double g = self.grad[r];
            for (std::size_t j = 0; j < v; ++j) (*gl)[r * v + j] += g * probs[r * v + j];
            (*gl)[r * v + static_cast<std::size_t>(targets[r])] -= g;
        }
    });
}

Tensor causal_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads) {
    if (q.rank() != 2 || q.shape() != k.shape() || q.shape() != v.shape() || heads == 0 || q.dim(1) % heads != 0) {
        throw ShapeError("causal_attention: q " + shape_string(q.shape()) + ", k " + shape_string(k.shape()) +
                         ", v " + shape_string(v.shape()) + ", heads " + std::to_string(heads));
    }
    const std::size_t t = q.dim(0), d = q.dim(1), dh = d / heads;
    const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
    const auto Q = cmap(q.value(), t, d);
    const auto K = cmap(k.value(), t, d);
    const auto V = cmap(v.value(), t, d);
    std::vector<double> out(t * d);
    auto O = map(out, t, d);
    // Attention weights per head, kept for the backward pass.
    std::vector<double> probs(heads * t * t, 0.0);
    const auto ti = static_cast<Eigen::Index>(t);
    const auto dhi = static_cast<Eigen::Index>(dh);
    for (std::size_t h = 0; h < heads; ++h) {
        const auto c0 = static_cast<Eigen::Index>(h * dh);
        auto P = map(probs, heads * t, t).middleRows(static_cast<Eigen::Index>(h * t), ti);
        P.noalias() = Q.middleCols(c0, dhi) * K.middleCols(c0, dhi).transpose();
        for (Eigen::Index i = 0; i < ti; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j <= i; ++j) mx = std::max(mx, P(i, j) * sc);
            double z = 0.0;
            for (Eigen::Index j = 0; j <= i; ++j) z += (P(i, j) = std::exp(P(i, j) * sc - mx));
            for (Eigen::Index j = 0; j <= i; ++j) P(i, j) /= z;
            for (Eigen::Index j = i + 1; j < ti; ++j) P(i, j) = 0.0;
        }
        O.middleCols(c0, dhi).noalias() = P * V.middleCols(c0, dhi);
    }
    return make_result(
        q.shape(), std::move(out), {q, k, v}, [t, d, dh, heads, sc, probs = std::move(probs)](Node& self) {
            const auto Qv = cmap(input_value(self, 0), t, d);
            const auto Kv = cmap(input_value(self, 1), t, d);
            const auto Vv = cmap(input_value(self, 2), t, d);
            const auto G = cmap(self.grad, t, d);
            auto* gq = input_grad(self, 0);
            auto* gk = input_grad(self, 1);
            auto* gv = input_grad(self, 2);
            const auto ti = static_cast<Eigen::Index>(t);
            const auto dhi = static_cast<Eigen::Index>(dh);
            MatR dS(ti, ti);
            for (std::size_t h = 0; h < heads; ++h) {
                const auto c0 = static_cast<Eigen::Index>(h * dh);
                const auto P = cmap(probs, heads * t, t).middleRows(static_cast<Eigen::Index>(h * t), ti);
                const auto Gh = G.middleCols(c0, dhi);
                if (gv) map(*gv, t, d).middleCols(c0, dhi).noalias() += P.transpose() * Gh;
                if (!gq && !gk) continue;
                dS.noalias() = Gh * Vv.middleCols(c0, dhi).transpose();  // dP
                for (Eigen::Index i = 0; i < ti; ++i) {
                    double dot = 0.0;
                    for (Eigen::Index j = 0; j <= i; ++j) dot += dS(i, j) * P(i, j);
                    for (Eigen::Index j = 0; j <= i; ++j) dS(i, j) = P(i, j) * (dS(i, j) - dot) * sc;
                    for (Eigen::Index j = i + 1; j < ti; ++j) dS(i, j) = 0.0;
                }
                if (gq) map(*gq, t, d).middleCols(c0, dhi).noalias() += dS * Kv.middleCols(c0, dhi);
                if (gk) map(*gk, t, d).middleCols(c0, dhi).noalias() += dS.transpose() * Qv.middleCols(c0, dhi);
            }
        });
}

} // namespace sqlgrpo::ad
