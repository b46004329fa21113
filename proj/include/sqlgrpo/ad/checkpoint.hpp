// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sqlgrpo/ad/tensor.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sqlgrpo::ad {

struct NamedTensor {
    std::string name;
    Shape shape;
    std::vector<double> data;
};

/// Container layout (all integers little-endian):
///   "SGCK" | u32 version | u64 meta length | meta JSON bytes |
///   u32 tensor count | per tensor: u32 name length, name bytes, u32 rank,
///   rank x u64 dims, numel x f64 data.
struct Checkpoint {
    nlohmann::json meta;
    std::vector<NamedTensor> tensors;

    /// Throws FormatError when absent.
    const NamedTensor& get(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Copies a named tensor into `dst`, checking the shape.
void restore_into(const Checkpoint& ckpt, const std::string& name, Tensor& dst);

} // namespace sqlgrpo::ad
