// Copyright 2026 The sqlgrpo Authors
// SPDX-License-Identifier: Apache-2.0
#include "sqlgrpo/ad/checkpoint.hpp"

#include "sqlgrpo/common/text.hpp"

#include <bit>
#include <cstring>

namespace sqlgrpo::ad {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

    template <class T>
    T get() {
        T v;
        std::memcpy(&v, take(sizeof(T)), sizeof(T));
        return v;
    }

    const char* take(std::size_t n) {
        if (n > data_.size() - pos_) {
            throw FormatError(path_ + ": truncated checkpoint");
        }
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    const std::string& data_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

} // namespace

const NamedTensor& Checkpoint::get(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) {
            return t;
        }
    }
    throw FormatError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::string out(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    const std::string meta = ckpt.meta.dump();
    put<std::uint64_t>(out, meta.size());
    out += meta;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        if (numel(t.shape) != t.data.size()) {
            throw ShapeError("checkpoint tensor '" + t.name + "' has inconsistent shape");
        }
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
        out += t.name;
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) {
            put<std::uint64_t>(out, d);
        }
        out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(double));
    }
    write_file(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::string data = read_file(path);
    Reader r(data, path);
    if (std::memcmp(r.take(4), kMagic, 4) != 0) {
        throw FormatError(path + ": not a checkpoint (bad magic)");
    }
    if (const auto v = r.get<std::uint32_t>(); v != kVersion) {
        throw FormatError(path + ": unsupported checkpoint version " + std::to_string(v));
    }
    Checkpoint ckpt;
    const auto meta_len = r.get<std::uint64_t>();
    const char* meta = r.take(meta_len);
    try {
        ckpt.meta = nlohmann::json::parse(meta, meta + meta_len);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad checkpoint metadata: " + e.what());
    }
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        const auto name_len = r.get<std::uint32_t>();
        t.name.assign(r.take(name_len), name_len);
        const auto rank = r.get<std::uint32_t>();
        for (std::uint32_t k = 0; k < rank; ++k) {
            t.shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
        }
        t.data.resize(numel(t.shape));
        std::memcpy(t.data.data(), r.take(t.data.size() * sizeof(double)), t.data.size() * sizeof(double));
        ckpt.tensors.push_back(std::move(t));
    }
    if (!r.done()) {
        throw FormatError(path + ": trailing bytes after checkpoint");
    }
    return ckpt;
}

void restore_into(const Checkpoint& ckpt, const std::string& name, Tensor& dst) {
    const NamedTensor& t = ckpt.get(name);
    if (t.shape != dst.shape()) {
        throw FormatError("checkpoint tensor '" + name + "' has shape " + shape_string(t.shape) + ", expected " +
                          shape_string(dst.shape()));
    }
    dst.value() = t.data;
}

} // namespace sqlgrpo::ad
