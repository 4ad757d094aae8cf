#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sensekit/tensor.hpp"

namespace sensekit {

/// Portable container of named f32 tensors.
///
/// On disk: magic "NTS1", a u64 little-endian byte length, a UTF-8 JSON
/// header mapping tensor name -> {"dtype": "f32", "shape": [...]} in
/// insertion order, then each tensor's raw little-endian f32 payload in
/// header order, each payload starting on a 64-byte boundary.
class NamedTensorStore {
public:
    /// Inserts or replaces; insertion order defines payload order.
    void put(const std::string& name, Tensor tensor);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::size_t size() const { return items_.size(); }
    std::vector<std::string> names() const;

    void save(const std::string& path) const;
    static NamedTensorStore load(const std::string& path);

    /// FNV-1a over the exact serialized byte stream.
    std::uint64_t content_hash() const;

private:
    std::vector<std::pair<std::string, Tensor>> items_;
    std::map<std::string, std::size_t> index_;

    std::vector<unsigned char> serialize() const;
};

} // namespace sensekit
