#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sensekit/encoder.hpp"

namespace sensekit {

/// Directory of precomputed hidden stacks, one NamedTensorStore file per
/// instance id plus a manifest recording the encoder-weights hash and the
/// context mode. A cache built under a different encoder or context mode is
/// rejected rather than silently reused.
struct CacheManifest {
    std::string encoder_hash;
    std::string context_mode;
    std::string vocab_hash;
    std::size_t num_layers = 0;
    std::size_t d_model = 0;
    std::vector<std::string> instance_ids;
};

std::string cache_entry_filename(const std::string& instance_id);

/// Reads memoize loaded stacks, so a HiddenCache instance is meant for one
/// thread; open one per thread if needed.
class HiddenCache {
public:
    /// Opens an existing cache and validates its manifest.
    static HiddenCache open(const std::string& directory);
    /// Creates/overwrites a cache directory with a fresh manifest.
    static HiddenCache create(const std::string& directory, CacheManifest manifest);

    const CacheManifest& manifest() const { return manifest_; }
    bool contains(const std::string& instance_id) const;
    void put(const std::string& instance_id, const HiddenStack& stack);
    HiddenStack get(const std::string& instance_id) const;
    void write_manifest() const;

    /// Throws ConfigMismatchError unless hash and mode match the manifest.
    void require_compatible(const std::string& encoder_hash,
                            const std::string& context_mode) const;

private:
    std::string directory_;
    CacheManifest manifest_;
    mutable std::map<std::string, HiddenStack> loaded_;
};

using HiddenLookup = std::function<HiddenStack(const std::string& instance_id)>;

HiddenLookup lookup_from_cache(const HiddenCache& cache);
HiddenLookup lookup_from_map(const std::map<std::string, HiddenStack>& stacks);

void save_hidden_stack(const std::string& path, const HiddenStack& stack);
HiddenStack load_hidden_stack(const std::string& path);

} // namespace sensekit
