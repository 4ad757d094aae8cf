#include "sensekit/cache.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sensekit/errors.hpp"
#include "sensekit/tensor_store.hpp"

namespace sensekit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string cache_entry_filename(const std::string& instance_id) {
    // Percent-encode anything that is not filesystem-safe.
    std::string out;
    for (unsigned char c : instance_id) {
        bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        if (safe) {
            out.push_back(static_cast<char>(c));
        } else {
            static const char digits[] = "0123456789abcdef";
            out.push_back('%');
            out.push_back(digits[c >> 4]);
            out.push_back(digits[c & 0xf]);
        }
    }
    return out + ".nts";
}

void save_hidden_stack(const std::string& path, const HiddenStack& stack) {
    NamedTensorStore store;
    store.put("stack", Tensor({stack.num_layers + 1, stack.num_words, stack.width},
                              stack.data));
    store.save(path);
}

HiddenStack load_hidden_stack(const std::string& path) {
    NamedTensorStore store = NamedTensorStore::load(path);
    const Tensor& t = store.get("stack");
    if (t.rank() != 3 || t.shape[0] == 0) {
        throw InputError("hidden stack '" + path + "' has shape " + t.shape_str());
    }
    HiddenStack stack;
    stack.num_layers = t.shape[0] - 1;
    stack.num_words = t.shape[1];
    stack.width = t.shape[2];
    stack.data = t.data;
    return stack;
}

HiddenCache HiddenCache::open(const std::string& directory) {
    std::ifstream file(fs::path(directory) / "manifest.json");
    if (!file) {
        throw InputError("cache '" + directory + "' has no manifest.json");
    }
    ordered_json doc;
    try {
        file >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("cache '" + directory + "': bad manifest: " + e.what());
    }
    HiddenCache cache;
    cache.directory_ = directory;
    cache.manifest_.encoder_hash = doc.at("encoder_hash").get<std::string>();
    cache.manifest_.context_mode = doc.at("context_mode").get<std::string>();
    cache.manifest_.vocab_hash = doc.value("vocab_hash", "");
    cache.manifest_.num_layers = doc.at("num_layers").get<std::size_t>();
    cache.manifest_.d_model = doc.at("d_model").get<std::size_t>();
    cache.manifest_.instance_ids =
        doc.at("instance_ids").get<std::vector<std::string>>();
    return cache;
}

HiddenCache HiddenCache::create(const std::string& directory, CacheManifest manifest) {
    fs::create_directories(directory);
    HiddenCache cache;
    cache.directory_ = directory;
    cache.manifest_ = std::move(manifest);
    cache.write_manifest();
    return cache;
}

void HiddenCache::write_manifest() const {
    ordered_json doc;
    doc["encoder_hash"] = manifest_.encoder_hash;
    doc["context_mode"] = manifest_.context_mode;
    doc["vocab_hash"] = manifest_.vocab_hash;
    doc["num_layers"] = manifest_.num_layers;
    doc["d_model"] = manifest_.d_model;
    doc["instance_ids"] = manifest_.instance_ids;
    std::ofstream file(fs::path(directory_) / "manifest.json", std::ios::trunc);
    if (!file) throw InputError("cannot write cache manifest in '" + directory_ + "'");
    file << doc.dump(2) << "\n";
}

bool HiddenCache::contains(const std::string& instance_id) const {
    return fs::exists(fs::path(directory_) / cache_entry_filename(instance_id));
}

void HiddenCache::put(const std::string& instance_id, const HiddenStack& stack) {
    if (stack.num_layers != manifest_.num_layers || stack.width != manifest_.d_model) {
        throw ConfigMismatchError("cache put: stack shape does not match manifest");
    }
    save_hidden_stack(fs::path(directory_) / cache_entry_filename(instance_id),
                      stack);
    auto& ids = manifest_.instance_ids;
    if (std::find(ids.begin(), ids.end(), instance_id) == ids.end()) {
        ids.push_back(instance_id);
    }
}

HiddenStack HiddenCache::get(const std::string& instance_id) const {
    auto it = loaded_.find(instance_id);
    if (it != loaded_.end()) return it->second;
    fs::path path = fs::path(directory_) / cache_entry_filename(instance_id);
    if (!fs::exists(path)) {
        throw InputError("cache has no hidden stack for instance '" + instance_id + "'");
    }
    HiddenStack stack = load_hidden_stack(path.string());
    loaded_.emplace(instance_id, stack);
    return stack;
}

void HiddenCache::require_compatible(const std::string& encoder_hash,
                                     const std::string& context_mode) const {
    if (manifest_.encoder_hash != encoder_hash) {
        throw ConfigMismatchError("cache was built with encoder " +
                                  manifest_.encoder_hash + ", expected " + encoder_hash);
    }
    if (manifest_.context_mode != context_mode) {
        throw ConfigMismatchError("cache was built with context mode '" +
                                  manifest_.context_mode + "', expected '" +
                                  context_mode + "'");
    }
}

HiddenLookup lookup_from_cache(const HiddenCache& cache) {
    return [&cache](const std::string& id) { return cache.get(id); };
}

HiddenLookup lookup_from_map(const std::map<std::string, HiddenStack>& stacks) {
    return [&stacks](const std::string& id) {
        auto it = stacks.find(id);
        if (it == stacks.end()) {
            throw InputError("no hidden stack for instance '" + id + "'");
        }
        return it->second;
    };
}

} // namespace sensekit
