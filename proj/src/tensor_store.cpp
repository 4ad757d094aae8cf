#include "sensekit/tensor_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "sensekit/errors.hpp"
#include "sensekit/hashing.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor store assumes a little-endian host");

namespace sensekit {

namespace {

constexpr char kMagic[4] = {'N', 'T', 'S', '1'};
constexpr std::size_t kAlign = 64;

std::size_t aligned(std::size_t offset) {
    return (offset + kAlign - 1) / kAlign * kAlign;
}

} // namespace

void NamedTensorStore::put(const std::string& name, Tensor tensor) {
    if (name.empty()) throw InputError("tensor store: empty tensor name");
    ensure_finite(tensor, "tensor store put");
    auto it = index_.find(name);
    if (it != index_.end()) {
        items_[it->second].second = std::move(tensor);
        return;
    }
    index_.emplace(name, items_.size());
    items_.emplace_back(name, std::move(tensor));
}

const Tensor& NamedTensorStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw InputError("tensor store: missing tensor '" + name + "'");
    }
    return items_[it->second].second;
}

bool NamedTensorStore::contains(const std::string& name) const {
    return index_.count(name) != 0;
}

std::vector<std::string> NamedTensorStore::names() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& [name, _] : items_) out.push_back(name);
    return out;
}

std::vector<unsigned char> NamedTensorStore::serialize() const {
    nlohmann::ordered_json header = nlohmann::ordered_json::object();
    for (const auto& [name, tensor] : items_) {
        header[name] = {{"dtype", "f32"}, {"shape", tensor.shape}};
    }
    const std::string header_text = header.dump();

    std::vector<unsigned char> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    std::uint64_t len = header_text.size();
    const auto* len_bytes = reinterpret_cast<const unsigned char*>(&len);
    out.insert(out.end(), len_bytes, len_bytes + 8);
    out.insert(out.end(), header_text.begin(), header_text.end());

    for (const auto& [name, tensor] : items_) {
        out.resize(aligned(out.size()), 0);
        const auto* bytes = reinterpret_cast<const unsigned char*>(tensor.data.data());
        out.insert(out.end(), bytes, bytes + tensor.data.size() * sizeof(float));
    }
    return out;
}

void NamedTensorStore::save(const std::string& path) const {
    std::vector<unsigned char> bytes = serialize();
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw InputError("tensor store: cannot open '" + path + "' for writing");
    file.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!file) throw InputError("tensor store: write failed for '" + path + "'");
}

NamedTensorStore NamedTensorStore::load(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputError("tensor store: cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(file)),
                                     std::istreambuf_iterator<char>());

    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw InputError("tensor store: '" + path + "' is not an NTS1 container");
    }
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 4, 8);
    if (12 + header_len > bytes.size()) {
        throw InputError("tensor store: truncated header in '" + path + "'");
    }

    nlohmann::ordered_json header;
    try {
        header = nlohmann::ordered_json::parse(bytes.begin() + 12,
                                               bytes.begin() + 12 + header_len);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("tensor store: bad header in '" + path + "': " + e.what());
    }
    if (!header.is_object()) {
        throw InputError("tensor store: header must be an object in '" + path + "'");
    }

    NamedTensorStore store;
    std::size_t offset = 12 + header_len;
    for (const auto& [name, meta] : header.items()) {
        if (meta.value("dtype", "") != std::string("f32")) {
            throw InputError("tensor store: unsupported dtype for '" + name + "'");
        }
        std::vector<std::size_t> shape = meta.at("shape").get<std::vector<std::size_t>>();
        std::size_t count = 1;
        for (std::size_t d : shape) count *= d;
        offset = aligned(offset);
        if (offset + count * sizeof(float) > bytes.size()) {
            throw InputError("tensor store: truncated payload for '" + name + "'");
        }
        std::vector<float> data(count);
        std::memcpy(data.data(), bytes.data() + offset, count * sizeof(float));
        offset += count * sizeof(float);
        store.put(name, Tensor(std::move(shape), std::move(data)));
    }
    return store;
}

std::uint64_t NamedTensorStore::content_hash() const {
    std::vector<unsigned char> bytes = serialize();
    return fnv1a64_bytes(bytes.data(), bytes.size());
}

} // namespace sensekit
