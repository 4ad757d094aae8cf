#include "sensekit/hashing.hpp"

#include <fstream>
#include <vector>

#include "sensekit/errors.hpp"

namespace sensekit {

std::string hex64(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot open '" + path + "' for hashing");
    std::uint64_t h = kFnvOffset;
    std::vector<char> buffer(1 << 16);
    while (file) {
        file.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        h = fnv1a64_bytes(buffer.data(), static_cast<std::size_t>(file.gcount()), h);
    }
    return h;
}

} // namespace sensekit
