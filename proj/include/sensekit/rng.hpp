#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sensekit {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seeded generator with hand-rolled sampling so sequences are identical
// across standard library implementations (std::uniform_* are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            std::swap(items[i], items[below(i + 1)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace sensekit
