#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "sensekit/errors.hpp"
#include "sensekit/rng.hpp"
#include "sensekit/tensor_store.hpp"

using namespace sensekit;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "sensekit_store_tests";
    fs::create_directories(dir);
    return (dir / name).string();
}

} // namespace

TEST_CASE("round trip preserves names, shapes, values and order") {
    NamedTensorStore store;
    Rng rng(5);
    store.put("b.second", Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    store.put("a.first", Tensor::vector({-1.5f, 0.25f}));
    Tensor random = Tensor::zeros({4, 4});
    for (auto& v : random.data) v = static_cast<float>(rng.uniform(-10.0, 10.0));
    store.put("c.third", random);

    std::string path = temp_path("roundtrip.nts");
    store.save(path);
    NamedTensorStore loaded = NamedTensorStore::load(path);

    CHECK(loaded.names() == store.names()); // insertion order survives
    for (const std::string& name : store.names()) {
        CHECK(loaded.get(name).shape == store.get(name).shape);
        CHECK(loaded.get(name).data == store.get(name).data);
    }
    CHECK(loaded.content_hash() == store.content_hash());
}

TEST_CASE("payloads are 64-byte aligned after the header") {
    NamedTensorStore store;
    store.put("x", Tensor::vector({1.0f}));
    store.put("y", Tensor::vector({2.0f, 3.0f, 4.0f}));
    std::string path = temp_path("aligned.nts");
    store.save(path);

    std::ifstream file(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(file)),
                            std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() > 12);
    CHECK(std::memcmp(bytes.data(), "NTS1", 4) == 0);
    std::uint64_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 4, 8);
    std::size_t first_payload = (12 + header_len + 63) / 64 * 64;
    float x = 0.0f;
    std::memcpy(&x, bytes.data() + first_payload, 4);
    CHECK(x == 1.0f);
    std::size_t second_payload = (first_payload + 4 + 63) / 64 * 64;
    float y0 = 0.0f;
    std::memcpy(&y0, bytes.data() + second_payload, 4);
    CHECK(y0 == 2.0f);
}

TEST_CASE("put replaces an existing tensor in place") {
    NamedTensorStore store;
    store.put("t", Tensor::vector({1.0f}));
    store.put("u", Tensor::vector({2.0f}));
    store.put("t", Tensor::vector({9.0f}));
    CHECK(store.size() == 2);
    CHECK(store.get("t")[0] == 9.0f);
    CHECK(store.names() == std::vector<std::string>{"t", "u"});
}

TEST_CASE("serialization is byte-identical across saves") {
    NamedTensorStore store;
    store.put("w", Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}));
    std::string path_a = temp_path("bytes_a.nts");
    std::string path_b = temp_path("bytes_b.nts");
    store.save(path_a);
    store.save(path_b);
    std::ifstream a(path_a, std::ios::binary), b(path_b, std::ios::binary);
    std::string bytes_a((std::istreambuf_iterator<char>(a)),
                        std::istreambuf_iterator<char>());
    std::string bytes_b((std::istreambuf_iterator<char>(b)),
                        std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);
}

TEST_CASE("bad magic and truncation are rejected") {
    std::string path = temp_path("bad.nts");
    {
        std::ofstream file(path, std::ios::binary);
        file << "JUNKJUNKJUNKJUNK";
    }
    CHECK_THROWS_AS(NamedTensorStore::load(path), InputError);

    NamedTensorStore store;
    store.put("t", Tensor::vector({1.0f, 2.0f, 3.0f}));
    std::string full = temp_path("full.nts");
    store.save(full);
    std::ifstream in(full, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    std::string cut = temp_path("cut.nts");
    {
        std::ofstream out(cut, std::ios::binary);
        out << bytes.substr(0, bytes.size() - 8);
    }
    CHECK_THROWS_AS(NamedTensorStore::load(cut), InputError);
}

TEST_CASE("missing tensors and non-finite values are rejected") {
    NamedTensorStore store;
    CHECK_THROWS_AS(store.get("absent"), InputError);
    Tensor bad = Tensor::vector({1.0f});
    bad[0] = NAN;
    CHECK_THROWS_AS(store.put("bad", bad), NumericError);
}
