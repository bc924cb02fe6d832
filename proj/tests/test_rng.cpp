#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "rootlab/rng.hpp"

using namespace rootlab;

namespace {

// Reference SplitMix64 (Steele, Lea, Flood), written out independently.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next()
    {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

} // namespace

TEST_CASE("stream reproduces SplitMix64 from its key", "[rng]")
{
    RngStream s(0);
    // Published first outputs of SplitMix64 seeded with 0.
    CHECK(s() == 0xE220A8397B1DCDAFULL);
    CHECK(s() == 0x6E789E6AA1B965F4ULL);
    CHECK(s() == 0x06C45D188009454FULL);

    for (std::uint64_t key : {1ULL, 42ULL, 0xDEADBEEFULL, ~0ULL}) {
        RngStream a(key);
        SplitMix64 ref{key};
        for (int i = 0; i < 100; ++i) REQUIRE(a() == ref.next());
    }
}

TEST_CASE("at(i) is random access into the same sequence", "[rng]")
{
    RngStream a(12345);
    std::vector<std::uint64_t> seq;
    for (int i = 0; i < 50; ++i) seq.push_back(a());
    const RngStream b(12345);
    for (int i = 0; i < 50; ++i) CHECK(b.at(static_cast<std::uint64_t>(i)) == seq[static_cast<std::size_t>(i)]);
    CHECK(a.counter() == 50);
}

TEST_CASE("same triple gives identical draws", "[rng]")
{
    auto a = rng_stream(7, 3, "zeros");
    auto b = rng_stream(7, 3, "zeros");
    for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
}

TEST_CASE("replica streams differ across 1000 seeds", "[rng]")
{
    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto r0 = rng_stream(seed, 0, "zeros");
        auto r1 = rng_stream(seed, 1, "zeros");
        const auto a = r0();
        const auto b = r1();
        REQUIRE(a != b);
        firsts.insert(a);
        firsts.insert(b);
    }
    CHECK(firsts.size() == 2000);
}

TEST_CASE("stage tags isolate stages", "[rng]")
{
    CHECK(RngStream::derive_key(5, 0, "zeros") != RngStream::derive_key(5, 0, "critical-guess"));
    // Replica 0's key depends only on (seed, 0, tag), never on how many replicas exist.
    CHECK(RngStream::derive_key(5, 0, "zeros") == rng_stream(5, 0, "zeros").key());
}

TEST_CASE("key derivation matches its documented recipe", "[rng]")
{
    auto fnv = [](const char* s) {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (; *s; ++s) {
            h ^= static_cast<unsigned char>(*s);
            h *= 0x100000001B3ULL;
        }
        return h;
    };
    CHECK(RngStream::fnv1a64("zeros") == fnv("zeros"));
    CHECK(RngStream::fnv1a64("") == 0xCBF29CE484222325ULL);
    // Published FNV-1a 64 value of "a".
    CHECK(RngStream::fnv1a64("a") == 0xAF63DC4C8601EC8CULL);

    auto finalize = [](std::uint64_t z) {
        SplitMix64 one{z - 0x9E3779B97F4A7C15ULL};
        return one.next();
    };
    const std::uint64_t seed = 2024, replica = 17;
    const std::uint64_t k0 = finalize(seed + 0x9E3779B97F4A7C15ULL);
    const std::uint64_t k1 = finalize(k0 ^ (replica * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL));
    CHECK(RngStream::derive_key(seed, replica, "zeros") == finalize(k1 ^ fnv("zeros")));
}

TEST_CASE("uniform and normal moments", "[rng]")
{
    auto s = rng_stream(99, 0, "moments");
    const int m = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < m; ++i) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = s.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / m == Catch::Approx(0.5).margin(5e-3));
    CHECK(sn / m == Catch::Approx(0.0).margin(1e-2));
    CHECK(sn2 / m == Catch::Approx(1.0).margin(1e-2));
}

TEST_CASE("chi draws have the right second moment", "[rng]")
{
    auto s = rng_stream(4, 0, "chi");
    for (double dof : {0.5, 1.0, 7.0, 500.0}) {
        const int m = 40000;
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            const double x = s.chi(dof);
            REQUIRE(x >= 0.0);
            acc += x * x;
        }
        // E[chi_k^2] = k
        CHECK(acc / m == Catch::Approx(dof).epsilon(0.03));
    }
}
