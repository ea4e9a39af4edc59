#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace screenwise {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace detail

/// Derives independent generator seeds from one root seed. A stream is named
/// by purpose ("precision.deep", "theory.market") plus an optional integer
/// index, so adding a new consumer never shifts the draws of existing ones.
class SeedSplitter {
public:
    explicit constexpr SeedSplitter(std::uint64_t root) : root_(root) {}

    constexpr std::uint64_t seed(std::string_view stream, std::uint64_t index = 0) const {
        return detail::splitmix64(detail::splitmix64(root_ ^ detail::fnv1a(stream)) + index);
    }

    std::mt19937_64 engine(std::string_view stream, std::uint64_t index = 0) const {
        return std::mt19937_64(seed(stream, index));
    }

    constexpr std::uint64_t root() const { return root_; }

private:
    std::uint64_t root_;
};

}  // namespace screenwise
