#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace mixot {

// Counter-based seed derivation: child streams are pure functions of
// (master, path...), so adding rungs or replicates never perturbs the
// streams of existing ones.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p));
    return s;
}

inline std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// One stream per replicate / optimizer start; never shared across tasks.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    std::mt19937_64& engine() { return gen_; }

    double uniform() {  // [0,1)
        return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
    }
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal() {
        return std::normal_distribution<double>(0.0, 1.0)(gen_);
    }
    double gamma(double shape, double scale) {
        return std::gamma_distribution<double>(shape, scale)(gen_);
    }
    std::uint64_t next_u64() { return gen_(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return std::uniform_int_distribution<int>(lo, hi)(gen_);
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace mixot
