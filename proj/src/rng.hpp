#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hmmlab {

// All randomness in the project flows from a single 64-bit root seed.
// Substreams are derived by folding string/integer tags into the seed with
// splitmix64, so independent components stay reproducible in isolation.
uint64_t splitmix64(uint64_t& state);
uint64_t derive_seed(uint64_t seed, uint64_t tag);
uint64_t derive_seed(uint64_t seed, std::string_view tag);

class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits; portable across stdlibs.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) by rejection.
    uint64_t uniform_int(uint64_t bound);

    double normal();

    // Index drawn from an unnormalized nonnegative weight vector.
    int categorical(const Eigen::VectorXd& weights);

    // Index drawn by binary search in a precomputed cumulative sum.
    int categorical_cdf(const std::vector<double>& cdf);

    Eigen::VectorXd unit_sphere(int dim);

    // Uniform point on the probability simplex over `dim` coordinates.
    Eigen::VectorXd simplex(int dim);

    // Random k-subset of {0,...,pool-1} (partial Fisher-Yates).
    std::vector<int> sample_without_replacement(int pool, int k);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace hmmlab
