#include "rng.hpp"

#include <cmath>

#include "error.hpp"

namespace hmmlab {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t tag) {
    uint64_t state = seed;
    (void)splitmix64(state);
    state ^= 0xd1342543de82ef95ull * (tag + 1);
    return splitmix64(state);
}

uint64_t derive_seed(uint64_t seed, std::string_view tag) {
    // FNV-1a over the tag, then mixed into the seed.
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return derive_seed(seed, h);
}

uint64_t Rng::uniform_int(uint64_t bound) {
    if (bound == 0) throw Error(ErrorCode::InvalidArgument, "uniform_int bound must be positive");
    uint64_t threshold = -bound % bound;
    for (;;) {
        uint64_t r = engine_();
        if (r >= threshold) return r % bound;
    }
}

double Rng::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller; u clamped away from 0.
    double u = uniform01();
    if (u < 1e-300) u = 1e-300;
    double v = uniform01();
    double r = std::sqrt(-2.0 * std::log(u));
    double theta = 2.0 * M_PI * v;
    cached_normal_ = r * std::sin(theta);
    have_cached_normal_ = true;
    return r * std::cos(theta);
}

int Rng::categorical(const Eigen::VectorXd& weights) {
    double total = weights.sum();
    if (!(total > 0)) throw Error(ErrorCode::InvalidArgument, "categorical weights sum to zero");
    double u = uniform01() * total;
    double acc = 0.0;
    int last = static_cast<int>(weights.size()) - 1;
    for (int i = 0; i <= last; ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return last;
}

int Rng::categorical_cdf(const std::vector<double>& cdf) {
    double u = uniform01() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<int>(it - cdf.begin());
}

Eigen::VectorXd Rng::unit_sphere(int dim) {
    Eigen::VectorXd v(dim);
    double norm2;
    do {
        for (int i = 0; i < dim; ++i) v[i] = normal();
        norm2 = v.squaredNorm();
    } while (norm2 < 1e-30);
    return v / std::sqrt(norm2);
}

Eigen::VectorXd Rng::simplex(int dim) {
    // Normalized iid exponentials are uniform on the simplex.
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) {
        double u = uniform01();
        if (u < 1e-300) u = 1e-300;
        v[i] = -std::log(u);
    }
    return v / v.sum();
}

std::vector<int> Rng::sample_without_replacement(int pool, int k) {
    if (k > pool) throw Error(ErrorCode::InvalidArgument, "sample size exceeds pool");
    std::vector<int> idx(pool);
    for (int i = 0; i < pool; ++i) idx[i] = i;
    for (int i = 0; i < k; ++i) {
        int j = i + static_cast<int>(uniform_int(static_cast<uint64_t>(pool - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace hmmlab
