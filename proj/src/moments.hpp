#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmm.hpp"
#include "tensor.hpp"

namespace hmmlab {

// Big-endian base-m bijection between symbol strings of length tau and
// [0, m^tau): L(l_1..l_tau) = sum_t l_t * m^(tau - t), l_1 most significant.
class IndexMap {
  public:
    IndexMap(int m, int tau);

    int m() const { return m_; }
    int tau() const { return tau_; }
    int64_t count() const { return count_; }

    int64_t index_of(const std::vector<int>& symbols) const;
    std::vector<int> string_of(int64_t index) const;

  private:
    int m_;
    int tau_;
    int64_t count_;
};

struct MomentTensor {
    Tensor3 tensor;  // (m^tau, m^tau, m): future x past x present
    int tau = 0;
    int m = 0;
    bool empirical = false;
    int64_t sample_count = 0;  // empirical only
    uint64_t seed = 0;         // empirical only
};

// M(L(future), L(past), y_0) = P[window]; built as outer3(A, B, C).
MomentTensor exact_moment_tensor(const Hmm& h, int tau, int64_t row_cap = kDefaultRowCap);

// Plug-in window frequencies; no smoothing. Past strings index
// most-recent-first, matching the reverse likelihood convention.
MomentTensor empirical_moment_tensor(const std::vector<ObservationWindow>& windows, int m,
                                     int tau);

// columns: future_idx, past_idx, present, value (nonzero entries only)
void export_nonzero_csv(const MomentTensor& M, const std::string& path);

}  // namespace hmmlab
