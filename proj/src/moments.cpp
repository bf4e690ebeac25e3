#include "moments.hpp"

#include <cstdio>
#include <fstream>
#include <limits>

#include "error.hpp"

namespace hmmlab {

IndexMap::IndexMap(int m, int tau) : m_(m), tau_(tau) {
    if (m < 1 || tau < 1) throw Error(ErrorCode::InvalidArgument, "need m >= 1, tau >= 1");
    count_ = window_row_count(m, tau, std::numeric_limits<int64_t>::max() / 2);
}

int64_t IndexMap::index_of(const std::vector<int>& symbols) const {
    if (static_cast<int>(symbols.size()) != tau_)
        throw Error(ErrorCode::OutOfRange, "string length != tau");
    int64_t idx = 0;
    for (int s : symbols) {
        if (s < 0 || s >= m_) throw Error(ErrorCode::OutOfRange, "symbol outside [0, m)");
        idx = idx * m_ + s;
    }
    return idx;
}

std::vector<int> IndexMap::string_of(int64_t index) const {
    if (index < 0 || index >= count_) throw Error(ErrorCode::OutOfRange, "index outside [0, m^tau)");
    std::vector<int> symbols(tau_);
    for (int t = tau_ - 1; t >= 0; --t) {
        symbols[t] = static_cast<int>(index % m_);
        index /= m_;
    }
    return symbols;
}

MomentTensor exact_moment_tensor(const Hmm& h, int tau, int64_t row_cap) {
    LikelihoodFactors f = likelihood_factors(h, tau, row_cap);
    MomentTensor M;
    M.tensor = outer3(f.A, f.B, f.C);
    M.tau = tau;
    M.m = h.m;
    M.empirical = false;
    return M;
}

MomentTensor empirical_moment_tensor(const std::vector<ObservationWindow>& windows, int m,
                                     int tau) {
    if (windows.empty()) throw Error(ErrorCode::EmptyInput, "no windows");
    const int len = 2 * tau + 1;
    const int64_t rows = window_row_count(m, tau);

    MomentTensor M;
    M.tensor = Tensor3(rows, rows, m);
    M.tau = tau;
    M.m = m;
    M.empirical = true;
    M.sample_count = static_cast<int64_t>(windows.size());

    for (const auto& w : windows) {
        if (static_cast<int>(w.symbols.size()) != len)
            throw Error(ErrorCode::InvalidArgument, "window length != 2*tau + 1");
        const int center = w.symbols[tau];
        if (center < 0 || center >= m)
            throw Error(ErrorCode::AlphabetMismatch, "symbol outside [0, m)");
        int64_t future = 0, past = 0;
        for (int t = 1; t <= tau; ++t) {
            int yf = w.symbols[tau + t];   // y_t
            int yp = w.symbols[tau - t];   // y_{-t}, most recent first
            if (yf < 0 || yf >= m || yp < 0 || yp >= m)
                throw Error(ErrorCode::AlphabetMismatch, "symbol outside [0, m)");
            future = future * m + yf;
            past = past * m + yp;
        }
        M.tensor(future, past, center) += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(windows.size());
    for (double& x : M.tensor.data()) x *= inv;
    return M;
}

void export_nonzero_csv(const MomentTensor& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    out << "future_idx,past_idx,present,value\n";
    char buf[64];
    for (int64_t i = 0; i < M.tensor.d1(); ++i)
        for (int64_t j = 0; j < M.tensor.d2(); ++j)
            for (int64_t l = 0; l < M.tensor.d3(); ++l) {
                double v = M.tensor(i, j, l);
                if (v == 0.0) continue;
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << i << ',' << j << ',' << l << ',' << buf << '\n';
            }
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path);
}

}  // namespace hmmlab
