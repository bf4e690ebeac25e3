#include "hmm.hpp"

#include <cmath>

#include "json.hpp"

#include "error.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace hmmlab {

using nlohmann::json;

Hmm Hmm::make(Matrix transition, Matrix observation) {
    if (transition.rows() != transition.cols())
        throw Error(ErrorCode::DimensionMismatch, "transition matrix must be square");
    if (observation.cols() != transition.cols())
        throw Error(ErrorCode::DimensionMismatch,
                    "observation matrix must have one column per hidden state");
    Hmm h;
    h.n = static_cast<int>(transition.rows());
    h.m = static_cast<int>(observation.rows());
    h.T = std::move(transition);
    h.O = std::move(observation);
    return h;
}

Hmm Hmm::make_with_stationary(Matrix transition, Matrix observation) {
    Hmm h = make(std::move(transition), std::move(observation));
    h.pi = stationary(h.T);
    return h;
}

namespace {

json matrix_to_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw Error(ErrorCode::InvalidArgument, name + " must be a nested array");
    const size_t rows = j.size(), cols = j[0].size();
    Matrix M(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols)
            throw Error(ErrorCode::InvalidArgument, name + " has ragged rows");
        for (size_t c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
    }
    return M;
}

}  // namespace

std::string Hmm::to_json() const {
    json j;
    j["n"] = n;
    j["m"] = m;
    j["T"] = matrix_to_json(T);
    j["O"] = matrix_to_json(O);
    if (pi) {
        json p = json::array();
        for (int i = 0; i < pi->size(); ++i) p.push_back((*pi)[i]);
        j["pi"] = std::move(p);
    }
    return j.dump(2);
}

Hmm Hmm::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("bad HMM JSON: ") + e.what());
    }
    Matrix T = matrix_from_json(j.at("T"), "T");
    Matrix O = matrix_from_json(j.at("O"), "O");
    Hmm h = make(std::move(T), std::move(O));
    if (j.contains("n") && j["n"].get<int>() != h.n)
        throw Error(ErrorCode::InvalidArgument, "declared n does not match T");
    if (j.contains("m") && j["m"].get<int>() != h.m)
        throw Error(ErrorCode::InvalidArgument, "declared m does not match O");
    if (j.contains("pi")) {
        const auto& p = j["pi"];
        if (static_cast<int>(p.size()) != h.n)
            throw Error(ErrorCode::InvalidArgument, "pi has wrong length");
        Vector v(h.n);
        for (int i = 0; i < h.n; ++i) v[i] = p[i].get<double>();
        h.pi = v;
    }
    return h;
}

std::vector<Violation> validate(const Hmm& h) {
    std::vector<Violation> out;
    auto check_stochastic = [&out](const Matrix& M, const std::string& name) {
        for (int j = 0; j < M.cols(); ++j) {
            double sum = M.col(j).sum();
            if (std::abs(sum - 1.0) > 1e-12)
                out.push_back({name + " column sum != 1", j, sum - 1.0});
            for (int i = 0; i < M.rows(); ++i) {
                if (M(i, j) < 0.0)
                    out.push_back({name + " negative entry", j, M(i, j)});
                else if (M(i, j) > 1.0)
                    out.push_back({name + " entry > 1", j, M(i, j) - 1.0});
            }
        }
    };
    check_stochastic(h.T, "T");
    check_stochastic(h.O, "O");
    if (h.pi) {
        const Vector& p = *h.pi;
        double sum = p.sum();
        if (std::abs(sum - 1.0) > 1e-10) out.push_back({"pi sum != 1", -1, sum - 1.0});
        for (int i = 0; i < p.size(); ++i)
            if (p[i] < 0.0) out.push_back({"pi negative entry", i, p[i]});
        double res = (h.T * p - p).lpNorm<1>();
        if (res > 1e-10) out.push_back({"pi not stationary", -1, res});
    }
    return out;
}

Vector stationary(const Matrix& T, double tol, int max_iters) {
    if (T.rows() != T.cols())
        throw Error(ErrorCode::DimensionMismatch, "stationary needs a square matrix");
    const int n = static_cast<int>(T.rows());
    Vector p = Vector::Constant(n, 1.0 / n);

    // Plain power iteration; the uniform start already fixes doubly
    // stochastic chains (permutations included).
    for (int it = 0; it < max_iters; ++it) {
        Vector next = T * p;
        double res = (next - p).lpNorm<1>();
        p = next / next.sum();
        if (res <= tol) return p;
    }

    // Cesaro phase for periodic chains: average the iterates and test the
    // residual of the running average.
    p = Vector::Constant(n, 1.0 / n);
    Vector acc = Vector::Zero(n);
    for (int it = 1; it <= max_iters; ++it) {
        acc += p;
        p = T * p;
        if (it % 64 == 0 || it == max_iters) {
            Vector avg = acc / it;
            avg /= avg.sum();
            if ((T * avg - avg).lpNorm<1>() <= tol) return avg;
        }
    }
    throw Error(ErrorCode::NonConvergent,
                "power iteration did not reach tolerance; chain may not be ergodic");
}

Vector stationary(const Hmm& h) {
    if (h.pi) return *h.pi;
    return stationary(h.T);
}

Matrix time_reverse(const Matrix& T, const Vector& pi) {
    if (T.rows() != T.cols() || pi.size() != T.rows())
        throw Error(ErrorCode::DimensionMismatch, "time_reverse dimension mismatch");
    const int n = static_cast<int>(T.rows());
    for (int i = 0; i < n; ++i)
        if (pi[i] < 1e-14)
            throw Error(ErrorCode::ZeroStationaryMass,
                        "stationary mass of state " + std::to_string(i) + " is below 1e-14");
    Matrix R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) R(i, j) = T(j, i) * pi[i] / pi[j];
    return R;
}

std::vector<ObservationWindow> sample_windows(const Hmm& h, int tau, int64_t count,
                                              uint64_t seed) {
    if (tau < 1) throw Error(ErrorCode::InvalidArgument, "tau must be >= 1");
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
    const Vector pi = stationary(h);
    const int len = 2 * tau + 1;

    // Per-column CDFs once; windows are then plain inverse-CDF walks.
    auto column_cdfs = [](const Matrix& M) {
        std::vector<std::vector<double>> cdfs(M.cols());
        for (int j = 0; j < M.cols(); ++j) {
            cdfs[j].resize(M.rows());
            double acc = 0.0;
            for (int i = 0; i < M.rows(); ++i) {
                acc += M(i, j);
                cdfs[j][i] = acc;
            }
        }
        return cdfs;
    };
    const auto t_cdfs = column_cdfs(h.T);
    const auto o_cdfs = column_cdfs(h.O);
    std::vector<double> pi_cdf(h.n);
    {
        double acc = 0.0;
        for (int i = 0; i < h.n; ++i) {
            acc += pi[i];
            pi_cdf[i] = acc;
        }
    }

    Rng rng(derive_seed(seed, "windows"));
    std::vector<ObservationWindow> out(static_cast<size_t>(count));
    for (int64_t w = 0; w < count; ++w) {
        ObservationWindow& win = out[static_cast<size_t>(w)];
        win.symbols.resize(len);
        int state = rng.categorical_cdf(pi_cdf);
        win.symbols[0] = rng.categorical_cdf(o_cdfs[state]);
        for (int t = 1; t < len; ++t) {
            state = rng.categorical_cdf(t_cdfs[state]);
            win.symbols[t] = rng.categorical_cdf(o_cdfs[state]);
        }
    }
    return out;
}

int64_t window_row_count(int m, int tau, int64_t cap) {
    if (m < 1 || tau < 1) throw Error(ErrorCode::InvalidArgument, "need m >= 1, tau >= 1");
    int64_t rows = 1;
    for (int t = 0; t < tau; ++t) {
        if (rows > cap / m)
            throw Error(ErrorCode::SizeCap, "m^tau exceeds the configured row cap");
        rows *= m;
    }
    if (rows > cap) throw Error(ErrorCode::SizeCap, "m^tau exceeds the configured row cap");
    return rows;
}

namespace {

Matrix likelihood_recursion(const Matrix& T, const Matrix& O, int tau, int64_t row_cap) {
    (void)window_row_count(static_cast<int>(O.rows()), tau, row_cap);
    Matrix A = O * T;
    for (int t = 2; t <= tau; ++t) A = khatri_rao(O, A) * T;
    return A;
}

}  // namespace

Matrix likelihood_matrix(const Hmm& h, int tau, int64_t row_cap) {
    if (tau < 1) throw Error(ErrorCode::InvalidArgument, "tau must be >= 1");
    return likelihood_recursion(h.T, h.O, tau, row_cap);
}

Matrix reverse_likelihood_matrix(const Hmm& h, int tau, int64_t row_cap) {
    if (tau < 1) throw Error(ErrorCode::InvalidArgument, "tau must be >= 1");
    const Vector pi = stationary(h);
    return likelihood_recursion(time_reverse(h.T, pi), h.O, tau, row_cap);
}

Matrix joint_factor(const Hmm& h) {
    const Vector pi = stationary(h);
    return h.O * pi.asDiagonal();
}

LikelihoodFactors likelihood_factors(const Hmm& h, int tau, int64_t row_cap) {
    LikelihoodFactors f;
    f.tau = tau;
    f.A = likelihood_matrix(h, tau, row_cap);
    f.B = reverse_likelihood_matrix(h, tau, row_cap);
    f.C = joint_factor(h);
    return f;
}

}  // namespace hmmlab
