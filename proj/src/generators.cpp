#include "generators.hpp"

#include <algorithm>
#include <unordered_set>

#include "json.hpp"

#include "error.hpp"
#include "rng.hpp"

namespace hmmlab {

using nlohmann::json;

TransitionSpec TransitionSpec::cycle(int n) {
    TransitionSpec s;
    s.kind = Kind::CyclePermutation;
    s.n = n;
    return s;
}

TransitionSpec TransitionSpec::union_of_cycles(int n, int c) {
    TransitionSpec s;
    s.kind = Kind::UnionOfCycles;
    s.n = n;
    s.cycle_len = c;
    return s;
}

TransitionSpec TransitionSpec::cycle_mixture(int n, int c, double eps) {
    TransitionSpec s;
    s.kind = Kind::CycleMixture;
    s.n = n;
    s.cycle_len = c;
    s.eps = eps;
    return s;
}

TransitionSpec TransitionSpec::degree_mixture(int n, int d, double eps, uint64_t seed) {
    TransitionSpec s;
    s.kind = Kind::DegreeMixture;
    s.n = n;
    s.degree = d;
    s.eps = eps;
    s.seed = seed;
    return s;
}

TransitionSpec TransitionSpec::regular_digraph(int n, int d, uint64_t seed) {
    TransitionSpec s;
    s.kind = Kind::RegularDigraph;
    s.n = n;
    s.degree = d;
    s.seed = seed;
    return s;
}

TransitionSpec TransitionSpec::factorial(TransitionSpec a, TransitionSpec b) {
    TransitionSpec s;
    s.kind = Kind::Factorial;
    s.factor1 = std::make_shared<TransitionSpec>(std::move(a));
    s.factor2 = std::make_shared<TransitionSpec>(std::move(b));
    return s;
}

TransitionSpec TransitionSpec::identity(int n) {
    TransitionSpec s;
    s.kind = Kind::Identity;
    s.n = n;
    return s;
}

ObservationSpec ObservationSpec::random_support(int n, int m, int k, uint64_t seed) {
    ObservationSpec s;
    s.kind = Kind::RandomSupport;
    s.n = n;
    s.m = m;
    s.k = k;
    s.seed = seed;
    return s;
}

ObservationSpec ObservationSpec::deterministic_labels(int n, int m, uint64_t seed) {
    ObservationSpec s;
    s.kind = Kind::DeterministicRandomLabels;
    s.n = n;
    s.m = m;
    s.seed = seed;
    return s;
}

ObservationSpec ObservationSpec::de_bruijn(int n, int m) {
    ObservationSpec s;
    s.kind = Kind::DeBruijn;
    s.n = n;
    s.m = m;
    return s;
}

namespace {

Matrix cycle_matrix(int n) {
    Matrix T = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) T((j + 1) % n, j) = 1.0;
    return T;
}

Matrix union_of_cycles_matrix(int n, int c) {
    if (c < 1 || n % c != 0)
        throw Error(ErrorCode::InvalidSpec, "cycle length must divide n");
    Matrix T = Matrix::Zero(n, n);
    for (int base = 0; base < n; base += c)
        for (int r = 0; r < c; ++r) T(base + (r + 1) % c, base + r) = 1.0;
    return T;
}

// 0/1 adjacency of a random digraph with out-degree d, no self-loops.
Matrix digraph_adjacency(int n, int d, uint64_t seed) {
    if (d < 1 || d > n - 1)
        throw Error(ErrorCode::InvalidSpec, "digraph degree must be in [1, n-1]");
    Rng rng(derive_seed(seed, "digraph"));
    Matrix A = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        std::vector<int> picks = rng.sample_without_replacement(n - 1, d);
        for (int p : picks) {
            int target = p >= j ? p + 1 : p;  // skip the diagonal
            A(target, j) = 1.0;
        }
    }
    return A;
}

Matrix kronecker(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

}  // namespace

Matrix make_transition(const TransitionSpec& spec) {
    switch (spec.kind) {
        case TransitionSpec::Kind::CyclePermutation:
            if (spec.n < 1) throw Error(ErrorCode::InvalidSpec, "n must be positive");
            return cycle_matrix(spec.n);
        case TransitionSpec::Kind::UnionOfCycles:
            return union_of_cycles_matrix(spec.n, spec.cycle_len);
        case TransitionSpec::Kind::CycleMixture: {
            if (spec.eps < 0.0 || spec.eps > 1.0)
                throw Error(ErrorCode::InvalidSpec, "eps must be in [0, 1]");
            Matrix Pc = union_of_cycles_matrix(spec.n, spec.cycle_len);
            return spec.eps * Pc + (1.0 - spec.eps) * cycle_matrix(spec.n);
        }
        case TransitionSpec::Kind::DegreeMixture: {
            if (spec.eps < 0.0 || spec.eps * spec.degree > 1.0)
                throw Error(ErrorCode::InvalidSpec, "need 0 <= eps and eps * d <= 1");
            Matrix G = digraph_adjacency(spec.n, spec.degree, spec.seed);
            return spec.eps * G + (1.0 - spec.eps * spec.degree) * cycle_matrix(spec.n);
        }
        case TransitionSpec::Kind::RegularDigraph: {
            Matrix G = digraph_adjacency(spec.n, spec.degree, spec.seed);
            return G / static_cast<double>(spec.degree);
        }
        case TransitionSpec::Kind::Factorial: {
            if (!spec.factor1 || !spec.factor2)
                throw Error(ErrorCode::InvalidSpec, "factorial spec missing components");
            return kronecker(make_transition(*spec.factor1), make_transition(*spec.factor2));
        }
        case TransitionSpec::Kind::Identity:
            if (spec.n < 1) throw Error(ErrorCode::InvalidSpec, "n must be positive");
            return Matrix::Identity(spec.n, spec.n);
    }
    throw Error(ErrorCode::InvalidSpec, "unknown transition kind");
}

Matrix make_observation(const ObservationSpec& spec) {
    if (spec.n < 1 || spec.m < 1)
        throw Error(ErrorCode::InvalidSpec, "observation spec needs n >= 1, m >= 1");
    switch (spec.kind) {
        case ObservationSpec::Kind::RandomSupport: {
            if (spec.k < 1 || spec.k > spec.m)
                throw Error(ErrorCode::InvalidSpec, "support size k must be in [1, m]");
            Rng rng(derive_seed(spec.seed, "obs-support"));
            Matrix O = Matrix::Zero(spec.m, spec.n);
            for (int j = 0; j < spec.n; ++j) {
                std::vector<int> support = rng.sample_without_replacement(spec.m, spec.k);
                Vector mass = rng.simplex(spec.k);
                for (int i = 0; i < spec.k; ++i) O(support[i], j) = mass[i];
            }
            return O;
        }
        case ObservationSpec::Kind::DeterministicRandomLabels: {
            Rng rng(derive_seed(spec.seed, "obs-labels"));
            Matrix O = Matrix::Zero(spec.m, spec.n);
            for (int j = 0; j < spec.n; ++j)
                O(static_cast<int>(rng.uniform_int(spec.m)), j) = 1.0;
            return O;
        }
        case ObservationSpec::Kind::DeBruijn: {
            if (spec.m < 2) throw Error(ErrorCode::InvalidSpec, "De Bruijn needs m >= 2");
            int j = 0;
            int64_t power = 1;
            while (power < spec.n) {
                power *= spec.m;
                ++j;
            }
            if (power != spec.n || j < 1)
                throw Error(ErrorCode::InvalidSpec, "De Bruijn labels need n = m^j");
            std::vector<int> seq = de_bruijn_sequence(spec.m, j);
            Matrix O = Matrix::Zero(spec.m, spec.n);
            for (int col = 0; col < spec.n; ++col) O(seq[col], col) = 1.0;
            return O;
        }
    }
    throw Error(ErrorCode::InvalidSpec, "unknown observation kind");
}

std::vector<int> de_bruijn_sequence(int m, int j) {
    if (m < 2 || j < 1) throw Error(ErrorCode::InvalidArgument, "need m >= 2, j >= 1");
    int64_t vertices = 1;
    for (int t = 0; t < j - 1; ++t) vertices *= m;

    // Hierholzer on the graph whose vertices are (j-1)-strings; edge labels
    // emitted on backtrack give the circuit in reverse.
    std::vector<int> next_label(static_cast<size_t>(vertices), 0);
    std::vector<std::pair<int64_t, int>> stack;
    std::vector<int> labels;
    labels.reserve(static_cast<size_t>(vertices) * m);
    stack.push_back({0, -1});
    while (!stack.empty()) {
        auto [u, incoming] = stack.back();
        if (next_label[static_cast<size_t>(u)] < m) {
            int a = next_label[static_cast<size_t>(u)]++;
            stack.push_back({(u * m + a) % vertices, a});
        } else {
            if (incoming >= 0) labels.push_back(incoming);
            stack.pop_back();
        }
    }
    std::reverse(labels.begin(), labels.end());
    return labels;
}

Matrix undirected_regular_walk(int n, int d, uint64_t seed) {
    if (d < 1 || d >= n) throw Error(ErrorCode::InvalidSpec, "need 1 <= d < n");
    if ((static_cast<int64_t>(n) * d) % 2 != 0)
        throw Error(ErrorCode::InvalidSpec, "n * d must be even");

    Rng rng(derive_seed(seed, "regular-graph"));
    const int restart_cap = 200;
    for (int attempt = 0; attempt < restart_cap; ++attempt) {
        std::vector<int> stubs;
        stubs.reserve(static_cast<size_t>(n) * d);
        for (int v = 0; v < n; ++v)
            for (int r = 0; r < d; ++r) stubs.push_back(v);
        std::unordered_set<int64_t> edges;
        edges.reserve(stubs.size());
        bool stuck = false;
        int rejections = 0;
        while (!stubs.empty()) {
            size_t i = rng.uniform_int(stubs.size());
            size_t jj = rng.uniform_int(stubs.size() - 1);
            if (jj >= i) ++jj;
            int u = stubs[i], v = stubs[jj];
            int64_t key = static_cast<int64_t>(std::min(u, v)) * n + std::max(u, v);
            if (u == v || edges.count(key)) {
                if (++rejections > 20000 + 100 * n * d) {
                    stuck = true;
                    break;
                }
                continue;
            }
            edges.insert(key);
            if (i < jj) std::swap(i, jj);
            stubs[i] = stubs.back();
            stubs.pop_back();
            stubs[jj] = stubs.back();
            stubs.pop_back();
        }
        if (stuck) continue;
        Matrix W = Matrix::Zero(n, n);
        for (int64_t key : edges) {
            int u = static_cast<int>(key / n), v = static_cast<int>(key % n);
            W(u, v) = W(v, u) = 1.0 / d;
        }
        return W;
    }
    throw Error(ErrorCode::InvalidSpec,
                "regular graph construction failed after the retry cap");
}

namespace {

json transition_spec_json(const TransitionSpec& s) {
    json j;
    switch (s.kind) {
        case TransitionSpec::Kind::CyclePermutation:
            j["kind"] = "cycle";
            j["n"] = s.n;
            break;
        case TransitionSpec::Kind::UnionOfCycles:
            j["kind"] = "union-of-cycles";
            j["n"] = s.n;
            j["c"] = s.cycle_len;
            break;
        case TransitionSpec::Kind::CycleMixture:
            j["kind"] = "cycle-mixture";
            j["n"] = s.n;
            j["c"] = s.cycle_len;
            j["eps"] = s.eps;
            break;
        case TransitionSpec::Kind::DegreeMixture:
            j["kind"] = "degree-mixture";
            j["n"] = s.n;
            j["d"] = s.degree;
            j["eps"] = s.eps;
            j["seed"] = s.seed;
            break;
        case TransitionSpec::Kind::RegularDigraph:
            j["kind"] = "regular-digraph";
            j["n"] = s.n;
            j["d"] = s.degree;
            j["seed"] = s.seed;
            break;
        case TransitionSpec::Kind::Factorial:
            j["kind"] = "factorial";
            j["factor1"] = transition_spec_json(*s.factor1);
            j["factor2"] = transition_spec_json(*s.factor2);
            break;
        case TransitionSpec::Kind::Identity:
            j["kind"] = "identity";
            j["n"] = s.n;
            break;
    }
    return j;
}

TransitionSpec transition_spec_from(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cycle") return TransitionSpec::cycle(j.at("n").get<int>());
    if (kind == "union-of-cycles")
        return TransitionSpec::union_of_cycles(j.at("n").get<int>(), j.at("c").get<int>());
    if (kind == "cycle-mixture")
        return TransitionSpec::cycle_mixture(j.at("n").get<int>(), j.at("c").get<int>(),
                                             j.at("eps").get<double>());
    if (kind == "degree-mixture")
        return TransitionSpec::degree_mixture(j.at("n").get<int>(), j.at("d").get<int>(),
                                              j.at("eps").get<double>(),
                                              j.at("seed").get<uint64_t>());
    if (kind == "regular-digraph")
        return TransitionSpec::regular_digraph(j.at("n").get<int>(), j.at("d").get<int>(),
                                               j.at("seed").get<uint64_t>());
    if (kind == "factorial")
        return TransitionSpec::factorial(transition_spec_from(j.at("factor1")),
                                         transition_spec_from(j.at("factor2")));
    if (kind == "identity") return TransitionSpec::identity(j.at("n").get<int>());
    throw Error(ErrorCode::InvalidSpec, "unknown transition kind: " + kind);
}

}  // namespace

std::string TransitionSpec::to_json() const { return transition_spec_json(*this).dump(); }

TransitionSpec TransitionSpec::from_json(const std::string& text) {
    try {
        return transition_spec_from(json::parse(text));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("bad transition spec: ") + e.what());
    }
}

std::string ObservationSpec::to_json() const {
    json j;
    switch (kind) {
        case Kind::RandomSupport:
            j["kind"] = "random-support";
            j["n"] = n;
            j["m"] = m;
            j["k"] = k;
            j["seed"] = seed;
            break;
        case Kind::DeterministicRandomLabels:
            j["kind"] = "deterministic-labels";
            j["n"] = n;
            j["m"] = m;
            j["seed"] = seed;
            break;
        case Kind::DeBruijn:
            j["kind"] = "de-bruijn";
            j["n"] = n;
            j["m"] = m;
            break;
    }
    return j.dump();
}

ObservationSpec ObservationSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidSpec, std::string("bad observation spec: ") + e.what());
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "random-support")
        return random_support(j.at("n").get<int>(), j.at("m").get<int>(), j.at("k").get<int>(),
                              j.at("seed").get<uint64_t>());
    if (kind == "deterministic-labels")
        return deterministic_labels(j.at("n").get<int>(), j.at("m").get<int>(),
                                    j.at("seed").get<uint64_t>());
    if (kind == "de-bruijn") return de_bruijn(j.at("n").get<int>(), j.at("m").get<int>());
    throw Error(ErrorCode::InvalidSpec, "unknown observation kind: " + kind);
}

}  // namespace hmmlab
