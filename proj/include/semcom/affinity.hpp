#pragma once

// Semantic compression: affinity propagation over negative Euclidean
// similarities; the exemplars (actual data points) become the codebook.

#include <algorithm>
#include <numeric>
#include <ostream>

#include "semcom/core.hpp"

namespace semcom {

/// Diagonal of the similarity matrix. Either a fixed value or derived from
/// the off-diagonal similarities.
struct Preference {
    enum class Kind { value, median, minimum };
    Kind kind = Kind::median;
    double value = 0.0;

    static Preference fixed(double v) { return {Kind::value, v}; }
    static Preference median() { return {Kind::median, 0.0}; }
    static Preference minimum() { return {Kind::minimum, 0.0}; }
};

class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::size_t n, std::vector<double> values) : n_(n), s_(std::move(values)) {
        if (s_.size() != n_ * n_) throw UsageError("similarity matrix must be N x N");
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t k) const { return s_[i * n_ + k]; }
    double& operator()(std::size_t i, std::size_t k) { return s_[i * n_ + k]; }
    const std::vector<double>& values() const noexcept { return s_; }

    double preference() const { return n_ ? s_[0] : 0.0; }
    void set_preference(double p) {
        for (std::size_t i = 0; i < n_; ++i) s_[i * n_ + i] = p;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> s_;
};

/// Lower median of the off-diagonal entries (element (n-1)/2 of the sorted list).
inline double offdiagonal_median(const SimilarityMatrix& s) {
    std::vector<double> off;
    off.reserve(s.size() * (s.size() - 1));
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t k = 0; k < s.size(); ++k)
            if (i != k) off.push_back(s(i, k));
    auto mid = off.begin() + static_cast<std::ptrdiff_t>((off.size() - 1) / 2);
    std::nth_element(off.begin(), mid, off.end());
    return *mid;
}

inline double offdiagonal_minimum(const SimilarityMatrix& s) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t k = 0; k < s.size(); ++k)
            if (i != k) m = std::min(m, s(i, k));
    return m;
}

inline double resolve_preference(const SimilarityMatrix& s, const Preference& pref) {
    switch (pref.kind) {
        case Preference::Kind::value: return pref.value;
        case Preference::Kind::median: return offdiagonal_median(s);
        case Preference::Kind::minimum: return offdiagonal_minimum(s);
    }
    return pref.value;
}

/// Wraps a precomputed similarity matrix; the diagonal is overwritten with the preference.
inline SimilarityMatrix with_preference(SimilarityMatrix s, const Preference& pref) {
    if (s.size() < 2) throw UsageError("affinity propagation needs at least two points");
    s.set_preference(resolve_preference(s, pref));
    return s;
}

inline SimilarityMatrix similarity_matrix(const LabeledDataset& ds, const Preference& pref) {
    const std::size_t n = ds.size();
    if (n < 2) throw UsageError("affinity propagation needs at least two points");
    SimilarityMatrix s(n, std::vector<double>(n * n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
            const double v = -l2_distance(ds.row(i), ds.row(k));
            s(i, k) = v;
            s(k, i) = v;
        }
    return with_preference(std::move(s), pref);
}

struct APConfig {
    double damping = 0.5;
    std::size_t max_iterations = 1000;
    std::size_t convergence_window = 50;
    Preference preference = Preference::median();
    // Canonical post-pass: move each exemplar to the member that maximizes
    // the summed within-cluster similarity, then reassign.
    bool refine_exemplars = true;

    void validate() const {
        if (!(damping >= 0.5 && damping < 1.0)) throw UsageError("damping must lie in [0.5, 1)");
        if (convergence_window < 1) throw UsageError("convergence_window must be >= 1");
        if (max_iterations < convergence_window) throw UsageError("max_iterations must be >= convergence_window");
    }
};

struct APResult {
    std::vector<std::size_t> exemplar_ids;  // ascending
    std::vector<std::size_t> labels;        // index into exemplar_ids
    std::size_t iterations_run = 0;
    bool converged = false;

    std::size_t clusters() const noexcept { return exemplar_ids.size(); }
};

inline std::ostream& operator<<(std::ostream& os, const APResult& r) {
    return os << "K " << r.clusters() << "\niterations " << r.iterations_run << "\nconverged "
              << (r.converged ? "true" : "false") << "\n";
}

namespace detail {

inline std::vector<std::size_t> nearest_exemplar(const SimilarityMatrix& s, const std::vector<std::size_t>& exemplars) {
    const std::size_t n = s.size();
    std::vector<std::size_t> c(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < exemplars.size(); ++k) {
            const double v = s(i, exemplars[k]);
            if (v > best) {
                best = v;
                c[i] = k;
            }
        }
    }
    for (std::size_t k = 0; k < exemplars.size(); ++k) c[exemplars[k]] = k;
    return c;
}

}  // namespace detail

inline APResult affinity_propagation(const SimilarityMatrix& input, const APConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t n = input.size();
    if (n < 2) throw UsageError("affinity propagation needs at least two points");

    // All off-diagonal similarities equal and one shared preference: message
    // passing cannot break the symmetry, so answer directly (one cluster, or
    // every point alone when the preference is higher).
    bool degenerate = true;
    for (std::size_t i = 0; i < n && degenerate; ++i)
        for (std::size_t k = 0; k < n && degenerate; ++k)
            degenerate = (i == k) ? input(i, i) == input(0, 0) : input(i, k) == input(0, 1);
    if (degenerate) {
        APResult result;
        result.converged = true;
        if (input(0, 0) > input(0, 1)) {
            result.exemplar_ids.resize(n);
            std::iota(result.exemplar_ids.begin(), result.exemplar_ids.end(), std::size_t{0});
            result.labels = result.exemplar_ids;
        } else {
            result.exemplar_ids = {0};
            result.labels.assign(n, 0);
        }
        return result;
    }

    SimilarityMatrix s = input;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
            const double noise = 1e-12 * rng.normal();
            s(i, k) += noise;
            s(k, i) += noise;
        }

    const double lambda = cfg.damping;
    std::vector<double> r(n * n, 0.0), a(n * n, 0.0);
    std::vector<double> colsum(n);
    std::vector<char> is_exemplar(n, 0), previous(n, 0);
    std::size_t stable_run = 0;
    std::size_t it = 0;
    bool converged = false;

    for (; it < cfg.max_iterations; ++it) {
        // Responsibilities.
        for (std::size_t i = 0; i < n; ++i) {
            double first = -std::numeric_limits<double>::infinity();
            double second = first;
            std::size_t arg = 0;
            for (std::size_t k = 0; k < n; ++k) {
                const double v = a[i * n + k] + s(i, k);
                if (v > first) {
                    second = first;
                    first = v;
                    arg = k;
                } else if (v > second) {
                    second = v;
                }
            }
            for (std::size_t k = 0; k < n; ++k) {
                const double computed = s(i, k) - (k == arg ? second : first);
                double& rik = r[i * n + k];
                rik = lambda * rik + (1.0 - lambda) * computed;
            }
        }

        // Availabilities: colsum(k) = r(k,k) + sum_{i' != k} max(0, r(i',k)).
        std::fill(colsum.begin(), colsum.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double v = r[i * n + k];
                colsum[k] += (i == k) ? v : std::max(0.0, v);
            }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double rik = r[i * n + k];
                const double computed =
                    (i == k) ? colsum[k] - rik : std::min(0.0, colsum[k] - std::max(0.0, rik));
                double& aik = a[i * n + k];
                aik = lambda * aik + (1.0 - lambda) * computed;
            }

        std::size_t k_count = 0;
        for (std::size_t k = 0; k < n; ++k) {
            is_exemplar[k] = (r[k * n + k] + a[k * n + k]) > 0.0;
            k_count += is_exemplar[k];
        }
        stable_run = (it > 0 && is_exemplar == previous) ? stable_run + 1 : 1;
        previous = is_exemplar;
        if (it >= cfg.convergence_window && stable_run >= cfg.convergence_window && k_count > 0) {
            converged = true;
            ++it;
            break;
        }
    }

    std::vector<std::size_t> exemplars;
    for (std::size_t k = 0; k < n; ++k)
        if (is_exemplar[k]) exemplars.push_back(k);
    if (exemplars.empty()) throw std::runtime_error("no exemplars; raise preference");

    auto c = detail::nearest_exemplar(s, exemplars);
    if (cfg.refine_exemplars) {
        for (std::size_t k = 0; k < exemplars.size(); ++k) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (c[i] == k) members.push_back(i);
            double best = -std::numeric_limits<double>::infinity();
            for (auto j : members) {
                double total = 0.0;
                for (auto i : members) total += s(i, j);
                if (total > best) {
                    best = total;
                    exemplars[k] = j;
                }
            }
        }
        std::sort(exemplars.begin(), exemplars.end());
        exemplars.erase(std::unique(exemplars.begin(), exemplars.end()), exemplars.end());
        c = detail::nearest_exemplar(s, exemplars);
    }

    APResult result;
    result.exemplar_ids = std::move(exemplars);
    result.labels = std::move(c);
    result.iterations_run = it;
    result.converged = converged;
    return result;
}

inline Codebook build_centroid_codebook(const LabeledDataset& ds, const APResult& ap) {
    if (ap.labels.size() != ds.size()) throw UsageError("clustering result does not match dataset");
    Codebook cb;
    cb.entries = Matrix(0, ds.dim());
    std::vector<std::uint32_t> ids;
    for (auto id : ap.exemplar_ids) {
        if (id >= ds.size()) throw UsageError("exemplar id out of range");
        cb.entries.append_row(ds.row(id));
        ids.push_back(static_cast<std::uint32_t>(id));
    }
    cb.source_ids = std::move(ids);
    return cb;
}

}  // namespace semcom
