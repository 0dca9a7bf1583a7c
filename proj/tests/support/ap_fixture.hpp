#pragma once

// Reader for the frozen affinity-propagation reference runs in
// tests/data/ap_reference.txt (see tests/reference/ap_reference.py).

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "semcom/affinity.hpp"

namespace fixture {

struct APInstance {
    int id = 0;
    std::size_t n = 0, p = 0;
    double damping = 0.5;
    std::size_t convergence_iter = 50, max_iter = 1000;
    double preference = 0.0;
    semcom::LabeledDataset points;
    std::vector<std::size_t> exemplars;
    bool converged = false;

    /// Negative Euclidean similarities, diagonal left at zero.
    semcom::SimilarityMatrix raw_similarity() const {
        semcom::SimilarityMatrix s(n, std::vector<double>(n * n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                if (i != k) s(i, k) = -semcom::l2_distance(points.row(i), points.row(k));
        return s;
    }
};

inline std::vector<APInstance> load_ap_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open AP fixture " + path);
    std::vector<APInstance> out;
    std::string word;
    while (in >> word) {
        if (word != "instance") throw std::runtime_error("AP fixture: expected 'instance', got " + word);
        APInstance inst;
        in >> inst.id >> inst.n >> inst.p >> inst.damping >> inst.convergence_iter >> inst.max_iter;
        in >> word >> inst.preference;
        inst.points.n_class = 1;
        inst.points.embeddings = semcom::Matrix(inst.n, inst.p);
        inst.points.labels.assign(inst.n, 0);
        for (std::size_t i = 0; i < inst.n; ++i)
            for (std::size_t j = 0; j < inst.p; ++j) in >> inst.points.embeddings.row(i)[j];
        std::size_t k = 0;
        in >> word >> k;
        inst.exemplars.resize(k);
        for (auto& e : inst.exemplars) in >> e;
        int conv = 0;
        in >> word >> conv;
        inst.converged = conv != 0;
        if (!in) throw std::runtime_error("AP fixture: malformed instance");
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace fixture
