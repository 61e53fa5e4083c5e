#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mmg/errors.hpp"

namespace mmg {

/// Row-stochastic N x cls matrix of per-sample class probabilities for one
/// modality. Row order is the sample order and is preserved by all I/O.
struct ProbabilityMatrix {
    std::size_t class_count = 0;
    std::vector<std::string> sample_ids;
    std::vector<double> probs;  // row-major, sample_ids.size() * class_count

    std::size_t rows() const { return sample_ids.size(); }

    std::span<double> row(std::size_t i) {
        return std::span<double>(probs.data() + i * class_count, class_count);
    }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(probs.data() + i * class_count, class_count);
    }
};

inline void validate_probability_matrix(const ProbabilityMatrix& p, double row_sum_tol = 1e-6) {
    if (p.class_count == 0) throw ValidationError("probability matrix needs class_count >= 1");
    if (p.probs.size() != p.rows() * p.class_count)
        throw ShapeError("probability storage does not match rows x classes");
    std::unordered_set<std::string> seen;
    for (const auto& id : p.sample_ids)
        if (!seen.insert(id).second) throw DuplicateSampleError("duplicate sample id: " + id);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (double v : p.row(i)) {
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError("negative or non-finite probability in row " +
                                      std::to_string(i));
            sum += v;
        }
        if (std::fabs(sum - 1.0) > row_sum_tol)
            throw NormalizationError("row " + std::to_string(i) + " sums to " +
                                     std::to_string(sum));
    }
}

// Argmax with ties broken to the smallest class index.
inline std::size_t argmax_class(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

}  // namespace mmg
