#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mmg/errors.hpp"
#include "mmg/probability.hpp"

namespace mmg {

/// Named nonnegative fusion weights. Stored unnormalized; canonical() yields
/// the sum-1 representative actually applied to probability rows.
struct FusionWeights {
    std::vector<std::string> modality_names;
    std::vector<double> w;
};

inline void validate_weights(const FusionWeights& fw) {
    if (fw.modality_names.empty() || fw.modality_names.size() != fw.w.size())
        throw ValidationError("fusion weights need one value per modality name");
    double sum = 0.0;
    for (double v : fw.w) {
        if (!std::isfinite(v) || v < 0.0)
            throw ValidationError("fusion weights must be finite and non-negative");
        sum += v;
    }
    if (!(sum > 0.0)) throw ValidationError("fusion weights must not all be zero");
    std::unordered_set<std::string> seen;
    for (const auto& n : fw.modality_names)
        if (!seen.insert(n).second) throw ValidationError("duplicate modality name: " + n);
}

inline FusionWeights canonical(const FusionWeights& fw) {
    validate_weights(fw);
    double sum = 0.0;
    for (double v : fw.w) sum += v;
    FusionWeights out = fw;
    for (double& v : out.w) v /= sum;
    return out;
}

/// M probability matrices restricted to a common sample set, row-aligned.
struct AlignedPredictions {
    std::size_t class_count = 0;
    std::vector<std::string> modality_names;       // M, input order
    std::vector<std::string> sample_ids;           // N
    std::vector<std::vector<double>> probs;        // M matrices, each N*cls row-major
    std::optional<std::vector<std::size_t>> labels;
    std::vector<std::string> dropped_ids;          // ids lost to the intersection

    std::size_t rows() const { return sample_ids.size(); }
    std::size_t modalities() const { return modality_names.size(); }

    std::size_t modality_index(const std::string& name) const {
        for (std::size_t m = 0; m < modality_names.size(); ++m)
            if (modality_names[m] == name) return m;
        throw KeyError("unknown modality: " + name);
    }

    std::span<const double> row(std::size_t modality, std::size_t i) const {
        return std::span<const double>(probs[modality].data() + i * class_count, class_count);
    }
};

// Restrict all matrices to the ids present in every one of them, ordered as
// in the first matrix. When a label map is supplied, every retained sample
// must appear in it.
inline AlignedPredictions align(
    const std::vector<std::pair<std::string, ProbabilityMatrix>>& preds,
    const std::unordered_map<std::string, std::size_t>* labels = nullptr) {
    if (preds.empty()) throw ValidationError("align: no prediction matrices");
    AlignedPredictions out;
    out.class_count = preds.front().second.class_count;
    std::unordered_set<std::string> names;
    for (const auto& [name, mat] : preds) {
        if (!names.insert(name).second) throw ValidationError("duplicate modality name: " + name);
        if (mat.class_count != out.class_count)
            throw ShapeError("class_count " + std::to_string(mat.class_count) + " of modality " +
                             name + " differs from " + std::to_string(out.class_count));
    }

    std::vector<std::unordered_map<std::string, std::size_t>> row_of(preds.size());
    for (std::size_t m = 0; m < preds.size(); ++m) {
        const auto& mat = preds[m].second;
        row_of[m].reserve(mat.rows());
        for (std::size_t i = 0; i < mat.rows(); ++i) {
            if (!row_of[m].emplace(mat.sample_ids[i], i).second)
                throw DuplicateSampleError("duplicate sample id: " + mat.sample_ids[i]);
        }
    }

    std::vector<std::size_t> keep;  // row indices into the first matrix
    const auto& first = preds.front().second;
    std::unordered_set<std::string> dropped;
    for (std::size_t i = 0; i < first.rows(); ++i) {
        const std::string& id = first.sample_ids[i];
        bool everywhere = true;
        for (std::size_t m = 1; m < preds.size() && everywhere; ++m)
            everywhere = row_of[m].count(id) != 0;
        if (everywhere)
            keep.push_back(i);
        else
            dropped.insert(id);
    }
    for (std::size_t m = 1; m < preds.size(); ++m)
        for (const auto& id : preds[m].second.sample_ids)
            if (!row_of[0].count(id)) dropped.insert(id);
    out.dropped_ids.assign(dropped.begin(), dropped.end());
    std::sort(out.dropped_ids.begin(), out.dropped_ids.end());

    if (keep.empty()) throw AlignmentError("prediction matrices share no sample ids");

    const std::size_t cls = out.class_count;
    out.sample_ids.reserve(keep.size());
    for (std::size_t i : keep) out.sample_ids.push_back(first.sample_ids[i]);
    out.modality_names.reserve(preds.size());
    out.probs.resize(preds.size());
    for (std::size_t m = 0; m < preds.size(); ++m) {
        out.modality_names.push_back(preds[m].first);
        out.probs[m].resize(keep.size() * cls);
        const auto& mat = preds[m].second;
        for (std::size_t r = 0; r < keep.size(); ++r) {
            const std::size_t src = row_of[m].at(out.sample_ids[r]);
            std::copy_n(mat.probs.data() + src * cls, cls, out.probs[m].data() + r * cls);
        }
    }

    if (labels) {
        std::vector<std::size_t> y;
        y.reserve(out.rows());
        for (const auto& id : out.sample_ids) {
            auto it = labels->find(id);
            if (it == labels->end())
                throw ValidationError("sample " + id + " has no label in the manifest");
            y.push_back(it->second);
        }
        out.labels = std::move(y);
    }
    return out;
}

namespace detail {

// Shared accumulation kernel. Both fuse entry points run exactly this sum
// (ascending modality index, acc += w * p), which is what makes the uniform
// weighted_fuse agree with average_fuse to the last bit.
inline ProbabilityMatrix fuse_with(const AlignedPredictions& a,
                                   const std::vector<std::size_t>& modality_order,
                                   const std::vector<double>& weights) {
    ProbabilityMatrix out;
    out.class_count = a.class_count;
    out.sample_ids = a.sample_ids;
    out.probs.assign(a.rows() * a.class_count, 0.0);
    for (std::size_t k = 0; k < modality_order.size(); ++k) {
        const double w = weights[k];
        const std::vector<double>& p = a.probs[modality_order[k]];
        for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] += w * p[i];
    }
    return out;
}

}  // namespace detail

inline ProbabilityMatrix average_fuse(const AlignedPredictions& a,
                                      const std::vector<std::string>& subset) {
    if (subset.empty()) throw ValidationError("average_fuse: empty modality subset");
    std::vector<std::size_t> order;
    order.reserve(subset.size());
    for (const auto& name : subset) order.push_back(a.modality_index(name));
    std::sort(order.begin(), order.end());
    if (std::adjacent_find(order.begin(), order.end()) != order.end())
        throw ValidationError("average_fuse: repeated modality in subset");
    const double w = 1.0 / static_cast<double>(order.size());
    return detail::fuse_with(a, order, std::vector<double>(order.size(), w));
}

inline ProbabilityMatrix weighted_fuse(const AlignedPredictions& a, const FusionWeights& fw) {
    FusionWeights cw = canonical(fw);
    if (cw.modality_names.size() != a.modalities())
        throw KeyError("weights cover " + std::to_string(cw.modality_names.size()) +
                       " modalities, predictions carry " + std::to_string(a.modalities()));
    std::vector<std::size_t> order(a.modalities());
    std::vector<double> weights(a.modalities());
    for (std::size_t m = 0; m < a.modalities(); ++m) order[m] = m;
    for (std::size_t m = 0; m < a.modalities(); ++m) {
        // modality_index throws KeyError when the name sets differ
        std::size_t k = 0;
        while (k < cw.modality_names.size() && cw.modality_names[k] != a.modality_names[m]) ++k;
        if (k == cw.modality_names.size())
            throw KeyError("no weight for modality: " + a.modality_names[m]);
        weights[m] = cw.w[k];
    }
    return detail::fuse_with(a, order, weights);
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
    double top1 = 0.0;
    std::size_t n = 0;
    std::size_t class_count = 0;
    std::vector<double> per_class;      // accuracy per true class, 0 when unsupported
    std::vector<std::size_t> confusion; // cls x cls, row = truth, col = prediction
};

inline EvalReport evaluate_top1(const ProbabilityMatrix& p, const std::vector<std::size_t>& labels) {
    if (labels.size() != p.rows())
        throw ShapeError("evaluate_top1: " + std::to_string(p.rows()) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
    if (p.rows() == 0) throw ShapeError("evaluate_top1: empty probability matrix");
    const std::size_t cls = p.class_count;
    EvalReport r;
    r.n = p.rows();
    r.class_count = cls;
    r.confusion.assign(cls * cls, 0);
    for (std::size_t i = 0; i < p.rows(); ++i) {
        if (labels[i] >= cls)
            throw LabelRangeError("label " + std::to_string(labels[i]) + " outside [0," +
                                  std::to_string(cls) + ")");
        r.confusion[labels[i] * cls + argmax_class(p.row(i))]++;
    }
    std::size_t correct = 0;
    r.per_class.assign(cls, 0.0);
    for (std::size_t c = 0; c < cls; ++c) {
        std::size_t support = 0;
        for (std::size_t j = 0; j < cls; ++j) support += r.confusion[c * cls + j];
        correct += r.confusion[c * cls + c];
        if (support > 0)
            r.per_class[c] =
                static_cast<double>(r.confusion[c * cls + c]) / static_cast<double>(support);
    }
    r.top1 = static_cast<double>(correct) / static_cast<double>(r.n);
    return r;
}

// ---------------------------------------------------------------------------
// Validation-driven weight search

struct SearchConfig {
    std::string mode = "exhaustive";  // or "refine"
    double step = 0.05;
    double coarse_step = 0.1;
    double refine_step = 0.02;
    double refine_radius = 0.1;
    std::size_t max_grid_points = 200000;
};

// Number of grid points with step 1/steps over an M-simplex, i.e. the
// compositions of `steps` into M nonnegative parts: C(steps+M-1, M-1).
inline std::uint64_t simplex_grid_count(std::uint64_t steps, std::uint64_t m) {
    std::uint64_t count = 1;
    for (std::uint64_t i = 1; i < m; ++i) {
        const std::uint64_t num = steps + i;
        if (count > UINT64_MAX / num) return UINT64_MAX;
        count = count * num / i;  // product of consecutive terms stays integral
    }
    return count;
}

namespace detail {

struct SearchState {
    double best_acc = -1.0;
    std::vector<std::uint64_t> best_k;
};

// Accuracy of the fused matrix at weights k/steps over name-sorted modality
// order. Counting argmax hits directly avoids materializing the fused matrix.
inline double grid_point_accuracy(const AlignedPredictions& a,
                                  const std::vector<std::size_t>& sorted_order,
                                  const std::vector<std::uint64_t>& k, std::uint64_t steps,
                                  std::vector<double>& row_buf) {
    const std::size_t cls = a.class_count;
    const std::vector<std::size_t>& y = *a.labels;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        row_buf.assign(cls, 0.0);
        for (std::size_t m = 0; m < sorted_order.size(); ++m) {
            if (k[m] == 0) continue;
            const double w = static_cast<double>(k[m]) / static_cast<double>(steps);
            const double* p = a.probs[sorted_order[m]].data() + i * cls;
            for (std::size_t j = 0; j < cls; ++j) row_buf[j] += w * p[j];
        }
        if (argmax_class(std::span<const double>(row_buf.data(), cls)) == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(a.rows());
}

// Enumerates compositions of `steps` into M parts within [lo_i, hi_i] bounds,
// in lexicographic order, keeping the first point attaining the best
// accuracy. Lex enumeration makes the tie rule (smallest weight vector in
// name-sorted order) fall out of "strictly better replaces".
inline void enumerate_box(const AlignedPredictions& a, const std::vector<std::size_t>& order,
                          std::uint64_t steps, const std::vector<std::uint64_t>& lo,
                          const std::vector<std::uint64_t>& hi, SearchState& st,
                          std::vector<double>& row_buf) {
    const std::size_t m = order.size();
    std::vector<std::uint64_t> k(m, 0);
    std::vector<std::uint64_t> lo_suffix(m + 1, 0), hi_suffix(m + 1, 0);
    for (std::size_t i = m; i-- > 0;) {
        lo_suffix[i] = lo_suffix[i + 1] + lo[i];
        hi_suffix[i] = hi_suffix[i + 1] + hi[i];
    }
    auto rec = [&](auto&& self, std::size_t depth, std::uint64_t used) -> void {
        if (depth == m - 1) {
            const std::uint64_t rest = steps - used;
            if (rest >= lo[depth] && rest <= hi[depth]) {
                k[depth] = rest;
                const double acc = grid_point_accuracy(a, order, k, steps, row_buf);
                if (acc > st.best_acc) {
                    st.best_acc = acc;
                    st.best_k = k;
                }
            }
            return;
        }
        for (std::uint64_t v = lo[depth]; v <= hi[depth]; ++v) {
            if (used + v > steps) break;
            if (used + v + hi_suffix[depth + 1] < steps) continue;  // cannot reach the total yet
            if (used + v + lo_suffix[depth + 1] > steps) break;     // already past it
            k[depth] = v;
            self(self, depth + 1, used + v);
        }
    };
    rec(rec, 0, 0);
}

}  // namespace detail

inline std::pair<FusionWeights, EvalReport> search_weights(const AlignedPredictions& a,
                                                           const SearchConfig& cfg) {
    if (!a.labels) throw ValidationError("search_weights needs labels on the validation set");
    if (a.modalities() < 2) throw ValidationError("search_weights needs at least 2 modalities");
    if (cfg.mode != "exhaustive" && cfg.mode != "refine")
        throw ValidationError("search mode must be exhaustive or refine");

    // Canonical axis order: modality names sorted ascending.
    std::vector<std::size_t> order(a.modalities());
    for (std::size_t m = 0; m < order.size(); ++m) order[m] = m;
    std::sort(order.begin(), order.end(), [&a](std::size_t x, std::size_t y) {
        return a.modality_names[x] < a.modality_names[y];
    });

    const std::size_t m = a.modalities();
    std::vector<double> row_buf;
    detail::SearchState st;
    std::uint64_t steps = 0;

    auto run_full_grid = [&](double step) {
        steps = static_cast<std::uint64_t>(std::llround(1.0 / step));
        if (steps == 0) throw ValidationError("fusion step too large");
        const std::uint64_t points = simplex_grid_count(steps, m);
        if (points > cfg.max_grid_points)
            throw BudgetError("exhaustive grid needs " + std::to_string(points) +
                              " points, budget is " + std::to_string(cfg.max_grid_points) +
                              "; use refine mode");
        std::vector<std::uint64_t> lo(m, 0), hi(m, steps);
        st = detail::SearchState{};
        detail::enumerate_box(a, order, steps, lo, hi, st, row_buf);
    };

    if (cfg.mode == "exhaustive") {
        run_full_grid(cfg.step);
    } else {
        run_full_grid(cfg.coarse_step);
        const std::uint64_t coarse_steps = steps;
        const std::vector<std::uint64_t> coarse_k = st.best_k;
        const std::uint64_t fine_steps =
            static_cast<std::uint64_t>(std::llround(1.0 / cfg.refine_step));
        std::vector<std::uint64_t> lo(m), hi(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double center =
                static_cast<double>(coarse_k[i]) / static_cast<double>(coarse_steps);
            const double lo_w = std::max(0.0, center - cfg.refine_radius);
            const double hi_w = std::min(1.0, center + cfg.refine_radius);
            lo[i] = static_cast<std::uint64_t>(
                std::ceil(lo_w * static_cast<double>(fine_steps) - 1e-9));
            hi[i] = static_cast<std::uint64_t>(
                std::floor(hi_w * static_cast<double>(fine_steps) + 1e-9));
        }
        steps = fine_steps;
        st = detail::SearchState{};
        detail::enumerate_box(a, order, fine_steps, lo, hi, st, row_buf);
        if (st.best_k.empty()) throw ValidationError("refine box contained no grid point");
    }

    FusionWeights best;
    best.modality_names.reserve(m);
    best.w.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        best.modality_names.push_back(a.modality_names[order[i]]);
        best.w.push_back(static_cast<double>(st.best_k[i]) / static_cast<double>(steps));
    }
    // Rebuild the fused matrix with the exact arithmetic the grid scan used,
    // so the reported accuracy is the scanned one down to the last bit.
    EvalReport report = evaluate_top1(detail::fuse_with(a, order, best.w), *a.labels);
    return {std::move(best), std::move(report)};
}

}  // namespace mmg
