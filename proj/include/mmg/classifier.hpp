#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mmg/errors.hpp"
#include "mmg/heatmaps.hpp"
#include "mmg/probability.hpp"
#include "mmg/rng.hpp"
#include "mmg/tensor.hpp"

namespace mmg {

inline constexpr const char* kDefaultPooling = "mean,std,temporal8";

struct FeatureVector {
    std::vector<double> values;
    std::string pooling_spec;
};

/// N x d feature rows, optionally tagged with sample ids. Ids flow through to
/// the probability matrices produced by predict_probs.
struct FeatureMatrix {
    std::size_t dim = 0;
    std::vector<std::string> ids;  // empty or one per row
    std::vector<double> values;    // row-major
    std::string pooling_spec;

    std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values.data() + i * dim, dim);
    }

    void push_row(const FeatureVector& f, const std::string& id = {}) {
        if (dim == 0) {
            dim = f.values.size();
            pooling_spec = f.pooling_spec;
        }
        if (f.values.size() != dim)
            throw ShapeError("feature row has dim " + std::to_string(f.values.size()) +
                             ", matrix has dim " + std::to_string(dim));
        values.insert(values.end(), f.values.begin(), f.values.end());
        if (!id.empty()) ids.push_back(id);
    }
};

// ---------------------------------------------------------------------------
// Pooling
//
// "mean,std,temporal8": per channel, the global mean and population std over
// (T,H,W) plus 8 temporal-bin means. Bins hold ceil(T/8) frames each, the
// last occupied bin may be ragged, and bins past the end of the clip repeat
// the final frame's spatial mean. d = 10 * C, laid out as
// [means | stds | bin means channel-major].

inline FeatureVector pool_features(const VideoTensor& v) {
    if (v.empty()) throw ShapeError("pool_features: empty tensor");
    const std::size_t C = v.channels;
    const std::size_t T = v.frames;
    const double spatial = static_cast<double>(v.height * v.width);
    FeatureVector out;
    out.pooling_spec = kDefaultPooling;
    out.values.assign(10 * C, 0.0);

    std::vector<double> frame_means(T * C, 0.0);  // per frame, per channel
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t y = 0; y < v.height; ++y)
            for (std::size_t x = 0; x < v.width; ++x)
                for (std::size_t c = 0; c < C; ++c) frame_means[t * C + c] += v.at(t, y, x, c);
    for (double& m : frame_means) m /= spatial;

    for (std::size_t c = 0; c < C; ++c) {
        double mean = 0.0;
        for (std::size_t t = 0; t < T; ++t) mean += frame_means[t * C + c];
        mean /= static_cast<double>(T);
        double var = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t y = 0; y < v.height; ++y)
                for (std::size_t x = 0; x < v.width; ++x) {
                    const double d = v.at(t, y, x, c) - mean;
                    var += d * d;
                }
        var /= (static_cast<double>(T) * spatial);
        out.values[c] = mean;
        out.values[C + c] = std::sqrt(var);
    }

    const std::size_t bin = (T + 7) / 8;
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t b = 0; b < 8; ++b) {
            const std::size_t start = b * bin;
            const std::size_t end = std::min(start + bin, T);
            double m;
            if (start >= T) {
                m = frame_means[(T - 1) * C + c];
            } else {
                m = 0.0;
                for (std::size_t t = start; t < end; ++t) m += frame_means[t * C + c];
                m /= static_cast<double>(end - start);
            }
            out.values[2 * C + c * 8 + b] = m;
        }
    }
    return out;
}

inline FeatureVector pool_features(const HeatmapVolume& h) { return pool_features(h.data); }

// ---------------------------------------------------------------------------
// Linear softmax classifier

struct LinearModel {
    std::size_t dim = 0;
    std::size_t class_count = 0;
    std::vector<double> weights;  // dim x class_count, row-major by feature
    std::vector<double> bias;     // class_count
    std::string pooling_spec;
};

inline void validate_model(const LinearModel& m) {
    if (m.dim == 0 || m.class_count == 0) throw ShapeError("model dimensions must be positive");
    if (m.weights.size() != m.dim * m.class_count || m.bias.size() != m.class_count)
        throw ShapeError("model storage does not match dims");
    for (double w : m.weights)
        if (!std::isfinite(w)) throw ValidationError("non-finite model weight");
    for (double b : m.bias)
        if (!std::isfinite(b)) throw ValidationError("non-finite model bias");
}

struct TrainConfig {
    std::size_t class_count = 0;
    double learning_rate = 0.5;
    std::size_t iterations = 400;
    double l2 = 0.0;
    std::uint64_t seed = 7;
    std::optional<LinearModel> warm_start;
};

struct TrainReport {
    std::vector<double> loss_trace;  // loss before each update, plus the final loss
    double final_train_accuracy = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline void softmax_logits(std::span<const double> logits, std::span<double> out) {
    double m = logits[0];
    for (double z : logits) m = std::max(m, z);
    double sum = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        out[j] = std::exp(logits[j] - m);
        sum += out[j];
    }
    for (std::size_t j = 0; j < logits.size(); ++j) out[j] /= sum;
}

// One full-batch pass: returns the regularized loss at the current
// parameters, then applies the gradient update in place. train and
// train_paired both drive this function, so a paired run is arithmetically
// the same sequence of operations as two independent runs.
class GdState {
public:
    GdState(const FeatureMatrix& x, const std::vector<std::size_t>& y, const TrainConfig& cfg)
        : x_(x), y_(y), cfg_(cfg) {
        if (x.rows() == 0) throw ShapeError("train: empty feature matrix");
        if (y.size() != x.rows())
            throw ShapeError("train: " + std::to_string(x.rows()) + " feature rows vs " +
                             std::to_string(y.size()) + " labels");
        if (cfg.class_count < 2) throw ValidationError("train: class_count must be >= 2");
        for (std::size_t l : y)
            if (l >= cfg.class_count)
                throw LabelRangeError("label " + std::to_string(l) + " outside [0," +
                                      std::to_string(cfg.class_count) + ")");
        for (double v : x.values)
            if (!std::isfinite(v)) throw ValidationError("non-finite feature value");

        model_.dim = x.dim;
        model_.class_count = cfg.class_count;
        model_.pooling_spec = x.pooling_spec;
        model_.bias.assign(cfg.class_count, 0.0);
        if (cfg.warm_start) {
            const LinearModel& w = *cfg.warm_start;
            validate_model(w);
            if (w.dim != x.dim || w.class_count != cfg.class_count)
                throw ShapeError("warm start model is " + std::to_string(w.dim) + "x" +
                                 std::to_string(w.class_count) + ", expected " +
                                 std::to_string(x.dim) + "x" +
                                 std::to_string(cfg.class_count));
            model_.weights = w.weights;
            model_.bias = w.bias;
        } else {
            SplitMix64 rng(cfg.seed);
            model_.weights.resize(x.dim * cfg.class_count);
            for (double& w : model_.weights) w = 0.01 * rng.next_normal();
        }
        probs_.resize(x.rows() * cfg.class_count);
    }

    // Loss L = (1/N) sum CE + l2 * ||W||^2 and the probabilities it implies.
    double loss() {
        const std::size_t n = x_.rows();
        const std::size_t cls = cfg_.class_count;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> xi = x_.row(i);
            double m = -1e300;
            logits_.assign(cls, 0.0);
            for (std::size_t j = 0; j < cls; ++j) {
                double z = model_.bias[j];
                for (std::size_t f = 0; f < x_.dim; ++f)
                    z += model_.weights[f * cls + j] * xi[f];
                logits_[j] = z;
                m = std::max(m, z);
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < cls; ++j) {
                const double e = std::exp(logits_[j] - m);
                probs_[i * cls + j] = e;
                sum += e;
            }
            for (std::size_t j = 0; j < cls; ++j) probs_[i * cls + j] /= sum;
            total += (m + std::log(sum)) - logits_[y_[i]];
        }
        total /= static_cast<double>(n);
        double reg = 0.0;
        for (double w : model_.weights) reg += w * w;
        return total + cfg_.l2 * reg;
    }

    // Gradient step from the probabilities cached by the last loss() call.
    void apply_update() {
        const std::size_t n = x_.rows();
        const std::size_t cls = cfg_.class_count;
        const double inv_n = 1.0 / static_cast<double>(n);
        grad_w_.assign(model_.weights.size(), 0.0);
        grad_b_.assign(cls, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> xi = x_.row(i);
            for (std::size_t j = 0; j < cls; ++j) {
                double g = probs_[i * cls + j];
                if (j == y_[i]) g -= 1.0;
                g *= inv_n;
                grad_b_[j] += g;
                for (std::size_t f = 0; f < x_.dim; ++f)
                    grad_w_[f * cls + j] += g * xi[f];
            }
        }
        for (std::size_t k = 0; k < model_.weights.size(); ++k)
            model_.weights[k] -=
                cfg_.learning_rate * (grad_w_[k] + 2.0 * cfg_.l2 * model_.weights[k]);
        for (std::size_t j = 0; j < cls; ++j)
            model_.bias[j] -= cfg_.learning_rate * grad_b_[j];
    }

    double train_accuracy() {
        loss();  // refresh probs at final parameters
        const std::size_t cls = cfg_.class_count;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < x_.rows(); ++i) {
            std::span<const double> row(probs_.data() + i * cls, cls);
            if (argmax_class(row) == y_[i]) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(x_.rows());
    }

    const LinearModel& model() const { return model_; }

private:
    const FeatureMatrix& x_;
    const std::vector<std::size_t>& y_;
    TrainConfig cfg_;
    LinearModel model_;
    std::vector<double> probs_;
    std::vector<double> logits_;
    std::vector<double> grad_w_;
    std::vector<double> grad_b_;
};

}  // namespace detail

// Analytic gradient of the regularized CE loss at the given model, exposed
// for finite-difference verification. Returns (dW, db).
inline std::pair<std::vector<double>, std::vector<double>> loss_gradient(
    const LinearModel& model, const FeatureMatrix& x, const std::vector<std::size_t>& y,
    double l2) {
    const std::size_t cls = model.class_count;
    const std::size_t n = x.rows();
    if (x.dim != model.dim) throw ShapeError("loss_gradient: dim mismatch");
    std::vector<double> gw(model.weights.size(), 0.0), gb(cls, 0.0), p(cls), z(cls);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> xi = x.row(i);
        for (std::size_t j = 0; j < cls; ++j) {
            double acc = model.bias[j];
            for (std::size_t f = 0; f < x.dim; ++f) acc += model.weights[f * cls + j] * xi[f];
            z[j] = acc;
        }
        detail::softmax_logits(z, p);
        for (std::size_t j = 0; j < cls; ++j) {
            double g = p[j];
            if (j == y[i]) g -= 1.0;
            g *= inv_n;
            gb[j] += g;
            for (std::size_t f = 0; f < x.dim; ++f) gw[f * cls + j] += g * xi[f];
        }
    }
    for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += 2.0 * l2 * model.weights[k];
    return {std::move(gw), std::move(gb)};
}

// Regularized loss at fixed parameters, for the same verification path.
inline double loss_value(const LinearModel& model, const FeatureMatrix& x,
                         const std::vector<std::size_t>& y, double l2) {
    const std::size_t cls = model.class_count;
    std::vector<double> z(cls);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::span<const double> xi = x.row(i);
        double m = -1e300;
        for (std::size_t j = 0; j < cls; ++j) {
            double acc = model.bias[j];
            for (std::size_t f = 0; f < x.dim; ++f) acc += model.weights[f * cls + j] * xi[f];
            z[j] = acc;
            m = std::max(m, acc);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < cls; ++j) sum += std::exp(z[j] - m);
        total += (m + std::log(sum)) - z[y[i]];
    }
    total /= static_cast<double>(x.rows());
    double reg = 0.0;
    for (double w : model.weights) reg += w * w;
    return total + l2 * reg;
}

inline std::pair<LinearModel, TrainReport> train(const FeatureMatrix& x,
                                                 const std::vector<std::size_t>& y,
                                                 const TrainConfig& cfg) {
    detail::GdState state(x, y, cfg);
    TrainReport report;
    report.iterations = cfg.iterations;
    report.seed = cfg.seed;
    report.loss_trace.reserve(cfg.iterations + 1);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const double l = state.loss();
        if (!std::isfinite(l)) throw DivergenceError("training loss became non-finite", it);
        report.loss_trace.push_back(l);
        state.apply_update();
    }
    const double final_loss = state.loss();
    if (!std::isfinite(final_loss))
        throw DivergenceError("training loss became non-finite", cfg.iterations);
    report.loss_trace.push_back(final_loss);
    report.final_train_accuracy = state.train_accuracy();
    return {state.model(), std::move(report)};
}

// Joint training of two parameter-disjoint branches against the summed loss.
// The gradient of a sum over disjoint variables decomposes, so this is the
// same update sequence as two independent train calls; the report's trace
// holds the summed losses.
inline std::tuple<LinearModel, LinearModel, TrainReport> train_paired(
    const FeatureMatrix& x1, const FeatureMatrix& x2, const std::vector<std::size_t>& y,
    const TrainConfig& cfg) {
    if (x1.rows() != x2.rows())
        throw ShapeError("train_paired: " + std::to_string(x1.rows()) + " vs " +
                         std::to_string(x2.rows()) + " rows");
    detail::GdState s1(x1, y, cfg);
    detail::GdState s2(x2, y, cfg);
    TrainReport report;
    report.iterations = cfg.iterations;
    report.seed = cfg.seed;
    report.loss_trace.reserve(cfg.iterations + 1);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const double l1 = s1.loss();
        const double l2 = s2.loss();
        if (!std::isfinite(l1) || !std::isfinite(l2))
            throw DivergenceError("paired training loss became non-finite", it);
        report.loss_trace.push_back(l1 + l2);
        s1.apply_update();
        s2.apply_update();
    }
    const double f1 = s1.loss();
    const double f2 = s2.loss();
    if (!std::isfinite(f1) || !std::isfinite(f2))
        throw DivergenceError("paired training loss became non-finite", cfg.iterations);
    report.loss_trace.push_back(f1 + f2);
    report.final_train_accuracy = 0.5 * (s1.train_accuracy() + s2.train_accuracy());
    return {s1.model(), s2.model(), std::move(report)};
}

inline ProbabilityMatrix predict_probs(const LinearModel& model, const FeatureMatrix& x) {
    validate_model(model);
    if (x.dim != model.dim)
        throw ShapeError("feature dim " + std::to_string(x.dim) + " vs model dim " +
                         std::to_string(model.dim));
    if (!x.ids.empty() && x.ids.size() != x.rows())
        throw ShapeError("feature ids do not match row count");
    const std::size_t cls = model.class_count;
    ProbabilityMatrix out;
    out.class_count = cls;
    out.probs.resize(x.rows() * cls);
    out.sample_ids.reserve(x.rows());
    std::vector<double> z(cls);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::span<const double> xi = x.row(i);
        for (std::size_t j = 0; j < cls; ++j) {
            double acc = model.bias[j];
            for (std::size_t f = 0; f < x.dim; ++f) acc += model.weights[f * cls + j] * xi[f];
            z[j] = acc;
        }
        detail::softmax_logits(z, std::span<double>(out.probs.data() + i * cls, cls));
        out.sample_ids.push_back(x.ids.empty() ? std::to_string(i) : x.ids[i]);
    }
    return out;
}

}  // namespace mmg
