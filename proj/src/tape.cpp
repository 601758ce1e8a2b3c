#include "attlist/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "attlist/errors.hpp"
#include "attlist/kernels.hpp"
#include "attlist/rng.hpp"

namespace attlist::core {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw DimensionError(msg);
}

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape() != b->shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + a->shape_str() + " vs " +
                             b->shape_str());
}

}  // namespace

TensorPtr Tape::result(std::vector<int> shape, std::initializer_list<const TensorPtr*> inputs) {
    bool needs_grad = false;
    if (recording_)
        for (const TensorPtr* t : inputs)
            if ((*t)->has_grad()) needs_grad = true;
    return make_tensor(std::move(shape), needs_grad);
}

void Tape::record(std::function<void()> fn) {
    records_.push_back(std::move(fn));
}

void Tape::backward(const TensorPtr& loss) {
    if (loss->size() != 1)
        throw DimensionError("backward expects a scalar loss, got " + loss->shape_str());
    if (!loss->has_grad())
        throw GradientError("backward: loss does not track gradients");
    loss->grad()[0] = 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

TensorPtr Tape::matmul(const TensorPtr& a, const TensorPtr& b) {
    require(a->rank() == 2 && b->rank() == 2 && a->cols() == b->rows(),
            "matmul: incompatible shapes " + a->shape_str() + " and " + b->shape_str());
    const int m = a->rows(), k = a->cols(), n = b->cols();
    TensorPtr out = result({m, n}, {&a, &b});
    core::matmul(a->data(), b->data(), out->data(), m, k, n, false);
    if (out->has_grad()) {
        record([a, b, out, m, k, n] {
            if (a->has_grad()) core::matmul_nt(out->grad(), b->data(), a->grad(), m, n, k, true);
            if (b->has_grad()) core::matmul_tn(a->data(), out->grad(), b->grad(), k, m, n, true);
        });
    }
    return out;
}

TensorPtr Tape::matmul_nt(const TensorPtr& a, const TensorPtr& b) {
    require(a->rank() == 2 && b->rank() == 2 && a->cols() == b->cols(),
            "matmul_nt: incompatible shapes " + a->shape_str() + " and " + b->shape_str());
    const int m = a->rows(), k = a->cols(), n = b->rows();
    TensorPtr out = result({m, n}, {&a, &b});
    core::matmul_nt(a->data(), b->data(), out->data(), m, k, n, false);
    if (out->has_grad()) {
        record([a, b, out, m, k, n] {
            if (a->has_grad()) core::matmul(out->grad(), b->data(), a->grad(), m, n, k, true);
            if (b->has_grad()) core::matmul_tn(out->grad(), a->data(), b->grad(), n, m, k, true);
        });
    }
    return out;
}

TensorPtr Tape::matvec(const TensorPtr& a, const TensorPtr& x) {
    require(a->rank() == 2 && x->rank() == 1 && a->cols() == x->dim(0),
            "matvec: incompatible shapes " + a->shape_str() + " and " + x->shape_str());
    const int m = a->rows(), n = a->cols();
    TensorPtr out = result({m}, {&a, &x});
    core::matmul(a->data(), x->data(), out->data(), m, n, 1, false);
    if (out->has_grad()) {
        record([a, x, out, m, n] {
            const double* dy = out->grad();
            if (a->has_grad()) {
                double* da = a->grad();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        da[static_cast<size_t>(i) * n + j] += dy[i] * x->at(j);
            }
            if (x->has_grad())
                core::matmul_tn(a->data(), dy, x->grad(), n, m, 1, true);
        });
    }
    return out;
}

TensorPtr Tape::weighted_sum_rows(const TensorPtr& v, const TensorPtr& w) {
    require(v->rank() == 2 && w->rank() == 1 && v->rows() == w->dim(0),
            "weighted_sum_rows: incompatible shapes " + v->shape_str() + " and " + w->shape_str());
    const int m = v->rows(), d = v->cols();
    TensorPtr out = result({d}, {&v, &w});
    std::fill(out->data(), out->data() + d, 0.0);
    for (int i = 0; i < m; ++i) {
        const double wi = w->at(i);
        const double* vi = v->data() + static_cast<size_t>(i) * d;
        for (int j = 0; j < d; ++j) out->at(j) += wi * vi[j];
    }
    if (out->has_grad()) {
        record([v, w, out, m, d] {
            const double* dy = out->grad();
            if (w->has_grad()) {
                double* dw = w->grad();
                for (int i = 0; i < m; ++i) {
                    const double* vi = v->data() + static_cast<size_t>(i) * d;
                    double acc = 0.0;
                    for (int j = 0; j < d; ++j) acc += vi[j] * dy[j];
                    dw[i] += acc;
                }
            }
            if (v->has_grad()) {
                double* dv = v->grad();
                for (int i = 0; i < m; ++i) {
                    const double wi = w->at(i);
                    for (int j = 0; j < d; ++j) dv[static_cast<size_t>(i) * d + j] += wi * dy[j];
                }
            }
        });
    }
    return out;
}

TensorPtr Tape::dot(const TensorPtr& x, const TensorPtr& y) {
    require_same_shape(x, y, "dot");
    require(x->rank() == 1, "dot expects rank-1 operands, got " + x->shape_str());
    const int n = x->dim(0);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x->at(i) * y->at(i);
    TensorPtr out = result({1}, {&x, &y});
    out->at(0) = acc;
    if (out->has_grad()) {
        record([x, y, out, n] {
            const double g = out->grad()[0];
            if (x->has_grad())
                for (int i = 0; i < n; ++i) x->grad()[i] += g * y->at(i);
            if (y->has_grad())
                for (int i = 0; i < n; ++i) y->grad()[i] += g * x->at(i);
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// softmax
// ---------------------------------------------------------------------------

TensorPtr Tape::row_softmax(const TensorPtr& x, const std::vector<uint8_t>& mask) {
    require(x->rank() == 1 || x->rank() == 2,
            "row_softmax expects rank-1 or rank-2 input, got " + x->shape_str());
    const int m = x->rank() == 2 ? x->rows() : 1;
    const int n = x->rank() == 2 ? x->cols() : x->dim(0);
    const uint8_t* mp = nullptr;
    if (!mask.empty()) {
        require(mask.size() == x->size(), "row_softmax: mask size " + std::to_string(mask.size()) +
                                              " does not match input " + x->shape_str());
        mp = mask.data();
        row_softmax_check_mask(mp, m, n);
    }
    TensorPtr out = result(x->shape(), {&x});
    core::row_softmax(x->data(), mp, out->data(), m, n);
    if (out->has_grad()) {
        std::vector<uint8_t> mask_copy = mask;
        record([x, out, mask_copy = std::move(mask_copy), m, n] {
            core::row_softmax_backward(out->data(), out->grad(),
                                       mask_copy.empty() ? nullptr : mask_copy.data(), x->grad(),
                                       m, n, true);
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// pointwise
// ---------------------------------------------------------------------------

TensorPtr Tape::add(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "add");
    TensorPtr out = result(a->shape(), {&a, &b});
    const size_t n = a->size();
    for (size_t i = 0; i < n; ++i) out->data()[i] = a->data()[i] + b->data()[i];
    if (out->has_grad()) {
        record([a, b, out, n] {
            if (a->has_grad())
                for (size_t i = 0; i < n; ++i) a->grad()[i] += out->grad()[i];
            if (b->has_grad())
                for (size_t i = 0; i < n; ++i) b->grad()[i] += out->grad()[i];
        });
    }
    return out;
}

TensorPtr Tape::mul(const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "mul");
    TensorPtr out = result(a->shape(), {&a, &b});
    const size_t n = a->size();
    for (size_t i = 0; i < n; ++i) out->data()[i] = a->data()[i] * b->data()[i];
    if (out->has_grad()) {
        record([a, b, out, n] {
            if (a->has_grad())
                for (size_t i = 0; i < n; ++i) a->grad()[i] += out->grad()[i] * b->data()[i];
            if (b->has_grad())
                for (size_t i = 0; i < n; ++i) b->grad()[i] += out->grad()[i] * a->data()[i];
        });
    }
    return out;
}

TensorPtr Tape::add_rowvec(const TensorPtr& a, const TensorPtr& b) {
    require(a->rank() == 2 && b->rank() == 1 && a->cols() == b->dim(0),
            "add_rowvec: incompatible shapes " + a->shape_str() + " and " + b->shape_str());
    const int m = a->rows(), n = a->cols();
    TensorPtr out = result({m, n}, {&a, &b});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out->at(i, j) = a->at(i, j) + b->at(j);
    if (out->has_grad()) {
        record([a, b, out, m, n] {
            if (a->has_grad()) {
                for (size_t i = 0; i < static_cast<size_t>(m) * n; ++i)
                    a->grad()[i] += out->grad()[i];
            }
            if (b->has_grad()) {
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        b->grad()[j] += out->grad()[static_cast<size_t>(i) * n + j];
            }
        });
    }
    return out;
}

TensorPtr Tape::tanh(const TensorPtr& x) {
    TensorPtr out = result(x->shape(), {&x});
    const size_t n = x->size();
    for (size_t i = 0; i < n; ++i) out->data()[i] = std::tanh(x->data()[i]);
    if (out->has_grad()) {
        record([x, out, n] {
            for (size_t i = 0; i < n; ++i) {
                const double y = out->data()[i];
                x->grad()[i] += out->grad()[i] * (1.0 - y * y);
            }
        });
    }
    return out;
}

TensorPtr Tape::relu(const TensorPtr& x) {
    TensorPtr out = result(x->shape(), {&x});
    const size_t n = x->size();
    // NaN passes through so diverged values reach the loss check.
    for (size_t i = 0; i < n; ++i) {
        const double v = x->data()[i];
        out->data()[i] = (v > 0.0 || std::isnan(v)) ? v : 0.0;
    }
    if (out->has_grad()) {
        record([x, out, n] {
            for (size_t i = 0; i < n; ++i)
                if (x->data()[i] > 0.0) x->grad()[i] += out->grad()[i];
        });
    }
    return out;
}

TensorPtr Tape::sigmoid(const TensorPtr& x) {
    TensorPtr out = result(x->shape(), {&x});
    const size_t n = x->size();
    // Saturated inputs are clamped to the nearest representable values
    // inside (0,1) so the output bound is strict.
    static const double kHi = std::nextafter(1.0, 0.0);
    static const double kLo = std::numeric_limits<double>::min();
    for (size_t i = 0; i < n; ++i) {
        const double v = x->data()[i];
        // Branch keeps exp() argument non-positive for stability.
        const double y = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                  : std::exp(v) / (1.0 + std::exp(v));
        out->data()[i] = std::clamp(y, kLo, kHi);
    }
    if (out->has_grad()) {
        record([x, out, n] {
            for (size_t i = 0; i < n; ++i) {
                const double y = out->data()[i];
                x->grad()[i] += out->grad()[i] * y * (1.0 - y);
            }
        });
    }
    return out;
}

TensorPtr Tape::scale(const TensorPtr& x, double c) {
    TensorPtr out = result(x->shape(), {&x});
    const size_t n = x->size();
    for (size_t i = 0; i < n; ++i) out->data()[i] = c * x->data()[i];
    if (out->has_grad()) {
        record([x, out, n, c] {
            for (size_t i = 0; i < n; ++i) x->grad()[i] += c * out->grad()[i];
        });
    }
    return out;
}

TensorPtr Tape::dropout(const TensorPtr& x, double rate, bool training, uint64_t seed,
                        uint64_t stream) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
    if (!training || rate == 0.0) return x;  // identity, exactly
    const size_t n = x->size();
    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<double> mult(n);
    for (size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(mix_u64(seed, stream, i) >> 11) * 0x1.0p-53;
        mult[i] = u < rate ? 0.0 : keep_scale;
    }
    TensorPtr out = result(x->shape(), {&x});
    for (size_t i = 0; i < n; ++i) out->data()[i] = x->data()[i] * mult[i];
    if (out->has_grad()) {
        record([x, out, mult = std::move(mult), n] {
            for (size_t i = 0; i < n; ++i) x->grad()[i] += out->grad()[i] * mult[i];
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// structure
// ---------------------------------------------------------------------------

TensorPtr Tape::gather_rows(const TensorPtr& table, const std::vector<int>& ids) {
    require(table->rank() == 2, "gather_rows expects a rank-2 table, got " + table->shape_str());
    const int rows = table->rows(), d = table->cols();
    for (int id : ids)
        if (id < 0 || id >= rows)
            throw IndexError("gather_rows: id " + std::to_string(id) + " out of range [0," +
                             std::to_string(rows) + ")");
    const int m = static_cast<int>(ids.size());
    TensorPtr out = result({m, d}, {&table});
    for (int i = 0; i < m; ++i)
        std::copy_n(table->data() + static_cast<size_t>(ids[i]) * d, d,
                    out->data() + static_cast<size_t>(i) * d);
    if (out->has_grad()) {
        record([table, out, ids, m, d] {
            double* g = table->grad();
            for (int i = 0; i < m; ++i) {
                const double* go = out->grad() + static_cast<size_t>(i) * d;
                double* gt = g + static_cast<size_t>(ids[i]) * d;
                for (int j = 0; j < d; ++j) gt[j] += go[j];
            }
        });
    }
    return out;
}

TensorPtr Tape::gather_row(const TensorPtr& table, int id) {
    require(table->rank() == 2, "gather_row expects a rank-2 table, got " + table->shape_str());
    const int rows = table->rows(), d = table->cols();
    if (id < 0 || id >= rows)
        throw IndexError("gather_row: id " + std::to_string(id) + " out of range [0," +
                         std::to_string(rows) + ")");
    TensorPtr out = result({d}, {&table});
    std::copy_n(table->data() + static_cast<size_t>(id) * d, d, out->data());
    if (out->has_grad()) {
        record([table, out, id, d] {
            double* gt = table->grad() + static_cast<size_t>(id) * d;
            for (int j = 0; j < d; ++j) gt[j] += out->grad()[j];
        });
    }
    return out;
}

TensorPtr Tape::concat(const std::vector<TensorPtr>& parts) {
    require(!parts.empty(), "concat: no operands");
    int total = 0;
    bool needs_grad = false;
    for (const auto& p : parts) {
        require(p->rank() == 1, "concat expects rank-1 parts, got " + p->shape_str());
        total += p->dim(0);
        if (recording_ && p->has_grad()) needs_grad = true;
    }
    TensorPtr out = make_tensor({total}, needs_grad);
    int off = 0;
    for (const auto& p : parts) {
        std::copy_n(p->data(), p->dim(0), out->data() + off);
        off += p->dim(0);
    }
    if (out->has_grad()) {
        record([parts, out] {
            int off2 = 0;
            for (const auto& p : parts) {
                if (p->has_grad())
                    for (int j = 0; j < p->dim(0); ++j) p->grad()[j] += out->grad()[off2 + j];
                off2 += p->dim(0);
            }
        });
    }
    return out;
}

TensorPtr Tape::stack_rows(const std::vector<TensorPtr>& rows) {
    require(!rows.empty(), "stack_rows: no operands");
    const int d = rows[0]->dim(0);
    bool needs_grad = false;
    for (const auto& r : rows) {
        require(r->rank() == 1 && r->dim(0) == d,
                "stack_rows: row shape " + r->shape_str() + " differs from " +
                    rows[0]->shape_str());
        if (recording_ && r->has_grad()) needs_grad = true;
    }
    const int m = static_cast<int>(rows.size());
    TensorPtr out = make_tensor({m, d}, needs_grad);
    for (int i = 0; i < m; ++i)
        std::copy_n(rows[i]->data(), d, out->data() + static_cast<size_t>(i) * d);
    if (out->has_grad()) {
        record([rows, out, m, d] {
            for (int i = 0; i < m; ++i) {
                if (!rows[i]->has_grad()) continue;
                const double* go = out->grad() + static_cast<size_t>(i) * d;
                for (int j = 0; j < d; ++j) rows[i]->grad()[j] += go[j];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// reductions / losses
// ---------------------------------------------------------------------------

TensorPtr Tape::sum(const TensorPtr& x) {
    TensorPtr out = result({1}, {&x});
    double acc = 0.0;
    for (size_t i = 0; i < x->size(); ++i) acc += x->data()[i];
    out->at(0) = acc;
    if (out->has_grad()) {
        record([x, out] {
            const double g = out->grad()[0];
            for (size_t i = 0; i < x->size(); ++i) x->grad()[i] += g;
        });
    }
    return out;
}

TensorPtr Tape::sumsq(const TensorPtr& x) {
    TensorPtr out = result({1}, {&x});
    double acc = 0.0;
    for (size_t i = 0; i < x->size(); ++i) acc += x->data()[i] * x->data()[i];
    out->at(0) = acc;
    if (out->has_grad()) {
        record([x, out] {
            const double g = out->grad()[0];
            for (size_t i = 0; i < x->size(); ++i) x->grad()[i] += 2.0 * g * x->data()[i];
        });
    }
    return out;
}

TensorPtr Tape::bce_sum(const TensorPtr& preds, const std::vector<int>& labels) {
    require(preds->rank() == 1, "bce_sum expects rank-1 predictions, got " + preds->shape_str());
    require(preds->size() == labels.size(),
            "bce_sum: " + std::to_string(preds->size()) + " predictions vs " +
                std::to_string(labels.size()) + " labels");
    for (int r : labels)
        if (r != 0 && r != 1)
            throw ValidationError("bce_sum: label " + std::to_string(r) + " not in {0,1}");
    static constexpr double kEps = 1e-12;
    const size_t n = labels.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double p = std::clamp(preds->data()[i], kEps, 1.0 - kEps);
        acc -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    TensorPtr out = result({1}, {&preds});
    out->at(0) = acc;
    if (out->has_grad()) {
        record([preds, out, labels, n] {
            const double g = out->grad()[0];
            for (size_t i = 0; i < n; ++i) {
                const double p = std::clamp(preds->data()[i], kEps, 1.0 - kEps);
                const double r = static_cast<double>(labels[i]);
                preds->grad()[i] += g * (p - r) / (p * (1.0 - p));
            }
        });
    }
    return out;
}

}  // namespace attlist::core
