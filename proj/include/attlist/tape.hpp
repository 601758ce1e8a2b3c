#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "attlist/tensor.hpp"

namespace attlist::core {

// Reverse-mode tape. Forward calls compute values eagerly and, while
// recording, push a backward closure per primitive; backward() replays the
// closures in exact reverse execution order, accumulating into the gradient
// buffers of every operand that has one. A tape constructed with
// recording=false computes values only (inference mode).
//
// Execution is single-threaded; the kernels a primitive calls may be
// data-parallel internally. Tensors without gradient buffers are treated as
// constants.
class Tape {
public:
    explicit Tape(bool recording = true) : recording_(recording) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return recording_; }
    size_t num_records() const { return records_.size(); }

    // -- linear algebra ----------------------------------------------------
    TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);      // [m,k]x[k,n]
    TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b);   // [m,k]x[n,k]^T
    TensorPtr matvec(const TensorPtr& a, const TensorPtr& x);      // [m,n]*[n] -> [m]
    TensorPtr weighted_sum_rows(const TensorPtr& v, const TensorPtr& w);  // [m,d],[m] -> [d]
    TensorPtr dot(const TensorPtr& x, const TensorPtr& y);         // [n],[n] -> [1]

    // -- softmax -----------------------------------------------------------
    // mask: element mask of identical shape (1 live / 0 excluded), or empty.
    // Works on rank-1 (single row) and rank-2 inputs.
    TensorPtr row_softmax(const TensorPtr& x, const std::vector<uint8_t>& mask = {});

    // -- pointwise ---------------------------------------------------------
    TensorPtr add(const TensorPtr& a, const TensorPtr& b);
    TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
    TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& b);  // [m,n]+[n] per row
    TensorPtr tanh(const TensorPtr& x);
    TensorPtr relu(const TensorPtr& x);
    TensorPtr sigmoid(const TensorPtr& x);
    TensorPtr scale(const TensorPtr& x, double c);

    // Inverted dropout: elements survive with probability 1-rate and are
    // scaled by 1/(1-rate); identity when training=false or rate=0. The kept
    // pattern is a pure function of (seed, stream, element index).
    TensorPtr dropout(const TensorPtr& x, double rate, bool training, uint64_t seed,
                      uint64_t stream);

    // -- structure ---------------------------------------------------------
    TensorPtr gather_rows(const TensorPtr& table, const std::vector<int>& ids);  // -> [#ids, d]
    TensorPtr gather_row(const TensorPtr& table, int id);                        // -> [d]
    TensorPtr concat(const std::vector<TensorPtr>& parts);                       // rank-1 concat
    TensorPtr stack_rows(const std::vector<TensorPtr>& rows);                    // [d] x m -> [m,d]

    // -- reductions / losses -----------------------------------------------
    TensorPtr sum(const TensorPtr& x);
    TensorPtr sumsq(const TensorPtr& x);
    // Summed binary cross-entropy over a prediction vector; labels in {0,1}.
    // Predictions are clamped to [1e-12, 1-1e-12] before the logs.
    TensorPtr bce_sum(const TensorPtr& preds, const std::vector<int>& labels);

    // Seeds d(loss)/d(loss)=1 and replays all records in reverse order.
    void backward(const TensorPtr& loss);

private:
    TensorPtr result(std::vector<int> shape, std::initializer_list<const TensorPtr*> inputs);
    void record(std::function<void()> fn);

    bool recording_;
    std::vector<std::function<void()>> records_;
};

}  // namespace attlist::core
