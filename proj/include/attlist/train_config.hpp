#pragma once

#include <cstdint>
#include <limits>

#include "attlist/ablation.hpp"

namespace attlist::train {

// Tuned defaults: batch 32, learning rate 0.001, d=96, D=100, N=15, M=32,
// rho=3, early-stopping patience 10. Dropout gamma and L2 strength lambda
// default to the low end of their usual search grids.
struct TrainConfig {
    int batch_size = 32;
    double learning_rate = 0.001;
    int d = 96;
    int D = 100;
    int N = 15;
    int M = 32;
    int rho = 3;
    double gamma = 0.3;
    double lambda = 0.001;
    int max_epochs = 1000;
    int patience = 10;
    uint64_t seed = 42;
    bool clip_gradients = false;
    double clip_threshold = 5.0;
    model::AblationConfig ablation;

    void validate() const;  // throws ConfigError naming the bad field

    bool operator==(const TrainConfig&) const = default;
};

// Stops after `patience` consecutive observations without strict improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    // Returns true when the metric strictly improves on the best so far.
    bool observe(double metric) {
        if (metric > best_) {
            best_ = metric;
            since_ = 0;
            return true;
        }
        ++since_;
        return false;
    }

    bool should_stop() const { return since_ >= patience_; }
    double best() const { return best_; }
    void restore(double best, int since) {
        best_ = best;
        since_ = since;
    }

private:
    int patience_;
    double best_ = -std::numeric_limits<double>::infinity();
    int since_ = 0;
};

}  // namespace attlist::train
