#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace attlist::core {

// Dense real-valued array, rank 1..3, double precision. A tensor optionally
// carries a gradient buffer of identical shape; tensors with a gradient
// buffer participate in reverse-mode differentiation, tensors without one
// are treated as constants.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<int> shape, bool with_grad);
    Tensor(std::vector<int> shape, std::vector<double> values, bool with_grad = false);

    static Tensor scalar(double v, bool with_grad = false);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    size_t size() const { return values_.size(); }

    // Rank-2 convenience accessors (row-major layout).
    int rows() const { return shape_[0]; }
    int cols() const { return shape_[1]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double& at(int i) { return values_[static_cast<size_t>(i)]; }
    double at(int i) const { return values_[static_cast<size_t>(i)]; }
    double& at(int i, int j) { return values_[static_cast<size_t>(i) * shape_[1] + j]; }
    double at(int i, int j) const { return values_[static_cast<size_t>(i) * shape_[1] + j]; }

    double item() const;  // value of a single-element tensor

    bool has_grad() const { return !grad_.empty(); }
    double* grad() { return grad_.data(); }
    const double* grad() const { return grad_.data(); }
    std::vector<double>& grad_values() { return grad_; }
    const std::vector<double>& grad_values() const { return grad_; }

    void ensure_grad();   // allocate (zeroed) gradient buffer
    void zero_grad();

    bool all_finite() const;
    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> values_;
    std::vector<double> grad_;
};

using TensorPtr = std::shared_ptr<Tensor>;

TensorPtr make_tensor(std::vector<int> shape, bool with_grad = false);
TensorPtr make_tensor(std::vector<int> shape, std::vector<double> values, bool with_grad = false);
TensorPtr make_scalar(double value, bool with_grad = false);

std::string shape_str(const std::vector<int>& shape);
size_t shape_numel(const std::vector<int>& shape);

}  // namespace attlist::core
