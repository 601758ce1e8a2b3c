#include "attlist/tensor.hpp"

#include <cmath>
#include <sstream>

#include "attlist/errors.hpp"

namespace attlist::core {

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

size_t shape_numel(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
}

namespace {

void check_shape(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 3)
        throw DimensionError("tensor rank must be 1..3, got " + shape_str(shape));
    for (int d : shape)
        if (d <= 0) throw DimensionError("tensor extents must be positive, got " + shape_str(shape));
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, bool with_grad) : shape_(std::move(shape)) {
    check_shape(shape_);
    values_.assign(shape_numel(shape_), 0.0);
    if (with_grad) grad_.assign(values_.size(), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values, bool with_grad)
    : shape_(std::move(shape)), values_(std::move(values)) {
    check_shape(shape_);
    if (values_.size() != shape_numel(shape_))
        throw DimensionError("value count " + std::to_string(values_.size()) +
                             " does not match shape " + core::shape_str(shape_));
    if (with_grad) grad_.assign(values_.size(), 0.0);
}

Tensor Tensor::scalar(double v, bool with_grad) {
    return Tensor({1}, {v}, with_grad);
}

double Tensor::item() const {
    if (values_.size() != 1)
        throw DimensionError("item() on tensor of shape " + core::shape_str(shape_));
    return values_[0];
}

void Tensor::ensure_grad() {
    if (grad_.empty()) grad_.assign(values_.size(), 0.0);
}

void Tensor::zero_grad() {
    std::fill(grad_.begin(), grad_.end(), 0.0);
}

bool Tensor::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    return core::shape_str(shape_);
}

TensorPtr make_tensor(std::vector<int> shape, bool with_grad) {
    return std::make_shared<Tensor>(std::move(shape), with_grad);
}

TensorPtr make_tensor(std::vector<int> shape, std::vector<double> values, bool with_grad) {
    return std::make_shared<Tensor>(std::move(shape), std::move(values), with_grad);
}

TensorPtr make_scalar(double value, bool with_grad) {
    return make_tensor({1}, std::vector<double>{value}, with_grad);
}

}  // namespace attlist::core
