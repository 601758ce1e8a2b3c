#include "attlist/adam.hpp"

#include <cmath>

#include "attlist/errors.hpp"

namespace attlist::core {

AdamState AdamState::init(const std::vector<TensorPtr>& params, AdamHyper hyper) {
    AdamState st;
    st.hyper = hyper;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const auto& p : params) {
        st.m.emplace_back(p->size(), 0.0);
        st.v.emplace_back(p->size(), 0.0);
    }
    return st;
}

void adam_step(std::vector<TensorPtr>& params, AdamState& state) {
    if (params.size() != state.m.size())
        throw GradientError("adam_step: state tracks " + std::to_string(state.m.size()) +
                            " parameters, got " + std::to_string(params.size()));
    for (size_t i = 0; i < params.size(); ++i)
        if (!params[i]->has_grad())
            throw GradientError("adam_step: parameter " + std::to_string(i) +
                                " has no gradient buffer");

    state.step += 1;
    const AdamHyper& h = state.hyper;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));

    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        std::vector<double>& m = state.m[i];
        std::vector<double>& v = state.v[i];
        double* w = p.data();
        double* g = p.grad();
        for (size_t j = 0; j < p.size(); ++j) {
            m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
            v[j] = h.beta2 * v[j] + (1.0 - h.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= h.learning_rate * mhat / (std::sqrt(vhat) + h.epsilon);
        }
        p.zero_grad();
    }
}

}  // namespace attlist::core
