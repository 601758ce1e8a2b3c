#include "attlist/gradcheck.hpp"

#include <cmath>

#include "attlist/errors.hpp"

namespace attlist::core {

namespace {

double eval_value(const std::function<TensorPtr(Tape&)>& build_loss) {
    Tape tape(/*recording=*/false);
    return build_loss(tape)->item();
}

}  // namespace

GradCheckReport gradient_check(const std::function<TensorPtr(Tape&)>& build_loss,
                               const std::vector<NamedParam>& params, double step) {
    const double v1 = eval_value(build_loss);
    const double v2 = eval_value(build_loss);
    if (v1 != v2)
        throw DeterminismError("gradient_check: two forward passes disagree (" +
                               std::to_string(v1) + " vs " + std::to_string(v2) + ")");

    // Analytic pass.
    for (const auto& p : params) {
        p.tensor->ensure_grad();
        p.tensor->zero_grad();
    }
    Tape tape(/*recording=*/true);
    TensorPtr loss = build_loss(tape);
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& p : params)
        analytic.emplace_back(p.tensor->grad(), p.tensor->grad() + p.tensor->size());

    GradCheckReport report;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& t = *params[pi].tensor;
        GradCheckEntry entry;
        entry.name = params[pi].name;
        for (size_t j = 0; j < t.size(); ++j) {
            const double saved = t.data()[j];
            t.data()[j] = saved + step;
            const double up = eval_value(build_loss);
            t.data()[j] = saved - step;
            const double down = eval_value(build_loss);
            t.data()[j] = saved;

            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic[pi][j];
            const double rel =
                std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            if (rel >= entry.max_rel_error) {
                entry.max_rel_error = rel;
                entry.worst_index = j;
                entry.analytic = a;
                entry.numeric = numeric;
            }
        }
        if (entry.max_rel_error >= report.max_rel_error) {
            report.max_rel_error = entry.max_rel_error;
            report.worst_param = entry.name;
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace attlist::core
