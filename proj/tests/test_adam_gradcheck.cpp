#include <doctest.h>

#include <cmath>

#include "attlist/adam.hpp"
#include "attlist/errors.hpp"
#include "attlist/gradcheck.hpp"
#include "attlist/rng.hpp"
#include "attlist/tape.hpp"

using namespace attlist;
using core::AdamState;
using core::make_scalar;
using core::make_tensor;
using core::Tape;
using core::TensorPtr;

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    auto p = make_tensor({3}, {1.0, -2.0, 0.5}, /*with_grad=*/true);
    std::vector<TensorPtr> params = {p};
    AdamState st = AdamState::init(params, {0.01, 0.9, 0.999, 1e-8});
    core::adam_step(params, st);
    CHECK(p->at(0) == 1.0);
    CHECK(p->at(1) == -2.0);
    CHECK(p->at(2) == 0.5);
    CHECK(st.step == 1);
}

TEST_CASE("adam: first bias-corrected step moves by about lr") {
    auto p = make_tensor({1}, {1.0}, /*with_grad=*/true);
    p->grad()[0] = 1.0;
    std::vector<TensorPtr> params = {p};
    AdamState st = AdamState::init(params, {0.001, 0.9, 0.999, 1e-8});
    core::adam_step(params, st);
    CHECK(p->at(0) == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
    CHECK(p->grad()[0] == 0.0);  // gradients cleared afterward
}

TEST_CASE("adam: converges on a 1-D quadratic") {
    auto x = make_tensor({1}, {0.0}, /*with_grad=*/true);
    std::vector<TensorPtr> params = {x};
    AdamState st = AdamState::init(params, {0.01, 0.9, 0.999, 1e-8});
    for (int step = 0; step < 2000; ++step) {
        Tape tape;
        auto diff = tape.add(x, make_scalar(-3.0));
        auto loss = tape.sumsq(diff);
        x->zero_grad();
        tape.backward(loss);
        core::adam_step(params, st);
    }
    CHECK(x->at(0) == doctest::Approx(3.0).epsilon(0.01 / 3.0));
}

TEST_CASE("adam: missing gradient buffer is an error") {
    auto p = make_tensor({2});  // no gradient buffer
    std::vector<TensorPtr> params = {p};
    AdamState st = AdamState::init(params, {});
    CHECK_THROWS_AS(core::adam_step(params, st), GradientError);
}

TEST_CASE("gradient_check: sum of parameters has exact unit gradients") {
    auto a = make_tensor({3}, {0.1, 0.2, 0.3}, /*with_grad=*/true);
    auto b = make_tensor({2, 2}, {1, 2, 3, 4}, /*with_grad=*/true);
    auto report = core::gradient_check(
        [&](Tape& t) { return t.add(t.sum(a), t.sum(b)); }, {{"a", a}, {"b", b}}, 1e-5);
    // Analytic gradients are exactly 1; finite differences of a linear
    // function are exact up to cancellation noise.
    CHECK(report.max_rel_error < 1e-10);
    CHECK(report.entries.size() == 2);
}

TEST_CASE("gradient_check: corrupted backward rule is reported") {
    auto x = make_tensor({3}, {0.4, -0.8, 1.2}, /*with_grad=*/true);
    // Forward computes sum(x*c) with c frozen to the current values of x, so
    // the true derivative is 2x while the tape sees only c = x.
    auto report = core::gradient_check(
        [&](Tape& t) {
            auto frozen = make_tensor({3}, x->values());  // constant copy
            return t.sum(t.mul(x, frozen));
        },
        {{"x", x}}, 1e-5);
    CHECK(report.max_rel_error > 1e-2);
}

TEST_CASE("gradient_check: non-deterministic loss is rejected") {
    auto x = make_tensor({2}, {0.5, 0.5}, /*with_grad=*/true);
    int calls = 0;
    CHECK_THROWS_AS(core::gradient_check(
                        [&](Tape& t) {
                            ++calls;
                            auto noise = make_tensor({2}, {0.001 * calls, 0.0});
                            return t.sum(t.add(x, noise));
                        },
                        {{"x", x}}, 1e-5),
                    DeterminismError);
}
