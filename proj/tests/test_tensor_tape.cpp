#include <doctest.h>

#include <cmath>

#include "attlist/errors.hpp"
#include "attlist/gradcheck.hpp"
#include "attlist/rng.hpp"
#include "attlist/tape.hpp"
#include "attlist/tensor.hpp"

using namespace attlist;
using core::CounterRng;
using core::gradient_check;
using core::make_scalar;
using core::make_tensor;
using core::NamedParam;
using core::Tape;
using core::TensorPtr;

namespace {

TensorPtr random_param(std::vector<int> shape, uint64_t stream, double lo = -1.0, double hi = 1.0) {
    TensorPtr t = make_tensor(std::move(shape), /*with_grad=*/true);
    CounterRng rng(123, stream);
    for (size_t i = 0; i < t->size(); ++i) t->data()[i] = rng.next_uniform(lo, hi);
    return t;
}

// Max relative gradient error of a scalar-valued build function.
double primitive_grad_error(const std::vector<NamedParam>& params,
                            const std::function<TensorPtr(Tape&)>& build) {
    return gradient_check(build, params, 1e-5).max_rel_error;
}

}  // namespace

TEST_CASE("tensor shape validation") {
    CHECK_THROWS_AS(make_tensor({}), DimensionError);
    CHECK_THROWS_AS(make_tensor({2, 0}), DimensionError);
    CHECK_THROWS_AS(make_tensor({1, 2, 3, 4}), DimensionError);
    CHECK_THROWS_AS(core::Tensor({2, 2}, {1.0, 2.0}, false), DimensionError);
}

TEST_CASE("matmul identity and dot product") {
    Tape tape;
    auto eye = make_tensor({2, 2}, {1, 0, 0, 1});
    auto col = make_tensor({2, 1}, {2, 3});
    auto prod = tape.matmul(eye, col);
    CHECK(prod->at(0, 0) == 2.0);
    CHECK(prod->at(1, 0) == 3.0);

    auto row = make_tensor({1, 2}, {1, 2});
    auto col2 = make_tensor({2, 1}, {3, 4});
    CHECK(tape.matmul(row, col2)->at(0, 0) == 11.0);

    auto bad = make_tensor({3, 3});
    CHECK_THROWS_WITH_AS(static_cast<void>(tape.matmul(row, bad)),
                         doctest::Contains("[1x2]"), DimensionError);
}

TEST_CASE("matmul gradients vs central finite differences") {
    auto a = random_param({3, 4}, 1);
    auto b = random_param({4, 2}, 2);
    const double err = primitive_grad_error(
        {{"a", a}, {"b", b}},
        [&](Tape& t) { return t.sum(t.tanh(t.matmul(a, b))); });
    CHECK(err <= 1e-6);
}

TEST_CASE("every linear-algebra primitive passes a 1e-6 gradient check") {
    auto A = random_param({3, 4}, 11);
    auto B = random_param({5, 4}, 12);
    auto x = random_param({4}, 13);
    auto w = random_param({3}, 14);

    CHECK(primitive_grad_error({{"A", A}, {"B", B}}, [&](Tape& t) {
              return t.sum(t.tanh(t.matmul_nt(A, B)));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"A", A}, {"x", x}}, [&](Tape& t) {
              return t.sum(t.tanh(t.matvec(A, x)));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"A", A}, {"w", w}}, [&](Tape& t) {
              return t.sum(t.tanh(t.weighted_sum_rows(A, w)));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"x", x}}, [&](Tape& t) {
              return t.dot(t.sigmoid(x), t.tanh(x));
          }) <= 1e-6);
}

TEST_CASE("pointwise and structural primitives pass a 1e-6 gradient check") {
    auto a = random_param({2, 3}, 21);
    auto b = random_param({2, 3}, 22);
    auto v = random_param({3}, 23);
    auto table = random_param({4, 3}, 24);

    CHECK(primitive_grad_error({{"a", a}, {"b", b}}, [&](Tape& t) {
              return t.sumsq(t.mul(t.tanh(a), t.sigmoid(b)));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"a", a}, {"v", v}}, [&](Tape& t) {
              return t.sum(t.tanh(t.add_rowvec(a, v)));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"a", a}, {"b", b}}, [&](Tape& t) {
              return t.sum(t.scale(t.add(a, b), 0.7));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"table", table}}, [&](Tape& t) {
              return t.sumsq(t.gather_rows(table, {0, 2, 2, 3}));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"table", table}, {"v", v}}, [&](Tape& t) {
              return t.sum(t.tanh(t.concat({t.gather_row(table, 1), v})));
          }) <= 1e-6);
    CHECK(primitive_grad_error({{"v", v}, {"b", b}}, [&](Tape& t) {
              return t.sumsq(t.stack_rows({v, t.gather_row(b, 0), t.gather_row(b, 1)}));
          }) <= 1e-6);
}

TEST_CASE("row softmax examples") {
    Tape tape;
    auto equal = tape.row_softmax(make_tensor({2}, {0.0, 0.0}));
    CHECK(equal->at(0) == doctest::Approx(0.5));
    CHECK(equal->at(1) == doctest::Approx(0.5));

    auto uneven = tape.row_softmax(make_tensor({2}, {1.0, 0.0}));
    CHECK(uneven->at(0) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(uneven->at(1) == doctest::Approx(0.2689).epsilon(1e-4));

    auto masked = tape.row_softmax(make_tensor({2}, {5.0, 9.0}), {1, 0});
    CHECK(masked->at(0) == 1.0);
    CHECK(masked->at(1) == 0.0);

    CHECK_THROWS_AS(static_cast<void>(tape.row_softmax(make_tensor({2}, {5.0, 9.0}), {0, 0})),
                    DegenerateInputError);
}

TEST_CASE("row softmax rows sum to one over live positions") {
    CounterRng rng(9, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 1 + static_cast<int>(rng.next_below(6));
        const int n = 2 + static_cast<int>(rng.next_below(7));
        auto x = make_tensor({m, n});
        std::vector<uint8_t> mask(static_cast<size_t>(m) * n, 0);
        for (int i = 0; i < m; ++i) {
            bool live = false;
            for (int j = 0; j < n; ++j) {
                x->at(i, j) = rng.next_uniform(-30.0, 30.0);
                mask[static_cast<size_t>(i) * n + j] = rng.next_double() < 0.7 ? 1 : 0;
                live |= mask[static_cast<size_t>(i) * n + j] != 0;
            }
            if (!live) mask[static_cast<size_t>(i) * n] = 1;
        }
        Tape tape;
        auto y = tape.row_softmax(x, mask);
        for (int i = 0; i < m; ++i) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (!mask[static_cast<size_t>(i) * n + j]) CHECK(y->at(i, j) == 0.0);
                CHECK(y->at(i, j) >= 0.0);
                sum += y->at(i, j);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("row softmax gradient with and without mask") {
    auto x = random_param({3, 4}, 31, -2.0, 2.0);
    CHECK(primitive_grad_error({{"x", x}}, [&](Tape& t) {
              return t.sumsq(t.row_softmax(x));
          }) <= 1e-6);
    std::vector<uint8_t> mask = {1, 0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 1};
    CHECK(primitive_grad_error({{"x", x}}, [&](Tape& t) {
              return t.sumsq(t.row_softmax(x, mask));
          }) <= 1e-6);
}

TEST_CASE("pointwise examples") {
    Tape tape;
    CHECK(tape.sigmoid(make_scalar(0.0))->item() == 0.5);
    CHECK(tape.tanh(make_scalar(0.0))->item() == 0.0);

    auto x = make_tensor({1}, {-3.0}, /*with_grad=*/true);
    auto y = tape.relu(x);
    CHECK(y->item() == 0.0);
    auto loss = tape.sum(y);
    tape.backward(loss);
    CHECK(x->grad()[0] == 0.0);  // dead region

    auto s = tape.sigmoid(make_tensor({2}, {700.0, -700.0}));
    CHECK(s->at(0) < 1.0);
    CHECK(s->at(0) > 0.0);
    CHECK(s->at(1) > 0.0);
}

TEST_CASE("bce_sum values and gradient") {
    Tape tape;
    auto p = make_scalar(0.5);
    CHECK(tape.bce_sum(p, {1})->item() == doctest::Approx(0.6931).epsilon(1e-4));

    auto confident = make_scalar(1.0 - 1e-9);
    CHECK(tape.bce_sum(confident, {1})->item() == doctest::Approx(0.0).epsilon(1e-6));

    // Symmetric pair contributes equally.
    auto pair = make_tensor({2}, {0.3, 0.7});
    auto both = tape.bce_sum(pair, {1, 0});
    CHECK(both->item() == doctest::Approx(2.0 * -std::log(0.3)).epsilon(1e-12));

    CHECK_THROWS_AS(static_cast<void>(tape.bce_sum(p, {2})), ValidationError);

    auto q = random_param({4}, 41, 0.1, 0.9);
    CHECK(primitive_grad_error({{"q", q}}, [&](Tape& t) {
              return t.bce_sum(t.sigmoid(q), {1, 0, 1, 0});
          }) <= 1e-6);
}

TEST_CASE("dropout semantics") {
    auto x = make_tensor({100}, std::vector<double>(100, 1.0));

    Tape tape;
    CHECK_THROWS_AS(static_cast<void>(tape.dropout(x, 1.0, true, 1, 1)), ConfigError);

    // rate 0 and inference are the identity, exactly.
    CHECK(tape.dropout(x, 0.0, true, 1, 1).get() == x.get());
    CHECK(tape.dropout(x, 0.5, false, 1, 1).get() == x.get());

    auto a = tape.dropout(x, 0.5, true, 7, 3);
    auto b = tape.dropout(x, 0.5, true, 7, 3);
    CHECK(a->values() == b->values());  // bitwise determinism
    auto c = tape.dropout(x, 0.5, true, 7, 4);
    CHECK(a->values() != c->values());

    // Inverted dropout preserves the mean.
    const size_t n = 100000;
    auto big = make_tensor({static_cast<int>(n)}, std::vector<double>(n, 1.0));
    auto dropped = tape.dropout(big, 0.3, true, 11, 5);
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += dropped->data()[i];
    mean /= static_cast<double>(n);
    CHECK(mean == doctest::Approx(1.0).epsilon(0.02));

    // Gradient flows only through survivors.
    auto p = random_param({50}, 42);
    CHECK(primitive_grad_error({{"p", p}}, [&](Tape& t) {
              return t.sumsq(t.dropout(p, 0.4, true, 13, 1));
          }) <= 1e-6);
}

TEST_CASE("backward accumulates across reuse of one tensor") {
    // f(x) = <x, x> so df/dx = 2x via two accumulation paths.
    auto x = make_tensor({3}, {1.0, 2.0, 3.0}, /*with_grad=*/true);
    Tape tape;
    auto loss = tape.dot(x, x);
    tape.backward(loss);
    CHECK(x->grad()[0] == doctest::Approx(2.0));
    CHECK(x->grad()[1] == doctest::Approx(4.0));
    CHECK(x->grad()[2] == doctest::Approx(6.0));
}

TEST_CASE("non-recording tape computes values without gradients") {
    auto x = make_tensor({2, 2}, {1, 2, 3, 4}, /*with_grad=*/true);
    Tape tape(/*recording=*/false);
    auto y = tape.matmul(x, x);
    CHECK_FALSE(y->has_grad());
    CHECK(tape.num_records() == 0);
}
