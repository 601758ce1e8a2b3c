// Compares the OpenMP kernels against the serial reference implementations
// on representative shapes, and times a batched forward pass. Results are
// checked for bitwise agreement while timing.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "attlist/kernels.hpp"
#include "attlist/model.hpp"
#include "attlist/rng.hpp"
#include "attlist/tape.hpp"

using namespace attlist;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> random_values(size_t n, uint64_t stream) {
    core::CounterRng rng(7, stream);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.next_uniform(-1.0, 1.0);
    return v;
}

template <typename F>
double time_loop(int reps, F f) {
    f();  // warm-up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) f();
    return seconds_since(t0) / reps;
}

void bench_matmul(int m, int k, int n, int reps) {
    const auto a = random_values(static_cast<size_t>(m) * k, 1);
    const auto b = random_values(static_cast<size_t>(k) * n, 2);
    std::vector<double> c_serial(static_cast<size_t>(m) * n);
    std::vector<double> c_par(c_serial.size());

    const double ts = time_loop(
        reps, [&] { core::serial::matmul(a.data(), b.data(), c_serial.data(), m, k, n, false); });
    const double tp =
        time_loop(reps, [&] { core::matmul(a.data(), b.data(), c_par.data(), m, k, n, false); });

    const bool same = std::memcmp(c_serial.data(), c_par.data(), c_par.size() * 8) == 0;
    std::printf("matmul   %4dx%4dx%4d   serial %9.3f us   parallel %9.3f us   x%.2f   %s\n", m, k,
                n, ts * 1e6, tp * 1e6, ts / tp, same ? "bitwise-equal" : "MISMATCH");
}

void bench_softmax(int m, int n, int reps) {
    const auto x = random_values(static_cast<size_t>(m) * n, 3);
    std::vector<double> y_serial(x.size()), y_par(x.size());

    const double ts = time_loop(
        reps, [&] { core::serial::row_softmax(x.data(), nullptr, y_serial.data(), m, n); });
    const double tp =
        time_loop(reps, [&] { core::row_softmax(x.data(), nullptr, y_par.data(), m, n); });

    const bool same = std::memcmp(y_serial.data(), y_par.data(), y_par.size() * 8) == 0;
    std::printf("softmax  %6dx%4d       serial %9.3f us   parallel %9.3f us   x%.2f   %s\n", m, n,
                ts * 1e6, tp * 1e6, ts / tp, same ? "bitwise-equal" : "MISMATCH");
}

void bench_forward(int reps) {
    model::ModelDims dims;
    dims.num_items = 2000;
    dims.num_users = 100;
    dims.num_lists = 300;
    dims.d = 96;
    dims.D = 100;
    dims.M = 32;
    model::ParameterSet params = model::ParameterSet::init(dims, 11);
    model::AttListModel mdl(std::move(params), {});

    data::ProfileExample ex;
    ex.user = 3;
    ex.list = 7;
    core::CounterRng rng(5, 9);
    const int n_slots = 15;
    ex.profile_slot_mask.assign(n_slots, 1);
    for (int s = 0; s < n_slots; ++s) {
        std::vector<int> items(32);
        for (auto& it : items) it = 1 + static_cast<int>(rng.next_below(2000));
        ex.profile_items.push_back(items);
        ex.profile_item_mask.emplace_back(32, 1);
        ex.profile_lists.push_back(s);
    }
    ex.cand_items.resize(32);
    for (auto& it : ex.cand_items) it = 1 + static_cast<int>(rng.next_below(2000));
    ex.cand_mask.assign(32, 1);

    const double t_inf = time_loop(reps, [&] {
        core::Tape tape(/*recording=*/false);
        model::RunContext ctx{tape};
        mdl.forward(ctx, ex);
    });
    const double t_train = time_loop(reps, [&] {
        core::Tape tape(/*recording=*/true);
        model::RunContext ctx{tape};
        auto r = mdl.forward(ctx, ex);
        tape.backward(r);
    });
    std::printf("forward  d=96 M=32 N=15    inference %6.1f us   train fwd+bwd %6.1f us\n",
                t_inf * 1e6, t_train * 1e6);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) core::set_threads(std::atoi(argv[1]));
    std::printf("threads: %d\n", core::hardware_threads());

    bench_matmul(32, 96, 96, 200);
    bench_matmul(256, 256, 256, 20);
    bench_matmul(512, 512, 512, 5);
    bench_softmax(32, 32, 500);
    bench_softmax(4096, 512, 20);
    bench_forward(50);
    return 0;
}
