#include "attlist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "attlist/errors.hpp"

namespace attlist::eval {

namespace {

bool in_truth(const std::vector<int>& truth, int x) {
    return std::binary_search(truth.begin(), truth.end(), x);
}

}  // namespace

double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& truth, int k) {
    if (k < 1) throw ConfigError("ndcg_at_k: k must be >= 1");
    if (truth.empty()) return 0.0;
    double dcg = 0.0;
    const int top = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int i = 0; i < top; ++i)
        if (in_truth(truth, ranked[static_cast<size_t>(i)]))
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    double idcg = 0.0;
    const int ideal = std::min<int>(k, static_cast<int>(truth.size()));
    for (int i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

std::pair<double, double> precision_recall_at_k(const std::vector<int>& ranked,
                                                const std::vector<int>& truth, int k) {
    if (k < 1) throw ConfigError("precision_recall_at_k: k must be >= 1");
    int hits = 0;
    const int top = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int i = 0; i < top; ++i)
        if (in_truth(truth, ranked[static_cast<size_t>(i)])) ++hits;
    const double p = static_cast<double>(hits) / static_cast<double>(k);
    const double r =
        truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
    return {p, r};
}

std::string render_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    size_t width = 10;
    for (const auto& [name, _] : rows) width = std::max(width, name.size() + 2);

    std::ostringstream os;
    char buf[64];
    os << std::string(width, ' ');
    for (const char* col : {"P@5", "R@5", "N@5", "P@10", "R@10", "N@10"}) {
        std::snprintf(buf, sizeof(buf), "%10s", col);
        os << buf;
    }
    os << "\n";
    for (const auto& [name, m] : rows) {
        os << name << std::string(width - name.size(), ' ');
        for (double v : {m.p5, m.r5, m.n5, m.p10, m.r10, m.n10}) {
            std::snprintf(buf, sizeof(buf), "%10.3f", v);
            os << buf;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace attlist::eval
