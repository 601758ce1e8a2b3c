#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace attlist::eval {

// Binary-relevance NDCG with 1/log2(i+1) discount at 1-based rank i;
// 0 when the truth set is empty. truth must be sorted ascending.
double ndcg_at_k(const std::vector<int>& ranked, const std::vector<int>& truth, int k);

// P@k = hits/k, R@k = hits/|truth| (0 when truth empty).
std::pair<double, double> precision_recall_at_k(const std::vector<int>& ranked,
                                                const std::vector<int>& truth, int k);

// Mean metrics over evaluated users, in percent.
struct MetricsReport {
    double p5 = 0, r5 = 0, n5 = 0;
    double p10 = 0, r10 = 0, n10 = 0;
    int user_count = 0;
    uint64_t config_hash = 0;
};

// Aligned text table, one row per model, columns P@5 R@5 N@5 P@10 R@10 N@10
// with three decimals.
std::string render_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace attlist::eval
