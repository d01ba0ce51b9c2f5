#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bpk {

/// Row-per-true-class, column-per-predicted-class counts.
struct ConfusionMatrix {
    std::vector<std::vector<std::uint64_t>> counts;

    std::size_t num_classes() const { return counts.size(); }
    std::uint64_t total() const;
    std::uint64_t trace() const;
};

/// Per-class precision/recall/F1 with supports, plus accuracy and
/// macro/weighted averages. `degenerate` is set when any metric had a
/// zero denominator (reported as 0 rather than thrown).
struct Report {
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::uint64_t> support;
    double accuracy = 0.0;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    std::uint64_t total = 0;
    bool degenerate = false;
};

ConfusionMatrix confusion(const std::vector<std::uint8_t>& truth,
                          const std::vector<std::uint8_t>& pred,
                          std::size_t num_classes = 2);

Report report(const ConfusionMatrix& m);

/// Fraction of erroneous bits. For one-bit-per-record data this is
/// exactly 1 - accuracy.
double ber(const std::vector<std::uint8_t>& truth,
           const std::vector<std::uint8_t>& pred);

/// Fixed-width, two-decimal classification report. Class names default to
/// 0 - "space" / 1 - "mark" for the binary case.
std::string format_report(const Report& r,
                          const std::vector<std::string>& class_names = {});

} // namespace bpk
