#include "bpk/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bpk {

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts) {
        for (std::uint64_t c : row) t += c;
    }
    return t;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
}

ConfusionMatrix confusion(const std::vector<std::uint8_t>& truth,
                          const std::vector<std::uint8_t>& pred,
                          std::size_t num_classes) {
    if (truth.size() != pred.size()) {
        throw std::invalid_argument("confusion: truth/pred length mismatch");
    }
    if (truth.empty()) {
        throw std::invalid_argument("confusion: empty inputs");
    }
    ConfusionMatrix m;
    m.counts.assign(num_classes, std::vector<std::uint64_t>(num_classes, 0));
    for (std::size_t n = 0; n < truth.size(); ++n) {
        if (truth[n] >= num_classes || pred[n] >= num_classes) {
            throw std::invalid_argument("confusion: label outside class range");
        }
        ++m.counts[truth[n]][pred[n]];
    }
    return m;
}

Report report(const ConfusionMatrix& m) {
    const std::size_t k = m.num_classes();
    Report r;
    r.total = m.total();
    if (r.total == 0) {
        throw std::invalid_argument("report: empty confusion matrix");
    }
    r.precision.resize(k);
    r.recall.resize(k);
    r.f1.resize(k);
    r.support.resize(k);

    auto guarded = [&r](double num, double den) {
        if (den == 0.0) {
            r.degenerate = true;
            return 0.0;
        }
        return num / den;
    };

    for (std::size_t c = 0; c < k; ++c) {
        std::uint64_t col = 0, row = 0;
        for (std::size_t i = 0; i < k; ++i) {
            col += m.counts[i][c];
            row += m.counts[c][i];
        }
        const double tp = static_cast<double>(m.counts[c][c]);
        r.support[c] = row;
        r.precision[c] = guarded(tp, static_cast<double>(col));
        r.recall[c] = guarded(tp, static_cast<double>(row));
        r.f1[c] = guarded(2.0 * r.precision[c] * r.recall[c],
                          r.precision[c] + r.recall[c]);
    }
    r.accuracy = static_cast<double>(m.trace()) / static_cast<double>(r.total);

    for (std::size_t c = 0; c < k; ++c) {
        const double w = static_cast<double>(r.support[c]) /
                         static_cast<double>(r.total);
        r.macro_precision += r.precision[c] / static_cast<double>(k);
        r.macro_recall += r.recall[c] / static_cast<double>(k);
        r.macro_f1 += r.f1[c] / static_cast<double>(k);
        r.weighted_precision += w * r.precision[c];
        r.weighted_recall += w * r.recall[c];
        r.weighted_f1 += w * r.f1[c];
    }
    return r;
}

double ber(const std::vector<std::uint8_t>& truth,
           const std::vector<std::uint8_t>& pred) {
    if (truth.size() != pred.size()) {
        throw std::invalid_argument("ber: truth/pred length mismatch");
    }
    if (truth.empty()) {
        throw std::invalid_argument("ber: empty inputs");
    }
    std::uint64_t errors = 0;
    for (std::size_t n = 0; n < truth.size(); ++n) {
        errors += truth[n] != pred[n];
    }
    return static_cast<double>(errors) / static_cast<double>(truth.size());
}

std::string format_report(const Report& r,
                          const std::vector<std::string>& class_names) {
    std::vector<std::string> names = class_names;
    if (names.empty()) {
        if (r.precision.size() == 2) {
            names = {"0 - \"space\"", "1 - \"mark\""};
        } else {
            for (std::size_t c = 0; c < r.precision.size(); ++c) {
                names.push_back(std::to_string(c));
            }
        }
    }
    std::size_t name_w = 12; // "weighted avg"
    for (const auto& n : names) name_w = std::max(name_w, n.size());

    std::ostringstream out;
    out << std::fixed << std::setprecision(2);
    auto row = [&](const std::string& name, double p, double rec, double f1,
                   std::uint64_t support, bool skip_pr = false) {
        out << std::setw(static_cast<int>(name_w)) << name;
        if (skip_pr) {
            out << std::setw(11) << "" << std::setw(10) << "";
        } else {
            out << std::setw(11) << p << std::setw(10) << rec;
        }
        out << std::setw(10) << f1 << std::setw(10) << support << '\n';
    };

    out << std::setw(static_cast<int>(name_w)) << "" << std::setw(11)
        << "precision" << std::setw(10) << "recall" << std::setw(10)
        << "f1-score" << std::setw(10) << "support" << "\n\n";
    for (std::size_t c = 0; c < r.precision.size(); ++c) {
        row(names[c], r.precision[c], r.recall[c], r.f1[c], r.support[c]);
    }
    out << '\n';
    row("accuracy", 0, 0, r.accuracy, r.total, /*skip_pr=*/true);
    row("macro avg", r.macro_precision, r.macro_recall, r.macro_f1, r.total);
    row("weighted avg", r.weighted_precision, r.weighted_recall, r.weighted_f1,
        r.total);
    return out.str();
}

} // namespace bpk
