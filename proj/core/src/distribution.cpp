#include "qmap/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace qmap {

Distribution Distribution::from_samples(std::vector<std::pair<double, double>> samples, double bin_tol,
                                        double prob_floor) {
    std::sort(samples.begin(), samples.end());
    Distribution d;
    d.bin_tol_ = bin_tol;

    std::size_t k = 0;
    while (k < samples.size()) {
        double mass = 0.0;
        double moment = 0.0;
        double plain = 0.0;
        std::size_t count = 0;
        double last = samples[k].first;
        while (k < samples.size() && samples[k].first - last <= bin_tol) {
            last = samples[k].first;
            mass += samples[k].second;
            moment += samples[k].first * samples[k].second;
            plain += samples[k].first;
            ++count;
            ++k;
        }
        if (mass > prob_floor) {
            d.atoms_.push_back({mass > 0.0 ? moment / mass : plain / static_cast<double>(count), mass});
        }
    }
    return d;
}

double Distribution::total() const {
    double s = 0.0;
    for (const auto& a : atoms_) {
        s += a.prob;
    }
    return s;
}

double Distribution::mean() const {
    double s = 0.0;
    for (const auto& a : atoms_) {
        s += a.value * a.prob;
    }
    return s;
}

std::optional<Atom> Distribution::find(double value, double tol) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value - tol,
                               [](const Atom& a, double v) { return a.value < v; });
    std::optional<Atom> best;
    for (; it != atoms_.end() && it->value <= value + tol; ++it) {
        if (!best || std::abs(it->value - value) < std::abs(best->value - value)) {
            best = *it;
        }
    }
    return best;
}

double Distribution::prob_at(double value, double tol) const {
    const auto a = find(value, tol);
    return a ? a->prob : 0.0;
}

Distribution Distribution::scaled(double factor) const {
    Distribution d = *this;
    for (auto& a : d.atoms_) {
        a.value *= factor;
    }
    if (factor < 0.0) {
        std::reverse(d.atoms_.begin(), d.atoms_.end());
    }
    return d;
}

Distribution Distribution::rebinned(double bin_tol) const {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(atoms_.size());
    for (const auto& a : atoms_) {
        samples.emplace_back(a.value, a.prob);
    }
    return from_samples(std::move(samples), bin_tol, 0.0);
}

DistributionDiff compare(const Distribution& a, const Distribution& b, double value_tol) {
    DistributionDiff diff;
    const auto& xa = a.atoms();
    const auto& xb = b.atoms();
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < xa.size() || j < xb.size()) {
        if (i < xa.size() && j < xb.size() && std::abs(xa[i].value - xb[j].value) <= value_tol) {
            diff.max_value_gap = std::max(diff.max_value_gap, std::abs(xa[i].value - xb[j].value));
            diff.max_prob_gap = std::max(diff.max_prob_gap, std::abs(xa[i].prob - xb[j].prob));
            ++i;
            ++j;
        } else if (j >= xb.size() || (i < xa.size() && xa[i].value < xb[j].value)) {
            diff.max_prob_gap = std::max(diff.max_prob_gap, xa[i].prob);
            ++diff.unmatched;
            ++i;
        } else {
            diff.max_prob_gap = std::max(diff.max_prob_gap, xb[j].prob);
            ++diff.unmatched;
            ++j;
        }
    }
    return diff;
}

}  // namespace qmap
