// distribution.hpp: finite (value, probability) distributions with tolerance binning.

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace qmap {

/// Values closer than this fall into the same atom.
inline constexpr double kBinTol = 1e-9;
/// Atoms whose merged mass does not exceed this are dropped.
inline constexpr double kProbFloor = 1e-14;

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

class Distribution {
public:
    Distribution() = default;

    /// Single-linkage merge of sorted samples: a new atom starts whenever the
    /// gap to the previous sample exceeds bin_tol. Atom values are the
    /// probability-weighted means of their members.
    static Distribution from_samples(std::vector<std::pair<double, double>> samples,
                                     double bin_tol = kBinTol, double prob_floor = kProbFloor);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    double bin_tolerance() const noexcept { return bin_tol_; }

    double total() const;
    double mean() const;

    /// Probability of the atom within tol of value, or 0.
    double prob_at(double value, double tol = kBinTol) const;
    std::optional<Atom> find(double value, double tol = kBinTol) const;

    /// Same atoms with values multiplied by factor.
    Distribution scaled(double factor) const;

    /// Atoms merged again at a coarser bin tolerance.
    Distribution rebinned(double bin_tol) const;

private:
    std::vector<Atom> atoms_;
    double bin_tol_ = kBinTol;
};

struct DistributionDiff {
    double max_value_gap = 0.0;   // over matched atoms
    double max_prob_gap = 0.0;    // over the union, unmatched atoms count fully
    std::size_t unmatched = 0;

    bool within(double value_tol, double prob_tol) const {
        return max_value_gap <= value_tol && max_prob_gap <= prob_tol;
    }
};

/// Atoms are matched when their values differ by at most value_tol.
DistributionDiff compare(const Distribution& a, const Distribution& b, double value_tol = kBinTol);

}  // namespace qmap
