#pragma once
// Monotone mean-variance and classical mean-variance preferences for
// finite-support random variables.
//
// V(X) = min over densities y >= 0 with E[y] = 1 of E[yX] + (E[y^2] - 1) / (2 theta)
//
// Two independent evaluations are provided: the water-filling solution of
// the density minimisation and the truncation formula V(X) = U(min(X, k)).

#include <optional>
#include <span>
#include <vector>

namespace mmv {

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

// Finite-support law. Atoms are kept sorted by value with duplicates merged.
class DiscreteRv {
public:
    // Throws std::invalid_argument unless probabilities are positive, sum to
    // one within 1e-12 and all values are finite.
    explicit DiscreteRv(std::vector<Atom> atoms);

    static DiscreteRv constant(double value);
    // Midpoint discretisation of U(a, b) with n equal-weight atoms.
    static DiscreteRv uniform(double a, double b, std::size_t n);

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }

    double mean() const;
    double variance() const;
    double min() const { return atoms_.front().value; }
    double max() const { return atoms_.back().value; }

    DiscreteRv shifted(double c) const;
    DiscreteRv truncated(double level) const;  // min(X, level)

private:
    struct Trusted {};
    DiscreteRv(std::vector<Atom> atoms, Trusted);
    std::vector<Atom> atoms_;
};

struct MmvResult {
    double value = 0.0;
    std::vector<double> density;  // optimal dQ/dP per atom, in atom order
    std::optional<double> kappa;  // truncation level; nullopt means no truncation
};

// E[X] - (theta / 2) Var[X]; theta == 0 gives the plain mean.
double mv_utility(const DiscreteRv& x, double theta);

MmvResult mmv_waterfill(const DiscreteRv& x, double theta);
MmvResult mmv_truncation(const DiscreteRv& x, double theta);

}  // namespace mmv
