#include "mmvlab/mmv_discrete.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmv {

namespace {

// Neumaier compensated summation.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

void require_theta(double theta) {
    if (!(theta > 0.0)) throw std::domain_error("MMV evaluation needs theta > 0");
}

double density_value(std::span<const Atom> atoms, std::span<const double> density, double theta) {
    Accumulator linear, quadratic;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        linear.add(atoms[i].prob * density[i] * atoms[i].value);
        quadratic.add(atoms[i].prob * density[i] * density[i]);
    }
    return linear.value() + (quadratic.value() - 1.0) / (2.0 * theta);
}

}  // namespace

// ------------------------------------------------------------- DiscreteRv

DiscreteRv::DiscreteRv(std::vector<Atom> atoms, Trusted) : atoms_(std::move(atoms)) {}

DiscreteRv::DiscreteRv(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("discrete law needs at least one atom");
    Accumulator total;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.value)) throw std::invalid_argument("atom values must be finite");
        if (!(a.prob > 0.0 && a.prob <= 1.0)) throw std::invalid_argument("atom probabilities must lie in (0, 1]");
        total.add(a.prob);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) {
        throw std::invalid_argument("atom probabilities must sum to 1");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.value < r.value; });
    for (const auto& a : atoms) {
        if (!atoms_.empty() && atoms_.back().value == a.value) {
            atoms_.back().prob += a.prob;
        } else {
            atoms_.push_back(a);
        }
    }
}

DiscreteRv DiscreteRv::constant(double value) { return DiscreteRv({{value, 1.0}}); }

DiscreteRv DiscreteRv::uniform(double a, double b, std::size_t n) {
    if (n == 0 || !(b > a)) throw std::invalid_argument("uniform(a, b, n) needs b > a and n > 0");
    std::vector<Atom> atoms(n);
    const double width = (b - a) / static_cast<double>(n);
    const double p = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        atoms[i] = {a + width * (static_cast<double>(i) + 0.5), p};
    }
    return DiscreteRv(std::move(atoms), Trusted{});
}

double DiscreteRv::mean() const {
    Accumulator acc;
    for (const auto& a : atoms_) acc.add(a.prob * a.value);
    return acc.value();
}

double DiscreteRv::variance() const {
    const double m = mean();
    Accumulator acc;
    for (const auto& a : atoms_) acc.add(a.prob * (a.value - m) * (a.value - m));
    return acc.value();
}

DiscreteRv DiscreteRv::shifted(double c) const {
    std::vector<Atom> out(atoms_.begin(), atoms_.end());
    for (auto& a : out) a.value += c;
    return DiscreteRv(std::move(out), Trusted{});
}

DiscreteRv DiscreteRv::truncated(double level) const {
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    double capped = 0.0;
    for (const auto& a : atoms_) {
        if (a.value < level) {
            out.push_back(a);
        } else {
            capped += a.prob;
        }
    }
    if (capped > 0.0) out.push_back({level, capped});
    return DiscreteRv(std::move(out), Trusted{});
}

// ------------------------------------------------------------ preferences

double mv_utility(const DiscreteRv& x, double theta) {
    if (theta == 0.0) return x.mean();
    return x.mean() - 0.5 * theta * x.variance();
}

MmvResult mmv_waterfill(const DiscreteRv& x, double theta) {
    require_theta(theta);
    const auto atoms = x.atoms();
    const std::size_t n = atoms.size();

    // Normalisation N(c) = sum p_i max(c - theta x_i, 0) is increasing and
    // piecewise linear with kinks at theta x_i. With the k lowest atoms
    // active the root is c = (1 + theta S_k) / P_k.
    std::optional<double> level;
    Accumulator mass, moment;
    for (std::size_t k = 0; k < n; ++k) {
        mass.add(atoms[k].prob);
        moment.add(atoms[k].prob * atoms[k].value);
        const double c = (1.0 + theta * moment.value()) / mass.value();
        const bool active = c > theta * atoms[k].value;
        const bool next_inactive = (k + 1 == n) || c <= theta * atoms[k + 1].value;
        if (active && next_inactive) {
            level = c;
            break;
        }
    }
    if (!level) {
        auto normalisation = [&](double c) {
            Accumulator acc;
            for (const auto& a : atoms) acc.add(a.prob * std::max(c - theta * a.value, 0.0));
            return acc.value() - 1.0;
        };
        double lo = theta * atoms.front().value;
        double hi = theta * atoms.back().value + 1.0;
        while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
            const double mid = 0.5 * (lo + hi);
            (normalisation(mid) < 0.0 ? lo : hi) = mid;
        }
        level = 0.5 * (lo + hi);
    }

    MmvResult out;
    out.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.density[i] = std::max(*level - theta * atoms[i].value, 0.0);
    out.value = density_value(atoms, out.density, theta);
    // The density vanishes above level / theta: the implied truncation point.
    if (*level / theta < x.max()) out.kappa = *level / theta;
    return out;
}

MmvResult mmv_truncation(const DiscreteRv& x, double theta) {
    require_theta(theta);
    const auto atoms = x.atoms();
    const std::size_t n = atoms.size();
    const double slack = 1.0 / theta;

    // g(t) = t - E[min(X, t)] - 1/theta is nondecreasing and strictly
    // increasing from min X on; kappa is its root.
    std::optional<double> kappa;
    if (x.max() > x.mean() + slack) {
        Accumulator mass, moment;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            mass.add(atoms[k].prob);
            moment.add(atoms[k].prob * atoms[k].value);
            // On [x_k, x_{k+1}): E[min(X, t)] = S_k + t (1 - P_k).
            const double t = (moment.value() + slack) / mass.value();
            if (t < atoms[k + 1].value) {
                kappa = std::max(t, atoms[k].value);
                break;
            }
        }
    }

    MmvResult out;
    out.kappa = kappa;
    const DiscreteRv capped = kappa ? x.truncated(*kappa) : x;
    out.value = mv_utility(capped, theta);
    const double capped_mean = capped.mean();
    out.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = kappa ? std::min(atoms[i].value, *kappa) : atoms[i].value;
        out.density[i] = std::max(1.0 + theta * (capped_mean - v), 0.0);
    }
    return out;
}

}  // namespace mmv
