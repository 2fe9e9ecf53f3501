#include "mmvlab/model_params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace mmv {

// ---------------------------------------------------------------- Schedule

Schedule::Schedule(std::vector<double> starts, std::vector<double> values)
    : starts_(std::move(starts)), values_(std::move(values)) {
    cumulative_.assign(starts_.size(), 0.0);
    for (std::size_t i = 1; i < starts_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + values_[i - 1] * (starts_[i] - starts_[i - 1]);
    }
}

Schedule Schedule::constant(double value) { return Schedule({0.0}, {value}); }

Schedule Schedule::piecewise(std::vector<double> starts, std::vector<double> values) {
    if (starts.empty() || starts.size() != values.size()) {
        throw std::invalid_argument("schedule needs one value per piece start");
    }
    if (starts.front() != 0.0) {
        throw std::invalid_argument("schedule must start at t = 0");
    }
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (!(starts[i] > starts[i - 1])) {
            throw std::invalid_argument("schedule piece starts must be strictly increasing");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("schedule values must be finite");
    }
    return Schedule(std::move(starts), std::move(values));
}

std::size_t Schedule::piece_index(double t) const {
    if (starts_.size() == 1) return 0;
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    if (it == starts_.begin()) return 0;
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

double Schedule::operator()(double t) const { return values_[piece_index(t)]; }

double Schedule::cumulative(double t) const {
    const std::size_t i = piece_index(t);
    return cumulative_[i] + values_[i] * (t - starts_[i]);
}

double Schedule::integral(double a, double b) const {
    if (values_.size() == 1) return values_[0] * (b - a);
    return cumulative(b) - cumulative(a);
}

std::span<const double> Schedule::breakpoints() const {
    return std::span<const double>(starts_).subspan(1);
}

// ------------------------------------------------------------- ClaimModel

namespace {

ClaimMoments moments_of(double intensity, const SizeLaw& law) {
    ClaimMoments m;
    if (const auto* e = std::get_if<ExponentialSize>(&law)) {
        m.mu0 = intensity / e->rate;
        m.sigma0_sq = 2.0 * intensity / (e->rate * e->rate);
    } else {
        const auto& d = std::get<DiscreteSize>(law);
        if (d.atoms.size() != d.weights.size()) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return {nan, nan};
        }
        double first = 0.0;
        double second = 0.0;
        for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            first += d.weights[i] * d.atoms[i];
            second += d.weights[i] * d.atoms[i] * d.atoms[i];
        }
        m.mu0 = intensity * first;
        m.sigma0_sq = intensity * second;
    }
    return m;
}

}  // namespace

ClaimModel::ClaimModel(double intensity, SizeLaw size_law)
    : intensity_(intensity), size_law_(std::move(size_law)), moments_(moments_of(intensity_, size_law_)) {}

double ClaimModel::expect(const std::function<double(double)>& f, double tol) const {
    if (const auto* e = std::get_if<ExponentialSize>(&size_law_)) {
        const double rate = e->rate;
        boost::math::quadrature::exp_sinh<double> integrator;
        auto weighted = [&](double z) {
            const double w = rate * std::exp(-rate * z);
            return w == 0.0 ? 0.0 : f(z) * w;
        };
        return integrator.integrate(weighted, 0.0, std::numeric_limits<double>::infinity(), tol);
    }
    const auto& d = std::get<DiscreteSize>(size_law_);
    double sum = 0.0;
    for (std::size_t i = 0; i < d.atoms.size(); ++i) sum += d.weights[i] * f(d.atoms[i]);
    return sum;
}

double ClaimModel::sample_size(std::mt19937_64& rng) const {
    if (const auto* e = std::get_if<ExponentialSize>(&size_law_)) {
        return std::exponential_distribution<double>(e->rate)(rng);
    }
    const auto& d = std::get<DiscreteSize>(size_law_);
    std::discrete_distribution<std::size_t> pick(d.weights.begin(), d.weights.end());
    return d.atoms[pick(rng)];
}

ClaimMoments claim_moments(const ClaimModel& claims) { return claims.moments(); }

// ------------------------------------------------------------- validation

namespace {

std::vector<double> sample_times(const ModelConfig& cfg) {
    std::vector<double> ts;
    constexpr int dense = 1000;
    for (int i = 0; i <= dense; ++i) ts.push_back(cfg.horizon * i / dense);
    for (const Schedule* s : {&cfg.market.r, &cfg.market.mu, &cfg.market.sigma}) {
        for (double b : s->starts()) {
            if (b <= cfg.horizon) ts.push_back(b);
        }
    }
    return ts;
}

}  // namespace

std::vector<Violation> validate_config(const ModelConfig& cfg) {
    std::vector<Violation> out;
    auto fail = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };

    if (!(std::isfinite(cfg.horizon) && cfg.horizon > 0.0)) fail("horizon", "horizon > 0 fails");
    if (!std::isfinite(cfg.x0)) fail("x0", "x0 must be finite");
    if (!(std::isfinite(cfg.theta) && cfg.theta >= 0.0)) fail("theta", "theta >= 0 fails");

    const auto& m = cfg.market;
    if (std::isfinite(cfg.horizon) && cfg.horizon > 0.0) {
        bool r_pos = true, r_nonneg = true, mu_gt_r = true, sigma_ok = true, finite = true;
        for (double t : sample_times(cfg)) {
            const double r = m.r(t), mu = m.mu(t), sigma = m.sigma(t);
            if (!(std::isfinite(r) && std::isfinite(mu) && std::isfinite(sigma))) finite = false;
            if (!(r > 0.0)) r_pos = false;
            if (!(r >= 0.0)) r_nonneg = false;
            if (!(mu > r)) mu_gt_r = false;
            if (!(sigma > m.sigma_floor)) sigma_ok = false;
        }
        if (!finite) fail("market", "market coefficients must be finite");
        if (m.investment) {
            if (!(m.sigma_floor > 0.0)) fail("sigma_floor", "sigma_floor > 0 fails");
            if (!r_pos) fail("r", "r(t) > 0 fails");
            if (!mu_gt_r) fail("mu", "mu(t) > r(t) fails");
            if (!sigma_ok) fail("sigma", "sigma(t) > sigma_floor fails");
        } else if (!r_nonneg) {
            fail("r", "r(t) >= 0 fails");
        }
    }

    const auto& ins = cfg.insurance;
    if (!(ins.kappa > 0.0)) fail("kappa", "kappa > 0 fails");
    if (!(ins.kappa_r > 0.0)) fail("kappa_r", "kappa_r > 0 fails");
    if (!(ins.kappa <= ins.kappa_r)) fail("kappa", "kappa <= kappa_r fails");

    const auto& c = cfg.claims;
    if (!(std::isfinite(c.intensity()) && c.intensity() >= 0.0)) fail("lambda", "lambda >= 0 fails");
    if (const auto* e = std::get_if<ExponentialSize>(&c.size_law())) {
        if (!(std::isfinite(e->rate) && e->rate > 0.0)) fail("claim_rate", "claim_rate > 0 fails");
    } else {
        const auto& d = std::get<DiscreteSize>(c.size_law());
        if (d.atoms.empty() || d.atoms.size() != d.weights.size()) {
            fail("claim_atoms", "claim_atoms and claim_weights must be nonempty and of equal length");
        } else {
            double total = 0.0;
            bool nonneg = true, positive = true;
            for (std::size_t i = 0; i < d.atoms.size(); ++i) {
                if (!(d.weights[i] >= 0.0)) nonneg = false;
                if (!(d.atoms[i] > 0.0 && std::isfinite(d.atoms[i]))) positive = false;
                total += d.weights[i];
            }
            if (!nonneg) fail("claim_weights", "claim weights must be nonnegative");
            if (!(std::abs(total - 1.0) <= 1e-12)) fail("claim_weights", "claim weights must sum to 1");
            if (!positive) fail("claim_atoms", "claim atoms must be strictly positive");
        }
    }
    if (c.active()) {
        if (!(std::isfinite(c.mu0()) && c.mu0() > 0.0)) fail("claims", "mu0 > 0 fails");
        if (!(std::isfinite(c.sigma0_sq()) && c.sigma0_sq() > 0.0)) fail("claims", "sigma0_sq > 0 fails");
    }
    return out;
}

// ------------------------------------------------------------- quadrature

namespace {

struct SimpsonPanel {
    double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, const SimpsonPanel& p, double tol,
                        int depth) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

// Composite Simpson on [a, b] with the integrand continuous on [a, b).
double integrate_piece(const std::function<double(double)>& f, double a, double b, double tol) {
    constexpr int panels = 4;
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == panels) ? b : a + (i + 1) * h;
        const double mid = 0.5 * (lo + hi);
        const double flo = f(lo);
        const double fhi = (i + 1 == panels) ? f(std::nextafter(b, a)) : f(hi);
        const double fm = f(mid);
        sum += adaptive_simpson(f, {lo, hi, flo, fm, fhi, simpson(lo, hi, flo, fm, fhi)}, tol / panels, 40);
    }
    return sum;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 std::span<const double> breakpoints) {
    if (!(a <= b)) throw std::invalid_argument("integrate: invalid interval (a > b)");
    if (a == b) return 0.0;
    std::vector<double> cuts{a};
    for (double bp : breakpoints) {
        if (bp > a && bp < b) cuts.push_back(bp);
    }
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    cuts.push_back(b);
    const double length = b - a;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double share = tol * (cuts[i + 1] - cuts[i]) / length;
        total += integrate_piece(f, cuts[i], cuts[i + 1], share);
    }
    return total;
}

// ------------------------------------------------------------------- rho

double rho(const ModelConfig& cfg, double t) {
    double value = 0.0;
    const auto& c = cfg.claims;
    if (c.active()) {
        const double k = cfg.insurance.kappa_r;
        value += c.mu0() * c.mu0() * k * k / c.sigma0_sq();
    }
    if (cfg.market.investment) {
        const double excess = cfg.market.mu(t) - cfg.market.r(t);
        const double sigma = cfg.market.sigma(t);
        value += excess * excess / (sigma * sigma);
    }
    return value;
}

std::vector<double> market_breakpoints(const ModelConfig& cfg) {
    std::vector<double> bps;
    for (const Schedule* s : {&cfg.market.r, &cfg.market.mu, &cfg.market.sigma}) {
        for (double b : s->breakpoints()) bps.push_back(b);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    return bps;
}

Schedule rho_schedule(const ModelConfig& cfg) {
    std::vector<double> starts{0.0};
    for (double b : market_breakpoints(cfg)) starts.push_back(b);
    std::vector<double> values;
    values.reserve(starts.size());
    for (double s : starts) values.push_back(rho(cfg, s));
    return Schedule::piecewise(std::move(starts), std::move(values));
}

ModelConfig baseline_config() {
    ModelConfig cfg;
    cfg.horizon = 3.0;
    cfg.x0 = 1.0;
    cfg.theta = 2.0;
    cfg.s0 = 10.0;
    cfg.market.r = Schedule::constant(0.08);
    cfg.market.mu = Schedule::constant(0.15);
    cfg.market.sigma = Schedule::constant(0.2);
    cfg.insurance = {0.1, 0.15};
    cfg.claims = ClaimModel(5.0, ExponentialSize{10.0});
    return cfg;
}

}  // namespace mmv
