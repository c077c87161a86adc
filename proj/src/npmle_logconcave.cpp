// Log-concave MLE: maximize (1/n) sum_i phi(x_i) - int exp(phi) over concave
// phi that are linear between knots chosen among the observations.
//
// Active-set scheme: for a fixed knot set, Newton's method finds the best
// (not necessarily concave) linear spline. If that spline is not concave, the
// iterate walks towards it until the first kink flattens, and that knot is
// removed. Once the spline on the knot set is concave and optimal, knots are
// inserted wherever adding a concave kink increases the objective.

#include <algorithm>
#include <cmath>
#include <limits>

#include "loglinear.hpp"
#include "npmle_internal.hpp"
#include "shapetest/error.hpp"

namespace shapetest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Problem {
public:
    explicit Problem(std::span<const double> x) : x_(x), n_(x.size()) {}

    // Knot indices into x, always containing 0 and n-1.
    void set_knots(std::vector<std::size_t> knots)
    {
        knots_ = std::move(knots);
        const std::size_t m = knots_.size();
        weight_.assign(m, 0.0);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (std::size_t s = 0; s + 1 < m; ++s) {
            const std::size_t a = knots_[s], b = knots_[s + 1];
            const double h = x_[b] - x_[a];
            for (std::size_t i = (s == 0 ? a : a + 1); i <= b; ++i) {
                const double lam = (x_[i] - x_[a]) / h;
                weight_[s] += (1.0 - lam) * inv_n;
                weight_[s + 1] += lam * inv_n;
            }
        }
    }

    const std::vector<std::size_t>& knots() const { return knots_; }
    double t(std::size_t j) const { return x_[knots_[j]]; }

    double objective(const std::vector<double>& phi) const
    {
        double lin = 0.0, integral = 0.0;
        for (std::size_t j = 0; j < phi.size(); ++j) {
            lin += weight_[j] * phi[j];
        }
        for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
            integral += (t(j + 1) - t(j)) * detail::j00(phi[j], phi[j + 1]);
        }
        const double val = lin - integral;
        return std::isfinite(val) ? val : -kInf;
    }

    // Gradient of the objective and the (positive definite) tridiagonal
    // Hessian of the integral term.
    void derivatives(const std::vector<double>& phi, std::vector<double>& grad, std::vector<double>& diag,
                     std::vector<double>& off) const
    {
        const std::size_t m = phi.size();
        grad = weight_;
        diag.assign(m, 0.0);
        off.assign(m > 0 ? m - 1 : 0, 0.0);
        for (std::size_t j = 0; j + 1 < m; ++j) {
            const double h = t(j + 1) - t(j);
            const double r = phi[j], s = phi[j + 1];
            grad[j] -= h * detail::j10(s, r);
            grad[j + 1] -= h * detail::j10(r, s);
            diag[j] += h * detail::j20(s, r);
            diag[j + 1] += h * detail::j20(r, s);
            off[j] = h * (detail::j10(r, s) - detail::j20(r, s));
        }
    }

    // Damped Newton to the unconstrained optimum on the current knots.
    std::vector<double> newton(std::vector<double> phi, int& steps) const
    {
        std::vector<double> grad, diag, off, delta;
        double val = objective(phi);
        for (int it = 0; it < 200; ++it) {
            derivatives(phi, grad, diag, off);
            delta = solve_tridiagonal(diag, off, grad);
            double decrement = 0.0;
            for (std::size_t j = 0; j < phi.size(); ++j) {
                decrement += grad[j] * delta[j];
            }
            ++steps;
            if (!(decrement > 1e-15)) {
                break;
            }
            double step = 1.0;
            bool accepted = false;
            std::vector<double> trial(phi.size());
            for (int h = 0; h < 60; ++h, step *= 0.5) {
                for (std::size_t j = 0; j < phi.size(); ++j) {
                    trial[j] = phi[j] + step * delta[j];
                }
                const double tv = objective(trial);
                if (tv >= val + 1e-4 * step * decrement) {
                    phi = trial;
                    accepted = tv > val;
                    val = tv;
                    break;
                }
            }
            if (!accepted) {
                break;
            }
        }
        return phi;
    }

    // Kink at interior knot j: slope(j, j+1) - slope(j-1, j); concave iff <= 0.
    double kink(const std::vector<double>& phi, std::size_t j) const
    {
        return (phi[j + 1] - phi[j]) / (t(j + 1) - t(j)) - (phi[j] - phi[j - 1]) / (t(j) - t(j - 1));
    }

private:
    static std::vector<double> solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                                 const std::vector<double>& rhs)
    {
        const std::size_t m = diag.size();
        std::vector<double> c(m, 0.0), d(m, 0.0), out(m);
        double denom = diag[0];
        c[0] = m > 1 ? off[0] / denom : 0.0;
        d[0] = rhs[0] / denom;
        for (std::size_t j = 1; j < m; ++j) {
            denom = diag[j] - off[j - 1] * c[j - 1];
            c[j] = j + 1 < m ? off[j] / denom : 0.0;
            d[j] = (rhs[j] - off[j - 1] * d[j - 1]) / denom;
        }
        out[m - 1] = d[m - 1];
        for (std::size_t j = m - 1; j-- > 0;) {
            out[j] = d[j] - c[j] * out[j + 1];
        }
        return out;
    }

    std::span<const double> x_;
    std::size_t n_;
    std::vector<std::size_t> knots_;
    std::vector<double> weight_;  // (1/n) sum of hat functions at the data
};

// gain[i] = int_{x_i} (x - x_i) exp(phi) dx - (1/n) sum_l (x_l - x_i)_+, for
// every observation, with phi linear between `knot_x` given by `knot_phi`.
std::vector<double> kink_gains(std::span<const double> x, std::span<const double> knot_x,
                               std::span<const double> knot_phi)
{
    const std::size_t n = x.size();
    const std::size_t m = knot_x.size();
    // Tails from each knot: T0 = int_t exp(phi), T1 = int_t (x - t) exp(phi).
    std::vector<double> t0(m, 0.0), t1(m, 0.0);
    for (std::size_t j = m - 1; j-- > 0;) {
        const double h = knot_x[j + 1] - knot_x[j];
        t0[j] = h * detail::j00(knot_phi[j], knot_phi[j + 1]) + t0[j + 1];
        t1[j] = h * h * detail::j10(knot_phi[j], knot_phi[j + 1]) + h * t0[j + 1] + t1[j + 1];
    }

    std::vector<double> gain(n, 0.0);
    double suffix = 0.0;  // sum_{l > i} x_l
    std::size_t seg = m - 2;
    for (std::size_t i = n; i-- > 0;) {
        const double xi = x[i];
        while (seg > 0 && xi < knot_x[seg]) {
            --seg;
        }
        const double a = knot_x[seg], b = knot_x[seg + 1];
        const double slope = (knot_phi[seg + 1] - knot_phi[seg]) / (b - a);
        const double phi_i = knot_phi[seg] + slope * (xi - a);
        const double h = b - xi;
        const double model = h * h * detail::j10(phi_i, knot_phi[seg + 1]) + h * t0[seg + 1] + t1[seg + 1];
        const double empirical = (suffix - static_cast<double>(n - 1 - i) * xi) / static_cast<double>(n);
        gain[i] = model - empirical;
        suffix += xi;
    }
    return gain;
}

}  // namespace

Fit<PiecewiseLogLinear> fit_log_concave(const SortedSample& s, const SolverConfig& cfg)
{
    cfg.validate();
    const auto x = s.z();
    const std::size_t n = x.size();
    if (n < 2) {
        throw Error(ErrorCode::TooFewObservations, "the log-concave MLE needs at least two observations");
    }
    const double range = x[n - 1] - x[0];

    Problem prob(x);
    prob.set_knots({0, n - 1});
    std::vector<double> phi(2, -std::log(range));
    int steps = 0;
    int outer = 0;
    double gap = kInf;

    for (; outer < cfg.max_iter; ++outer) {
        // Optimize on the knot set, dropping knots that would break concavity.
        for (int guard = 0; guard < static_cast<int>(n) + 8; ++guard) {
            const std::vector<double> target = prob.newton(phi, steps);
            double tstar = 1.0;
            std::size_t drop = 0;
            for (std::size_t j = 1; j + 1 < target.size(); ++j) {
                const double c1 = prob.kink(target, j);
                if (c1 > 0.0) {
                    const double c0 = std::min(prob.kink(phi, j), 0.0);
                    const double tj = c0 / (c0 - c1);
                    if (tj < tstar) {
                        tstar = tj;
                        drop = j;
                    }
                }
            }
            if (drop == 0) {
                phi = target;
                break;
            }
            for (std::size_t j = 0; j < phi.size(); ++j) {
                phi[j] += tstar * (target[j] - phi[j]);
            }
            std::vector<std::size_t> knots = prob.knots();
            knots.erase(knots.begin() + static_cast<std::ptrdiff_t>(drop));
            phi.erase(phi.begin() + static_cast<std::ptrdiff_t>(drop));
            prob.set_knots(std::move(knots));
        }

        // Insert the best kink inside every segment that gains more than tol.
        std::vector<double> kx(phi.size());
        for (std::size_t j = 0; j < phi.size(); ++j) {
            kx[j] = prob.t(j);
        }
        const std::vector<double> gain = kink_gains(x, kx, phi);
        gap = 0.0;
        std::vector<std::size_t> knots;
        std::vector<double> new_phi;
        const auto& old = prob.knots();
        for (std::size_t sidx = 0; sidx + 1 < old.size(); ++sidx) {
            knots.push_back(old[sidx]);
            new_phi.push_back(phi[sidx]);
            std::size_t best = 0;
            double best_gain = 0.0;
            for (std::size_t i = old[sidx] + 1; i < old[sidx + 1]; ++i) {
                const double g = gain[i] / range;
                if (g > best_gain) {
                    best_gain = g;
                    best = i;
                }
            }
            gap = std::max(gap, best_gain);
            if (best_gain > cfg.tol_gap) {
                const double lam = (x[best] - x[old[sidx]]) / (x[old[sidx + 1]] - x[old[sidx]]);
                knots.push_back(best);
                new_phi.push_back((1.0 - lam) * phi[sidx] + lam * phi[sidx + 1]);
            }
        }
        knots.push_back(old.back());
        new_phi.push_back(phi.back());
        if (gap <= cfg.tol_gap) {
            break;
        }
        prob.set_knots(std::move(knots));
        phi = std::move(new_phi);
    }

    // The optimum already integrates to one; remove the residual exactly.
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
        integral += (prob.t(j + 1) - prob.t(j)) * detail::j00(phi[j], phi[j + 1]);
    }
    const double shift = std::log(integral);
    std::vector<double> knot_x(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        phi[j] -= shift;
        knot_x[j] = prob.t(j);
    }

    PiecewiseLogLinear density(std::move(knot_x), std::move(phi));
    FitReport report;
    double loglik = 0.0;
    for (double xi : x) {
        loglik += density.log_pdf(xi);
    }
    report.loglik = loglik;
    report.iterations = steps;
    report.optimality_gap = detail::log_concave_gap(density, x);
    report.converged = gap <= cfg.tol_gap && report.optimality_gap <= cfg.tol_gap;
    report.support_size = density.knots().size();
    return {std::move(density), report};
}

namespace detail {

double log_concave_gap(const PiecewiseLogLinear& f, std::span<const double> x)
{
    const auto [lo, hi] = f.support();
    if (x.front() < lo || x.back() > hi) {
        return kInf;
    }
    const std::vector<double> gain = kink_gains(x, f.knots(), f.phi());
    const double range = x.back() - x.front();
    double best = 0.0;
    for (double g : gain) {
        best = std::max(best, g / range);
    }
    return best;
}

}  // namespace detail

}  // namespace shapetest
