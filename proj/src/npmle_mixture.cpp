// Support-reduction / constrained-Newton solver for scale mixtures.
//
// The mixture likelihood is maximized through the unconstrained surrogate
//   psi(w) = -(1/n) sum_i log f_w(x_i) + sum_j w_j,
// whose minimizer over w >= 0 is automatically a probability vector. Each
// iteration adds the local maxima of the directional derivative D(theta),
// takes a Newton step on the weights, and walks back into the feasible set by
// dropping atoms whose Newton weight would go negative.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "npmle_internal.hpp"
#include "shapetest/error.hpp"
#include "shapetest/format.hpp"
#include "shapetest/kernels.hpp"

namespace shapetest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneWeight = 1e-10;
constexpr std::size_t kMaxAddPerIter = 8;
constexpr std::size_t kMaxCertificatePeaks = 16;
constexpr int kRefinePoints = 16;

class Family {
public:
    virtual ~Family() = default;
    virtual double eval(double theta, double x) const = 0;
    // out[j] = sum_i c_i g(theta_j, x_i)
    virtual void scores(std::span<const double> theta, std::span<const double> x, std::span<const double> c,
                        std::span<double> out) const = 0;
    // out[i] = sum_j w_j g(theta_j, x_i)
    virtual void mixture(std::span<const double> theta, std::span<const double> w, std::span<const double> x,
                         std::span<double> out) const = 0;
    // Candidate atoms covering the admissible interval.
    virtual std::vector<double> grid(std::span<const double> x, int size) const = 0;
};

std::vector<double> log_grid(double lo, double hi, int size, bool include_lo)
{
    std::vector<double> g;
    if (!(hi > lo) || size < 2) {
        g.push_back(hi);
        return g;
    }
    const double step = std::log(hi / lo) / (size - 1);
    for (int j = include_lo ? 0 : 1; j < size; ++j) {
        g.push_back(j == size - 1 ? hi : lo * std::exp(step * j));
    }
    return g;
}

// g_a(x) = k (a - x)_+^{k-1} / a^k, atoms a in (Z_1, k Z_n].
class BetaFamily final : public Family {
public:
    explicit BetaFamily(int k) : k_(k) {}

    double eval(double a, double x) const override
    {
        const double t = 1.0 - x / a;
        if (!(t > 0.0) || x < 0.0) {
            return 0.0;
        }
        return k_ / a * std::pow(t, k_ - 1);
    }

    void scores(std::span<const double> a, std::span<const double> x, std::span<const double> c,
                std::span<double> out) const override
    {
        std::vector<double> inv(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            inv[j] = 1.0 / a[j];
        }
        kernels::truncated_power_sum(inv, x, c, k_ - 1, out);
        for (std::size_t j = 0; j < a.size(); ++j) {
            out[j] *= k_ * inv[j];
        }
    }

    void mixture(std::span<const double> a, std::span<const double> w, std::span<const double> x,
                 std::span<double> out) const override
    {
        std::vector<double> inv(a.size()), coef(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            inv[j] = 1.0 / a[j];
            coef[j] = w[j] * k_ * inv[j];
        }
        kernels::truncated_power_sum(x, inv, coef, k_ - 1, out);
    }

    std::vector<double> grid(std::span<const double> x, int size) const override
    {
        const double lo = x.front();
        const double hi = k_ * x.back();
        std::vector<double> g = log_grid(lo, hi, size, false);
        for (std::size_t i = 1; i < x.size(); ++i) {
            g.push_back(x[i]);
        }
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        return g;
    }

    // Best single kernel: maximizes sum_i log g_a(x_i) over a in (Z_n, k Z_n].
    double single_atom(std::span<const double> x) const
    {
        const double n = static_cast<double>(x.size());
        auto loglik = [&](double a) {
            double acc = n * std::log(k_ / a);
            for (double xi : x) {
                acc += (k_ - 1) * std::log1p(-xi / a);
            }
            return std::isfinite(acc) ? acc : -kInf;
        };
        const std::vector<double> g = log_grid(x.back(), k_ * x.back(), 200, false);
        std::size_t best = 0;
        std::vector<double> vals(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            vals[j] = loglik(g[j]);
            if (vals[j] > vals[best]) {
                best = j;
            }
        }
        double lo = best == 0 ? x.back() : g[best - 1];
        double hi = best + 1 == g.size() ? g[best] : g[best + 1];
        // Golden section on the bracketing cell.
        const double r = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
        double fc = loglik(c), fd = loglik(d);
        for (int it = 0; it < 80 && hi - lo > 1e-14 * hi; ++it) {
            if (fc >= fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - r * (hi - lo);
                fc = loglik(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + r * (hi - lo);
                fd = loglik(d);
            }
        }
        const double mid = 0.5 * (lo + hi);
        return loglik(mid) >= vals[best] ? mid : g[best];
    }

private:
    int k_;
};

// g_lambda(x) = lambda exp(-lambda x), rates in [1/Z_n, 1/Z_1].
class ExpFamily final : public Family {
public:
    double eval(double lambda, double x) const override { return lambda * std::exp(-lambda * x); }

    void scores(std::span<const double> lambda, std::span<const double> x, std::span<const double> c,
                std::span<double> out) const override
    {
        kernels::exp_sum(lambda, x, c, out);
        for (std::size_t j = 0; j < lambda.size(); ++j) {
            out[j] *= lambda[j];
        }
    }

    void mixture(std::span<const double> lambda, std::span<const double> w, std::span<const double> x,
                 std::span<double> out) const override
    {
        std::vector<double> coef(lambda.size());
        for (std::size_t j = 0; j < lambda.size(); ++j) {
            coef[j] = w[j] * lambda[j];
        }
        kernels::exp_sum(x, lambda, coef, out);
    }

    std::vector<double> grid(std::span<const double> x, int size) const override
    {
        return log_grid(1.0 / x.back(), 1.0 / x.front(), size, true);
    }
};

struct Peak {
    double theta;
    double d;
};

// Evaluates D on `grid`, then refines the `max_peaks` highest local maxima by
// repeated local grid passes. Returns peaks sorted by decreasing D.
std::vector<Peak> find_peaks(const Family& fam, const std::vector<double>& grid, std::span<const double> x,
                             std::span<const double> c, int passes, std::size_t max_peaks)
{
    std::vector<double> d(grid.size());
    fam.scores(grid, x, c, d);
    for (double& v : d) {
        v -= 1.0;
    }

    std::vector<std::size_t> local;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const bool left = j == 0 || d[j] >= d[j - 1];
        const bool right = j + 1 == grid.size() || d[j] > d[j + 1];
        if (left && right) {
            local.push_back(j);
        }
    }
    std::sort(local.begin(), local.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    if (local.size() > max_peaks) {
        local.resize(max_peaks);
    }

    std::vector<Peak> peaks;
    std::vector<double> pts(kRefinePoints + 1), vals(kRefinePoints + 1);
    for (std::size_t j : local) {
        Peak best{grid[j], d[j]};
        double lo = j == 0 ? grid[j] : grid[j - 1];
        double hi = j + 1 == grid.size() ? grid[j] : grid[j + 1];
        for (int pass = 0; pass < passes && hi > lo; ++pass) {
            const double step = (hi - lo) / kRefinePoints;
            for (int m = 0; m <= kRefinePoints; ++m) {
                pts[m] = m == kRefinePoints ? hi : lo + step * m;
            }
            fam.scores(pts, x, c, vals);
            int arg = 0;
            for (int m = 1; m <= kRefinePoints; ++m) {
                if (vals[m] > vals[arg]) {
                    arg = m;
                }
            }
            if (vals[arg] - 1.0 > best.d) {
                best = {pts[arg], vals[arg] - 1.0};
            }
            const double new_lo = pts[std::max(arg - 1, 0)];
            const double new_hi = pts[std::min(arg + 1, kRefinePoints)];
            lo = new_lo;
            hi = new_hi;
        }
        peaks.push_back(best);
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.d > b.d; });
    return peaks;
}

double certificate(const Family& fam, std::span<const double> theta, std::span<const double> w,
                   std::span<const double> x, const SolverConfig& cfg)
{
    const std::size_t n = x.size();
    std::vector<double> f(n), c(n);
    fam.mixture(theta, w, x, f);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(f[i] > 0.0)) {
            return kInf;
        }
        c[i] = 1.0 / (static_cast<double>(n) * f[i]);
    }
    const std::vector<double> grid = fam.grid(x, 4 * cfg.grid_size);
    const auto peaks = find_peaks(fam, grid, x, c, cfg.grid_refinements + 2, kMaxCertificatePeaks);
    return peaks.empty() ? 0.0 : std::max(0.0, peaks.front().d);
}

struct MixtureFit {
    std::vector<double> theta;
    std::vector<double> weights;
    FitReport report;
};

double objective(std::span<const double> f, double wsum)
{
    for (double v : f) {
        if (!(v > 0.0)) {
            return kInf;
        }
    }
    return -kernels::sum_log(f) / static_cast<double>(f.size()) + wsum;
}

MixtureFit solve_mixture(const Family& fam, std::span<const double> x, double theta0, const SolverConfig& cfg)
{
    cfg.validate();
    const std::size_t n = x.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const std::vector<double> grid = fam.grid(x, cfg.grid_size);

    std::vector<double> theta{theta0};
    std::vector<double> w{1.0};
    std::vector<double> f(n), c(n), fnew(n);

    auto refresh = [&] {
        fam.mixture(theta, w, x, f);
        for (std::size_t i = 0; i < n; ++i) {
            c[i] = inv_n / f[i];
        }
    };

    FitReport report;
    double gap = kInf;
    int iter = 0;
    int stalled = 0;
    refresh();
    for (; iter < cfg.max_iter; ++iter) {
        std::vector<Peak> peaks = find_peaks(fam, grid, x, c, cfg.grid_refinements, kMaxAddPerIter);
        double working = peaks.empty() ? 0.0 : peaks.front().d;
        if (working <= cfg.tol_gap) {
            // Working grid is satisfied: audit on the normalized mixture.
            const double total = std::accumulate(w.begin(), w.end(), 0.0);
            for (double& v : w) {
                v /= total;
            }
            refresh();
            gap = certificate(fam, theta, w, x, cfg);
            if (gap <= cfg.tol_gap) {
                break;
            }
            const std::vector<double> fine = fam.grid(x, 4 * cfg.grid_size);
            peaks = find_peaks(fam, fine, x, c, cfg.grid_refinements + 2, kMaxAddPerIter);
        }

        // Add improving atoms with zero weight.
        for (const Peak& p : peaks) {
            if (p.d <= 0.0) {
                continue;
            }
            const bool dup = std::any_of(theta.begin(), theta.end(),
                                         [&](double t) { return std::abs(t - p.theta) <= 1e-12 * t; });
            if (!dup) {
                theta.push_back(p.theta);
                w.push_back(0.0);
            }
        }

        const std::size_t m = theta.size();
        Eigen::MatrixXd G(n, m);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fam.eval(theta[j], x[i]);
            }
        }
        Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(n));
        const Eigen::MatrixXd Gs = G.array().colwise() / fv.array();
        const Eigen::MatrixXd H = inv_n * (Gs.transpose() * Gs);
        const Eigen::VectorXd d = inv_n * Gs.colwise().sum().transpose();  // (1/n) sum g/f
        const Eigen::VectorXd b = 2.0 * d - Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m));
        const Eigen::VectorXd w0 = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(m));

        // Support reduction: shrink the active set until the Newton point is
        // nonnegative, moving the iterate to the boundary at each drop.
        std::vector<std::size_t> active(m);
        std::iota(active.begin(), active.end(), 0);
        Eigen::VectorXd cur = w0;
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
        bool ok = false;
        while (!active.empty()) {
            const auto a = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd Ha(a, a);
            Eigen::VectorXd ba(a);
            for (Eigen::Index p = 0; p < a; ++p) {
                ba(p) = b(static_cast<Eigen::Index>(active[p]));
                for (Eigen::Index q = 0; q < a; ++q) {
                    Ha(p, q) = H(static_cast<Eigen::Index>(active[p]), static_cast<Eigen::Index>(active[q]));
                }
            }
            Ha.diagonal().array() += 1e-13 * Ha.diagonal().maxCoeff();
            const Eigen::VectorXd sol = Ha.ldlt().solve(ba);
            if (!sol.allFinite()) {
                break;
            }
            beta.setZero();
            for (Eigen::Index p = 0; p < a; ++p) {
                beta(static_cast<Eigen::Index>(active[p])) = sol(p);
            }
            if (sol.minCoeff() >= 0.0) {
                ok = true;
                break;
            }
            double tstar = kInf;
            std::size_t drop = 0;
            for (Eigen::Index p = 0; p < a; ++p) {
                const auto j = static_cast<Eigen::Index>(active[p]);
                if (beta(j) < 0.0) {
                    const double t = cur(j) / (cur(j) - beta(j));
                    if (t < tstar) {
                        tstar = t;
                        drop = static_cast<std::size_t>(p);
                    }
                }
            }
            cur += tstar * (beta - cur);
            cur(static_cast<Eigen::Index>(active[drop])) = 0.0;
            for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) {
                cur(j) = std::max(cur(j), 0.0);
            }
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        }
        if (!ok) {
            beta = cur;
        }

        // Armijo backtracking along beta - w0 on the true objective.
        const double psi0 = objective(f, w0.sum());
        const Eigen::VectorXd dir = beta - w0;
        const double slope = (Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)) - d).dot(dir);
        bool moved = false;
        if (slope < 0.0) {
            double step = 1.0;
            for (int h = 0; h < 50; ++h, step *= 0.5) {
                const Eigen::VectorXd trial = w0 + step * dir;
                Eigen::Map<Eigen::VectorXd>(fnew.data(), static_cast<Eigen::Index>(n)) = G * trial;
                const double psi = objective(fnew, trial.sum());
                if (psi <= psi0 + 1e-4 * step * slope) {
                    for (std::size_t j = 0; j < m; ++j) {
                        w[j] = std::max(trial(static_cast<Eigen::Index>(j)), 0.0);
                    }
                    moved = psi < psi0;
                    break;
                }
            }
        }
        stalled = moved ? 0 : stalled + 1;

        // Drop atoms that left the support.
        std::size_t keep = 0;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            if (w[j] > 0.0) {
                theta[keep] = theta[j];
                w[keep] = w[j];
                ++keep;
            }
        }
        theta.resize(keep);
        w.resize(keep);
        refresh();
        if (stalled >= 3) {
            break;
        }
    }

    // Final cleanup: sort, merge coincident atoms, prune, normalize.
    std::vector<std::size_t> order(theta.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return theta[a] < theta[b]; });
    MixtureFit out;
    for (std::size_t j : order) {
        if (!out.theta.empty() && out.theta.back() == theta[j]) {
            out.weights.back() += w[j];
        } else {
            out.theta.push_back(theta[j]);
            out.weights.push_back(w[j]);
        }
    }
    const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    std::size_t keep = 0;
    for (std::size_t j = 0; j < out.theta.size(); ++j) {
        if (out.weights[j] / total >= kPruneWeight) {
            out.theta[keep] = out.theta[j];
            out.weights[keep] = out.weights[j];
            ++keep;
        }
    }
    out.theta.resize(keep);
    out.weights.resize(keep);
    const double kept = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    for (double& v : out.weights) {
        v /= kept;
    }

    fam.mixture(out.theta, out.weights, x, f);
    out.report.loglik = kernels::sum_log(f);
    out.report.iterations = iter;
    out.report.optimality_gap = certificate(fam, out.theta, out.weights, x, cfg);
    out.report.converged = out.report.optimality_gap <= cfg.tol_gap;
    out.report.support_size = out.theta.size();
    return out;
}

void require_positive(const SortedSample& s)
{
    if (!(s.front() > 0.0)) {
        throw Error(ErrorCode::NonPositiveObservation,
                    "observations must be positive for this class (smallest is " + format_double(s.front()) + ")", 0);
    }
}

void require_zero_tau(const SortedSample& s)
{
    if (s.tau() && *s.tau() != 0.0) {
        throw Error(ErrorCode::InvalidClassTauCombination, "mixture classes live on (0, inf); tau must be 0");
    }
}

}  // namespace

Fit<BetaKernelMixture> fit_k_monotone(const SortedSample& s, int k, const SolverConfig& cfg)
{
    if (k < 2) {
        throw Error(ErrorCode::InvalidArgument, "k-monotone fits need k >= 2; use the Grenander estimator for k = 1");
    }
    require_positive(s);
    require_zero_tau(s);
    const BetaFamily fam(k);
    MixtureFit m = solve_mixture(fam, s.z(), fam.single_atom(s.z()), cfg);
    return {BetaKernelMixture(k, std::move(m.theta), std::move(m.weights)), m.report};
}

Fit<ExpMixture> fit_completely_monotone(const SortedSample& s, const SolverConfig& cfg)
{
    require_positive(s);
    require_zero_tau(s);
    const auto z = s.z();
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
    const double rate = std::clamp(1.0 / mean, 1.0 / z.back(), 1.0 / z.front());
    MixtureFit m = solve_mixture(ExpFamily{}, z, rate, cfg);
    return {ExpMixture(std::move(m.theta), std::move(m.weights)), m.report};
}

namespace detail {

double beta_mixture_gap(const BetaKernelMixture& f, std::span<const double> x, const SolverConfig& cfg)
{
    return certificate(BetaFamily(f.k()), f.support_points(), f.weights(), x, cfg);
}

double exp_mixture_gap(const ExpMixture& f, std::span<const double> x, const SolverConfig& cfg)
{
    return certificate(ExpFamily{}, f.rates(), f.weights(), x, cfg);
}

}  // namespace detail

}  // namespace shapetest
