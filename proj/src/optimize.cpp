#include "betssm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace betssm {

std::string to_string(OptimStatus s) {
    switch (s) {
        case OptimStatus::Converged: return "converged";
        case OptimStatus::MaxIterations: return "max_iterations";
        case OptimStatus::LineSearchFailed: return "line_search_failed";
        case OptimStatus::InvalidStart: return "invalid_start";
    }
    return "unknown";
}

namespace {

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

struct Trial {
    double alpha = 0.0;
    ObjectiveValue f;
    double slope = 0.0;
    bool finite() const { return std::isfinite(f.value); }
};

class LineSearch {
public:
    LineSearch(const Objective& objective, const Eigen::VectorXd& x, const Eigen::VectorXd& d,
               double f0, double slope0, int& evaluations)
        : objective_(objective), x_(x), d_(d), f0_(f0), slope0_(slope0), evaluations_(evaluations) {}

    // Returns the accepted trial, or nothing if no point with sufficient
    // decrease was found.
    std::optional<Trial> run(double alpha_init) {
        Trial prev{0.0, {f0_, {}}, slope0_};
        double alpha = alpha_init;
        for (int i = 0; i < 40; ++i) {
            Trial cur = evaluate(alpha);
            if (!cur.finite()) {
                alpha = prev.alpha + 0.25 * (alpha - prev.alpha);
                continue;
            }
            if (cur.f.value > f0_ + kC1 * alpha * slope0_ || (i > 0 && cur.f.value >= prev.f.value))
                return zoom(prev, cur);
            if (std::abs(cur.slope) <= -kC2 * slope0_) return cur;
            if (cur.slope >= 0.0) return zoom(cur, prev);
            remember(cur);
            prev = cur;
            alpha *= 2.0;
        }
        return best_;
    }

private:
    Trial evaluate(double alpha) {
        Trial t;
        t.alpha = alpha;
        t.f = objective_(x_ + alpha * d_);
        ++evaluations_;
        t.slope = std::isfinite(t.f.value) ? t.f.gradient.dot(d_) : 0.0;
        return t;
    }

    void remember(const Trial& t) {
        if (t.finite() && t.f.value <= f0_ + kC1 * t.alpha * slope0_ &&
            (!best_ || t.f.value < best_->f.value))
            best_ = t;
    }

    std::optional<Trial> zoom(Trial lo, Trial hi) {
        for (int i = 0; i < 40; ++i) {
            const double a = lo.alpha, b = hi.alpha;
            double alpha = 0.5 * (a + b);
            if (hi.finite()) {
                // Minimiser of the cubic through both end points.
                const double d1 = lo.slope + hi.slope - 3.0 * (lo.f.value - hi.f.value) / (a - b);
                const double disc = d1 * d1 - lo.slope * hi.slope;
                if (disc >= 0.0) {
                    const double d2 = std::copysign(std::sqrt(disc), b - a);
                    const double cand = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
                    if (std::isfinite(cand)) alpha = cand;
                }
            }
            const double lo_b = std::min(a, b), hi_b = std::max(a, b), w = hi_b - lo_b;
            alpha = std::clamp(alpha, lo_b + 0.1 * w, hi_b - 0.1 * w);
            if (w < 1e-14 * std::max(1.0, hi_b)) break;
            Trial cur = evaluate(alpha);
            if (!cur.finite() || cur.f.value > f0_ + kC1 * alpha * slope0_ || cur.f.value >= lo.f.value) {
                hi = cur;
                if (!cur.finite()) hi.f.value = std::numeric_limits<double>::infinity();
                continue;
            }
            remember(cur);
            if (std::abs(cur.slope) <= -kC2 * slope0_) return cur;
            if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = cur;
        }
        return best_;
    }

    const Objective& objective_;
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& d_;
    double f0_;
    double slope0_;
    int& evaluations_;
    std::optional<Trial> best_;
};

double relative_gradient(const ObjectiveValue& f) {
    return f.gradient.cwiseAbs().maxCoeff() / std::max(1.0, std::abs(f.value));
}

}  // namespace

OptimResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0,
                          const OptimOptions& options,
                          const std::optional<Eigen::MatrixXd>& initial_inverse_hessian) {
    const int n = static_cast<int>(x0.size());
    OptimResult res;
    res.x = x0;
    ObjectiveValue f = objective(x0);
    res.evaluations = 1;
    if (!std::isfinite(f.value)) {
        res.value = f.value;
        res.status = OptimStatus::InvalidStart;
        return res;
    }
    const bool have_h0 = initial_inverse_hessian.has_value();
    const Eigen::MatrixXd H0 = have_h0 ? *initial_inverse_hessian : Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd H = H0;
    bool fresh = true;  // H equals H0 (no curvature pairs yet)

    Eigen::VectorXd x = x0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        if (relative_gradient(f) <= options.gradient_tolerance) {
            res.status = OptimStatus::Converged;
            break;
        }
        Eigen::VectorXd d = -H * f.gradient;
        double slope = f.gradient.dot(d);
        if (!(slope < 0.0)) {
            H = H0;
            fresh = true;
            d = -H * f.gradient;
            slope = f.gradient.dot(d);
        }
        double alpha0 = 1.0;
        if (fresh && !have_h0) alpha0 = std::min(1.0, 1.0 / f.gradient.cwiseAbs().maxCoeff());
        LineSearch ls(objective, x, d, f.value, slope, res.evaluations);
        std::optional<Trial> step = ls.run(alpha0);
        if (!step) {
            if (!fresh) {
                H = H0;
                fresh = true;
                --iter;
                continue;
            }
            res.status = OptimStatus::LineSearchFailed;
            break;
        }
        const Eigen::VectorXd s = step->alpha * d;
        const Eigen::VectorXd y = step->f.gradient - f.gradient;
        x += s;
        f = step->f;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh && !have_h0) H *= sy / y.squaredNorm();
            const double rho = 1.0 / sy;
            const Eigen::VectorXd Hy = H * y;
            // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            H += rho * ((1.0 + rho * y.dot(Hy)) * (s * s.transpose()) - (Hy * s.transpose()) -
                        (s * Hy.transpose()));
            fresh = false;
        }
    }
    if (iter >= options.max_iterations && res.status != OptimStatus::Converged) {
        res.status = relative_gradient(f) <= options.gradient_tolerance ? OptimStatus::Converged
                                                                        : OptimStatus::MaxIterations;
    }
    res.x = x;
    res.value = f.value;
    res.gradient = f.gradient;
    res.iterations = iter;
    res.gradient_norm = f.gradient.cwiseAbs().maxCoeff();
    return res;
}

Eigen::MatrixXd finite_difference_hessian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
    const Eigen::VectorXd& x, double relative_step) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd H(n, n);
    for (int k = 0; k < n; ++k) {
        const double h = relative_step * std::max(1.0, std::abs(x[k]));
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        H.col(k) = (gradient(xp) - gradient(xm)) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
}

Eigen::MatrixXd positive_definite_inverse(const Eigen::MatrixXd& H, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    const double top = std::max(ev.maxCoeff(), 1e-300);
    for (int i = 0; i < ev.size(); ++i) ev[i] = 1.0 / std::max(ev[i], floor * top);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace betssm
