#include "hom/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace hom
{
namespace
{
constexpr int kRelativeWeightPasses = 3;

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)
{
    return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::MatrixXd forward_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x, const Eigen::VectorXd& r0,
                                 const Eigen::VectorXd& upper)
{
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double h = 1e-6 * std::max(std::abs(x(j)), 1.0);
        if (x(j) + h > upper(j))
            h = -h;
        Eigen::VectorXd xp = x;
        xp(j) += h;
        jac.col(j) = (f(xp) - r0) / h;
    }
    return jac;
}

Eigen::VectorXd covariance_diagonal(const Eigen::MatrixXd& jac, double sigma2)
{
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    if (!lu.isInvertible())
        return Eigen::VectorXd::Constant(jac.cols(), std::numeric_limits<double>::infinity());
    return sigma2 * lu.inverse().diagonal();
}

void finish(const LeastSquaresSolution& sol, const FitOptions& opts)
{
    if (!sol.converged && opts.throw_on_failure)
        fail(ErrorCode::NotConverged,
             "least-squares fit did not converge within " + std::to_string(opts.max_iterations) + " iterations");
}

// First crossings of `level` on each side of `peak`, linearly interpolated.
std::optional<std::pair<double, double>> half_level_crossings(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                                              Eigen::Index peak, double level)
{
    auto walk = [&](Eigen::Index dir) -> std::optional<double> {
        for (Eigen::Index i = peak; i + dir >= 0 && i + dir < x.size(); i += dir) {
            if (y(i + dir) <= level) {
                const double t = (y(i) - level) / (y(i) - y(i + dir));
                return x(i) + t * (x(i + dir) - x(i));
            }
        }
        return std::nullopt;
    };
    const auto lo = walk(-1);
    const auto hi = walk(1);
    if (!lo || !hi)
        return std::nullopt;
    return std::make_pair(*lo, *hi);
}

} // namespace

LeastSquaresSolution levenberg_marquardt(const ResidualFunction& residuals, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                         const FitOptions& opts)
{
    require(lower.size() == x0.size() && upper.size() == x0.size(), ErrorCode::InvalidArgument,
            "bounds must match the parameter count");
    LeastSquaresSolution sol;
    sol.x = clamp(x0, lower, upper);
    sol.residuals = residuals(sol.x);
    require(sol.residuals.size() > 0, ErrorCode::InvalidArgument, "empty residual vector");
    require(sol.residuals.allFinite(), ErrorCode::NonFinite, "residuals are not finite at the starting point");
    sol.cost = 0.5 * sol.residuals.squaredNorm();
    sol.cost_history.push_back(sol.cost);

    double lambda = 1e-3;
    const double tol = opts.step_tolerance;
    Eigen::MatrixXd jac;
    for (int iter = 1; iter <= opts.max_iterations && !sol.converged; ++iter) {
        sol.iterations = iter;
        if (sol.cost == 0) {
            sol.converged = true;
            break;
        }
        jac = forward_jacobian(residuals, sol.x, sol.residuals, upper);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * sol.residuals;
        Eigen::VectorXd diag = normal.diagonal();
        const double floor = std::max(diag.maxCoeff() * 1e-12, std::numeric_limits<double>::min());
        diag = diag.cwiseMax(floor);

        // Parameters pinned at a bound with the descent direction pointing
        // outward are held fixed for this iteration.
        Eigen::Array<bool, Eigen::Dynamic, 1> pinned(sol.x.size());
        for (Eigen::Index j = 0; j < sol.x.size(); ++j)
            pinned(j) = (sol.x(j) <= lower(j) && grad(j) > 0) || (sol.x(j) >= upper(j) && grad(j) < 0);

        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += lambda * diag;
            Eigen::VectorXd rhs = -grad;
            for (Eigen::Index j = 0; j < sol.x.size(); ++j) {
                if (pinned(j)) {
                    damped.row(j).setZero();
                    damped.col(j).setZero();
                    damped(j, j) = 1;
                    rhs(j) = 0;
                }
            }
            const Eigen::VectorXd delta = damped.ldlt().solve(rhs);
            const Eigen::VectorXd x_new = clamp(sol.x + delta, lower, upper);
            const Eigen::VectorXd step = x_new - sol.x;
            if (!step.allFinite() || step.norm() <= tol * (sol.x.norm() + tol)) {
                sol.converged = true;
                break;
            }
            const Eigen::VectorXd r_new = residuals(x_new);
            const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm() : std::numeric_limits<double>::infinity();
            if (cost_new < sol.cost) {
                sol.x = x_new;
                sol.residuals = r_new;
                sol.cost = cost_new;
                sol.cost_history.push_back(cost_new);
                lambda = std::max(lambda / 10, 1e-15);
                accepted = true;
            } else {
                lambda *= 10;
                if (lambda > 1e20) {
                    // No descent direction left at working precision.
                    sol.converged = true;
                    break;
                }
            }
        }
    }

    const Eigen::Index dof = std::max<Eigen::Index>(sol.residuals.size() - sol.x.size(), 1);
    sol.chi2_reduced = 2 * sol.cost / double(dof);
    jac = forward_jacobian(residuals, sol.x, sol.residuals, upper);
    sol.covariance_diag = covariance_diagonal(jac, sol.chi2_reduced);
    return sol;
}

LineshapeParams<double> seed_lineshape(const Spectrum& spectrum, LineshapeKind kind)
{
    spectrum.validate();
    Eigen::Index peak = 0;
    const double top = spectrum.intensities.maxCoeff(&peak);
    const double bottom = spectrum.intensities.minCoeff();
    if (!(top - bottom > 1e-12 * std::max(std::abs(top), 1e-300)))
        fail(ErrorCode::DegenerateData, "spectrum is flat");

    const double level = bottom + (top - bottom) / 2;
    double fwhm = 2 * spectrum.step();
    if (const auto cross = half_level_crossings(spectrum.energies, spectrum.intensities, peak, level))
        fwhm = std::max(cross->second - cross->first, fwhm);
    else
        fwhm = std::max(spectrum.span() / 3, fwhm);

    LineshapeParams<double> p;
    p.kind = kind;
    p.center = spectrum.energies(peak);
    p.amplitude = top - bottom;
    p.offset = bottom;
    switch (kind) {
    case LineshapeKind::Lorentzian: p.lorentzian_fwhm = fwhm; break;
    case LineshapeKind::Gaussian: p.gaussian_fwhm = fwhm; break;
    case LineshapeKind::Voigt:
        // Equal components give a Voigt FWHM of about 1.6145 times each width.
        p.lorentzian_fwhm = fwhm / 1.6145;
        p.gaussian_fwhm = fwhm / 1.6145;
        break;
    }
    return p;
}

FitResult<LineshapeParams<double>> fit_lineshape(const Spectrum& spectrum, LineshapeKind kind,
                                                 const std::optional<LineshapeParams<double>>& initial,
                                                 const FitOptions& opts)
{
    spectrum.validate();
    const LineshapeParams<double> seed = seed_lineshape(spectrum, kind);
    LineshapeParams<double> start = initial.value_or(seed);
    start.kind = kind;
    if (spectrum.span() < 3 * profile_fwhm(seed))
        fail(ErrorCode::InvalidArgument, "spectrum must span at least 3 estimated FWHM");

    // Centre is fitted relative to the seed so that the finite-difference step
    // stays small compared with the linewidth even for absolute energies.
    const double origin = start.center;
    const Eigen::VectorXd x = spectrum.energies.array() - origin;
    const bool is_voigt = kind == LineshapeKind::Voigt;
    const Eigen::Index n = is_voigt ? 5 : 4;
    const double width_floor = 1e-9 * profile_fwhm(seed);

    Eigen::VectorXd p0(n), lower(n), upper(n);
    const double inf = std::numeric_limits<double>::infinity();
    if (is_voigt) {
        p0 << start.center - origin, std::max(start.lorentzian_fwhm, width_floor),
            std::max(start.gaussian_fwhm, width_floor), start.amplitude, std::max(start.offset, 0.0);
        lower << -inf, width_floor, width_floor, 0, 0;
        upper << inf, inf, inf, inf, inf;
    } else {
        const double w = kind == LineshapeKind::Lorentzian ? start.lorentzian_fwhm : start.gaussian_fwhm;
        p0 << start.center - origin, std::max(w, width_floor), start.amplitude, std::max(start.offset, 0.0);
        lower << -inf, width_floor, 0, 0;
        upper << inf, inf, inf, inf;
    }

    auto unpack = [&](const Eigen::VectorXd& p) {
        LineshapeParams<double> out;
        out.kind = kind;
        out.center = p(0);
        if (is_voigt) {
            out.lorentzian_fwhm = p(1);
            out.gaussian_fwhm = p(2);
        } else if (kind == LineshapeKind::Lorentzian) {
            out.lorentzian_fwhm = p(1);
        } else {
            out.gaussian_fwhm = p(1);
        }
        out.amplitude = p(n - 2);
        out.offset = p(n - 1);
        return out;
    };
    auto model = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        const LineshapeParams<double> shape = unpack(p);
        Eigen::VectorXd m(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double dx = x(i) - shape.center;
            double v = 0;
            if (is_voigt)
                v = eval_voigt(dx, voigt(0.0, shape.lorentzian_fwhm, shape.gaussian_fwhm));
            else if (kind == LineshapeKind::Lorentzian)
                v = detail::lorentzian_shape(dx, shape.lorentzian_fwhm);
            else
                v = detail::gaussian_shape(dx, shape.gaussian_fwhm);
            m(i) = shape.amplitude * v + shape.offset;
        }
        return m;
    };
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(x.size());
    if (opts.weighting == Weighting::Poisson)
        weights = spectrum.intensities.cwiseMax(1.0).cwiseSqrt().cwiseInverse();

    auto solve = [&](const Eigen::VectorXd& start) {
        return levenberg_marquardt(
            [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
                return (model(p) - spectrum.intensities).cwiseProduct(weights);
            },
            start, lower, upper, opts);
    };
    auto sol = solve(p0);
    int iterations = sol.iterations;
    if (opts.weighting == Weighting::Relative) {
        // Iteratively reweighted: sigma_i ∝ model_i from the previous pass.
        for (int pass = 0; pass < kRelativeWeightPasses && sol.converged; ++pass) {
            const Eigen::VectorXd m = model(sol.x);
            const double floor = 1e-6 * m.cwiseAbs().maxCoeff();
            weights = m.cwiseAbs().cwiseMax(floor).cwiseInverse();
            sol = solve(sol.x);
            iterations += sol.iterations;
        }
    }
    finish(sol, opts);

    FitResult<LineshapeParams<double>> result;
    result.params = unpack(sol.x);
    result.params.center += origin;
    result.parameter_names = is_voigt ? std::vector<std::string>{"center", "lorentzian_fwhm", "gaussian_fwhm",
                                                                 "amplitude", "offset"}
                                      : std::vector<std::string>{"center",
                                                                 kind == LineshapeKind::Lorentzian ? "lorentzian_fwhm"
                                                                                                   : "gaussian_fwhm",
                                                                 "amplitude", "offset"};
    result.covariance_diag = sol.covariance_diag;
    result.residuals = spectrum.intensities - model(sol.x);
    result.chi2_reduced = sol.chi2_reduced;
    result.converged = sol.converged;
    result.iterations = iterations;
    return result;
}

FitResult<AutocorrelationParams> fit_g2_auto(const CorrelationTrace<double>& hist, const DetectorResponse<double>& det,
                                             const FitOptions& opts)
{
    hist.validate();
    check_convolution_grid(hist, det);
    const Eigen::VectorXd& y = hist.values;
    const Eigen::Index zero = hist.zero_index();
    const double half_span = hist.half_span();

    // Seeds from the plateau level, the dip depth and the half-recovery delay.
    double plateau_sum = 0;
    int plateau_n = 0;
    for (Eigen::Index i = 0; i < hist.size(); ++i) {
        if (std::abs(hist.taus(i)) >= half_span / 2) {
            plateau_sum += y(i);
            ++plateau_n;
        }
    }
    const double scale0 = plateau_sum / std::max(plateau_n, 1);
    if (!(scale0 > 0) || (y.maxCoeff() - y.minCoeff()) <= 1e-12 * scale0)
        fail(ErrorCode::DegenerateData, "correlation trace is flat or empty");
    const double dip = std::clamp(y(zero) / scale0, 0.0, 1.0);
    double tau_r0 = half_span / 10;
    const double level = scale0 * (1 + dip) / 2;
    for (Eigen::Index i = zero; i < hist.size(); ++i) {
        if (y(i) >= level) {
            tau_r0 = std::max(hist.taus(i), hist.step()) / std::log(2.0);
            break;
        }
    }

    const DetectorResponse<double> response = det;
    const Eigen::VectorXd kernel = gaussian_kernel(response, hist.step());
    auto model = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        EmitterModel<double> src;
        src.background_b = p(0);
        src.tau_r = p(1);
        Eigen::VectorXd ideal = hist.taus.unaryExpr([&](double tau) { return g2_auto_ideal(tau, src); });
        Eigen::VectorXd out(ideal.size());
        for (Eigen::Index i = 0; i < ideal.size(); ++i)
            out(i) = p(2) * detail::convolve_at(ideal, kernel, i);
        return out;
    };
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(y.size());
    if (opts.weighting == Weighting::Poisson)
        weights = y.cwiseMax(1.0).cwiseSqrt().cwiseInverse();

    constexpr double tau_floor = 1e-9;
    Eigen::VectorXd p0(3), lower(3), upper(3);
    p0 << std::clamp(dip * 0.5, 0.0, 1.0), tau_r0, scale0;
    lower << 0, tau_floor, 0;
    upper << 1, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity();

    const auto sol = levenberg_marquardt(
        [&](const Eigen::VectorXd& p) -> Eigen::VectorXd { return (model(p) - y).cwiseProduct(weights); }, p0, lower,
        upper, opts);
    finish(sol, opts);
    if (sol.x(1) <= 1e3 * tau_floor)
        fail(ErrorCode::NonPhysical, "fitted radiative lifetime is not positive");

    FitResult<AutocorrelationParams> result;
    result.params = {sol.x(0), sol.x(1), sol.x(2)};
    result.parameter_names = {"background_b", "tau_r_ps", "scale"};
    result.covariance_diag = sol.covariance_diag;
    result.residuals = y - model(sol.x);
    result.chi2_reduced = sol.chi2_reduced;
    result.converged = sol.converged;
    result.iterations = sol.iterations;
    return result;
}

FitResult<LorentzPeak> fit_lorentzian_peak(const VisibilityCurve<double>& curve, const FitOptions& opts)
{
    curve.validate();
    require(curve.size() >= 8, ErrorCode::InvalidArgument, "peak fit needs at least 8 points");
    Eigen::Index peak = 0;
    const double top = curve.visibilities.maxCoeff(&peak);
    if (peak == 0 || peak == curve.size() - 1 || !(top > 0))
        fail(ErrorCode::NoPeak, "curve has no interior maximum");

    const Eigen::VectorXd& x = curve.detunings;
    const Eigen::VectorXd& y = curve.visibilities;
    const double step = (x(x.size() - 1) - x(0)) / double(x.size() - 1);
    double fwhm0 = (x(x.size() - 1) - x(0)) / 3;
    if (const auto cross = half_level_crossings(x, y, peak, top / 2))
        fwhm0 = std::max(cross->second - cross->first, step);

    const double origin = x(peak);
    auto model = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
        return (x.array() - origin).unaryExpr([&](double dx) { return p(2) * detail::lorentzian_shape(dx - p(0), p(1)); });
    };
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd p0(3), lower(3), upper(3);
    p0 << 0, fwhm0, top;
    lower << -inf, 1e-9 * fwhm0, 0;
    upper << inf, inf, inf;

    const auto sol = levenberg_marquardt(
        [&](const Eigen::VectorXd& p) -> Eigen::VectorXd { return model(p) - y; }, p0, lower, upper, opts);
    finish(sol, opts);

    FitResult<LorentzPeak> result;
    result.params = {sol.x(0) + origin, sol.x(1), sol.x(2)};
    result.parameter_names = {"center", "fwhm", "amplitude"};
    result.covariance_diag = sol.covariance_diag;
    result.residuals = y - model(sol.x);
    result.chi2_reduced = sol.chi2_reduced;
    result.converged = sol.converged;
    result.iterations = sol.iterations;
    return result;
}

} // namespace hom
