#ifndef HOM_FITTING_HPP
#define HOM_FITTING_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hom/correlation.hpp"
#include "hom/lineshape.hpp"
#include "hom/spectrum.hpp"
#include "hom/visibility.hpp"

namespace hom
{
enum class Weighting
{
    None,
    // sigma_i = sqrt(max(count_i, 1)); data are treated as raw counts.
    Poisson,
    // sigma_i ∝ model_i, for multiplicative noise; applied by reweighting
    // passes in lineshape fits and treated as None elsewhere.
    Relative,
};

struct FitOptions
{
    int max_iterations = 200;
    double step_tolerance = 1e-10;
    Weighting weighting = Weighting::None;
    // When false a non-converged fit is returned with converged = false
    // instead of raising NotConverged.
    bool throw_on_failure = true;
};

template <typename Params>
struct FitResult
{
    Params params{};
    std::vector<std::string> parameter_names;
    Eigen::VectorXd covariance_diag;  // same order as parameter_names
    Eigen::VectorXd residuals;        // data - model
    double chi2_reduced = 0;
    bool converged = false;
    int iterations = 0;
};

struct AutocorrelationParams
{
    double background_b = 0;
    double tau_r = 0;
    // Height of the uncorrelated level; 1 for normalized g2, the mean
    // coincidence count per bin for raw histograms.
    double scale = 1;
};

struct LorentzPeak
{
    double center = 0;
    double fwhm = 0;
    double amplitude = 0;
};

// Damped Gauss-Newton (Levenberg-Marquardt) minimizer of 0.5·|r(x)|² with box
// bounds and forward-difference Jacobians.
using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresSolution
{
    Eigen::VectorXd x;
    Eigen::VectorXd residuals;
    Eigen::VectorXd covariance_diag;
    double cost = 0;
    double chi2_reduced = 0;
    int iterations = 0;
    bool converged = false;
    // Cost after each accepted step, starting with the initial cost.
    std::vector<double> cost_history;
};

LeastSquaresSolution levenberg_marquardt(const ResidualFunction& residuals, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                         const FitOptions& opts = {});

// Moment-based starting point: center at the maximum, FWHM from half-maximum
// crossings, amplitude = max - min, offset = min.
LineshapeParams<double> seed_lineshape(const Spectrum& spectrum, LineshapeKind kind);

FitResult<LineshapeParams<double>> fit_lineshape(const Spectrum& spectrum, LineshapeKind kind,
                                                 const std::optional<LineshapeParams<double>>& initial = std::nullopt,
                                                 const FitOptions& opts = {});

// Fits scale·[R ⊗ (1 - (1 - B) exp(-|tau|/tau_r))] to a normalized g2 trace or a
// raw coincidence histogram.
FitResult<AutocorrelationParams> fit_g2_auto(const CorrelationTrace<double>& hist, const DetectorResponse<double>& det,
                                             const FitOptions& opts = {});

FitResult<LorentzPeak> fit_lorentzian_peak(const VisibilityCurve<double>& curve, const FitOptions& opts = {});

} // namespace hom

#endif // HOM_FITTING_HPP
