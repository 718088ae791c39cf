#ifndef HOM_VISIBILITY_HPP
#define HOM_VISIBILITY_HPP

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "hom/correlation.hpp"
#include "hom/error.hpp"

namespace hom
{
// Below this orthogonal-polarization level the visibility ratio is undefined;
// such points are reported as 0 and flagged.
inline constexpr double kVisibilityFloor = 1e-9;

template <typename Scalar>
struct VisibilityTrace
{
    Vector<Scalar> taus;
    Vector<Scalar> values;
    Eigen::Array<bool, Eigen::Dynamic, 1> flagged;
};

template <typename Scalar>
struct VisibilityCurve
{
    Vector<Scalar> detunings;   // µeV
    Vector<Scalar> visibilities;

    Eigen::Index size() const { return detunings.size(); }

    void validate() const
    {
        require(detunings.size() == visibilities.size(), ErrorCode::InvalidArgument,
                "visibility curve arrays differ in length");
        for (Eigen::Index i = 0; i < detunings.size(); ++i) {
            require(std::isfinite(detunings(i)) && std::isfinite(visibilities(i)), ErrorCode::NonFinite,
                    "visibility curve contains non-finite values");
            if (i > 0)
                require(detunings(i) > detunings(i - 1), ErrorCode::InvalidArgument,
                        "detunings must be strictly increasing");
        }
    }
};

// V(tau) = (g2_perp - g2_par) / g2_perp.
template <typename Scalar>
VisibilityTrace<Scalar> visibility_trace(const CorrelationTrace<Scalar>& perp, const CorrelationTrace<Scalar>& para)
{
    if (perp.taus.size() != para.taus.size() || perp.taus != para.taus)
        fail(ErrorCode::GridMismatch, "orthogonal and parallel traces are on different grids");
    VisibilityTrace<Scalar> out{perp.taus, Vector<Scalar>(perp.size()),
                                Eigen::Array<bool, Eigen::Dynamic, 1>(perp.size())};
    for (Eigen::Index i = 0; i < perp.size(); ++i) {
        const bool flag = perp.values(i) < Scalar(kVisibilityFloor);
        out.flagged(i) = flag;
        out.values(i) = flag ? Scalar(0) : (perp.values(i) - para.values(i)) / perp.values(i);
    }
    return out;
}

template <typename Scalar>
struct PostselectOptions
{
    bool convolved = true;
    // Full width of the coincidence window centred on tau = 0 (ps); 0 selects
    // the single tau = 0 sample.
    Scalar window = 0;
    Vector<Scalar> taus = default_delay_grid<Scalar>();
};

// Zero-delay visibility from orthogonal and parallel cross-correlations.
template <typename Scalar>
Scalar postselected_visibility(const EmitterModel<Scalar>& a, const EmitterModel<Scalar>& b,
                               const BeamsplitterModel<Scalar>& bs, Scalar detuning,
                               const DetectorResponse<Scalar>& det, const PostselectOptions<Scalar>& opts = {})
{
    require(std::isfinite(opts.window) && opts.window >= 0, ErrorCode::InvalidArgument,
            "coincidence window must be non-negative");
    const auto perp = g2_cross_ideal_trace(a, b, bs.with(Polarization::Orthogonal), detuning, opts.taus);
    const auto para = g2_cross_ideal_trace(a, b, bs.with(Polarization::Parallel), detuning, opts.taus);
    const Eigen::Index zero = perp.zero_index();
    const Eigen::Index reach = static_cast<Eigen::Index>(std::floor(opts.window / 2 / perp.step() + 1e-9));
    require(reach < zero, ErrorCode::InvalidArgument, "coincidence window exceeds the delay grid");

    Vector<Scalar> kernel;
    if (opts.convolved) {
        check_convolution_grid(perp, det);
        kernel = gaussian_kernel(det, perp.step());
    }
    Scalar sum_perp = 0;
    Scalar sum_para = 0;
    for (Eigen::Index i = zero - reach; i <= zero + reach; ++i) {
        sum_perp += opts.convolved ? detail::convolve_at(perp.values, kernel, i) : perp.values(i);
        sum_para += opts.convolved ? detail::convolve_at(para.values, kernel, i) : para.values(i);
    }
    const Scalar count = Scalar(2 * reach + 1);
    const Scalar g_perp = sum_perp / count;
    const Scalar g_para = sum_para / count;
    if (g_perp < Scalar(kVisibilityFloor))
        return Scalar(0);
    return (g_perp - g_para) / g_perp;
}

// Detuning grid lo, lo + step, ..., hi (inclusive within half a step).
template <typename Scalar>
Vector<Scalar> make_sweep_grid(Scalar lo, Scalar hi, Scalar step)
{
    require(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step) && step > 0 && hi > lo,
            ErrorCode::InvalidArgument, "sweep needs lo < hi and step > 0");
    const Eigen::Index n = static_cast<Eigen::Index>(std::floor((hi - lo) / step + 0.5)) + 1;
    Vector<Scalar> grid(n);
    for (Eigen::Index i = 0; i < n; ++i)
        grid(i) = lo + step * Scalar(i);
    return grid;
}

template <typename Scalar = double>
Vector<Scalar> default_sweep_grid()
{
    return make_sweep_grid<Scalar>(-30, 30, Scalar(0.5));
}

// Convolved post-selected visibility at each detuning. Points are computed
// independently, so the result does not depend on `threads`.
template <typename Scalar>
VisibilityCurve<Scalar> detuning_sweep(const EmitterModel<Scalar>& a, const EmitterModel<Scalar>& b,
                                       const BeamsplitterModel<Scalar>& bs, const DetectorResponse<Scalar>& det,
                                       const Vector<Scalar>& detunings, const PostselectOptions<Scalar>& opts = {},
                                       unsigned threads = 0)
{
    VisibilityCurve<Scalar> curve{detunings, Vector<Scalar>::Zero(detunings.size())};
    curve.validate();
    for (Eigen::Index i = 0; i < detunings.size(); ++i)
        require(std::abs(detunings(i)) <= 100, ErrorCode::InvalidArgument, "sweep detunings must lie within ±100 µeV");

    const Eigen::Index n = detunings.size();
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<Eigen::Index>(threads, std::max<Eigen::Index>(n, 1)));

    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](unsigned worker) {
        try {
            for (Eigen::Index i = worker; i < n; i += threads)
                curve.visibilities(i) = postselected_visibility(a, b, bs, detunings(i), det, opts);
        } catch (...) {
            errors[worker] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(work, w);
        for (auto& t : pool)
            t.join();
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return curve;
}

// Width of the central peak measured directly at half its maximum, with
// linear interpolation between samples.
template <typename Scalar>
Scalar half_max_width(const VisibilityCurve<Scalar>& curve)
{
    curve.validate();
    Eigen::Index peak = 0;
    const Scalar top = curve.visibilities.maxCoeff(&peak);
    if (peak == 0 || peak == curve.size() - 1 || !(top > 0))
        fail(ErrorCode::NoPeak, "visibility curve has no interior maximum");
    const Scalar half = top / 2;
    auto crossing = [&](Eigen::Index dir) {
        for (Eigen::Index i = peak; i + dir >= 0 && i + dir < curve.size(); i += dir) {
            const Scalar v0 = curve.visibilities(i);
            const Scalar v1 = curve.visibilities(i + dir);
            if (v1 <= half) {
                const Scalar x0 = curve.detunings(i);
                const Scalar x1 = curve.detunings(i + dir);
                return x0 + (v0 - half) / (v0 - v1) * (x1 - x0);
            }
        }
        fail(ErrorCode::NoPeak, "visibility curve does not fall to half maximum inside the sweep");
    };
    return crossing(1) - crossing(-1);
}

// FWHM of a least-squares Lorentzian fitted to the curve.
double curve_fwhm(const VisibilityCurve<double>& curve);

} // namespace hom

#endif // HOM_VISIBILITY_HPP
