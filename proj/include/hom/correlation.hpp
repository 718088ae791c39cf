#ifndef HOM_CORRELATION_HPP
#define HOM_CORRELATION_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "hom/error.hpp"
#include "hom/units.hpp"

namespace hom
{
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// One continuously driven single-photon source. Times in ps, energies in µeV.
template <typename Scalar>
struct EmitterModel
{
    Scalar tau_r = 600;           // radiative lifetime
    Scalar background_b = 0;      // g2(0) floor
    Scalar tau_c = 250;           // coherence time of the homogeneous line
    Scalar jitter_sigma = 0;      // std dev of the static spectral jitter
    Scalar center_energy = 0;
    Scalar intensity = 1;

    void validate() const
    {
        using std::isfinite;
        require(isfinite(tau_r) && isfinite(background_b) && isfinite(tau_c) && isfinite(jitter_sigma) &&
                    isfinite(center_energy) && isfinite(intensity),
                ErrorCode::NonFinite, "emitter parameters must be finite");
        require(tau_r > 0, ErrorCode::InvalidArgument, "tau_r must be positive");
        require(tau_c > 0, ErrorCode::InvalidArgument, "tau_c must be positive");
        require(background_b >= 0 && background_b <= 1, ErrorCode::InvalidArgument, "background B must lie in [0, 1]");
        require(jitter_sigma >= 0, ErrorCode::InvalidArgument, "jitter sigma must be non-negative");
        require(intensity > 0, ErrorCode::InvalidArgument, "intensity must be positive");
    }

    // Pure dephasing can only shorten coherence below 2·tau_r. Exceeding that is
    // allowed but worth a warning.
    bool exceeds_radiative_limit() const { return tau_c > 2 * tau_r; }
};

template <typename Scalar>
struct DetectorResponse
{
    Scalar fwhm = 428; // ps

    void validate() const
    {
        require(std::isfinite(fwhm) && fwhm > 0, ErrorCode::InvalidArgument, "detector FWHM must be positive");
    }

    Scalar sigma() const { return fwhm / Scalar(kGaussianFwhmPerSigma); }
};

enum class Polarization
{
    Parallel,
    Orthogonal,
};

template <typename Scalar>
struct BeamsplitterModel
{
    Scalar transmission = 0.5;  // reflection = 1 - transmission
    Scalar overlap_gamma = 1;   // |<psi_A|psi_B>|
    Polarization polarization = Polarization::Parallel;

    void validate() const
    {
        require(std::isfinite(transmission) && transmission >= 0 && transmission <= 1, ErrorCode::InvalidArgument,
                "transmission must lie in [0, 1]");
        require(std::isfinite(overlap_gamma) && overlap_gamma >= 0 && overlap_gamma <= 1,
                ErrorCode::InvalidArgument, "overlap gamma must lie in [0, 1]");
    }

    BeamsplitterModel with(Polarization p) const
    {
        BeamsplitterModel copy = *this;
        copy.polarization = p;
        return copy;
    }
};

// g2 sampled on a uniform delay grid symmetric about zero.
template <typename Scalar>
struct CorrelationTrace
{
    Vector<Scalar> taus;
    Vector<Scalar> values;

    Eigen::Index size() const { return taus.size(); }
    Scalar step() const { return (taus(taus.size() - 1) - taus(0)) / Scalar(taus.size() - 1); }
    Scalar half_span() const { return taus(taus.size() - 1); }

    // Index of the tau = 0 sample; the grid must have an odd number of points.
    Eigen::Index zero_index() const
    {
        require(taus.size() % 2 == 1, ErrorCode::InvalidArgument, "delay grid has no tau = 0 sample");
        return taus.size() / 2;
    }

    void validate_grid() const
    {
        require(taus.size() >= 3, ErrorCode::InvalidArgument, "delay grid needs at least 3 points");
        const Eigen::Index n = taus.size();
        const Scalar h = step();
        require(std::isfinite(h) && h > 0, ErrorCode::InvalidArgument, "delay grid must be increasing");
        const Scalar tol = Scalar(1e-6) * h;
        for (Eigen::Index i = 0; i < n; ++i) {
            require(std::abs(taus(i) - (taus(0) + h * Scalar(i))) <= tol, ErrorCode::InvalidArgument,
                    "delay grid is not uniform");
            require(std::abs(taus(i) + taus(n - 1 - i)) <= tol, ErrorCode::InvalidArgument,
                    "delay grid is not symmetric about zero");
        }
    }

    void validate() const
    {
        require(values.size() == taus.size(), ErrorCode::InvalidArgument, "trace taus/values length mismatch");
        validate_grid();
        for (Eigen::Index i = 0; i < values.size(); ++i)
            require(std::isfinite(values(i)) && values(i) >= 0, ErrorCode::InvalidArgument,
                    "trace values must be finite and non-negative");
    }
};

// Uniform grid from -half_span to +half_span including zero.
template <typename Scalar>
Vector<Scalar> make_delay_grid(Scalar half_span, Scalar step)
{
    require(std::isfinite(half_span) && std::isfinite(step) && step > 0 && half_span >= step,
            ErrorCode::InvalidArgument, "delay grid needs half_span >= step > 0");
    const Eigen::Index half = static_cast<Eigen::Index>(std::llround(half_span / step));
    Vector<Scalar> taus(2 * half + 1);
    for (Eigen::Index i = -half; i <= half; ++i)
        taus(i + half) = step * Scalar(i);
    return taus;
}

// Default policy: ±16 ns at 2 ps.
template <typename Scalar = double>
Vector<Scalar> default_delay_grid()
{
    return make_delay_grid<Scalar>(16000, 2);
}

// HBT autocorrelation before detector blur: 1 - (1 - B) exp(-|tau|/tau_r).
template <typename Scalar>
Scalar g2_auto_ideal(Scalar tau, const EmitterModel<Scalar>& src)
{
    return 1 - (1 - src.background_b) * std::exp(-std::abs(tau) / src.tau_r);
}

// First-order coherence magnitude averaged over static Gaussian spectral jitter.
template <typename Scalar>
Scalar g1_envelope(Scalar tau, const EmitterModel<Scalar>& src)
{
    const Scalar hbar = PhysicalConstants<Scalar>::hbar;
    const Scalar x = src.jitter_sigma * tau / hbar;
    return std::exp(-std::abs(tau) / src.tau_c) * std::exp(-x * x / 2);
}

// Cross-correlation between the two beamsplitter outputs for independent CW
// sources A and B with detuning dE = E_B - E_A.
template <typename Scalar>
Scalar g2_cross_ideal(Scalar tau, const EmitterModel<Scalar>& a, const EmitterModel<Scalar>& b,
                      const BeamsplitterModel<Scalar>& bs, Scalar detuning)
{
    const Scalar t = bs.transmission;
    const Scalar r = 1 - t;
    const Scalar ia = a.intensity;
    const Scalar ib = b.intensity;
    const Scalar norm = (t * ia + r * ib) * (r * ia + t * ib);
    if (!(norm > 0))
        fail(ErrorCode::ZeroIntensity, "no intensity reaches one of the detectors");

    Scalar numer = t * r * (ia * ia * g2_auto_ideal(tau, a) + ib * ib * g2_auto_ideal(tau, b)) + (t * t + r * r) * ia * ib;
    if (bs.polarization == Polarization::Parallel) {
        const Scalar beat = std::cos(detuning * tau / PhysicalConstants<Scalar>::hbar);
        numer -= 2 * t * r * ia * ib * bs.overlap_gamma * bs.overlap_gamma * g1_envelope(tau, a) *
                 g1_envelope(tau, b) * beat;
    }
    return numer / norm;
}

template <typename Scalar>
CorrelationTrace<Scalar> g2_auto_ideal_trace(const EmitterModel<Scalar>& src, const Vector<Scalar>& taus)
{
    src.validate();
    CorrelationTrace<Scalar> trace{taus, taus.unaryExpr([&](Scalar tau) { return g2_auto_ideal(tau, src); })};
    trace.validate_grid();
    return trace;
}

template <typename Scalar>
CorrelationTrace<Scalar> g2_cross_ideal_trace(const EmitterModel<Scalar>& a, const EmitterModel<Scalar>& b,
                                              const BeamsplitterModel<Scalar>& bs, Scalar detuning,
                                              const Vector<Scalar>& taus)
{
    a.validate();
    b.validate();
    bs.validate();
    require(std::isfinite(detuning), ErrorCode::NonFinite, "detuning must be finite");
    CorrelationTrace<Scalar> trace{
        taus, taus.unaryExpr([&](Scalar tau) { return g2_cross_ideal(tau, a, b, bs, detuning); })};
    trace.validate_grid();
    return trace;
}

// Discrete Gaussian kernel for a grid step, truncated at ±8σ and normalized
// so that sum(weights) = 1 (unit area as a density on the grid).
template <typename Scalar>
Vector<Scalar> gaussian_kernel(const DetectorResponse<Scalar>& det, Scalar step)
{
    det.validate();
    const Scalar sigma = det.sigma();
    const Eigen::Index half = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(8 * sigma / step)));
    Vector<Scalar> w(2 * half + 1);
    for (Eigen::Index j = -half; j <= half; ++j) {
        const Scalar x = Scalar(j) * step / sigma;
        w(j + half) = std::exp(-x * x / 2);
    }
    return w / w.sum();
}

template <typename Scalar>
void check_convolution_grid(const CorrelationTrace<Scalar>& trace, const DetectorResponse<Scalar>& det)
{
    det.validate();
    trace.validate_grid();
    if (trace.step() > det.fwhm / 10 * (1 + Scalar(1e-9)))
        fail(ErrorCode::GridTooCoarse, "delay step " + std::to_string(trace.step()) +
                                           " ps exceeds a tenth of the detector FWHM");
    if (trace.half_span() < 5 * det.fwhm * (1 - Scalar(1e-9)))
        fail(ErrorCode::SpanTooShort, "delay span must cover at least ±5 detector FWHM");
}

namespace detail
{
// Kernel-weighted sum centred on sample i, edge samples extended outward.
// Mirror-image samples are added pairwise so that symmetric input gives a
// bitwise symmetric result.
template <typename Scalar>
Scalar convolve_at(const Vector<Scalar>& values, const Vector<Scalar>& kernel, Eigen::Index i)
{
    const Eigen::Index last = values.size() - 1;
    const Eigen::Index half = kernel.size() / 2;
    Scalar acc = 0;
    for (Eigen::Index j = half; j >= 1; --j) {
        const Scalar lo = values(std::clamp<Eigen::Index>(i - j, 0, last));
        const Scalar hi = values(std::clamp<Eigen::Index>(i + j, 0, last));
        acc += kernel(half + j) * (lo + hi);
    }
    return acc + kernel(half) * values(i);
}
} // namespace detail

// Value of trace ⊗ response at a single grid index; identical to the
// corresponding sample of convolve_response.
template <typename Scalar>
Scalar convolved_value(const CorrelationTrace<Scalar>& trace, const DetectorResponse<Scalar>& det, Eigen::Index index)
{
    check_convolution_grid(trace, det);
    require(index >= 0 && index < trace.size(), ErrorCode::InvalidArgument, "trace index out of range");
    return detail::convolve_at(trace.values, gaussian_kernel(det, trace.step()), index);
}

template <typename Scalar>
CorrelationTrace<Scalar> convolve_response(const CorrelationTrace<Scalar>& trace, const DetectorResponse<Scalar>& det)
{
    check_convolution_grid(trace, det);
    const Vector<Scalar> kernel = gaussian_kernel(det, trace.step());
    CorrelationTrace<Scalar> out{trace.taus, Vector<Scalar>(trace.size())};
    for (Eigen::Index i = 0; i < trace.size(); ++i)
        out.values(i) = detail::convolve_at(trace.values, kernel, i);
    return out;
}

template <typename Scalar>
CorrelationTrace<Scalar> g2_auto_measured(const EmitterModel<Scalar>& src, const DetectorResponse<Scalar>& det,
                                          const Vector<Scalar>& taus)
{
    return convolve_response(g2_auto_ideal_trace(src, taus), det);
}

template <typename Scalar>
CorrelationTrace<Scalar> g2_cross_measured(const EmitterModel<Scalar>& a, const EmitterModel<Scalar>& b,
                                           const BeamsplitterModel<Scalar>& bs, Scalar detuning,
                                           const DetectorResponse<Scalar>& det, const Vector<Scalar>& taus)
{
    return convolve_response(g2_cross_ideal_trace(a, b, bs, detuning, taus), det);
}

} // namespace hom

#endif // HOM_CORRELATION_HPP
