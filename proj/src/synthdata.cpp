#include "hom/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace hom
{
namespace
{
std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Piecewise-linear density clipped to [lo, hi] with its running integral.
struct LinearDensity
{
    std::vector<double> x;
    std::vector<double> f;
    std::vector<double> cdf;  // cdf[k] = integral up to x[k]

    LinearDensity(const CorrelationTrace<double>& trace, double lo, double hi)
    {
        auto value_at = [&](double t) {
            const double pos = (t - trace.taus(0)) / trace.step();
            const auto k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), 0, trace.size() - 2);
            const double u = pos - double(k);
            return trace.values(k) + u * (trace.values(k + 1) - trace.values(k));
        };
        x.push_back(lo);
        f.push_back(value_at(lo));
        for (Eigen::Index i = 0; i < trace.size(); ++i) {
            if (trace.taus(i) > lo && trace.taus(i) < hi) {
                x.push_back(trace.taus(i));
                f.push_back(trace.values(i));
            }
        }
        x.push_back(hi);
        f.push_back(value_at(hi));
        cdf.assign(x.size(), 0.0);
        for (std::size_t k = 1; k < x.size(); ++k)
            cdf[k] = cdf[k - 1] + 0.5 * (f[k - 1] + f[k]) * (x[k] - x[k - 1]);
    }

    double total() const { return cdf.back(); }

    // Inverse CDF; exact for the linear density inside each segment.
    double invert(double u) const
    {
        const double target = u * total();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        std::size_t k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
        k = std::clamp<std::size_t>(k, 1, cdf.size() - 1);
        const double area = target - cdf[k - 1];
        const double h = x[k] - x[k - 1];
        const double f0 = f[k - 1];
        const double slope = (f[k] - f0) / h;
        const double root = std::sqrt(std::max(f0 * f0 + 2 * slope * area, 0.0));
        const double denom = f0 + root;
        const double s = denom > 0 ? 2 * area / denom : 0.0;
        return x[k - 1] + std::clamp(s, 0.0, h);
    }
};

} // namespace

Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed)
{
    std::uint64_t state = seed;
    for (auto& word : s_)
        word = splitmix64(state);
}

Xoshiro256StarStar::result_type Xoshiro256StarStar::operator()()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256StarStar::uniform() { return double((*this)() >> 11) * 0x1.0p-53; }

double Xoshiro256StarStar::normal()
{
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SynthConfig::validate() const
{
    require(n_events >= 1, ErrorCode::InvalidArgument, "n_events must be at least 1");
    require(std::isfinite(bin_width) && bin_width > 0, ErrorCode::InvalidArgument, "bin width must be positive");
    require(std::isfinite(window) && window >= 10 * bin_width, ErrorCode::InvalidArgument,
            "window must be at least 10 bin widths");
}

Vector<double> histogram_bin_centers(const SynthConfig& cfg)
{
    cfg.validate();
    const auto half = static_cast<Eigen::Index>(std::floor((cfg.window / cfg.bin_width - 1) / 2 + 1e-9));
    Vector<double> centers(2 * half + 1);
    for (Eigen::Index i = -half; i <= half; ++i)
        centers(i + half) = cfg.bin_width * double(i);
    return centers;
}

CorrelationTrace<double> sample_coincidences(const CorrelationTrace<double>& ideal, const DetectorResponse<double>& det,
                                             const SynthConfig& cfg)
{
    cfg.validate();
    det.validate();
    ideal.validate();
    const Vector<double> centers = histogram_bin_centers(cfg);
    const Eigen::Index nbins = centers.size();
    const double edge = centers(nbins - 1) + cfg.bin_width / 2;
    const double sigma = det.sigma();
    const double reach = edge + 8 * sigma;
    if (ideal.taus(0) > -reach || ideal.taus(ideal.size() - 1) < reach)
        fail(ErrorCode::WindowExceedsTrace, "ideal trace must span the window plus 8 sigma of detector jitter");

    const LinearDensity density(ideal, -reach, reach);
    if (!(density.total() > 0))
        fail(ErrorCode::DegenerateData, "ideal trace has no weight inside the window");

    CorrelationTrace<double> hist{centers, Vector<double>::Zero(nbins)};
    if (cfg.noise_model == NoiseModel::Poisson) {
        Xoshiro256StarStar rng(cfg.seed);
        for (std::int64_t e = 0; e < cfg.n_events; ++e) {
            const double tau = density.invert(rng.uniform()) + sigma * rng.normal();
            const double pos = (tau + edge) / cfg.bin_width;
            if (pos >= 0 && pos < double(nbins))
                hist.values(static_cast<Eigen::Index>(pos)) += 1;
        }
        return hist;
    }

    // Expected counts: the density times the probability that a delay at x
    // lands in the bin after jitter, trapezoid quadrature over the knots.
    const double norm = double(cfg.n_events) / density.total();
    const double scale = 1.0 / (sigma * std::numbers::sqrt2);
    std::vector<double> weight(density.x.size());
    for (Eigen::Index b = 0; b < nbins; ++b) {
        const double lo = centers(b) - cfg.bin_width / 2;
        const double hi = centers(b) + cfg.bin_width / 2;
        for (std::size_t k = 0; k < density.x.size(); ++k)
            weight[k] = density.f[k] * 0.5 *
                        (std::erfc((lo - density.x[k]) * scale) - std::erfc((hi - density.x[k]) * scale));
        double acc = 0;
        for (std::size_t k = 1; k < density.x.size(); ++k)
            acc += 0.5 * (density.x[k] - density.x[k - 1]) * (weight[k - 1] + weight[k]);
        hist.values(b) = norm * acc;
    }
    return hist;
}

Spectrum make_spectrum(const LineshapeParams<double>& params, int n_points, double span, double relative_noise,
                       std::uint64_t seed)
{
    params.validate();
    require(n_points >= 8, ErrorCode::InvalidArgument, "spectrum needs at least 8 points");
    require(std::isfinite(relative_noise) && relative_noise >= 0, ErrorCode::InvalidArgument,
            "relative noise must be non-negative");
    if (!(span >= 3 * profile_fwhm(params)))
        fail(ErrorCode::SpanTooNarrow, "spectrum span must cover at least 3 FWHM");

    Spectrum spec;
    spec.energies = Eigen::VectorXd::LinSpaced(n_points, params.center - span / 2, params.center + span / 2);
    spec.intensities = eval_lineshape(spec.energies.array(), params).matrix();
    if (relative_noise > 0) {
        Xoshiro256StarStar rng(seed);
        for (Eigen::Index i = 0; i < spec.size(); ++i)
            spec.intensities(i) = std::max(0.0, spec.intensities(i) * (1 + relative_noise * rng.normal()));
    }
    return spec;
}

} // namespace hom
