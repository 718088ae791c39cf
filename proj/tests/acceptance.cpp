// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "hom/hom.hpp"

using namespace hom;

namespace
{
struct Outcome
{
    bool pass;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

EmitterModel<double> dot_a()
{
    EmitterModel<double> m;
    m.tau_r = 600;
    m.background_b = 0.05;
    m.tau_c = coherence_time_from_lorentzian(5.2);
    return m;
}

EmitterModel<double> dot_1()
{
    EmitterModel<double> m;
    m.tau_r = 800;
    m.background_b = 0;
    m.tau_c = coherence_time_from_lorentzian(2.2);
    m.jitter_sigma = jitter_sigma_from_gaussian(6.8);
    return m;
}

const DetectorResponse<double> detector{428};

Outcome raw_visibility()
{
    const double v = postselected_visibility(dot_a(), dot_1(), BeamsplitterModel<double>{}, 0.0, detector);
    return {std::abs(v - 0.33) <= 0.03, fmt("V_raw = %.4f, want 0.33 +/- 0.03", v)};
}

Outcome ideal_visibility()
{
    PostselectOptions<double> opts;
    opts.convolved = false;
    const double v = postselected_visibility(dot_a(), dot_1(), BeamsplitterModel<double>{}, 0.0, detector, opts);
    return {std::abs(v - 0.976) <= 0.010, fmt("V_ideal = %.6f, want 0.976 +/- 0.010", v)};
}

Outcome sweep_width()
{
    const auto curve =
        detuning_sweep(dot_a(), dot_1(), BeamsplitterModel<double>{}, detector, default_sweep_grid<double>());
    const double w = half_max_width(curve);
    return {std::abs(w - 15.0) <= 1.5, fmt("half-max FWHM = %.3f ueV, want 15 +/- 1.5", w)};
}

Outcome homogeneous_limit()
{
    EmitterModel<double> m;
    m.tau_r = 20000;
    m.tau_c = coherence_time_from_lorentzian(2.0);
    // Response far longer than the coherence time.
    const DetectorResponse<double> slow{10000};
    PostselectOptions<double> opts;
    opts.taus = make_delay_grid(60000.0, 5.0);
    const auto curve = detuning_sweep(m, m, BeamsplitterModel<double>{}, slow, make_sweep_grid(-20.0, 20.0, 0.1), opts);
    const double w = half_max_width(curve);
    return {std::abs(w - 4.0) <= 0.4, fmt("sweep FWHM = %.4f ueV, want 4.0 +/- 10%%", w)};
}

Outcome g2_fit_recovery()
{
    EmitterModel<double> m;
    m.tau_r = 600;
    m.background_b = 0.05;
    SynthConfig cfg;
    cfg.n_events = 100000;
    cfg.window = 6000;
    cfg.bin_width = 32;
    const auto ideal = g2_auto_ideal_trace(m, make_delay_grid(cfg.window / 2 + 10 * detector.sigma(), 2.0));
    FitOptions opts;
    opts.weighting = Weighting::Poisson;
    opts.throw_on_failure = false;
    int good = 0;
    for (int s = 1; s <= 100; ++s) {
        cfg.seed = std::uint64_t(s);
        const auto fit = fit_g2_auto(sample_coincidences(ideal, detector, cfg), detector, opts);
        good += fit.converged && std::abs(fit.params.background_b - 0.05) <= 0.02 &&
                std::abs(fit.params.tau_r - 600) <= 0.05 * 600;
    }
    return {good >= 95, fmt("%d/100 seeds within (B +/- 0.02, tau_r +/- 5%%), want >= 95", good)};
}

Outcome voigt_fit_recovery()
{
    FitOptions opts;
    opts.weighting = Weighting::Relative;
    opts.throw_on_failure = false;
    int good = 0;
    for (int s = 1; s <= 100; ++s) {
        const auto spec = make_spectrum(voigt(0.0, 2.2, 6.8), 200, 60, 0.02, std::uint64_t(s));
        const auto fit = fit_lineshape(spec, LineshapeKind::Voigt, std::nullopt, opts);
        good += fit.converged && std::abs(fit.params.lorentzian_fwhm - 2.2) <= 0.05 * 2.2 &&
                std::abs(fit.params.gaussian_fwhm - 6.8) <= 0.05 * 6.8;
    }
    return {good >= 95, fmt("%d/100 seeds within 5%% of (2.2, 6.8), want >= 95", good)};
}

Outcome dip_levels()
{
    EmitterModel<double> perfect;
    perfect.background_b = 0;
    const BeamsplitterModel<double> bs;
    const double perp = g2_cross_ideal(0.0, perfect, perfect, bs.with(Polarization::Orthogonal), 0.0);
    const double para = g2_cross_ideal(0.0, perfect, perfect, bs, 0.0);
    return {std::abs(perp - 0.5) <= 1e-9 && std::abs(para) <= 1e-9,
            fmt("orthogonal %.12f (want 0.5), parallel %.3g (want 0)", perp, para)};
}

Outcome oracle_equivalence()
{
    SynthConfig cfg;
    cfg.n_events = 1000000;
    const auto ideal = g2_auto_ideal_trace(dot_a(), make_delay_grid(6000.0, 2.0));
    const auto centers = histogram_bin_centers(cfg);
    const double reach = centers(centers.size() - 1) + cfg.bin_width / 2 + 8 * detector.sigma();
    const std::vector<double> taus(centers.data(), centers.data() + centers.size());
    const auto expected = oracle::expected_g2_counts(taus, cfg.bin_width, reach, double(cfg.n_events), 0.05, 600,
                                                     detector.sigma());
    int good = 0;
    double lo = 1e300, hi = 0;
    for (int s = 1; s <= 20; ++s) {
        cfg.seed = std::uint64_t(s);
        const auto hist = sample_coincidences(ideal, detector, cfg);
        const std::vector<double> counts(hist.values.data(), hist.values.data() + hist.size());
        const double chi2 = oracle::reduced_chi2(counts, expected);
        lo = std::min(lo, chi2);
        hi = std::max(hi, chi2);
        good += chi2 >= 0.8 && chi2 <= 1.2;
    }
    return {good >= 18, fmt("%d/20 seeds with reduced chi2 in [0.8, 1.2] (range %.3f..%.3f)", good, lo, hi)};
}

EmitterModel<double> random_emitter(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0, 1);
    EmitterModel<double> m;
    m.tau_r = 50 + 2000 * unit(rng);
    m.background_b = unit(rng);
    m.tau_c = 20 + 2 * m.tau_r * unit(rng);
    m.jitter_sigma = 10 * unit(rng);
    m.intensity = 0.2 + unit(rng);
    return m;
}

Outcome invariant_suite()
{
    constexpr int cases = 1000;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0, 1);
    std::uniform_real_distribution<double> delay(-5000, 5000);
    std::uniform_real_distribution<double> detune(-50, 50);
    std::vector<std::string> broken;
    auto check = [&](const char* name, const std::function<bool()>& one_case) {
        for (int i = 0; i < cases; ++i)
            if (!one_case()) {
                broken.push_back(name);
                return;
            }
    };

    check("symmetry", [&] {
        const auto a = random_emitter(rng);
        const auto b = random_emitter(rng);
        const BeamsplitterModel<double> bs{unit(rng), unit(rng), unit(rng) < 0.5 ? Polarization::Parallel
                                                                                 : Polarization::Orthogonal};
        const double t = delay(rng), de = detune(rng);
        return g2_auto_ideal(t, a) == g2_auto_ideal(-t, a) &&
               std::abs(g2_cross_ideal(t, a, b, bs, de) - g2_cross_ideal(-t, a, b, bs, de)) <= 1e-14;
    });
    check("bounds", [&] {
        const auto a = random_emitter(rng);
        const auto b = random_emitter(rng);
        const BeamsplitterModel<double> bs{unit(rng), unit(rng), Polarization::Parallel};
        PostselectOptions<double> opts;
        opts.convolved = false;
        const double v = postselected_visibility(a, b, bs, detune(rng), detector, opts);
        const double t = delay(rng);
        return g2_auto_ideal(t, a) >= 0 && g2_cross_ideal(t, a, b, bs, 0.0) >= 0 && v >= -1e-12 && v <= 1 + 1e-12;
    });
    check("gamma=0 equality", [&] {
        const auto a = random_emitter(rng);
        const auto b = random_emitter(rng);
        const BeamsplitterModel<double> bs{unit(rng), 0.0, Polarization::Parallel};
        const double t = delay(rng), de = detune(rng);
        return std::abs(g2_cross_ideal(t, a, b, bs, de) -
                        g2_cross_ideal(t, a, b, bs.with(Polarization::Orthogonal), de)) <= 1e-12;
    });
    check("T in {0,1} flatness", [&] {
        auto a = random_emitter(rng);
        auto b = random_emitter(rng);
        a.intensity = b.intensity = 1;
        for (double t : {0.0, 1.0})
            for (auto pol : {Polarization::Parallel, Polarization::Orthogonal})
                if (std::abs(g2_cross_ideal(delay(rng), a, b, BeamsplitterModel<double>{t, unit(rng), pol},
                                            detune(rng)) - 1) > 1e-14)
                    return false;
        return true;
    });
    check("Stark round trip", [&] {
        std::uniform_real_distribution<double> coef(-20, 20), beta(-0.2, 0.2);
        for (;;) {
            const StarkParams<double> p{1.314e6, coef(rng), beta(rng), -500, 50};
            const double f_star = -500 + 550 * unit(rng);
            const double other = p.polarizability_beta != 0 ? -p.dipole_p / p.polarizability_beta - f_star : 1e300;
            if (p.in_window(other) && std::abs(other) < std::abs(f_star))
                continue;  // the solver returns the smaller-|F| root
            const double f = field_for_energy(p, energy_at_field(p, f_star));
            return std::abs(f - f_star) <= 1e-9 * std::max(std::abs(f_star), 1.0);
        }
    });
    check("Voigt degenerate limits", [&] {
        const double w = 0.5 + 20 * unit(rng);
        const double x = (unit(rng) - 0.5) * 6 * w;
        const double vl = eval_voigt(x, voigt(0.0, w, 1e-7 * w));
        const double vg = eval_voigt(x, voigt(0.0, 1e-7 * w, w));
        // The residual Lorentzian wing outgrows the Gaussian tail, so the
        // Gaussian limit is checked against the unit amplitude.
        return std::abs(vl / eval_lorentzian(x, lorentzian(0.0, w)) - 1) <= 1e-6 &&
               std::abs(vg - eval_gaussian(x, gaussian(0.0, w))) <= 1e-6;
    });

    std::string detail = "6 invariants x 1000 cases";
    for (const auto& name : broken)
        detail += "; broken: " + name;
    return {broken.empty(), detail};
}

Outcome fit_only_width()
{
    const Spectrum s = make_spectrum(lorentzian(0.0, 4.9), 121, 60.0, 0.05, 1);
    const double w = curve_fwhm(VisibilityCurve<double>{s.energies, s.intensities});
    return {std::abs(w - 4.9) <= 0.3, fmt("fitted FWHM = %.4f ueV, want 4.9 +/- 0.3", w)};
}
} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"1 raw HOM visibility", raw_visibility},
        {"2 ideal HOM visibility", ideal_visibility},
        {"3 detuning sweep width", sweep_width},
        {"4 homogeneous-limit sweep width", homogeneous_limit},
        {"5a g2 fit recovery", g2_fit_recovery},
        {"5b Voigt fit recovery", voigt_fit_recovery},
        {"6 dip levels", dip_levels},
        {"7 Monte Carlo vs analytic trace", oracle_equivalence},
        {"8 invariant suite", invariant_suite},
        {"9 fit-only 4.9 ueV width", fit_only_width},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  %-34s %s  [%.1fs]\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str(), secs);
        failed += !r.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
