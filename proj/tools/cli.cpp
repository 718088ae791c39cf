#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hom/hom.hpp"

namespace hom::cli
{
namespace
{
using nlohmann::ordered_json;

// Writes to the named file, or to `fallback` when the path is empty.
class Output
{
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_)
                fail(ErrorCode::Io, "cannot write " + path);
            stream_ = &file_;
        }
    }

    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

LineshapeKind parse_kind(const std::string& s)
{
    if (s == "lorentzian")
        return LineshapeKind::Lorentzian;
    if (s == "gaussian")
        return LineshapeKind::Gaussian;
    if (s == "voigt")
        return LineshapeKind::Voigt;
    fail(ErrorCode::InvalidArgument, "unknown lineshape kind '" + s + "'");
}

const char* kind_name(LineshapeKind k)
{
    switch (k) {
    case LineshapeKind::Lorentzian: return "lorentzian";
    case LineshapeKind::Gaussian: return "gaussian";
    case LineshapeKind::Voigt: return "voigt";
    }
    return "";
}

Polarization parse_polarization(const std::string& s)
{
    if (s == "parallel")
        return Polarization::Parallel;
    if (s == "orthogonal")
        return Polarization::Orthogonal;
    fail(ErrorCode::InvalidArgument, "polarization must be 'parallel' or 'orthogonal'");
}

// "lo:hi:step"
Vector<double> parse_sweep(const std::string& spec)
{
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "sweep must look like lo:hi:step");
        }
    }
    if (parts.size() != 3)
        fail(ErrorCode::InvalidArgument, "sweep must look like lo:hi:step");
    return make_sweep_grid(parts[0], parts[1], parts[2]);
}

void warn_coherence(const EmitterConfig& e, std::ostream& err)
{
    if (e.model.exceeds_radiative_limit())
        err << "warning: emitter '" << e.name << "' has tau_c > 2 tau_r\n";
}

ordered_json fit_report(const FitResult<LineshapeParams<double>>& fit)
{
    ordered_json params = ordered_json::object();
    const auto& p = fit.params;
    const std::vector<double> values = [&] {
        std::vector<double> v{p.center};
        if (p.kind != LineshapeKind::Gaussian)
            v.push_back(p.lorentzian_fwhm);
        if (p.kind != LineshapeKind::Lorentzian)
            v.push_back(p.gaussian_fwhm);
        v.push_back(p.amplitude);
        v.push_back(p.offset);
        return v;
    }();
    for (std::size_t i = 0; i < fit.parameter_names.size(); ++i) {
        const double var = fit.covariance_diag(static_cast<Eigen::Index>(i));
        params[fit.parameter_names[i]] = {{"value", values[i]}, {"stderr", std::sqrt(std::max(var, 0.0))}};
    }
    return ordered_json{{"kind", kind_name(p.kind)},
                        {"converged", fit.converged},
                        {"iterations", fit.iterations},
                        {"chi2_reduced", fit.chi2_reduced},
                        {"fwhm_ueV", profile_fwhm(p)},
                        {"parameters", params}};
}

struct Context
{
    std::ostream& out;
    std::ostream& err;
};

int cmd_lineshape_fit(Context ctx, const std::string& spectrum_path, const std::string& kind_text,
                      const std::string& residual_path, const std::string& weighting)
{
    const Spectrum spec = read_spectrum_csv(std::filesystem::path(spectrum_path));
    FitOptions opts;
    if (weighting == "poisson")
        opts.weighting = Weighting::Poisson;
    else if (weighting == "relative")
        opts.weighting = Weighting::Relative;
    else if (weighting != "none")
        fail(ErrorCode::InvalidArgument, "weights must be 'none', 'poisson' or 'relative'");
    const auto fit = fit_lineshape(spec, parse_kind(kind_text), std::nullopt, opts);
    ctx.out << fit_report(fit).dump(2) << '\n';
    if (!residual_path.empty()) {
        Output res(residual_path, ctx.out);
        res.get() << "energy_ueV,residual\n";
        for (Eigen::Index i = 0; i < spec.size(); ++i)
            res.get() << format_number(spec.energies(i)) << ',' << format_number(fit.residuals(i)) << '\n';
    }
    return 0;
}

int cmd_g2(Context ctx, const ExperimentConfig& cfg, const std::string& emitter, bool ideal, const std::string& out_path)
{
    const auto& e = cfg.emitter(emitter);
    warn_coherence(e, ctx.err);
    const auto trace = ideal ? g2_auto_ideal_trace(e.model, cfg.delay_grid())
                             : g2_auto_measured(e.model, cfg.detector, cfg.delay_grid());
    Output out(out_path, ctx.out);
    write_trace_csv(out.get(), trace);
    return 0;
}

int cmd_hom(Context ctx, const ExperimentConfig& cfg, const std::string& a, const std::string& b, double detuning,
            const std::string& polarization, bool ideal, const std::string& out_path)
{
    const auto& ea = cfg.emitter(a);
    const auto& eb = cfg.emitter(b);
    warn_coherence(ea, ctx.err);
    warn_coherence(eb, ctx.err);
    auto bs = cfg.beamsplitter_for({a, b, std::nullopt});
    if (!polarization.empty())
        bs.polarization = parse_polarization(polarization);
    const auto trace = ideal ? g2_cross_ideal_trace(ea.model, eb.model, bs, detuning, cfg.delay_grid())
                             : g2_cross_measured(ea.model, eb.model, bs, detuning, cfg.detector, cfg.delay_grid());
    Output out(out_path, ctx.out);
    write_trace_csv(out.get(), trace);
    return 0;
}

int cmd_visibility(Context ctx, const ExperimentConfig& cfg, const std::string& a, const std::string& b,
                   const std::string& sweep, const std::optional<double>& at, bool ideal, const std::string& out_path)
{
    const auto& ea = cfg.emitter(a);
    const auto& eb = cfg.emitter(b);
    const auto bs = cfg.beamsplitter_for({a, b, std::nullopt});
    const auto opts = cfg.postselect(!ideal);
    if (at) {
        const double v = postselected_visibility(ea.model, eb.model, bs, *at, cfg.detector, opts);
        ordered_json report{{"a", a},
                            {"b", b},
                            {"detuning_ueV", *at},
                            {"convolved", !ideal},
                            {"visibility", v}};
        Output out(out_path, ctx.out);
        out.get() << report.dump(2) << '\n';
        return 0;
    }
    const Vector<double> grid = sweep.empty() ? cfg.sweep_grid() : parse_sweep(sweep);
    const auto curve = detuning_sweep(ea.model, eb.model, bs, cfg.detector, grid, opts);
    Output out(out_path, ctx.out);
    write_curve_csv(out.get(), curve);
    // Peak widths as comment lines; both need an interior maximum.
    try {
        out.get() << "# half_max_fwhm_ueV=" << format_number(half_max_width(curve)) << '\n';
        out.get() << "# lorentzian_fit_fwhm_ueV=" << format_number(curve_fwhm(curve)) << '\n';
    } catch (const Error& e) {
        out.get() << "# fwhm unavailable: " << e.what() << '\n';
    }
    return 0;
}

int cmd_stark(Context ctx, const ExperimentConfig& cfg, const std::string& emitter, const std::optional<double>& target,
              const std::optional<double>& field, const std::string& tune_to)
{
    const auto& e = cfg.emitter(emitter);
    if (!e.stark)
        fail(ErrorCode::InvalidArgument, "emitter '" + emitter + "' has no Stark parameters");
    const int chosen = int(target.has_value()) + int(field.has_value()) + int(!tune_to.empty());
    if (chosen != 1)
        fail(ErrorCode::InvalidArgument, "give exactly one of --target, --field or --tune-to");

    ordered_json report{{"emitter", emitter}};
    if (field) {
        report["field_kVcm"] = *field;
        report["energy_ueV"] = energy_at_field(*e.stark, *field);
    } else if (target) {
        const double f = field_for_energy(*e.stark, *target);
        report["target_ueV"] = *target;
        report["field_kVcm"] = f;
        report["energy_ueV"] = energy_at_field(*e.stark, f);
    } else {
        const auto& ref = cfg.emitter(tune_to);
        const auto tuned = tune_pair(ref.model.center_energy, *e.stark);
        report["reference"] = tune_to;
        report["target_ueV"] = ref.model.center_energy;
        report["field_kVcm"] = tuned.field;
        report["residual_detuning_ueV"] = tuned.residual_detuning;
    }
    ctx.out << report.dump(2) << '\n';
    return 0;
}

int cmd_table(Context ctx, const ExperimentConfig& cfg, bool csv)
{
    struct Row
    {
        std::string a, b;
        double gamma, g2a, g2b, v_raw, v_ideal;
    };
    std::vector<Row> rows;
    for (const auto& pair : cfg.table_pairs()) {
        const auto& ea = cfg.emitter(pair.a);
        const auto& eb = cfg.emitter(pair.b);
        const auto bs = cfg.beamsplitter_for(pair);
        rows.push_back({pair.a, pair.b, bs.overlap_gamma, ea.model.background_b, eb.model.background_b,
                        postselected_visibility(ea.model, eb.model, bs, 0.0, cfg.detector, cfg.postselect(true)),
                        postselected_visibility(ea.model, eb.model, bs, 0.0, cfg.detector, cfg.postselect(false))});
    }
    if (csv) {
        ctx.out << "a,b,gamma,g2_0_a,g2_0_b,visibility_raw,visibility_ideal\n";
        for (const auto& r : rows)
            ctx.out << r.a << ',' << r.b << ',' << format_number(r.gamma) << ',' << format_number(r.g2a) << ','
                    << format_number(r.g2b) << ',' << format_number(r.v_raw) << ',' << format_number(r.v_ideal)
                    << '\n';
        return 0;
    }
    ctx.out << std::left << std::setw(10) << "A" << std::setw(10) << "B" << std::right << std::setw(8) << "gamma"
            << std::setw(10) << "g2(0)_A" << std::setw(10) << "g2(0)_B" << std::setw(10) << "V_raw" << std::setw(10)
            << "V_ideal" << '\n';
    ctx.out << std::fixed << std::setprecision(4);
    for (const auto& r : rows)
        ctx.out << std::left << std::setw(10) << r.a << std::setw(10) << r.b << std::right << std::setw(8) << r.gamma
                << std::setw(10) << r.g2a << std::setw(10) << r.g2b << std::setw(10) << r.v_raw << std::setw(10)
                << r.v_ideal << '\n';
    return 0;
}

NoiseModel parse_noise(const std::string& s)
{
    if (s == "poisson")
        return NoiseModel::Poisson;
    if (s == "none")
        return NoiseModel::None;
    fail(ErrorCode::InvalidArgument, "noise must be 'poisson' or 'none'");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-photon interference modelling and analysis toolkit", "homtool"};
    app.require_subcommand(1);

    // lineshape-fit
    std::string spectrum_path, kind = "voigt", residual_path, weighting = "none";
    auto* lf = app.add_subcommand("lineshape-fit", "Fit a Lorentzian, Gaussian or Voigt profile to a spectrum CSV");
    lf->add_option("spectrum", spectrum_path, "CSV with columns energy_ueV,intensity")->required();
    lf->add_option("--kind", kind, "lorentzian | gaussian | voigt")->capture_default_str();
    lf->add_option("--residuals", residual_path, "write residuals CSV here");
    lf->add_option("--weights", weighting, "none | poisson | relative")->capture_default_str();

    // shared options
    std::string config_path, out_path;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment JSON")->required();
    };

    std::string emitter;
    bool ideal = false;
    auto* g2 = app.add_subcommand("g2", "Autocorrelation trace of one emitter");
    add_config(g2);
    g2->add_option("--emitter", emitter)->required();
    auto* g2_ideal = g2->add_flag("--ideal", ideal, "no detector response");
    g2->add_flag("--convolved", "with detector response (default)")->excludes(g2_ideal);
    g2->add_option("-o,--output", out_path, "CSV path (default: stdout)");

    std::string a, b, polarization;
    double detuning = 0;
    auto* hom = app.add_subcommand("hom", "Two-source cross-correlation trace");
    add_config(hom);
    hom->add_option("--a", a)->required();
    hom->add_option("--b", b)->required();
    hom->add_option("--detuning", detuning, "E_B - E_A in µeV")->capture_default_str();
    hom->add_option("--polarization", polarization, "parallel | orthogonal (default from config)");
    auto* hom_ideal = hom->add_flag("--ideal", ideal, "no detector response");
    hom->add_flag("--convolved", "with detector response (default)")->excludes(hom_ideal);
    hom->add_option("-o,--output", out_path, "CSV path (default: stdout)");

    std::string sweep;
    std::optional<double> at;
    auto* vis = app.add_subcommand("visibility", "Post-selected visibility at one detuning or over a sweep");
    add_config(vis);
    vis->add_option("--a", a)->required();
    vis->add_option("--b", b)->required();
    auto* sweep_opt = vis->add_option("--sweep", sweep, "lo:hi:step in µeV (default from config)");
    vis->add_option("--at", at, "single detuning in µeV")->excludes(sweep_opt);
    vis->add_flag("--ideal", ideal, "no detector response");
    vis->add_option("-o,--output", out_path, "output path (default: stdout)");

    std::optional<double> target, field;
    std::string tune_to;
    auto* stark = app.add_subcommand("stark", "Stark map: energy at a field, or field for an energy");
    add_config(stark);
    stark->add_option("--emitter", emitter)->required();
    stark->add_option("--target", target, "target energy in µeV");
    stark->add_option("--field", field, "field in kV/cm");
    stark->add_option("--tune-to", tune_to, "reference emitter whose centre energy is the target");

    bool table_csv = false;
    auto* table = app.add_subcommand("table", "Per-pair summary of predicted visibilities");
    add_config(table);
    table->add_flag("--csv", table_csv, "CSV instead of an aligned table");

    auto* synth = app.add_subcommand("synth", "Generate synthetic fixtures");
    synth->require_subcommand(1);
    SynthConfig synth_cfg;
    std::string noise = "poisson";
    auto* synth_g2 = synth->add_subcommand("g2", "Monte Carlo coincidence histogram of one emitter");
    add_config(synth_g2);
    synth_g2->add_option("--emitter", emitter)->required();
    synth_g2->add_option("--events", synth_cfg.n_events)->capture_default_str();
    synth_g2->add_option("--seed", synth_cfg.seed)->capture_default_str();
    synth_g2->add_option("--window", synth_cfg.window, "full histogram span in ps")->capture_default_str();
    synth_g2->add_option("--bin", synth_cfg.bin_width, "bin width in ps")->capture_default_str();
    synth_g2->add_option("--noise", noise, "poisson | none")->capture_default_str();
    synth_g2->add_option("-o,--output", out_path, "CSV path (default: stdout)");

    double center = 0, lorentzian_fwhm = 0, gaussian_fwhm = 0, amplitude = 1, offset = 0, span = 0,
           relative_noise = 0;
    int points = 200;
    std::uint64_t seed = 1;
    auto* synth_spec = synth->add_subcommand("spectrum", "Noisy model spectrum");
    synth_spec->add_option("--kind", kind, "lorentzian | gaussian | voigt")->capture_default_str();
    synth_spec->add_option("--center", center, "µeV")->capture_default_str();
    synth_spec->add_option("--lorentzian", lorentzian_fwhm, "Lorentzian FWHM in µeV");
    synth_spec->add_option("--gaussian", gaussian_fwhm, "Gaussian FWHM in µeV");
    synth_spec->add_option("--amplitude", amplitude)->capture_default_str();
    synth_spec->add_option("--offset", offset)->capture_default_str();
    synth_spec->add_option("--points", points)->capture_default_str();
    synth_spec->add_option("--span", span, "total energy span in µeV")->required();
    synth_spec->add_option("--noise", relative_noise, "relative noise, e.g. 0.02")->capture_default_str();
    synth_spec->add_option("--seed", seed)->capture_default_str();
    synth_spec->add_option("-o,--output", out_path, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    const Context ctx{out, err};
    try {
        if (lf->parsed())
            return cmd_lineshape_fit(ctx, spectrum_path, kind, residual_path, weighting);
        const ExperimentConfig cfg = synth_spec->parsed() ? ExperimentConfig{} : load_config(config_path);
        if (g2->parsed())
            return cmd_g2(ctx, cfg, emitter, ideal, out_path);
        if (hom->parsed())
            return cmd_hom(ctx, cfg, a, b, detuning, polarization, ideal, out_path);
        if (vis->parsed())
            return cmd_visibility(ctx, cfg, a, b, sweep, at, ideal, out_path);
        if (stark->parsed())
            return cmd_stark(ctx, cfg, emitter, target, field, tune_to);
        if (table->parsed())
            return cmd_table(ctx, cfg, table_csv);
        if (synth_g2->parsed()) {
            synth_cfg.noise_model = parse_noise(noise);
            const auto& e = cfg.emitter(emitter);
            // Ideal density on a fine grid wide enough for the window plus jitter margin.
            const double reach = synth_cfg.window / 2 + 10 * cfg.detector.sigma();
            const auto ideal_trace = g2_auto_ideal_trace(e.model, make_delay_grid(reach, 2.0));
            const auto hist = sample_coincidences(ideal_trace, cfg.detector, synth_cfg);
            Output o(out_path, out);
            write_trace_csv(o.get(), hist);
            return 0;
        }
        if (synth_spec->parsed()) {
            const LineshapeParams<double> p{parse_kind(kind), center, lorentzian_fwhm, gaussian_fwhm, amplitude, offset};
            const Spectrum spec = make_spectrum(p, points, span, relative_noise, seed);
            Output o(out_path, out);
            write_spectrum_csv(o.get(), spec);
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return is_numerical(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace hom::cli
