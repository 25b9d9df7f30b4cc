#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hill/hill.hpp"

namespace hill::cli {

// Flags shared by every command.
struct Common {
    double rel_tol = PropagationSettings{}.rel_tol;
    double abs_tol = PropagationSettings{}.abs_tol;
    std::uint64_t seed = 1;
    std::string report;  // optional JSON report path

    PropagationSettings propagation() const {
        PropagationSettings p;
        p.rel_tol = rel_tol;
        p.abs_tol = abs_tol;
        p.validate();
        return p;
    }
};

struct Options {
    std::string potential, schedule, out;
    double emin = 0.0, emax = 10.0, lambda = 1.0, R = 2.0, E = 0.0;
    int n = 100;
    std::vector<double> energies, lambdas;
    bool with_ids = false;
    // thin
    double epsilon = 0.25, Lambda = 2.0;
    std::vector<long long> Ns;
    int lambda_grid = 9;
    int max_Nprime = ThinSpecSettings{}.max_Nprime;
    std::size_t max_family = ThinSpecSettings{}.max_family;
    double max_total_period = ThinSpecSettings{}.max_total_period;
    int growth_samples = 0;
    bool with_potential = false;
    // hd0
    double epsilon0 = 0.5;
    int depth = 2;
    bool keep_partial = false;
    // gordon
    double period = 1.0, bound = 0.0;
    int grid_density = 64;
    // cover
    double alpha = 0.5;
    int window_index = 1, level = 0;
    // verify-ids-bound
    double Q = 2.0, C1 = 0.0;
    int trials = C1EstimateSettings{}.trials;
};

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(17) << x;
    return os.str();
}

inline json base_config(const std::string& command, const Common& c) {
    return json{{"command", command},
                {"rel_tol", c.rel_tol},
                {"abs_tol", c.abs_tol},
                {"seed", c.seed},
                {"threads_env", std::getenv("FLOQUET_THREADS") ? std::getenv("FLOQUET_THREADS") : ""}};
}

inline void emit_report(const Common& c, const json& report) {
    if (!c.report.empty()) write_text_file(c.report, report.dump(2) + "\n");
}

inline void write_or_print(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) out << text;
    else write_text_file(path, text);
}

} // namespace detail

// Parses argv (argv[0] is the program name) and runs the selected command.
// Returns 0 on success, 1 on domain errors and 2 on usage errors.
inline int run(const std::vector<std::string>& argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Hill operator toolkit: discriminants, bands, IDS, thin spectra and limit-periodic schedules"};
    app.require_subcommand(1);
    Common c;
    Options o;
    app.add_option("--rel-tol", c.rel_tol, "integrator relative tolerance")->capture_default_str();
    app.add_option("--abs-tol", c.abs_tol, "integrator absolute tolerance")->capture_default_str();
    app.add_option("--seed", c.seed, "seed for randomized searches")->capture_default_str();
    app.add_option("--report", c.report, "write a JSON report with the effective configuration");

    auto potential_opt = [&](CLI::App* s) {
        s->add_option("--potential", o.potential, "potential JSON file")->required()->check(CLI::ExistingFile);
    };

    auto* disc = app.add_subcommand("disc", "discriminant scan to CSV");
    potential_opt(disc);
    disc->add_option("--emin", o.emin)->capture_default_str();
    disc->add_option("--emax", o.emax)->capture_default_str();
    disc->add_option("--n", o.n, "number of energies")->check(CLI::PositiveNumber)->capture_default_str();
    disc->add_option("--lambda", o.lambda, "coupling")->check(CLI::PositiveNumber)->capture_default_str();
    disc->add_option("--out", o.out, "CSV output (stdout if omitted)");

    auto* bands = app.add_subcommand("bands", "band table in [-R, R]");
    potential_opt(bands);
    bands->add_option("--R", o.R)->check(CLI::PositiveNumber)->capture_default_str();
    bands->add_option("--lambda", o.lambda)->check(CLI::PositiveNumber)->capture_default_str();
    bands->add_flag("--ids", o.with_ids, "integrate the IDS mass of each complete band");
    bands->add_option("--out", o.out, "CSV output");

    auto* lyap = app.add_subcommand("lyap", "Lyapunov exponent");
    potential_opt(lyap);
    lyap->add_option("--E", o.energies, "energies (repeatable)");
    lyap->add_option("--emin", o.emin);
    lyap->add_option("--emax", o.emax);
    lyap->add_option("--n", o.n)->check(CLI::PositiveNumber);
    lyap->add_option("--lambda", o.lambda)->check(CLI::PositiveNumber)->capture_default_str();
    lyap->add_option("--out", o.out, "CSV output");

    auto* ids = app.add_subcommand("ids", "IDS derivative dk/dE at an in-band energy");
    potential_opt(ids);
    ids->add_option("--E", o.energies, "energies (repeatable)")->required();
    ids->add_option("--lambda", o.lambda)->check(CLI::PositiveNumber)->capture_default_str();

    auto* measure = app.add_subcommand("measure", "Lebesgue measure of the spectrum in [-R, R]");
    potential_opt(measure);
    measure->add_option("--R", o.R)->check(CLI::PositiveNumber)->capture_default_str();
    measure->add_option("--lambda", o.lambdas, "couplings (repeatable)");

    auto* thin = app.add_subcommand("thin", "thin-spectrum construction and measure table");
    potential_opt(thin);
    thin->add_option("--epsilon", o.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
    thin->add_option("--R", o.R)->capture_default_str();
    thin->add_option("--Lambda", o.Lambda)->capture_default_str();
    thin->add_option("--N", o.Ns, "period multipliers (repeatable)")->required();
    thin->add_option("--lambda-grid", o.lambda_grid)->check(CLI::PositiveNumber)->capture_default_str();
    thin->add_option("--max-nprime", o.max_Nprime)->check(CLI::PositiveNumber)->capture_default_str();
    thin->add_option("--max-family", o.max_family)->check(CLI::PositiveNumber)->capture_default_str();
    thin->add_option("--max-total-period", o.max_total_period, "budget for the assembled period")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    thin->add_option("--growth-samples", o.growth_samples)->capture_default_str();
    thin->add_flag("--with-potential", o.with_potential, "embed the assembled potentials");
    thin->add_option("--out", o.out, "JSON report")->required();

    auto* hd0 = app.add_subcommand("hd0", "limit-periodic level schedule");
    potential_opt(hd0);
    hd0->add_option("--epsilon0", o.epsilon0)->check(CLI::PositiveNumber)->capture_default_str();
    hd0->add_option("--depth", o.depth)->check(CLI::PositiveNumber)->capture_default_str();
    hd0->add_option("--N", o.Ns, "N_1,N_2,...")->delimiter(',')->required();
    hd0->add_option("--max-nprime", o.max_Nprime)->check(CLI::PositiveNumber)->capture_default_str();
    hd0->add_option("--max-family", o.max_family)->check(CLI::PositiveNumber)->capture_default_str();
    hd0->add_option("--max-total-period", o.max_total_period, "budget for the assembled period")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    hd0->add_flag("--keep-partial", o.keep_partial, "record a failing level instead of aborting");
    hd0->add_option("--out", o.out, "schedule JSON")->required();

    auto* gordon = app.add_subcommand("gordon", "translation defect max |V(x) - V(x + T)| over |x| <= T");
    potential_opt(gordon);
    gordon->add_option("--period", o.period)->check(CLI::PositiveNumber)->required();
    gordon->add_option("--grid-density", o.grid_density)->check(CLI::PositiveNumber)->capture_default_str();
    gordon->add_option("--bound", o.bound, "reference bound for the ratio")->capture_default_str();

    auto* cover = app.add_subcommand("cover", "band cover sum of a schedule level");
    cover->add_option("--schedule", o.schedule)->required()->check(CLI::ExistingFile);
    cover->add_option("--alpha", o.alpha)->capture_default_str();
    cover->add_option("--lambda", o.lambda)->capture_default_str();
    cover->add_option("--window-index", o.window_index)->capture_default_str();
    cover->add_option("--level", o.level, "level n (default: deepest)");
    cover->add_option("--out", o.out, "JSON output");

    auto* vib = app.add_subcommand("verify-ids-bound", "check dk/dE >= C0 mean ||M||^2");
    potential_opt(vib);
    vib->add_option("--E", o.energies, "energies (repeatable)")->required();
    vib->add_option("--Q", o.Q)->capture_default_str();
    vib->add_option("--R", o.R)->capture_default_str();
    vib->add_option("--C1", o.C1, "use this C1 instead of the randomized estimate");
    vib->add_option("--trials", o.trials)->check(CLI::PositiveNumber)->capture_default_str();

    std::vector<const char*> args;
    for (const auto& a : argv) args.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage: " << e.what() << "\n";
        return 2;
    }

    try {
        const PropagationSettings cfg = c.propagation();
        BandSettings bs;
        bs.propagation = cfg;
        QuadratureSettings qs;
        qs.propagation = cfg;

        if (*disc) {
            if (!(o.emax > o.emin)) throw InvalidArgument("usage", "--emax must exceed --emin");
            Potential V = scale(load_potential(o.potential), o.lambda);
            std::vector<std::pair<double, double>> rows(static_cast<std::size_t>(o.n));
            parallel_for(rows.size(), [&](std::size_t i) {
                double E = o.n == 1 ? o.emin : o.emin + (o.emax - o.emin) * static_cast<double>(i) / (o.n - 1);
                rows[i] = {E, discriminant(V, E, cfg)};
            });
            std::ostringstream csv;
            write_discriminant_csv(csv, rows);
            detail::write_or_print(o.out, csv.str(), out);
            json cfgj = detail::base_config("disc", c);
            cfgj.update({{"potential", o.potential}, {"emin", o.emin}, {"emax", o.emax}, {"n", o.n},
                         {"lambda", o.lambda}, {"out", o.out}, {"propagation", to_json(cfg)}});
            detail::emit_report(c, {{"config", cfgj}, {"rows", rows.size()}});
            (o.out.empty() ? err : out) << "disc: " << rows.size() << " rows\n";
            return 0;
        }

        if (*bands) {
            Potential V = scale(load_potential(o.potential), o.lambda);
            BandStructure b = band_structure(V, o.R, bs);
            std::vector<double> masses;
            if (o.with_ids) {
                masses.assign(b.bands.size(), std::nan(""));
                parallel_for(b.bands.size(), [&](std::size_t i) {
                    const Band& band = b.bands[i];
                    if (band.lo_kind == EdgeKind::window || band.hi_kind == EdgeKind::window) return;
                    if (band.slope_length >= 0.0) return;
                    masses[i] = ids_mass(V, band, 24, qs);
                });
            }
            std::ostringstream csv;
            write_band_csv(csv, b.bands, masses);
            if (!o.out.empty()) write_text_file(o.out, csv.str());
            out << csv.str();
            json cfgj = detail::base_config("bands", c);
            cfgj.update({{"potential", o.potential}, {"R", o.R}, {"lambda", o.lambda}, {"ids", o.with_ids},
                         {"out", o.out}, {"band_settings", to_json(bs)}});
            json rep{{"config", cfgj}, {"bands", to_json(b)}};
            if (o.with_ids) rep["ids_mass"] = masses;
            detail::emit_report(c, rep);
            out << "bands: " << b.bands.size() << " bands in [" << detail::fmt(-o.R) << ", " << detail::fmt(o.R)
                << "], measure " << detail::fmt(b.measure()) << ", bound " << b.bound << "\n";
            return 0;
        }

        if (*lyap) {
            Potential V = scale(load_potential(o.potential), o.lambda);
            std::vector<double> Es = o.energies;
            if (Es.empty()) {
                if (!(o.emax > o.emin)) throw InvalidArgument("usage", "give --E or a range with --emax > --emin");
                for (int i = 0; i < o.n; ++i)
                    Es.push_back(o.n == 1 ? o.emin : o.emin + (o.emax - o.emin) * i / (o.n - 1.0));
            }
            std::vector<double> L(Es.size());
            parallel_for(Es.size(), [&](std::size_t i) { L[i] = lyapunov(V, Es[i], cfg); });
            std::ostringstream csv;
            csv.imbue(std::locale::classic());
            csv << "E,L\n" << std::setprecision(17);
            for (std::size_t i = 0; i < Es.size(); ++i) csv << Es[i] << ',' << L[i] << '\n';
            detail::write_or_print(o.out, csv.str(), out);
            json cfgj = detail::base_config("lyap", c);
            cfgj.update({{"potential", o.potential}, {"energies", Es}, {"lambda", o.lambda}, {"out", o.out},
                         {"propagation", to_json(cfg)}});
            detail::emit_report(c, {{"config", cfgj}, {"L", L}});
            (o.out.empty() ? err : out) << "lyap: " << Es.size() << " energies\n";
            return 0;
        }

        if (*ids) {
            Potential V = scale(load_potential(o.potential), o.lambda);
            std::vector<double> d(o.energies.size());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = ids_derivative(V, o.energies[i], qs);
            json cfgj = detail::base_config("ids", c);
            cfgj.update({{"potential", o.potential}, {"energies", o.energies}, {"lambda", o.lambda},
                         {"quadrature", to_json(qs)}});
            detail::emit_report(c, {{"config", cfgj}, {"dk_dE", d}});
            for (std::size_t i = 0; i < d.size(); ++i)
                out << "ids: E = " << detail::fmt(o.energies[i]) << " dk/dE = " << detail::fmt(d[i]) << "\n";
            return 0;
        }

        if (*measure) {
            Potential V = load_potential(o.potential);
            std::vector<double> ls = o.lambdas.empty() ? std::vector<double>{1.0} : o.lambdas;
            std::vector<double> m(ls.size());
            for (std::size_t i = 0; i < ls.size(); ++i) m[i] = spectrum_measure(V, ls[i], o.R, bs);
            json cfgj = detail::base_config("measure", c);
            cfgj.update({{"potential", o.potential}, {"R", o.R}, {"lambdas", ls}, {"band_settings", to_json(bs)}});
            detail::emit_report(c, {{"config", cfgj}, {"measures", m}});
            for (std::size_t i = 0; i < ls.size(); ++i)
                out << "measure: lambda = " << detail::fmt(ls[i]) << " Leb = " << detail::fmt(m[i]) << "\n";
            return 0;
        }

        if (*thin) {
            Potential V = load_potential(o.potential);
            ThinSpecSettings ts;
            ts.seed = c.seed;
            ts.bands = bs;
            ts.max_Nprime = o.max_Nprime;
            ts.max_family = o.max_family;
            ts.max_total_period = o.max_total_period;
            json cfgj = detail::base_config("thin", c);
            cfgj.update({{"potential", o.potential}, {"epsilon", o.epsilon}, {"R", o.R}, {"Lambda", o.Lambda},
                         {"N", o.Ns}, {"lambda_grid", o.lambda_grid}, {"growth_samples", o.growth_samples},
                         {"thin_settings", to_json(ts)}});
            ThinSpecCover cov = prepare_thin_cover(V, o.epsilon, o.R, o.Lambda, ts);
            auto lambdas = log_spaced(1.0 / o.Lambda, o.Lambda, o.Lambda == 1.0 ? 1 : o.lambda_grid);
            json runs = json::array();
            double last = 0.0;
            for (long long N : o.Ns) {
                ThinSpecPlan p = assemble_thin_plan(cov, N, ts);
                ThinSpecReport r = verify_thin(p, lambdas, std::nullopt, bs);
                json run{{"plan", to_json(p, o.with_potential)}, {"report", to_json(r)}};
                if (o.growth_samples > 0) {
                    json g = json::array();
                    for (const auto& s : check_local_growth(p, lambdas, static_cast<std::size_t>(o.growth_samples),
                                                            c.seed, 1e-6, bs))
                        g.push_back({{"E", s.E}, {"lambda", s.lambda}, {"block", s.block}, {"L", s.L},
                                     {"log_norm", s.log_norm}, {"log_required", s.log_required},
                                     {"growth_ok", s.growth_ok}, {"elliptic", s.elliptic},
                                     {"log_conj", s.log_conj}, {"log_conj_required", s.log_conj_required},
                                     {"conj_ok", s.conj_ok}});
                    run["growth"] = g;
                }
                runs.push_back(run);
                last = r.max_measure;
            }
            json rep{{"config", cfgj}, {"cover", to_json(cov)}, {"runs", runs}};
            write_text_file(o.out, rep.dump(2) + "\n");
            detail::emit_report(c, rep);
            out << "thin: N' = " << cov.Nprime << ", l = " << cov.ell() << ", eta = " << detail::fmt(cov.floor.eta)
                << ", " << o.Ns.size() << " runs, last max measure " << detail::fmt(last) << "\n";
            return 0;
        }

        if (*hd0) {
            Potential V = load_potential(o.potential);
            Hd0Settings hs;
            hs.keep_partial = o.keep_partial;
            hs.thin.seed = c.seed;
            hs.thin.bands = bs;
            hs.thin.max_Nprime = o.max_Nprime;
            hs.thin.max_family = o.max_family;
            hs.thin.max_total_period = o.max_total_period;
            Hd0Schedule s = hd0_sequence(V, o.epsilon0, o.depth, o.Ns, hs);
            json cfgj = detail::base_config("hd0", c);
            cfgj.update({{"potential", o.potential}, {"epsilon0", o.epsilon0}, {"depth", o.depth}, {"N", o.Ns},
                         {"keep_partial", o.keep_partial}, {"lambda_points", hs.lambda_points},
                         {"underflow", hs.underflow}, {"Lambda_n", "2^n"}, {"r_n", "2^n"},
                         {"thin_settings", to_json(hs.thin)}});
            json rep = to_json(s);
            rep["config"] = cfgj;
            write_text_file(o.out, rep.dump(2) + "\n");
            detail::emit_report(c, rep);
            out << "hd0: " << s.levels.size() << " of " << o.depth << " levels"
                << (s.complete ? "" : ", stopped: " + s.stop_reason) << "\n";
            return 0;
        }

        if (*gordon) {
            Potential V = load_potential(o.potential);
            GordonReport g = gordon_defect(V, o.period, o.grid_density, o.bound);
            json cfgj = detail::base_config("gordon", c);
            cfgj.update({{"potential", o.potential}, {"period", o.period}, {"grid_density", o.grid_density},
                         {"bound", o.bound}});
            detail::emit_report(c, {{"config", cfgj}, {"gordon", to_json(g)}});
            out << "gordon: T = " << detail::fmt(o.period) << " defect " << detail::fmt(g.defect) << "\n";
            return 0;
        }

        if (*cover) {
            Hd0Schedule s = schedule_from_json(read_json_file(o.schedule));
            if (s.levels.empty()) throw InvalidArgument("limitperiodic", "schedule has no completed level");
            int n = o.level > 0 ? o.level : s.levels.back().n;
            CoverSum cs = hausdorff_upper_bound(s, n, o.alpha, o.lambda, o.window_index, bs);
            json cfgj = detail::base_config("cover", c);
            cfgj.update({{"schedule", o.schedule}, {"alpha", o.alpha}, {"lambda", o.lambda},
                         {"window_index", o.window_index}, {"level", n}, {"band_settings", to_json(bs)}});
            json rep{{"config", cfgj}, {"cover", to_json(cs)}};
            if (!o.out.empty()) write_text_file(o.out, rep.dump(2) + "\n");
            detail::emit_report(c, rep);
            out << "cover: level " << n << " sum " << detail::fmt(cs.sum) << " over " << cs.intervals.size()
                << " intervals, comparison bound " << detail::fmt(cs.comparison_bound) << "\n";
            return 0;
        }

        if (*vib) {
            Potential V = load_potential(o.potential);
            C1EstimateSettings ces;
            ces.trials = o.trials;
            ces.propagation = cfg;
            double C1 = o.C1 > 0.0 ? o.C1 : estimate_C1(&V, o.Q, o.R, c.seed, ces);
            LemmaConstants k = LemmaConstants::from_C1(o.Q, o.R, C1);
            json checks = json::array();
            bool all = true;
            for (double E : o.energies) {
                IdsBoundCheck r = verify_ids_bound(V, E, k, qs);
                all = all && r.holds;
                checks.push_back({{"E", E}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.holds}});
                out << "verify-ids-bound: E = " << detail::fmt(E) << " lhs " << detail::fmt(r.lhs) << " rhs "
                    << detail::fmt(r.rhs) << (r.holds ? " holds" : " FAILS") << "\n";
            }
            json cfgj = detail::base_config("verify-ids-bound", c);
            cfgj.update({{"potential", o.potential}, {"energies", o.energies}, {"Q", o.Q}, {"R", o.R},
                         {"C1_given", o.C1 > 0.0}, {"trials", o.trials}, {"quadrature", to_json(qs)}});
            detail::emit_report(c, {{"config", cfgj}, {"constants", to_json(k)}, {"checks", checks}});
            if (!all) {
                err << "verify-ids-bound: inequality violated\n";
                return 1;
            }
            return 0;
        }
    } catch (const Error& e) {
        if (e.stage() == "usage") {
            err << "usage: " << e.message() << "\n";
            return 2;
        }
        err << "error [" << e.stage() << "]: " << e.message() << "\n";
        return 1;
    } catch (const json::exception& e) {
        err << "error [io]: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace hill::cli
