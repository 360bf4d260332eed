// Command-line front end: classify | solve | witness | ode-check | decay.
// Exit codes: 0 clean, 1 config/parse error, 2 zeros found (informational),
// 3 inadmissible right-hand side, 4 hypothesis/(DCn) failure, 5 no
// qualifying witness modes.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vekua/vekua.hpp"

namespace {

using vekua::cplx;
using vekua::json;

struct Flags {
    std::string config, rhs, out, kind = "gh_zero";
    double cutoff = 10.0;
    int grid = 0;
    double zero_tol = -1.0;
    int modes = 10;
};

json load_config(const Flags& fl) {
    if (fl.config.empty()) throw vekua::ConfigError("--config is required");
    json cfg = vekua::detail::parse_json_file(fl.config);
    if (fl.grid > 0) cfg["grid"] = fl.grid;
    return cfg;
}

void require_cutoff(const Flags& fl) {
    if (fl.cutoff < 1.0) throw vekua::ConfigError("cutoff must be at least 1");
}

int cmd_classify(const Flags& fl) {
    const json cfg = load_config(fl);
    if (vekua::is_time_config(cfg))
        throw vekua::ConfigError("classify needs a constant-coefficient operator config");
    require_cutoff(fl);
    const vekua::VekuaConstOp P = vekua::const_op_from_config(cfg);
    const vekua::DiophantineReport rep =
        vekua::scan_diophantine(P, fl.cutoff, fl.zero_tol);
    vekua::write_report(vekua::diophantine_report_to_json(rep), fl.out);
    vekua::write_text(vekua::sibling_path(fl.out, "_shells.csv"),
                      vekua::shells_to_csv(rep));
    std::cout << "classify: " << rep.zeros.size() << " zero modes, verdicts "
              << vekua::to_string(rep.verdict_gh) << " / "
              << vekua::to_string(rep.verdict_gs) << "\n";
    return rep.zeros.empty() ? 0 : 2;
}

int solve_const_cmd(const json& cfg, const Flags& fl) {
    const vekua::VekuaConstOp P = vekua::const_op_from_config(cfg);
    const vekua::CoefficientField f = vekua::load_field(P.L.group, fl.rhs);
    const vekua::CoefficientField u = vekua::solve_const(P, f, fl.cutoff);
    vekua::save_field(u, fl.out);

    const vekua::CoefficientField back = vekua::apply_vekua(P, u);
    const vekua::CoefficientField diff =
        vekua::field_combine({1.0, 0.0}, back, {-1.0, 0.0}, f);
    const double residual = vekua::sup_norm(diff) / (1.0 + vekua::sup_norm(f));

    json summary = vekua::report_header(fl.cutoff, json{{"residual_rel", 1e-10}});
    summary["residual"] = residual;
    const auto [w, v] = vekua::field_magnitudes(u);
    try {
        summary["decay_fit"] = vekua::fit_to_json(
            vekua::fit_shell_extrema(w, v, true, vekua::FitMode::decay));
    } catch (const vekua::ConfigError&) {
        summary["decay_fit"] = nullptr;
    }
    vekua::write_report(summary, vekua::sibling_path(fl.out, "_summary.json"));
    std::cout << "solve: residual " << residual << "\n";
    return 0;
}

int solve_time_cmd(const json& cfg, const Flags& fl) {
    const vekua::VekuaTimeOp P = vekua::time_op_from_config(cfg);
    const vekua::TimeCoefficientField f = vekua::load_time_field(P.D.group, fl.rhs);
    vekua::SolveDiagnostics diag;
    vekua::TimeCoefficientField u;
    try {
        u = vekua::solve_timedep(P, f, fl.cutoff, &diag);
    } catch (const vekua::HypothesisError& e) {
        json rep = vekua::hypothesis_report_to_json(vekua::check_hypotheses(P, fl.cutoff));
        rep["failures"] = e.modes;
        rep["error"] = e.what();
        vekua::write_report(rep, fl.out);
        std::cerr << "error: " << e.what() << "\n";
        for (const std::string& m : e.modes) std::cerr << "  " << m << "\n";
        return 4;
    }
    vekua::save_time_field(u, fl.out);

    json summary = vekua::report_header(fl.cutoff, json{{"residual_rel", 1e-4}});
    summary["max_residual"] = diag.max_residual;
    summary["worst_mode"] = diag.worst_mode;
    summary["decay_fit"] =
        diag.decay_fit_ok ? vekua::fit_to_json(diag.decay_fit) : json(nullptr);
    vekua::write_report(summary, vekua::sibling_path(fl.out, "_summary.json"));

    std::ostringstream csv;
    csv.precision(17);
    csv << "mode,rho_re,rho_im,den1_abs,den2_abs,residual\n";
    for (const vekua::ModeResidual& r : diag.residuals)
        csv << r.mode << ',' << r.rho.real() << ',' << r.rho.imag() << ','
            << r.den1_abs << ',' << r.den2_abs << ',' << r.residual << '\n';
    vekua::write_text(vekua::sibling_path(fl.out, "_modes.csv"), csv.str());
    std::cout << "solve: max mode residual " << diag.max_residual << "\n";
    return 0;
}

int cmd_solve(const Flags& fl) {
    const json cfg = load_config(fl);
    require_cutoff(fl);
    if (fl.rhs.empty()) throw vekua::ConfigError("--rhs is required for solve");
    return vekua::is_time_config(cfg) ? solve_time_cmd(cfg, fl)
                                      : solve_const_cmd(cfg, fl);
}

int cmd_witness(const Flags& fl) {
    const json cfg = load_config(fl);
    if (vekua::is_time_config(cfg))
        throw vekua::ConfigError("witness needs a constant-coefficient operator config");
    require_cutoff(fl);
    const vekua::VekuaConstOp P = vekua::const_op_from_config(cfg);

    vekua::WitnessKind kind;
    if (fl.kind == "gh_zero")
        kind = vekua::WitnessKind::gh_zero;
    else if (fl.kind == "gh_necessity")
        kind = vekua::WitnessKind::gh_necessity;
    else if (fl.kind == "gs_fail")
        kind = vekua::WitnessKind::gs_fail;
    else
        throw vekua::ConfigError(
            "--kind must be gh_zero, gh_necessity, or gs_fail");

    // qualifying modes: exact zeros for gh_zero, otherwise the per-rep row
    // with the smallest nonzero |det|
    std::vector<vekua::ModeRef> selected;
    if (kind == vekua::WitnessKind::gh_zero) {
        const vekua::DiophantineReport scan =
            vekua::scan_diophantine(P, fl.cutoff, fl.zero_tol);
        for (const vekua::ZeroMode& z : scan.zeros) {
            if (static_cast<int>(selected.size()) >= fl.modes) break;
            selected.push_back(vekua::ModeRef{z.rep, z.row, z.row});
        }
    } else {
        for (const vekua::RepPoint& r : vekua::enumerate_reps(P.L.group, fl.cutoff)) {
            if (static_cast<int>(selected.size()) >= fl.modes) break;
            const double tol = fl.zero_tol > 0.0 ? fl.zero_tol
                                                 : vekua::singular_tol(P, r);
            bool found = false;
            vekua::EntryIndex best;
            double best_abs = 0.0;
            for (const vekua::EntryIndex& row : vekua::rep_entries(P.L.group, r)) {
                if (kind == vekua::WitnessKind::gs_fail &&
                    vekua::pair_info(P.L.group, r, row, row).self_paired)
                    continue;
                const double ad = std::abs(vekua::discriminant(P, r, row));
                if (ad <= tol) continue;
                if (!found || ad < best_abs) {
                    found = true;
                    best = row;
                    best_abs = ad;
                }
            }
            if (found) selected.push_back(vekua::ModeRef{r, best, best});
        }
    }
    if (selected.empty()) {
        std::cerr << "error: no qualifying modes at cutoff " << fl.cutoff << "\n";
        return 5;
    }

    const vekua::WitnessBundle bundle = vekua::make_witness(P, kind, selected);

    json report = vekua::report_header(fl.cutoff, json{{"verify_sup", 1e-12}});
    report["kind"] = fl.kind;
    report["modes_requested"] = fl.modes;
    report["modes_used"] = selected.size() - bundle.skipped.size();
    report["skipped"] = bundle.skipped;

    if (kind != vekua::WitnessKind::gs_fail) {
        vekua::save_field(bundle.u, vekua::sibling_path(fl.out, "_u.json"));
        const auto [w, v] = vekua::field_magnitudes(bundle.u);
        try {
            report["u_decay_fit"] = vekua::fit_to_json(
                vekua::fit_shell_extrema(w, v, true, vekua::FitMode::decay));
        } catch (const vekua::ConfigError&) {
            report["u_decay_fit"] = nullptr;
        }
    }
    if (kind != vekua::WitnessKind::gh_zero)
        vekua::save_field(bundle.f, vekua::sibling_path(fl.out, "_f.json"));

    if (kind == vekua::WitnessKind::gh_zero) {
        report["pu_sup_norm"] = vekua::sup_norm(vekua::apply_vekua(P, bundle.u));
    } else if (kind == vekua::WitnessKind::gh_necessity) {
        const vekua::CoefficientField diff = vekua::field_combine(
            {1.0, 0.0}, vekua::apply_vekua(P, bundle.u), {-1.0, 0.0}, bundle.f);
        report["pu_minus_f_sup_norm"] = vekua::sup_norm(diff);
    } else {
        json table = json::array();
        for (const vekua::GrowthRow& g : bundle.growth_table)
            table.push_back(json{{"rep", vekua::rep_to_json(g.rep)},
                                 {"row", vekua::entry_to_json(g.row)},
                                 {"abs_det", g.abs_det},
                                 {"reciprocal", g.reciprocal}});
        report["growth_table"] = std::move(table);
    }
    vekua::write_report(report, fl.out);
    std::cout << "witness: " << (selected.size() - bundle.skipped.size())
              << " modes populated\n";
    return 0;
}

int cmd_ode_check(const Flags& fl) {
    const json cfg = load_config(fl);
    if (!vekua::is_time_config(cfg))
        throw vekua::ConfigError("ode-check needs a time-dependent operator config");
    require_cutoff(fl);
    const vekua::VekuaTimeOp P = vekua::time_op_from_config(cfg);
    const vekua::HypothesisReport rep = vekua::check_hypotheses(P, fl.cutoff);
    vekua::write_report(vekua::hypothesis_report_to_json(rep), fl.out);
    std::cout << "ode-check: " << (rep.all_ok() ? "all hypotheses hold" : "failures found")
              << ", e-minimum " << rep.e_min << "\n";
    return rep.all_ok() ? 0 : 4;
}

int cmd_decay(const Flags& fl) {
    const json cfg = load_config(fl);
    const vekua::GroupSpec g = vekua::group_from_json(vekua::require_field(cfg, "group"));
    if (fl.rhs.empty()) throw vekua::ConfigError("--rhs is required for decay");
    const json data = vekua::detail::parse_json_file(fl.rhs);
    std::vector<double> w, v;
    double sup = 0.0;
    if (data.is_array() && !data.empty() && data[0].contains("entries")) {
        const vekua::TimeCoefficientField u = vekua::time_field_from_json(g, data);
        std::tie(w, v) = vekua::time_field_magnitudes(u);
    } else {
        const vekua::CoefficientField u = vekua::field_from_json(g, data);
        std::tie(w, v) = vekua::field_magnitudes(u);
        sup = vekua::sup_norm(u);
    }
    for (double x : v) sup = std::max(sup, x);

    json report = vekua::report_header(fl.cutoff, json{});
    report["sup_norm"] = sup;
    try {
        report["decay_fit"] = vekua::fit_to_json(
            vekua::fit_shell_extrema(w, v, true, vekua::FitMode::decay));
    } catch (const vekua::ConfigError&) {
        report["decay_fit"] = nullptr;
    }
    vekua::write_report(report, fl.out);
    std::cout << "decay: sup norm " << sup << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-mode analysis of Vekua-type operators"};
    app.require_subcommand(1);
    Flags fl;

    auto add_common = [&](CLI::App* cmd, bool with_rhs) {
        cmd->add_option("--config", fl.config, "operator config JSON")->required();
        cmd->add_option("--out", fl.out, "output path")->required();
        cmd->add_option("--cutoff", fl.cutoff, "weight cutoff");
        cmd->add_option("--zero-tol", fl.zero_tol, "absolute zero tolerance override");
        cmd->add_option("--grid", fl.grid, "time grid override");
        if (with_rhs) cmd->add_option("--rhs", fl.rhs, "right-hand side file");
    };

    CLI::App* classify = app.add_subcommand("classify", "scan the discriminant");
    add_common(classify, false);
    CLI::App* solve = app.add_subcommand("solve", "solve Pu = f mode by mode");
    add_common(solve, true);
    CLI::App* witness = app.add_subcommand("witness", "build explicit witnesses");
    add_common(witness, false);
    witness->add_option("--kind", fl.kind, "gh_zero | gh_necessity | gs_fail");
    witness->add_option("--modes", fl.modes, "mode budget");
    CLI::App* ode = app.add_subcommand("ode-check", "check hypotheses a)-e)");
    add_common(ode, false);
    CLI::App* decay = app.add_subcommand("decay", "fit coefficient decay");
    add_common(decay, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (classify->parsed()) return cmd_classify(fl);
        if (solve->parsed()) return cmd_solve(fl);
        if (witness->parsed()) return cmd_witness(fl);
        if (ode->parsed()) return cmd_ode_check(fl);
        if (decay->parsed()) return cmd_decay(fl);
        return 1;
    } catch (const vekua::AdmissibilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const std::string& m : e.modes) std::cerr << "  " << m << "\n";
        return 3;
    } catch (const vekua::HypothesisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const std::string& m : e.modes) std::cerr << "  " << m << "\n";
        return 4;
    } catch (const vekua::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const vekua::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
