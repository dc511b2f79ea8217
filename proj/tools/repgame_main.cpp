// repgame: equilibrium, simulation, and calibration toolkit for the
// suspicion-level blocking game.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "repgame/analysis.hpp"
#include "repgame/calibration.hpp"
#include "repgame/equilibrium.hpp"
#include "repgame/sim.hpp"

using nlohmann::json;
using namespace repgame;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kDaysPerYear = 365.0;

enum ExitCode : int { kOk = 0, kComputeFail = 1, kUsage = 2 };

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string provenance(int argc, char** argv, std::uint64_t seed) {
    std::ostringstream os;
    os << "repgame " << kVersion << " |";
    for (int i = 1; i < argc; ++i) os << ' ' << argv[i];
    os << " | seed=" << seed;
    return os.str();
}

struct CommonFlags {
    double M = 100.0;
    double l = 1.52;
    double r = 0.39;
    double sigma = 4.1;  // defaults: the global-average calibration
    std::string output;
    std::string format = "csv";

    ModelParams params() const { return ModelParams{M, l, r, sigma}; }
};

void add_model_flags(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--M", fl.M, "Attack intensity cap")->capture_default_str();
    cmd->add_option("--l", fl.l, "False alarm cost (millions)")->capture_default_str();
    cmd->add_option("--r", fl.r, "Termination rate (per year)")->capture_default_str();
    cmd->add_option("--sigma", fl.sigma, "Signal noise intensity")->capture_default_str();
}

void add_output_flags(CLI::App* cmd, CommonFlags& fl) {
    cmd->add_option("--output", fl.output, "Output file path")->required();
    cmd->add_option("--format", fl.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

struct SimFlags {
    std::size_t n = 10000;
    double dt_days = 0.1;
    double horizon_years = 0.0;
    std::uint64_t seed = 1;
    double q0 = 0.14;
    double x_true = 0.14;

    SimConfig config() const {
        SimConfig cfg;
        cfg.n_paths = n;
        cfg.dt = dt_days / kDaysPerYear;
        cfg.horizon = horizon_years;
        cfg.seed = seed;
        cfg.q0 = q0;
        cfg.x_true = x_true;
        return cfg;
    }
};

void add_sim_flags(CLI::App* cmd, SimFlags& fl) {
    cmd->add_option("--n", fl.n, "Number of simulated suspects")->capture_default_str();
    cmd->add_option("--dt", fl.dt_days, "Euler step in days")->capture_default_str();
    cmd->add_option("--horizon-years", fl.horizon_years, "Time cap in years (0 = 10/r)")
        ->capture_default_str();
    cmd->add_option("--seed", fl.seed, "Root RNG seed")->capture_default_str();
    cmd->add_option("--q0", fl.q0, "Initial suspicion level")->capture_default_str();
    cmd->add_option("--x-true", fl.x_true, "Actual attacker fraction")->capture_default_str();
}

int cmd_equilibrium(const CommonFlags& fl, const std::string& prov) {
    Equilibrium eq(fl.params());
    const auto opt = optimal_attack_prob(eq);
    const auto& d = eq.constants();
    const auto grid = default_sweep_grid();

    auto out = open_output(fl.output);
    if (fl.format == "csv") {
        out << "# " << prov << "\n";
        out << "# regime=" << to_string(eq.regime()) << " a=" << format_double(d.a)
            << " b=" << format_double(d.b) << " c=" << format_double(d.c)
            << " log_gap=" << format_double(d.log_gap) << "\n";
        out << "# p=" << format_double(d.p) << " q_star=" << format_double(d.q_star)
            << " q_hat=" << format_double(opt.q_hat)
            << " objective=" << format_double(opt.objective) << "\n";
        out << "q,alpha,value_attacker,cost_defender,blocking_prob\n";
        for (double q : grid) {
            out << format_double(q) << ',' << format_double(eq.attack_intensity(q)) << ','
                << format_double(eq.attacker_value(q)) << ','
                << format_double(eq.defender_cost(q)) << ',';
            if (q <= d.p) out << format_double(eq.blocking_prob(q));
            out << '\n';
        }
    } else {
        json j;
        j["provenance"] = prov;
        j["params"] = {{"M", fl.M}, {"l", fl.l}, {"r", fl.r}, {"sigma", fl.sigma}};
        j["regime"] = to_string(eq.regime());
        j["constants"] = {{"a", d.a},     {"b", d.b},           {"c", d.c},
                          {"p", d.p},     {"q_star", d.q_star}, {"log_gap", d.log_gap}};
        j["q_hat"] = opt.q_hat;
        j["objective"] = opt.objective;
        json curves;
        for (double q : grid) {
            curves["q"].push_back(q);
            curves["alpha"].push_back(eq.attack_intensity(q));
            curves["value_attacker"].push_back(eq.attacker_value(q));
            curves["cost_defender"].push_back(eq.defender_cost(q));
            if (q <= d.p) curves["blocking_prob"].push_back(eq.blocking_prob(q));
            else curves["blocking_prob"].push_back(nullptr);
        }
        j["curves"] = std::move(curves);
        out << j.dump(2) << '\n';
    }
    std::cout << "p=" << format_double(d.p) << " q_hat=" << format_double(opt.q_hat) << '\n';
    return kOk;
}

int cmd_simulate(const CommonFlags& fl, const SimFlags& sfl, const std::string& prov) {
    Equilibrium eq(fl.params());
    SimConfig cfg = sfl.config();
    cfg.collect_outcomes = true;
    const MonteCarloResult res = run_population(eq, cfg);

    auto out = open_output(fl.output);
    if (fl.format == "csv") {
        out << "# " << prov << "\n";
        out << "# mu_theta=" << format_double(res.mu_theta)
            << " n_blocked=" << res.n_blocked << " n_terminated=" << res.n_terminated
            << " n_running=" << res.n_running << "\n";
        out << "path,theta,blocked,terminated,stop_time,terminal_q\n";
        for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
            const auto& o = res.outcomes[i];
            out << i << ',' << int(o.theta) << ',' << int(o.blocked) << ','
                << int(o.terminated) << ',' << format_double(o.stop_time) << ','
                << format_double(o.terminal_q) << '\n';
        }
    } else {
        json j;
        j["provenance"] = prov;
        j["mu_theta"] = res.mu_theta;
        j["n_blocked"] = res.n_blocked;
        j["n_terminated"] = res.n_terminated;
        j["n_running"] = res.n_running;
        json paths = json::array();
        for (std::size_t i = 0; i < res.outcomes.size(); ++i) {
            const auto& o = res.outcomes[i];
            paths.push_back({{"path", i},
                             {"theta", int(o.theta)},
                             {"blocked", o.blocked},
                             {"terminated", o.terminated},
                             {"stop_time", o.stop_time},
                             {"terminal_q", o.terminal_q}});
        }
        j["paths"] = std::move(paths);
        out << j.dump(2) << '\n';
    }
    if (res.horizon_warning) {
        std::cerr << "warning: " << res.n_running
                  << " paths still running at the horizon (fraction above 1e-3)\n";
    }
    std::cout << "mu_theta=" << format_double(res.mu_theta) << '\n';
    return kOk;
}

int cmd_estimate(const CommonFlags& fl, const SimFlags& sfl, const std::string& prov) {
    Equilibrium eq(fl.params());
    SimConfig cfg = sfl.config();
    cfg.collect_outcomes = false;
    const MonteCarloResult res = run_population(eq, cfg);

    auto out = open_output(fl.output);
    if (fl.format == "csv") {
        out << "# " << prov << "\n";
        out << "# mu_theta=" << format_double(res.mu_theta)
            << " mu_theta_se=" << format_double(res.mu_theta_se)
            << " n_blocked=" << res.n_blocked << "\n";
        out << "t,br,ee,ee_lo95,ee_hi95,ee_lo99,ee_hi99\n";
        for (std::size_t j = 0; j < res.times.size(); ++j) {
            out << format_double(res.times[j]) << ',' << format_double(res.br[j]) << ','
                << format_double(res.ee[j]) << ',' << format_double(res.ee_lo95[j]) << ','
                << format_double(res.ee_hi95[j]) << ',' << format_double(res.ee_lo99[j]) << ','
                << format_double(res.ee_hi99[j]) << '\n';
        }
    } else {
        json j;
        j["provenance"] = prov;
        j["mu_theta"] = res.mu_theta;
        j["mu_theta_se"] = res.mu_theta_se;
        j["n_blocked"] = res.n_blocked;
        j["t"] = res.times;
        j["br"] = res.br;
        j["ee"] = res.ee;
        j["ee_lo95"] = res.ee_lo95;
        j["ee_hi95"] = res.ee_hi95;
        j["ee_lo99"] = res.ee_lo99;
        j["ee_hi99"] = res.ee_hi99;
        out << j.dump(2) << '\n';
    }
    std::cout << "mu_theta=" << format_double(res.mu_theta) << " +/- "
              << format_double(res.mu_theta_se) << '\n';
    return kOk;
}

int cmd_sweep(const CommonFlags& fl, const std::string& vary,
              const std::vector<double>& values, const std::string& prov) {
    const auto grid = default_sweep_grid();
    const auto rows = comparative_statics(fl.params(), vary, values, grid);

    auto out = open_output(fl.output);
    if (fl.format == "csv") {
        out << "# " << prov << "\n";
        out << "parameter,value,p,q_star,q_hat";
        for (double q : grid) out << ",alpha@" << q;
        out << '\n';
        for (const auto& row : rows) {
            out << row.parameter << ',' << format_double(row.value) << ','
                << format_double(row.p) << ',' << format_double(row.q_star) << ','
                << format_double(row.q_hat);
            for (double a : row.alpha) out << ',' << format_double(a);
            out << '\n';
        }
    } else {
        json j;
        j["provenance"] = prov;
        j["q_grid"] = grid;
        json jrows = json::array();
        for (const auto& row : rows) {
            jrows.push_back({{"parameter", row.parameter},
                             {"value", row.value},
                             {"p", row.p},
                             {"q_star", row.q_star},
                             {"q_hat", row.q_hat},
                             {"alpha", row.alpha}});
        }
        j["rows"] = std::move(jrows);
        out << j.dump(2) << '\n';
    }
    return kOk;
}

int cmd_calibrate(const CommonFlags& fl, const std::string& input, const std::string& prov) {
    const auto targets = ingest_table(input, fl.l, fl.M);
    const auto results = calibrate_all(targets);

    auto out = open_output(fl.output);
    if (fl.format == "csv") {
        out << "# " << prov << "\n";
        out << "industry,r,sigma,q_hat,fitted_cost,fitted_days,alpha_over_sigma,converged,"
               "residual_norm\n";
        for (const auto& res : results) {
            out << res.industry << ',' << format_double(res.r) << ','
                << format_double(res.sigma) << ',' << format_double(res.q_hat) << ','
                << format_double(res.fitted_cost) << ',' << format_double(res.fitted_days)
                << ',' << format_double(res.alpha_over_sigma) << ','
                << (res.converged ? "true" : "false") << ','
                << format_double(res.residual_norm) << '\n';
        }
    } else {
        json j;
        j["provenance"] = prov;
        json jrows = json::array();
        for (const auto& res : results) {
            jrows.push_back({{"industry", res.industry},
                             {"r", res.r},
                             {"sigma", res.sigma},
                             {"q_hat", res.q_hat},
                             {"fitted_cost", res.fitted_cost},
                             {"fitted_days", res.fitted_days},
                             {"alpha_over_sigma", res.alpha_over_sigma},
                             {"converged", res.converged},
                             {"residual_norm", res.residual_norm}});
        }
        j["rows"] = std::move(jrows);
        out << j.dump(2) << '\n';
    }
    bool all_ok = true;
    for (const auto& res : results) {
        if (!res.converged) {
            all_ok = false;
            std::cerr << "calibration failed for " << res.industry << ": " << res.message
                      << '\n';
        }
    }
    std::cout << results.size() << " rows calibrated\n";
    return all_ok ? kOk : kComputeFail;
}

int cmd_verify(const CommonFlags& fl, std::size_t n_paths, std::uint64_t seed, bool perturb) {
    Equilibrium eq(fl.params());
    VerifyOptions opt;
    if (perturb) opt.tamper_value_scale = 1.01;  // negative-control hook
    const ResidualReport rep = verify_closed_forms(eq, opt);

    auto line = [](const char* name, double value, bool ok) {
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " residual=" << value << '\n';
    };
    line("attacker value ODE", rep.max_attacker_residual, rep.attacker_ok);
    line("defender cost ODE", rep.max_defender_residual, rep.defender_ok);
    line("blocking probability ODE", rep.max_blocking_residual, rep.blocking_ok);
    line("smooth fit at threshold", rep.smooth_fit_error, rep.smooth_fit_ok);

    bool sim_ok = true;
    if (n_paths > 0) {
        SimConfig cfg;
        cfg.n_paths = n_paths;
        cfg.seed = seed;
        cfg.q0 = 0.5 * eq.stopping_threshold();
        cfg.x_true = 1.0;
        cfg.collect_outcomes = false;
        cfg.collect_mean_q = false;
        const MonteCarloResult res = run_population(eq, cfg);
        const double u_true = eq.blocking_prob(cfg.q0);
        const double u_hat =
            static_cast<double>(res.n_blocked) / static_cast<double>(cfg.n_paths);
        const double se =
            std::sqrt(std::max(u_hat * (1.0 - u_hat), 1e-12) / static_cast<double>(cfg.n_paths));
        const double z = (u_hat - u_true) / se;
        sim_ok = std::fabs(z) <= 4.0;
        std::cout << (sim_ok ? "[PASS] " : "[FAIL] ") << "simulated hitting probability z="
                  << z << " (u_sim=" << u_hat << ", u=" << u_true << ")\n";
    }
    return rep.all_ok() && sim_ok ? kOk : kComputeFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-form equilibrium, Monte-Carlo estimation, and industry calibration "
                 "for the suspicion-level blocking game"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "TOML config file with one [subcommand] section per command; "
                   "explicit flags take precedence");
    app.set_version_flag("--version", kVersion);

    CommonFlags eq_fl;
    auto* eq_cmd = app.add_subcommand("equilibrium",
                                      "Derived constants and equilibrium curves on a q grid");
    add_model_flags(eq_cmd, eq_fl);
    add_output_flags(eq_cmd, eq_fl);

    CommonFlags sim_fl;
    SimFlags sim_sfl;
    auto* sim_cmd = app.add_subcommand("simulate", "Per-suspect simulation outcomes");
    add_model_flags(sim_cmd, sim_fl);
    add_sim_flags(sim_cmd, sim_sfl);
    add_output_flags(sim_cmd, sim_fl);

    CommonFlags est_fl;
    SimFlags est_sfl;
    auto* est_cmd = app.add_subcommand(
        "estimate", "Blocked-ratio series and the attacker-fraction estimator");
    add_model_flags(est_cmd, est_fl);
    add_sim_flags(est_cmd, est_sfl);
    add_output_flags(est_cmd, est_fl);

    CommonFlags sweep_fl;
    std::string vary;
    std::vector<double> values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Comparative statics over one parameter");
    add_model_flags(sweep_cmd, sweep_fl);
    sweep_cmd->add_option("--vary", vary, "Parameter to vary: M, l, r or sigma")
        ->required()
        ->check(CLI::IsMember({"M", "l", "r", "sigma"}));
    sweep_cmd->add_option("--values", values, "Comma-separated parameter values")
        ->required()
        ->delimiter(',');
    add_output_flags(sweep_cmd, sweep_fl);

    CommonFlags cal_fl;
    std::string input;
    auto* cal_cmd = app.add_subcommand("calibrate", "Recover (r, sigma) per industry row");
    add_model_flags(cal_cmd, cal_fl);
    cal_cmd->add_option("--input", input, "CSV: industry,avg_cost_musd,avg_days")
        ->required()
        ->check(CLI::ExistingFile);
    add_output_flags(cal_cmd, cal_fl);

    CommonFlags ver_fl;
    std::size_t ver_n = 20000;
    std::uint64_t ver_seed = 1;
    bool perturb = false;
    auto* ver_cmd = app.add_subcommand("verify",
                                       "Residual oracle for the closed forms plus a "
                                       "Monte-Carlo cross-check");
    add_model_flags(ver_cmd, ver_fl);
    ver_cmd->add_option("--n", ver_n, "Cross-check paths (0 disables)")->capture_default_str();
    ver_cmd->add_option("--seed", ver_seed, "Cross-check seed")->capture_default_str();
    ver_cmd->add_flag("--perturb", perturb, "Tamper the value function (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (eq_cmd->parsed()) {
            eq_fl.params().validate();
            return cmd_equilibrium(eq_fl, provenance(argc, argv, 0));
        }
        if (sim_cmd->parsed()) {
            sim_fl.params().validate();
            if (sim_sfl.n == 0) throw CLI::ValidationError("--n", "must be positive");
            return cmd_simulate(sim_fl, sim_sfl, provenance(argc, argv, sim_sfl.seed));
        }
        if (est_cmd->parsed()) {
            est_fl.params().validate();
            if (est_sfl.n == 0) throw CLI::ValidationError("--n", "must be positive");
            return cmd_estimate(est_fl, est_sfl, provenance(argc, argv, est_sfl.seed));
        }
        if (sweep_cmd->parsed()) {
            sweep_fl.params().validate();
            for (double v : values) {
                if (!(v > 0.0)) throw CLI::ValidationError("--values", "must be positive");
            }
            return cmd_sweep(sweep_fl, vary, values, provenance(argc, argv, 0));
        }
        if (cal_cmd->parsed()) {
            cal_fl.params().validate();
            return cmd_calibrate(cal_fl, input, provenance(argc, argv, 0));
        }
        if (ver_cmd->parsed()) {
            ver_fl.params().validate();
            return cmd_verify(ver_fl, ver_n, ver_seed, perturb);
        }
    } catch (const CLI::ValidationError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const std::domain_error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kComputeFail;
    }
    return kUsage;
}
