#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "repgame/analysis.hpp"
#include "repgame/calibration.hpp"
#include "repgame/equilibrium.hpp"
#include "repgame/sim.hpp"
#include "repgame/special_functions.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace repgame;

PYBIND11_MODULE(_repgame, m) {
    m.doc() = "Suspicion-level blocking game: closed-form equilibrium, Monte-Carlo "
              "estimation, and industry calibration";

    m.def("gauss_erf", &gauss_erf, "x"_a);
    m.def("gauss_erf_inv", &gauss_erf_inv, "y"_a);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double M, double l, double r, double sigma) {
                 ModelParams prm{M, l, r, sigma};
                 prm.validate();
                 return prm;
             }),
             "M"_a, "l"_a, "r"_a, "sigma"_a)
        .def_readwrite("M", &ModelParams::max_intensity)
        .def_readwrite("l", &ModelParams::false_alarm_cost)
        .def_readwrite("r", &ModelParams::termination_rate)
        .def_readwrite("sigma", &ModelParams::noise_intensity)
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(M=" + std::to_string(p.max_intensity) +
                   ", l=" + std::to_string(p.false_alarm_cost) +
                   ", r=" + std::to_string(p.termination_rate) +
                   ", sigma=" + std::to_string(p.noise_intensity) + ")";
        });

    py::enum_<Regime>(m, "Regime")
        .value("Saturated", Regime::Saturated)
        .value("Interior", Regime::Interior);

    py::class_<DerivedConstants>(m, "DerivedConstants")
        .def_readonly("a", &DerivedConstants::a)
        .def_readonly("b", &DerivedConstants::b)
        .def_readonly("c", &DerivedConstants::c)
        .def_readonly("q_star", &DerivedConstants::q_star)
        .def_readonly("p", &DerivedConstants::p)
        .def_readonly("log_gap", &DerivedConstants::log_gap);

    py::class_<Equilibrium>(m, "Equilibrium")
        .def(py::init<const ModelParams&>(), "params"_a)
        .def_property_readonly("params", &Equilibrium::params)
        .def_property_readonly("regime", &Equilibrium::regime)
        .def_property_readonly("constants", &Equilibrium::constants)
        .def_property_readonly("p", &Equilibrium::stopping_threshold)
        .def_property_readonly("q_star", &Equilibrium::q_star)
        .def("y_of", &Equilibrium::y_of, "q"_a)
        .def("attack_intensity", py::vectorize(&Equilibrium::attack_intensity), "q"_a)
        .def("attacker_value", py::vectorize(&Equilibrium::attacker_value), "q"_a)
        .def("defender_cost", py::vectorize(&Equilibrium::defender_cost), "q"_a)
        .def("blocking_prob", py::vectorize(&Equilibrium::blocking_prob), "q0"_a)
        .def("false_block_prob", &Equilibrium::false_block_prob, "q0"_a);

    py::class_<AttackProbResult>(m, "AttackProbResult")
        .def_readonly("q_hat", &AttackProbResult::q_hat)
        .def_readonly("objective", &AttackProbResult::objective)
        .def_readonly("iterations", &AttackProbResult::iterations)
        .def_readonly("bracket_width", &AttackProbResult::bracket_width);

    m.def("optimal_attack_prob", &optimal_attack_prob, "eq"_a, "tol"_a = 1e-10,
          "coarse_grid"_a = 65);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("parameter", &SweepRow::parameter)
        .def_readonly("value", &SweepRow::value)
        .def_readonly("p", &SweepRow::p)
        .def_readonly("q_star", &SweepRow::q_star)
        .def_readonly("q_hat", &SweepRow::q_hat)
        .def_readonly("alpha", &SweepRow::alpha);

    m.def("default_sweep_grid", &default_sweep_grid);
    m.def(
        "comparative_statics",
        [](const ModelParams& base, const std::string& parameter,
           const std::vector<double>& values, const std::vector<double>& q_grid) {
            return comparative_statics(base, parameter, values, q_grid);
        },
        "base"_a, "parameter"_a, "values"_a, "q_grid"_a = default_sweep_grid());

    py::class_<VerifyOptions>(m, "VerifyOptions")
        .def(py::init<>())
        .def_readwrite("n_grid", &VerifyOptions::n_grid)
        .def_readwrite("h_rel", &VerifyOptions::h_rel)
        .def_readwrite("tol", &VerifyOptions::tol)
        .def_readwrite("smooth_fit_h", &VerifyOptions::smooth_fit_h)
        .def_readwrite("smooth_fit_tol", &VerifyOptions::smooth_fit_tol)
        .def_readwrite("tamper_value_scale", &VerifyOptions::tamper_value_scale);

    py::class_<ResidualReport>(m, "ResidualReport")
        .def_readonly("max_attacker_residual", &ResidualReport::max_attacker_residual)
        .def_readonly("max_defender_residual", &ResidualReport::max_defender_residual)
        .def_readonly("max_blocking_residual", &ResidualReport::max_blocking_residual)
        .def_readonly("smooth_fit_error", &ResidualReport::smooth_fit_error)
        .def_readonly("attacker_ok", &ResidualReport::attacker_ok)
        .def_readonly("defender_ok", &ResidualReport::defender_ok)
        .def_readonly("blocking_ok", &ResidualReport::blocking_ok)
        .def_readonly("smooth_fit_ok", &ResidualReport::smooth_fit_ok)
        .def("all_ok", &ResidualReport::all_ok);

    m.def("verify_closed_forms", &verify_closed_forms, "eq"_a, "options"_a = VerifyOptions{});

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("n_paths", &SimConfig::n_paths)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("horizon", &SimConfig::horizon)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("q0", &SimConfig::q0)
        .def_readwrite("x_true", &SimConfig::x_true)
        .def_readwrite("n_threads", &SimConfig::n_threads)
        .def_readwrite("report_points", &SimConfig::report_points)
        .def_readwrite("collect_outcomes", &SimConfig::collect_outcomes)
        .def_readwrite("collect_mean_q", &SimConfig::collect_mean_q);

    py::class_<PathOutcome>(m, "PathOutcome")
        .def_readonly("theta", &PathOutcome::theta)
        .def_readonly("blocked", &PathOutcome::blocked)
        .def_readonly("terminated", &PathOutcome::terminated)
        .def_readonly("stop_time", &PathOutcome::stop_time)
        .def_readonly("terminal_q", &PathOutcome::terminal_q);

    py::class_<MonteCarloResult>(m, "MonteCarloResult")
        .def_readonly("times", &MonteCarloResult::times)
        .def_readonly("br", &MonteCarloResult::br)
        .def_readonly("ee", &MonteCarloResult::ee)
        .def_readonly("ee_lo95", &MonteCarloResult::ee_lo95)
        .def_readonly("ee_hi95", &MonteCarloResult::ee_hi95)
        .def_readonly("ee_lo99", &MonteCarloResult::ee_lo99)
        .def_readonly("ee_hi99", &MonteCarloResult::ee_hi99)
        .def_readonly("mean_q", &MonteCarloResult::mean_q)
        .def_readonly("mean_q_se", &MonteCarloResult::mean_q_se)
        .def_readonly("mu_theta", &MonteCarloResult::mu_theta)
        .def_readonly("mu_theta_se", &MonteCarloResult::mu_theta_se)
        .def_readonly("n_blocked", &MonteCarloResult::n_blocked)
        .def_readonly("n_terminated", &MonteCarloResult::n_terminated)
        .def_readonly("n_running", &MonteCarloResult::n_running)
        .def_readonly("horizon_warning", &MonteCarloResult::horizon_warning)
        .def_readonly("outcomes", &MonteCarloResult::outcomes);

    m.def("step_suspicion", &step_suspicion, "q"_a, "theta"_a, "eq"_a, "dt"_a, "dW"_a);

    py::class_<PathSimulator>(m, "PathSimulator")
        .def(py::init<const Equilibrium&, const SimConfig&>(), "eq"_a, "cfg"_a,
             py::keep_alive<1, 2>())
        .def("simulate_path", &PathSimulator::simulate_path, "theta"_a, "path_index"_a)
        .def("intensity", &PathSimulator::intensity, "q"_a);

    m.def("run_population", &run_population, "eq"_a, "cfg"_a,
          py::call_guard<py::gil_scoped_release>());
    m.def("expected_detection_time", &expected_detection_time, "eq"_a, "q0"_a);

    py::class_<MarginalBalanceResult>(m, "MarginalBalanceResult")
        .def_readonly("lhs_mean", &MarginalBalanceResult::lhs_mean)
        .def_readonly("rhs_mean", &MarginalBalanceResult::rhs_mean)
        .def_readonly("diff_mean", &MarginalBalanceResult::diff_mean)
        .def_readonly("diff_se", &MarginalBalanceResult::diff_se)
        .def_readonly("z_score", &MarginalBalanceResult::z_score)
        .def_readonly("n_paths", &MarginalBalanceResult::n_paths);

    m.def("marginal_balance_check", &marginal_balance_check, "eq"_a, "dp"_a, "cfg"_a,
          py::call_guard<py::gil_scoped_release>());

    py::class_<CalibrationTarget>(m, "CalibrationTarget")
        .def(py::init([](std::string industry, double avg_cost, double avg_days, double l,
                         double M) {
                 CalibrationTarget t;
                 t.industry = std::move(industry);
                 t.avg_cost = avg_cost;
                 t.avg_days = avg_days;
                 t.false_alarm_cost = l;
                 t.max_intensity = M;
                 return t;
             }),
             "industry"_a, "avg_cost"_a, "avg_days"_a, "l"_a = 1.52, "M"_a = 100.0)
        .def_readwrite("industry", &CalibrationTarget::industry)
        .def_readwrite("avg_cost", &CalibrationTarget::avg_cost)
        .def_readwrite("avg_days", &CalibrationTarget::avg_days)
        .def_readwrite("l", &CalibrationTarget::false_alarm_cost)
        .def_readwrite("M", &CalibrationTarget::max_intensity);

    py::class_<CalibrationResult>(m, "CalibrationResult")
        .def_readonly("industry", &CalibrationResult::industry)
        .def_readonly("r", &CalibrationResult::r)
        .def_readonly("sigma", &CalibrationResult::sigma)
        .def_readonly("q_hat", &CalibrationResult::q_hat)
        .def_readonly("fitted_cost", &CalibrationResult::fitted_cost)
        .def_readonly("fitted_days", &CalibrationResult::fitted_days)
        .def_readonly("alpha_over_sigma", &CalibrationResult::alpha_over_sigma)
        .def_readonly("converged", &CalibrationResult::converged)
        .def_readonly("residual_norm", &CalibrationResult::residual_norm)
        .def_readonly("iterations", &CalibrationResult::iterations)
        .def_readonly("jacobian_cond", &CalibrationResult::jacobian_cond)
        .def_readonly("message", &CalibrationResult::message);

    m.def("calibrate", &calibrate, "target"_a, py::call_guard<py::gil_scoped_release>());
    m.def("calibration_forward", &calibration_forward, "target"_a, "r"_a, "sigma"_a);
    m.def("ingest_table", &ingest_table, "path"_a, "l"_a = 1.52, "M"_a = 100.0);
    m.def("calibrate_all", &calibrate_all, "targets"_a,
          py::call_guard<py::gil_scoped_release>());

#ifdef REPGAME_VERSION
    m.attr("__version__") = REPGAME_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
