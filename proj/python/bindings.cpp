#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diqkd/observables.hpp"
#include "diqkd/optimizer.hpp"
#include "diqkd/verify.hpp"

namespace py = pybind11;
using namespace diqkd;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Heralded observables, finite-key rates and rate optimization for amplified DIQKD";

    py::enum_<Architecture>(m, "Architecture")
        .value("esr", Architecture::esr)
        .value("pqa", Architecture::pqa)
        .value("two_esr", Architecture::two_esr)
        .value("unassisted", Architecture::unassisted);

    py::enum_<SourceFamily>(m, "SourceFamily")
        .value("ideal", SourceFamily::ideal)
        .value("pdc", SourceFamily::pdc)
        .value("triggered", SourceFamily::triggered)
        .value("generic", SourceFamily::generic)
        .value("custom", SourceFamily::custom);

    py::enum_<Objective>(m, "Objective")
        .value("finite_rate", Objective::finite_rate)
        .value("asymptotic_rate", Objective::asymptotic_rate);

    py::class_<SourceSpec>(m, "SourceSpec")
        .def(py::init<>())
        .def_readwrite("family", &SourceSpec::family)
        .def_readwrite("intensity", &SourceSpec::intensity)
        .def_readwrite("p0", &SourceSpec::p0)
        .def_readwrite("q", &SourceSpec::q)
        .def_readwrite("probs", &SourceSpec::probs)
        .def_readwrite("n_max", &SourceSpec::n_max);

    py::class_<SetupParams>(m, "SetupParams")
        .def(py::init<>())
        .def_readwrite("arch", &SetupParams::arch)
        .def_readwrite("eta_c", &SetupParams::eta_c)
        .def_readwrite("eta_d", &SetupParams::eta_d)
        .def_readwrite("loss_db", &SetupParams::loss_db)
        .def_readwrite("p_d", &SetupParams::p_d)
        .def_readwrite("t", &SetupParams::t)
        .def_readwrite("source_ab", &SetupParams::source_ab)
        .def_readwrite("source_bc", &SetupParams::source_bc)
        .def_readwrite("single_photon", &SetupParams::single_photon)
        .def("validate", &SetupParams::validate);

    py::class_<HeraldedObservables>(m, "HeraldedObservables")
        .def_readonly("p_sh", &HeraldedObservables::p_sh)
        .def_readonly("omega_sh", &HeraldedObservables::omega_sh)
        .def_readonly("q_sh", &HeraldedObservables::q_sh)
        .def_readonly("s_sh", &HeraldedObservables::s_sh)
        .def_readonly("p_trigger", &HeraldedObservables::p_trigger)
        .def_readonly("feasible", &HeraldedObservables::feasible);

    py::class_<SecurityTargets>(m, "SecurityTargets")
        .def(py::init<>())
        .def_readwrite("label", &SecurityTargets::label)
        .def_readwrite("eps_sec", &SecurityTargets::eps_sec)
        .def_readwrite("eps_cor", &SecurityTargets::eps_cor)
        .def_readwrite("eps_rob", &SecurityTargets::eps_rob)
        .def_readwrite("eps_ea", &SecurityTargets::eps_ea);

    py::class_<ProtocolParams>(m, "ProtocolParams")
        .def(py::init<>())
        .def_readwrite("n_sh", &ProtocolParams::n_sh)
        .def_readwrite("gamma", &ProtocolParams::gamma)
        .def_readwrite("delta_est", &ProtocolParams::delta_est);

    py::class_<KeyRateResult>(m, "KeyRateResult")
        .def_readonly("l", &KeyRateResult::l)
        .def_readonly("l_raw", &KeyRateResult::l_raw)
        .def_readonly("k", &KeyRateResult::k)
        .def_readonly("k_cond", &KeyRateResult::k_cond)
        .def_readonly("n_expected", &KeyRateResult::n_expected)
        .def_readonly("eta_opt", &KeyRateResult::eta_opt)
        .def_readonly("leak", &KeyRateResult::leak)
        .def_readonly("observables", &KeyRateResult::observables)
        .def_readonly("protocol", &KeyRateResult::protocol)
        .def_readonly("feasible", &KeyRateResult::feasible);

    py::class_<OptimizationSpec>(m, "OptimizationSpec")
        .def(py::init<>())
        .def_readwrite("objective", &OptimizationSpec::objective)
        .def_readwrite("free_eps_split", &OptimizationSpec::free_eps_split)
        .def_readwrite("f_pa", &OptimizationSpec::f_pa)
        .def_readwrite("f_ir", &OptimizationSpec::f_ir)
        .def_readwrite("free_gamma", &OptimizationSpec::free_gamma)
        .def_readwrite("gamma", &OptimizationSpec::gamma)
        .def_readwrite("free_t", &OptimizationSpec::free_t)
        .def_readwrite("free_intensities", &OptimizationSpec::free_intensities)
        .def_readwrite("grid_points", &OptimizationSpec::grid_points)
        .def_readwrite("starts", &OptimizationSpec::starts)
        .def_readwrite("random_restarts", &OptimizationSpec::random_restarts)
        .def_readwrite("seed", &OptimizationSpec::seed)
        .def_readwrite("workers", &OptimizationSpec::workers);

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("rate", &OptimizationResult::rate)
        .def_readonly("setup", &OptimizationResult::setup)
        .def_readonly("f_pa", &OptimizationResult::f_pa)
        .def_readonly("f_ir", &OptimizationResult::f_ir)
        .def_readonly("k_asymptotic", &OptimizationResult::k_asymptotic)
        .def_readonly("evaluations", &OptimizationResult::evaluations);

    py::class_<CheckReport>(m, "CheckReport")
        .def_readonly("name", &CheckReport::name)
        .def_readonly("passed", &CheckReport::passed)
        .def_readonly("max_deviation", &CheckReport::max_deviation)
        .def_readonly("tolerance", &CheckReport::tolerance)
        .def_readonly("cases", &CheckReport::cases)
        .def_readonly("detail", &CheckReport::detail);

    m.def("security_preset", &security_preset, py::arg("name"));
    m.def("heralded_observables",
          [](const SetupParams& setup) { return heralded_observables(setup); }, py::arg("setup"),
          py::call_guard<py::gil_scoped_release>());
    m.def("esr_ideal_closed_form", &esr_ideal_closed_form, py::arg("xi"));
    m.def("pqa_ideal_closed_form", &pqa_ideal_closed_form, py::arg("xi"), py::arg("t"));
    m.def("unassisted_ideal_closed_form", &unassisted_ideal_closed_form, py::arg("eta_ch"));
    m.def("asymptotic_rate", &asymptotic_rate, py::arg("observables"));
    m.def(
        "key_length",
        [](const HeraldedObservables& obs, const ProtocolParams& proto, const SecurityTargets& targets,
           double f_pa, double f_ir) { return key_length(obs, proto, make_budget(targets, f_pa, f_ir)); },
        py::arg("observables"), py::arg("protocol"), py::arg("targets"), py::arg("f_pa") = 0.5,
        py::arg("f_ir") = 0.5);
    m.def("g_entropy", &g_entropy, py::arg("omega"));
    m.def("delta_est_min", &delta_est_min, py::arg("n_sh"), py::arg("eps_rob_ea"));
    m.def("expected_transmissions", &expected_transmissions, py::arg("n_sh"), py::arg("p_sh"));
    m.def("esr_cutoff_loss_db", &esr_cutoff_loss_db, py::arg("n_sh"), py::arg("eta_cd"),
          py::arg("n_cap") = 1e15);
    m.def("session_time", &session_time, py::arg("n_expected"), py::arg("clock_hz"));
    m.def("maximize_rate", &maximize_rate, py::arg("setup"), py::arg("targets"), py::arg("n_sh"),
          py::arg("spec") = OptimizationSpec{}, py::call_guard<py::gil_scoped_release>());
    m.def("run_verification", &run_verification, py::arg("scope") = "all",
          py::call_guard<py::gil_scoped_release>());
}
