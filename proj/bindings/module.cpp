#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "ecosvm/data.hpp"
#include "ecosvm/dynamics.hpp"
#include "ecosvm/online_svm.hpp"
#include "ecosvm/svdd.hpp"
#include "ecosvm/svm.hpp"

namespace py = pybind11;
using namespace ecosvm;

namespace {

KernelSpec make_kernel(const std::string& family, double sigma, int degree,
                       double offset) {
    if (family == "linear") return KernelSpec::linear();
    if (family == "rbf") return KernelSpec::rbf(sigma);
    if (family == "polynomial") return KernelSpec::polynomial(degree, offset);
    throw std::invalid_argument("unknown kernel family: " + family);
}

Solver make_solver(const std::string& name) {
    if (name == "oracle") return Solver::Oracle;
    if (name == "dynamics") return Solver::Dynamics;
    throw std::invalid_argument("solver must be \"oracle\" or \"dynamics\"");
}

SolverOptions make_options(double tol, long max_steps) {
    SolverOptions opts;
    opts.tol = tol;
    opts.max_steps = max_steps;
    opts.batch_cap = SIZE_MAX;  // python callers manage their own memory
    return opts;
}

}  // namespace

PYBIND11_MODULE(_ecosvm, m) {
    m.doc() = "SVM and SVDD training through Lotka-Volterra ecosystem dynamics, "
              "with online learning by ecological invasion";

    py::register_exception<ConvergenceError>(m, "ConvergenceError");
    py::register_exception<DivergenceError>(m, "DivergenceError");

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init(&make_kernel), py::arg("family"), py::arg("sigma") = 1.0,
             py::arg("degree") = 2, py::arg("offset") = 0.0)
        .def_property_readonly("family", &KernelSpec::name)
        .def_readonly("sigma", &KernelSpec::sigma)
        .def_readonly("degree", &KernelSpec::degree)
        .def_readonly("offset", &KernelSpec::offset)
        .def("to_json", &KernelSpec::to_json)
        .def_static("from_json", &KernelSpec::from_json)
        .def("__repr__", [](const KernelSpec& k) {
            return "KernelSpec(" + k.to_json() + ")";
        });

    m.def("kernel_eval",
          [](const KernelSpec& spec, const std::vector<double>& x,
             const std::vector<double>& y) { return kernel_eval(spec, x, y); },
          py::arg("kernel"), py::arg("x"), py::arg("y"));

    m.def("gram_matrix",
          [](const KernelSpec& spec, const std::vector<std::vector<double>>& pts) {
              const GramMatrix g = gram_matrix(spec, pts);
              std::vector<std::vector<double>> rows(g.n, std::vector<double>(g.n));
              for (std::size_t i = 0; i < g.n; ++i)
                  for (std::size_t j = 0; j < g.n; ++j) rows[i][j] = g.at(i, j);
              return rows;
          },
          py::arg("kernel"), py::arg("points"));

    py::class_<SvmModel>(m, "SvmModel")
        .def_readonly("support_points", &SvmModel::support_points)
        .def_readonly("support_labels", &SvmModel::support_labels)
        .def_readonly("multipliers", &SvmModel::multipliers)
        .def_readonly("bias", &SvmModel::bias)
        .def_readonly("slack_bound", &SvmModel::slack_bound)
        .def("__len__", &SvmModel::size)
        .def("decision",
             [](const SvmModel& m_, const std::vector<double>& x) {
                 return decision(m_, x);
             })
        .def("classify",
             [](const SvmModel& m_, const std::vector<double>& x) {
                 return classify(m_, x);
             })
        .def("accuracy", &accuracy, py::arg("points"), py::arg("labels"))
        .def("slack_values", &slack_values, py::arg("points"), py::arg("labels"))
        .def("to_json", &svm_to_json)
        .def_static("from_json", &svm_from_json)
        .def("save", &save_svm, py::arg("path"))
        .def_static("load", &load_svm, py::arg("path"));

    m.def("fit_svm",
          [](const std::vector<std::vector<double>>& points,
             const std::vector<int>& labels, const KernelSpec& kernel,
             std::optional<double> c, const std::string& solver, double tol,
             long max_steps) {
              return fit_batch(points, labels, kernel, c, make_solver(solver),
                               make_options(tol, max_steps));
          },
          py::arg("points"), py::arg("labels"), py::arg("kernel"),
          py::arg("c") = std::nullopt, py::arg("solver") = "oracle",
          py::arg("tol") = 1e-8, py::arg("max_steps") = 200000);

    py::class_<OnlineSvm>(m, "OnlineSvm")
        .def(py::init([](const std::vector<std::vector<double>>& points,
                         const std::vector<int>& labels, const KernelSpec& kernel,
                         std::size_t ns, std::optional<double> c,
                         const std::string& solver, double tol, long max_steps,
                         double invasion_tol) {
                 OnlineSvmConfig config;
                 config.init_size = ns;
                 config.slack_bound = c;
                 config.solver = make_options(tol, max_steps);
                 config.invasion_tol = invasion_tol;
                 config.use_integrator = make_solver(solver) == Solver::Dynamics;
                 return OnlineSvm(points, labels, kernel, config);
             }),
             py::arg("points"), py::arg("labels"), py::arg("kernel"),
             py::arg("ns") = 10, py::arg("c") = std::nullopt,
             py::arg("solver") = "oracle", py::arg("tol") = 1e-8,
             py::arg("max_steps") = 200000, py::arg("invasion_tol") = 1e-10)
        .def("observe", &OnlineSvm::observe, py::arg("x"), py::arg("t"))
        .def("invasion_rate",
             [](const OnlineSvm& s, const std::vector<double>& x, int t) {
                 return s.invasion_rate(x, t);
             },
             py::arg("x"), py::arg("t"))
        .def_property_readonly("model", &OnlineSvm::model)
        .def_property_readonly("seen_count", &OnlineSvm::seen_count)
        .def_property_readonly("accepted_count", &OnlineSvm::accepted_count)
        .def_property_readonly("survivor_count", &OnlineSvm::survivor_count)
        .def_property_readonly("active_count", &OnlineSvm::active_count);

    py::class_<SvddModel>(m, "SvddModel")
        .def_readonly("points", &SvddModel::points)
        .def_readonly("multipliers", &SvddModel::multipliers)
        .def_readonly("radius_sq", &SvddModel::radius_sq)
        .def("__len__", &SvddModel::size)
        .def_property_readonly("radius", &radius)
        .def("outlier_score",
             [](const SvddModel& m_, const std::vector<double>& x) {
                 return outlier_score(m_, x);
             })
        .def("invasion_rate",
             [](const SvddModel& m_, const std::vector<double>& x) {
                 return svdd_invasion_rate(m_, x);
             })
        .def("observe",
             [](const SvddModel& m_, const std::vector<double>& x,
                const std::string& solver) {
                 return observe_svdd(m_, x, make_solver(solver));
             },
             py::arg("x"), py::arg("solver") = "oracle")
        .def("to_json", &svdd_to_json)
        .def_static("from_json", &svdd_from_json)
        .def("save", &save_svdd, py::arg("path"))
        .def_static("load", &load_svdd, py::arg("path"));

    m.def("fit_svdd",
          [](const std::vector<std::vector<double>>& points, const KernelSpec& kernel,
             const std::string& solver, double tol, long max_steps) {
              return fit_batch_svdd(points, kernel, make_solver(solver),
                                    make_options(tol, max_steps));
          },
          py::arg("points"), py::arg("kernel"), py::arg("solver") = "oracle",
          py::arg("tol") = 1e-8, py::arg("max_steps") = 200000);

    m.def("center_similarity", &center_similarity, py::arg("a"), py::arg("b"));

    m.def("gen_toy_linear",
          [](std::size_t n, std::size_t p, std::uint64_t seed) {
              Dataset d = gen_toy_linear(n, p, seed);
              return std::make_pair(std::move(d.points), std::move(d.labels));
          },
          py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("gen_toy_nonlinear",
          [](std::size_t n, std::size_t p, std::uint64_t seed) {
              Dataset d = gen_toy_nonlinear(n, p, seed);
              return std::make_pair(std::move(d.points), std::move(d.labels));
          },
          py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("gen_gaussian_blob",
          [](std::size_t n, std::size_t p, std::uint64_t seed) {
              return gen_gaussian_blob(n, p, seed).points;
          },
          py::arg("n"), py::arg("p"), py::arg("seed"));

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
