#include <map>
#include <memory>
#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "enkf/analysis.hpp"
#include "enkf/diagnostics.hpp"
#include "enkf/errors.hpp"
#include "enkf/experiment.hpp"

namespace py = pybind11;
using namespace enkf;

namespace {

std::string as_config_value(const py::handle& v) {
  if (py::isinstance<py::bool_>(v)) return v.cast<bool>() ? "true" : "false";
  if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + py::str(x).cast<std::string>();
    return out;
  }
  return py::str(v).cast<std::string>();
}

Config to_config(const py::dict& d) {
  Config c;
  for (const auto& [k, v] : d) c.set(k.cast<std::string>(), as_config_value(v), "python");
  return c;
}

class Model {
 public:
  explicit Model(const std::string& kind, const py::kwargs& params) {
    py::dict d;
    d["model"] = kind;
    for (const auto& [k, v] : params) d[k] = v;
    model_ = make_dynamics(resolve_experiment(Command::truth_gen, to_config(d)).model);
  }

  Eigen::Index dim() const { return model_->dim(); }
  std::string kind() const { return std::string(to_string(model_->kind())); }
  Eigen::VectorXd step(const Eigen::VectorXd& u, double h) const { return model_->step(state(u), h).data; }
  Eigen::VectorXd rhs(const Eigen::VectorXd& u) const { return model_->rhs(state(u)).data; }
  Eigen::VectorXd bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return model_->bilinear_form(state(u), state(v)).data;
  }
  double norm(const Eigen::VectorXd& u) const { return state(u).norm(); }
  const Dynamics& dynamics() const { return *model_; }

 private:
  StateVector state(const Eigen::VectorXd& u) const { return {model_->kind(), u}; }
  std::shared_ptr<const Dynamics> model_;
};

// Members are the rows of a K x dim array.
Ensemble ensemble_of(const Eigen::MatrixXd& members) {
  std::vector<StateVector> v;
  for (Eigen::Index k = 0; k < members.rows(); ++k) {
    v.emplace_back(ModelKind::linear, members.row(k).transpose());
  }
  return Ensemble(std::move(v));
}

Eigen::MatrixXd rows_of(const Ensemble& e) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(e.size()), e.dim());
  for (std::size_t k = 0; k < e.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = e.member(k).data.transpose();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = ENKF_VERSION;
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);

  py::class_<Model>(m, "Model")
      .def(py::init<const std::string&, const py::kwargs&>(), py::arg("kind") = "lorenz63",
           "Model from config keys, e.g. Model('nse2d', grid=32, dt=0.005).")
      .def_property_readonly("dim", &Model::dim)
      .def_property_readonly("kind", &Model::kind)
      .def("step", &Model::step, py::arg("u"), py::arg("h"))
      .def("rhs", &Model::rhs, py::arg("u"))
      .def("bilinear", &Model::bilinear, py::arg("u"), py::arg("v"))
      .def("norm", &Model::norm, py::arg("u"));

  m.def(
      "ensemble_mean", [](const Eigen::MatrixXd& members) { return ensemble_of(members).mean().data; },
      py::arg("members"));
  m.def(
      "covariance_apply",
      [](const Eigen::MatrixXd& members, const Eigen::VectorXd& w) {
        return covariance_apply(ensemble_of(members), {ModelKind::linear, w}).data;
      },
      py::arg("members"), py::arg("w"));
  m.def(
      "analyze",
      [](const Eigen::MatrixXd& members, const Eigen::VectorXd& y, double gamma, double alpha_sq,
         std::optional<Eigen::VectorXd> mask, std::uint64_t step, std::uint64_t seed) {
        AnalysisConfig cfg;
        cfg.gamma = gamma;
        cfg.alpha_sq = alpha_sq;
        cfg.mask = ObservationMask(ModelKind::linear,
                                   mask ? *mask : Eigen::VectorXd::Ones(members.cols()));
        return rows_of(analyze(ensemble_of(members), {ModelKind::linear, y}, cfg, step, seed));
      },
      py::arg("members"), py::arg("y"), py::arg("gamma"), py::arg("alpha_sq") = 0.0,
      py::arg("mask") = py::none(), py::arg("step") = 0, py::arg("seed") = 1,
      "Perturbed-observation analysis; members are rows, mask is a 0/1 vector.");
  m.def(
      "analyze_with_observations",
      [](const Eigen::MatrixXd& members, const Eigen::MatrixXd& perturbed, double gamma, double alpha_sq,
         std::optional<Eigen::VectorXd> mask) {
        AnalysisConfig cfg;
        cfg.gamma = gamma;
        cfg.alpha_sq = alpha_sq;
        cfg.mask = ObservationMask(ModelKind::linear,
                                   mask ? *mask : Eigen::VectorXd::Ones(members.cols()));
        return rows_of(analyze_with_observations(ensemble_of(members), ensemble_of(perturbed).members(), cfg));
      },
      py::arg("members"), py::arg("perturbed"), py::arg("gamma"), py::arg("alpha_sq") = 0.0,
      py::arg("mask") = py::none());
  m.def("theta", &theta, py::arg("gamma"), py::arg("alpha_sq"), py::arg("beta_hat"), py::arg("h"));
  m.def(
      "relative_error",
      [](const Eigen::VectorXd& mean, const Eigen::VectorXd& truth) {
        return relative_error({ModelKind::linear, mean}, {ModelKind::linear, truth});
      },
      py::arg("mean"), py::arg("truth"));
  m.def(
      "run_experiment",
      [](const std::string& command, const py::dict& config, bool write) {
        const ExperimentConfig cfg = resolve_experiment(parse_command(command), to_config(config));
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        py::dict out;
        out["files"] = r.files;
        out["summary"] = r.summary;
        out["criterion_met"] = r.criterion_met;
        if (write) out["written"] = write_outputs(cfg, r);
        return out;
      },
      py::arg("command"), py::arg("config") = py::dict(), py::arg("write") = false,
      "Runs a CLI command in memory; returns files, summary and criterion_met.");
  m.def("config_keys", [] { return known_config_keys(); });
}
