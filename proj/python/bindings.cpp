#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wprobe/commands.hpp"
#include "wprobe/errors.hpp"

namespace py = pybind11;
using namespace wprobe;

PYBIND11_MODULE(_core, m) {
  m.doc() = "wprobe core bindings";
  m.attr("__version__") = WPROBE_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<WavePacketFamily>(m, "WavePacketFamily")
      .def(py::init([](double x0, double xi0, double lambda) {
             WavePacketFamily f;
             f.x0 = x0;
             f.xi0 = xi0;
             f.lambda = lambda;
             f.validate();
             return f;
           }),
           py::arg("x0") = 0.0, py::arg("xi0") = 1.0, py::arg("lam") = 2.0)
      .def_readonly("x0", &WavePacketFamily::x0)
      .def_readonly("xi0", &WavePacketFamily::xi0)
      .def_readonly("lam", &WavePacketFamily::lambda);

  m.def(
      "packet_norm",
      [](const WavePacketFamily& f, double t, double beta) {
        const SpectralPatch p = make_packet(f, t);
        return std::sqrt(inner_product_sobolev(p, p, JapaneseBracketWeight{beta}).real());
      },
      py::arg("family"), py::arg("t"), py::arg("beta") = 0.0,
      "Sobolev norm ||f_t||_beta of a packet.");

  m.def(
      "inner_product",
      [](const WavePacketFamily& f, double t, double s, double beta) {
        return inner_product_sobolev(make_packet(f, t), make_packet(f, s),
                                     JapaneseBracketWeight{beta});
      },
      py::arg("family"), py::arg("t"), py::arg("s"), py::arg("beta") = 0.0);

  m.def(
      "noise_kernel",
      [](const WavePacketFamily& f, std::vector<double> nodes, double beta) {
        const NoiseKernel k = build_kernel(f, nodes, beta);
        std::vector<std::vector<double>> out(k.size(), std::vector<double>(k.size()));
        for (std::size_t i = 0; i < k.size(); ++i) {
          for (std::size_t j = 0; j < k.size(); ++j) out[i][j] = k(i, j);
        }
        return out;
      },
      py::arg("family"), py::arg("nodes"), py::arg("beta") = 0.0,
      "Dense covariance |(f_t|f_s)_beta|^2 over the nodes.");

  m.def(
      "sample_noise",
      [](const WavePacketFamily& f, std::vector<double> nodes, double beta, std::uint64_t seed) {
        return sample_path(build_kernel(f, nodes, beta), seed).values;
      },
      py::arg("family"), py::arg("nodes"), py::arg("beta"), py::arg("seed"));

  py::class_<OrderPlan>(m, "OrderPlan")
      .def_readonly("m_list", &OrderPlan::m_list)
      .def_readonly("beta", &OrderPlan::beta)
      .def_readonly("j_beta", &OrderPlan::j_beta)
      .def_readonly("k_beta", &OrderPlan::k_beta)
      .def_readonly("lambda_bound", &OrderPlan::lambda_bound)
      .def_readonly("lam", &OrderPlan::lambda)
      .def_property_readonly("mode", [](const OrderPlan& p) {
        std::vector<std::string> out;
        for (auto mode : p.mode) out.push_back(to_string(mode));
        return out;
      });

  m.def(
      "plan_orders",
      [](std::vector<double> m_list, double beta, double margin,
         std::vector<std::optional<double>> overrides) {
        return plan_orders(m_list, beta, margin, overrides);
      },
      py::arg("m_list"), py::arg("beta"), py::arg("margin") = 0.5,
      py::arg("overrides") = std::vector<std::optional<double>>{});

  m.def(
      "parse_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
      py::arg("text"), "Parse config text and return its canonical form.");
  m.def(
      "config_hash", [](const std::string& text) { return config_hash(parse_config(text)); },
      py::arg("text"));

  m.def(
      "run",
      [](const std::string& command, const std::string& config_text, std::uint64_t seed,
         std::optional<std::size_t> trials, int workers) {
        RunOptions opt;
        opt.seed = seed;
        opt.trials = trials;
        opt.workers = workers;
        CommandResult r;
        {
          py::gil_scoped_release release;
          r = execute(command, parse_config(config_text), opt);
        }
        return py::make_tuple(to_csv(r.rows), r.summary.dump());
      },
      py::arg("command"), py::arg("config_text"), py::arg("seed") = 1,
      py::arg("trials") = py::none(), py::arg("workers") = 0,
      "Run a command in memory; returns (csv_text, summary_json).");
}
