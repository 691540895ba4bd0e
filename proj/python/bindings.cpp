#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bgsm/error.hpp"
#include "bgsm/gibbs.hpp"
#include "bgsm/random.hpp"
#include "bgsm/report.hpp"
#include "bgsm/tuning.hpp"
#include "bgsm/wang.hpp"

namespace py = pybind11;
using namespace bgsm;

namespace {

Dataset make_dataset(const Matrix& x, const Matrix& y, const std::vector<Index>& groups) {
  Dataset data;
  data.x = x;
  data.y = y;
  data.groups = GroupStructure::from_assignment(groups);
  data.ensure_names();
  data.validate();
  return data;
}

py::array_t<double> stack_draws(const std::vector<Matrix>& draws, Index d, Index c) {
  py::array_t<double> out({static_cast<py::ssize_t>(draws.size()), static_cast<py::ssize_t>(d),
                           static_cast<py::ssize_t>(c)});
  auto view = out.mutable_unchecked<3>();
  for (std::size_t s = 0; s < draws.size(); ++s)
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < c; ++j) view(s, i, j) = draws[s](i, j);
  return out;
}

std::vector<Matrix> unstack_draws(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw InputError("draws must be a 3-d array (draw, snp, phenotype)");
  auto view = a.unchecked<3>();
  std::vector<Matrix> out;
  for (py::ssize_t s = 0; s < view.shape(0); ++s) {
    Matrix w(view.shape(1), view.shape(2));
    for (py::ssize_t i = 0; i < view.shape(1); ++i)
      for (py::ssize_t j = 0; j < view.shape(2); ++j) w(i, j) = view(s, i, j);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian group sparse multi-task regression";
  m.attr("__version__") = BGSM_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "fit_gibbs",
      [](const Matrix& x, const Matrix& y, const std::vector<Index>& groups, double lambda1_sq,
         double lambda2_sq, double a_sigma, double b_sigma, Index iterations, Index burn_in,
         Index thin, std::uint64_t seed) {
        const Dataset data = make_dataset(x, y, groups);
        Hyperparams hyper{lambda1_sq, lambda2_sq, a_sigma, b_sigma};
        SamplerConfig config;
        config.iterations = iterations;
        config.burn_in = burn_in;
        config.thin = thin;
        config.seed = seed;
        ChainOutput chain;
        {
          py::gil_scoped_release release;
          chain = run_gibbs(data, hyper, config);
        }
        py::dict out;
        out["w"] = stack_draws(chain.w, data.d(), data.c());
        out["sigma2"] = Vector(chain.sigma2);
        out["loglik"] = Matrix(chain.loglik);
        out["log_posterior"] = Vector(chain.log_posterior);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("groups"), py::arg("lambda1_sq") = 1.0,
      py::arg("lambda2_sq") = 1.0, py::arg("a_sigma") = 1.0, py::arg("b_sigma") = 1.0,
      py::arg("iterations") = 10000, py::arg("burn_in") = 5000, py::arg("thin") = 1,
      py::arg("seed") = 1,
      "Runs one Gibbs chain. groups[i] is the gene index of SNP i. Returns a dict with "
      "w (draws x snps x phenotypes), sigma2, loglik (draws x subjects) and log_posterior.");

  m.def(
      "waic",
      [](const Matrix& loglik) {
        const auto t = waic(loglik);
        py::dict out;
        out["waic"] = t.waic;
        out["lppd"] = t.lppd;
        out["penalty"] = t.penalty;
        return out;
      },
      py::arg("loglik"), "WAIC terms from a draws x subjects log-likelihood matrix.");

  m.def(
      "credible_intervals",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws, double level) {
        const auto r = credible_intervals(unstack_draws(draws), level);
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> selected(r.mean.rows(), r.mean.cols());
        for (Index i = 0; i < selected.rows(); ++i)
          for (Index j = 0; j < selected.cols(); ++j) selected(i, j) = r.selected(i, j);
        return py::make_tuple(r.mean, r.lower, r.upper, selected);
      },
      py::arg("draws"), py::arg("level") = 0.95,
      "Equal-tail intervals; returns (mean, lower, upper, selected).");

  m.def(
      "rank_snps",
      [](const Matrix& w) {
        std::vector<Index> order;
        for (const auto& r : rank_snps(w)) order.push_back(r.snp);
        return order;
      },
      py::arg("w"), "SNP indices by descending sum of absolute coefficients.");

  m.def(
      "fit_wang",
      [](const Matrix& x, const Matrix& y, const std::vector<Index>& groups, double gamma1,
         double gamma2) { return fit_wang(make_dataset(x, y, groups), gamma1, gamma2).w; },
      py::arg("x"), py::arg("y"), py::arg("groups"), py::arg("gamma1"), py::arg("gamma2"),
      "Penalized least squares estimate with group and row penalties.");

  m.def(
      "sample_inverse_gaussian",
      [](double mean, double shape, Index count, std::uint64_t seed) {
        Rng rng(seed);
        Vector out(count);
        for (Index i = 0; i < count; ++i) out[i] = sample_inverse_gaussian(mean, shape, rng);
        return out;
      },
      py::arg("mean"), py::arg("shape"), py::arg("count"), py::arg("seed") = 1);
}
