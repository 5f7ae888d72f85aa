#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gna/allocation.hpp"
#include "gna/bounds.hpp"
#include "gna/engine.hpp"
#include "gna/harness.hpp"
#include "gna/model.hpp"

namespace py = pybind11;
using namespace gna;

namespace {

py::dict cell_to_dict(const CellSummary& c)
{
    py::dict d;
    d["algorithm"] = c.algorithm;
    d["T"] = c.budget;
    d["trials"] = c.trials;
    d["errors"] = c.errors;
    d["p_hat"] = c.p_hat;
    d["se"] = c.se;
    d["allocation"] = c.allocation;
    return d;
}

}  // namespace

PYBIND11_MODULE(_gna_bai, m)
{
    m.doc() = "Fixed-budget best arm identification: allocation rules, bounds and simulation";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::enum_<Family>(m, "Family")
        .value("Gaussian", Family::Gaussian)
        .value("Bernoulli", Family::Bernoulli);
    py::enum_<AlgorithmKind>(m, "AlgorithmKind")
        .value("GNA", AlgorithmKind::GNA)
        .value("GNAKnownVariance", AlgorithmKind::GNAKnownVariance)
        .value("Uniform", AlgorithmKind::Uniform)
        .value("SuccessiveRejects", AlgorithmKind::SuccessiveRejects)
        .value("GJOracle", AlgorithmKind::GJOracle);
    py::enum_<EstimatorKind>(m, "EstimatorKind")
        .value("A2IPW", EstimatorKind::A2IPW)
        .value("SampleMean", EstimatorKind::SampleMean);

    py::class_<BanditInstance>(m, "BanditInstance")
        .def_property_readonly("num_arms", &BanditInstance::num_arms)
        .def_property_readonly("best_arm", &BanditInstance::best_arm)
        .def_property_readonly("means", &BanditInstance::means)
        .def_property_readonly("sds", &BanditInstance::sds)
        .def_property_readonly("gaps", &BanditInstance::gaps)
        .def("__repr__", [](const BanditInstance& inst) {
            return "<BanditInstance K=" + std::to_string(inst.num_arms()) +
                   " best=" + std::to_string(inst.best_arm()) + ">";
        });
    m.def("gaussian_instance",
          [](const std::vector<double>& means, const std::vector<double>& sds) {
              return make_gaussian_instance(means, sds);
          },
          py::arg("means"), py::arg("sds"));
    m.def("bernoulli_instance",
          [](const std::vector<double>& means) { return make_bernoulli_instance(means); },
          py::arg("means"));

    py::class_<AlgorithmSpec>(m, "AlgorithmSpec")
        .def(py::init([](AlgorithmKind kind, double eta, double c_mu, double w_min, double explore,
                         std::optional<EstimatorKind> estimator, std::string label) {
                 AlgorithmSpec s;
                 s.kind = kind;
                 s.eta = eta;
                 s.c_mu = c_mu;
                 s.w_min = w_min;
                 s.explore = explore;
                 s.estimator = estimator;
                 s.label = std::move(label);
                 return s;
             }),
             py::arg("kind") = AlgorithmKind::GNA, py::arg("eta") = kDefaultEta,
             py::arg("c_mu") = kDefaultTruncation, py::arg("w_min") = 0.0,
             py::arg("explore") = kDefaultExplore, py::arg("estimator") = py::none(),
             py::arg("label") = "")
        .def_readwrite("kind", &AlgorithmSpec::kind)
        .def_readwrite("eta", &AlgorithmSpec::eta)
        .def_readwrite("c_mu", &AlgorithmSpec::c_mu)
        .def_readwrite("w_min", &AlgorithmSpec::w_min)
        .def_readwrite("explore", &AlgorithmSpec::explore)
        .def_readwrite("estimator", &AlgorithmSpec::estimator)
        .def_readwrite("label", &AlgorithmSpec::label)
        .def_property_readonly("name", &AlgorithmSpec::name);

    // Allocation
    m.def("gna_target_weights",
          [](std::size_t best, const std::vector<double>& sigmas) {
              return gna_target_weights(best, sigmas).vector();
          },
          py::arg("best"), py::arg("sigmas"));
    m.def("gna_estimated_weights",
          [](const std::vector<double>& sigma2_hat, const std::vector<double>& mu_tilde,
             const std::vector<std::size_t>& counts) {
              return gna_estimated_weights({sigma2_hat, mu_tilde, counts}).vector();
          },
          py::arg("sigma2_hat"), py::arg("mu_tilde"), py::arg("counts"));
    m.def("floor_variance", &floor_variance, py::arg("sigma2_tilde"), py::arg("eta") = kDefaultEta);
    m.def("uniform_weights", [](std::size_t k) { return uniform_weights(k).vector(); }, py::arg("num_arms"));
    m.def("gj_oracle_weights",
          [](const std::vector<double>& means, const std::vector<double>& variances, double tol) {
              return gj_oracle_weights(means, variances, tol).vector();
          },
          py::arg("means"), py::arg("variances"), py::arg("tol") = 1e-10);
    m.def("apply_weight_floor",
          [](const std::vector<double>& w, double w_min) {
              return apply_weight_floor(Weights(w), w_min).vector();
          },
          py::arg("weights"), py::arg("w_min"));

    // Engine
    m.def("run",
          [](const AlgorithmSpec& spec, const BanditInstance& inst, std::size_t budget,
             std::uint64_t seed, std::uint64_t trial, bool record) {
              RngStream rng(seed, trial);
              History history(inst.num_arms());
              const RunOutcome out = run(spec, inst, budget, rng, record ? &history : nullptr);
              py::dict d;
              d["recommended"] = out.recommended;
              d["estimates"] = out.estimates;
              d["counts"] = out.counts;
              d["estimator"] = to_string(out.estimator);
              if (record) {
                  py::list rounds;
                  for (const auto& r : history.records()) {
                      py::dict row;
                      row["t"] = r.t;
                      row["arm"] = r.arm;
                      row["outcome"] = r.outcome;
                      row["weights"] = r.weights_used;
                      row["plugin_means"] = r.plugin_means;
                      rounds.append(row);
                  }
                  d["history"] = rounds;
              }
              return d;
          },
          py::arg("spec"), py::arg("instance"), py::arg("budget"), py::arg("seed") = 0,
          py::arg("trial") = 0, py::arg("record_history") = false);
    m.def("recommend", [](const std::vector<double>& e) { return recommend(e); }, py::arg("estimates"));
    m.def("successive_rejects_schedule", &successive_rejects_schedule, py::arg("num_arms"),
          py::arg("budget"));

    // Bounds
    m.def("rate_V", [](std::size_t a, const std::vector<double>& s) { return rate_V(a, s); },
          py::arg("arm"), py::arg("sigmas"));
    m.def("v_star",
          [](const std::function<std::vector<double>(double)>& sigma_of_mu, double lower, double upper,
             double step, std::size_t num_arms) {
              const RateReport r = v_star(sigma_of_mu, {lower, upper, step}, num_arms);
              py::dict d;
              d["v_star"] = r.v_star;
              d["argmin_arm"] = r.argmin_arm;
              d["mu_dagger"] = r.mu_dagger;
              d["rates"] = r.rates;
              d["sigmas"] = r.sigmas;
              d["weights"] = r.weights.vector();
              return d;
          },
          py::arg("sigma_of_mu"), py::arg("lower"), py::arg("upper"), py::arg("step"),
          py::arg("num_arms"));
    m.def("bernoulli_closed_forms",
          [](std::size_t k, double lower, double upper, double step) {
              const auto cf = bernoulli_closed_forms(k, {lower, upper, step});
              py::dict d;
              d["w_best"] = cf.w_best;
              d["w_other"] = cf.w_other;
              d["v_star_printed"] = cf.v_star_printed;
              d["v_star_derived"] = cf.v_star_derived;
              d["mu_dagger"] = cf.mu_dagger;
              return d;
          },
          py::arg("num_arms"), py::arg("lower") = 0.1, py::arg("upper") = 0.9, py::arg("step") = 1e-3);
    m.def("pairwise_rate",
          [](const std::vector<double>& w, const std::vector<double>& s, std::size_t a_star,
             std::size_t a, double delta) { return pairwise_rate(Weights(w), s, a_star, a, delta); },
          py::arg("weights"), py::arg("sigmas"), py::arg("a_star"), py::arg("a"), py::arg("delta"));
    m.def("kl_gaussian", &kl_gaussian, py::arg("mu"), py::arg("nu"), py::arg("sigma2"));
    m.def("kl_bernoulli", &kl_bernoulli, py::arg("p"), py::arg("q"));
    m.def("binary_relative_entropy", &binary_relative_entropy, py::arg("x"), py::arg("y"));
    m.def("fisher_information",
          [](Family f, double mu, double sigma2) { return fisher_information({f, sigma2}, mu); },
          py::arg("family"), py::arg("mu"), py::arg("sigma2") = 1.0);
    m.def("small_gap_ratio",
          [](Family f, double mu, double delta, double sigma2) {
              return small_gap_ratio({f, sigma2}, mu, delta);
          },
          py::arg("family"), py::arg("mu"), py::arg("delta"), py::arg("sigma2") = 1.0);
    m.def("kkt_verify",
          [](const std::vector<double>& s, std::size_t best) {
              const KktReport r = kkt_verify(s, best);
              py::dict d;
              d["rate"] = r.rate;
              d["lambda_scale"] = r.lambda_scale;
              d["gamma"] = r.gamma;
              d["gamma_closed_form"] = r.gamma_closed_form;
              d["rate_identity"] = r.rate_identity;
              d["balance"] = r.balance;
              d["equal_loads"] = r.equal_loads;
              d["stationarity"] = r.stationarity;
              d["multiplier_weights"] = r.multiplier_weights;
              d["gamma_identity"] = r.gamma_identity;
              d["max_residual"] = r.max_residual;
              return d;
          },
          py::arg("sigmas"), py::arg("best"));

    // Harness
    m.def("run_experiment",
          [](const std::string& config_json, unsigned workers) {
              const ExperimentConfig config = parse_config(config_json);
              ExperimentSummary s;
              {
                  py::gil_scoped_release release;
                  s = run_experiment(config, workers);
              }
              py::list cells;
              for (const auto& c : s.cells) cells.append(cell_to_dict(c));
              return py::make_tuple(cells, results_csv(s));
          },
          py::arg("config_json"), py::arg("workers") = 0,
          "Runs an experiment from a JSON config string; returns (cells, results_csv).");
    m.def("fit_decay",
          [](const std::vector<double>& budgets, const std::vector<double>& p_hat,
             const std::vector<std::size_t>& trials) {
              if (budgets.size() != p_hat.size() || (!trials.empty() && trials.size() != budgets.size()))
                  throw std::invalid_argument("budgets, p_hat and trials must have equal length");
              std::vector<DecayPoint> pts;
              for (std::size_t i = 0; i < budgets.size(); ++i)
                  pts.push_back({budgets[i], p_hat[i], trials.empty() ? 0 : trials[i]});
              const DecayFit f = fit_decay(pts);
              py::dict d;
              d["slope"] = f.slope;
              d["intercept"] = f.intercept;
              d["r_squared"] = f.r_squared;
              d["points"] = f.points;
              d["slope_se"] = f.slope_se;
              d["slope_se_binomial"] = f.slope_se_binomial;
              return d;
          },
          py::arg("budgets"), py::arg("p_hat"), py::arg("trials") = std::vector<std::size_t>{});
}
