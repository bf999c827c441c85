#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "betssm/beinf.hpp"
#include "betssm/data.hpp"
#include "betssm/error.hpp"
#include "betssm/estimation.hpp"
#include "betssm/forecast.hpp"
#include "betssm/likelihood.hpp"
#include "betssm/parallel.hpp"
#include "betssm/serialize.hpp"
#include "betssm/simulate.hpp"
#include "betssm/splines.hpp"
#include "betssm/strategy.hpp"

namespace py = pybind11;
using namespace betssm;

namespace {

std::vector<MatchSeries> simulate_series(const ModelParams& params, int n_matches, int T, std::uint64_t seed) {
    SimConfig cfg;
    cfg.params = params;
    cfg.n_matches = n_matches;
    cfg.T = T;
    cfg.seed = seed;
    std::vector<MatchSeries> out;
    for (auto& s : simulate_dataset(cfg)) out.push_back(std::move(s.series));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Beta-inflated state-space model for in-game betting stakes";
    m.attr("__version__") = BETSSM_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def("set_thread_count", &set_thread_count, py::arg("n"));

    m.def("beinf_density", [](double y, double mu, double sigma, double p, double q) {
        return beinf_density(y, {mu, sigma, p, q});
    }, py::arg("y"), py::arg("mu"), py::arg("sigma"), py::arg("p") = 0.0, py::arg("q") = 0.0);
    m.def("beinf_cdf", [](double y, double mu, double sigma, double p, double q) {
        return beinf_cdf(y, {mu, sigma, p, q});
    }, py::arg("y"), py::arg("mu"), py::arg("sigma"), py::arg("p") = 0.0, py::arg("q") = 0.0);
    m.def("beinf_mean", [](double mu, double sigma, double p, double q) {
        return beinf_mean({mu, sigma, p, q});
    }, py::arg("mu"), py::arg("sigma"), py::arg("p") = 0.0, py::arg("q") = 0.0);
    m.def("beinf_sample", [](double mu, double sigma, double p, double q, int n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::vector<double> out(n);
        for (double& v : out) v = beinf_sample({mu, sigma, p, q}, rng);
        return out;
    }, py::arg("mu"), py::arg("sigma"), py::arg("p") = 0.0, py::arg("q") = 0.0, py::arg("n") = 1,
       py::arg("seed") = 1);

    m.def("basis_matrix", [](int K) { return basis_matrix(K); }, py::arg("K"),
          "85 x K cubic B-spline design matrix for minutes 1..85");

    py::class_<ModelParams>(m, "ModelParams")
        .def_static("baseline", &ModelParams::baseline, py::arg("phi"), py::arg("omega"), py::arg("sigma"),
                    py::arg("p"), py::arg("q"), py::arg("alpha0"), py::arg("alpha"), py::arg("beta"))
        .def_static("varying", &ModelParams::varying, py::arg("K"), py::arg("phi"), py::arg("omega"),
                    py::arg("sigma"), py::arg("p"), py::arg("q"), py::arg("alpha0"), py::arg("alpha"),
                    py::arg("beta"), py::arg("zeta1") = 0.0, py::arg("zeta2") = 0.0)
        .def_static("from_json", [](const std::string& s) { return params_from_result(json::parse(s)); })
        .def_property_readonly("variant", [](const ModelParams& p) { return to_string(p.variant); })
        .def_readwrite("phi", &ModelParams::phi)
        .def_readwrite("omega", &ModelParams::omega)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def_readwrite("p", &ModelParams::p)
        .def_readwrite("q", &ModelParams::q)
        .def_readwrite("alpha0", &ModelParams::alpha0)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("beta", &ModelParams::beta)
        .def_readwrite("zeta1", &ModelParams::zeta1)
        .def_readwrite("zeta2", &ModelParams::zeta2)
        .def("alpha_at", &ModelParams::alpha_at)
        .def("beta_at", &ModelParams::beta_at)
        .def("to_json", [](const ModelParams& p) { return to_json(p).dump(); });

    py::class_<MatchSeries>(m, "MatchSeries")
        .def(py::init<>())
        .def_readwrite("match_id", &MatchSeries::match_id)
        .def_readwrite("y", &MatchSeries::y)
        .def_readwrite("prewindiff", &MatchSeries::prewindiff)
        .def_readwrite("vaepdiff", &MatchSeries::vaepdiff)
        .def_readwrite("scorediff", &MatchSeries::scorediff)
        .def_readwrite("winprobteam", &MatchSeries::winprobteam)
        .def_property_readonly("T", &MatchSeries::T);

    m.def("relative_stakes", &relative_stakes, py::arg("stake_home"), py::arg("stake_away"));
    m.def("implied_probability", [](double h, double a, double d) {
        const auto p = implied_probability(h, a, d);
        return py::make_tuple(p.home, p.away, p.draw);
    }, py::arg("odds_home"), py::arg("odds_away"), py::arg("odds_draw"));
    m.def("load_series", [](const std::string& path) { return load_dataset(path).series; }, py::arg("path"));

    m.def("simulate", &simulate_series, py::arg("params"), py::arg("n_matches") = 306, py::arg("T") = 85,
          py::arg("seed") = 1);

    m.def("log_likelihood", [](const std::vector<MatchSeries>& matches, const ModelParams& params, int m_,
                               double span) {
        return joint_log_likelihood(matches, params, GridConfig{m_, span});
    }, py::arg("matches"), py::arg("params"), py::arg("m") = 100, py::arg("span_sds") = 5.0);

    m.def("fit_json", [](const std::vector<MatchSeries>& matches, const std::string& variant, int K, int m_,
                         double span, double lambda_alpha, double lambda_beta) {
        FitOptions o;
        o.variant = variant_from_string(variant);
        o.K = K;
        o.grid = {m_, span};
        o.lambda_alpha = lambda_alpha;
        o.lambda_beta = lambda_beta;
        FitResult f;
        {
            py::gil_scoped_release release;
            f = fit(matches, o);
        }
        return to_json(f).dump();
    }, py::arg("matches"), py::arg("variant") = "baseline", py::arg("K") = 10, py::arg("m") = 100,
       py::arg("span_sds") = 5.0, py::arg("lambda_alpha") = 0.0, py::arg("lambda_beta") = 0.0);

    m.def("forecast", [](const MatchSeries& match, const ModelParams& params, int t, std::vector<double> levels,
                         int m_, double span) {
        const StateGrid grid = build_grid(params, m_, span);
        const Forecast fc = one_step_ahead(match, params, grid, t, levels);
        py::dict d;
        d["t_target"] = fc.t_target;
        d["mean"] = fc.mean;
        d["quantiles"] = fc.quantiles;
        d["state_predictive"] = fc.state_predictive;
        return d;
    }, py::arg("match"), py::arg("params"), py::arg("t"), py::arg("levels") = std::vector<double>{},
       py::arg("m") = 100, py::arg("span_sds") = 5.0);

    m.def("flag_outliers", [](const MatchSeries& match, const ModelParams& params, double quantile, bool two_sided,
                              int m_, double span) {
        return flag_outliers(match, params, build_grid(params, m_, span), quantile, two_sided);
    }, py::arg("match"), py::arg("params"), py::arg("quantile") = 0.99, py::arg("two_sided") = false,
       py::arg("m") = 100, py::arg("span_sds") = 5.0);

    m.def("backtest", [](const std::string& path, std::vector<double> thresholds) {
        StrategyConfig cfg;
        cfg.thresholds = std::move(thresholds);
        const auto matches = group_by_match(read_csv_file(path).records);
        const BacktestResult r = backtest(matches, cfg);
        py::dict out;
        for (std::size_t w = 0; w < r.cells.size(); ++w) {
            py::dict row;
            for (std::size_t k = 0; k < cfg.thresholds.size(); ++k) {
                const auto ret = r.cells[w][k].ret();
                row[py::float_(cfg.thresholds[k])] = ret ? py::object(py::float_(*ret)) : py::object(py::none());
            }
            out[py::str(cfg.windows[w].label())] = row;
        }
        return out;
    }, py::arg("path"), py::arg("thresholds") = std::vector<double>{0.02, 0.03, 0.05});
}
