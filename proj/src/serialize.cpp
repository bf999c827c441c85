#include "betssm/serialize.hpp"

#include <cmath>

#include "betssm/error.hpp"

namespace betssm {

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(num(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json convergence_json(const ConvergenceReport& c) {
    return {{"status", to_string(c.status)},
            {"iterations", c.iterations},
            {"evaluations", c.evaluations},
            {"gradient_norm", num(c.gradient_norm)},
            {"relative_gradient", num(c.relative_gradient)},
            {"at_grid_limit", c.at_grid_limit}};
}

}  // namespace

double number_or_nan(const json& j) {
    if (j.is_null()) return std::nan("");
    if (!j.is_number()) throw ConfigError("expected a number in JSON document");
    return j.get<double>();
}

json to_json(const ModelParams& params) {
    json j;
    j["variant"] = to_string(params.variant);
    j["phi"] = params.phi;
    j["omega"] = params.omega;
    j["sigma"] = params.sigma;
    j["p"] = params.p;
    j["q"] = params.q;
    j["alpha0"] = params.alpha0;
    j["alpha"] = params.alpha;
    j["beta"] = params.beta;
    if (params.variant == Variant::Varying) {
        j["K"] = params.K();
        j["zeta1"] = params.zeta1;
        j["zeta2"] = params.zeta2;
    }
    return j;
}

ModelParams params_from_json(const json& j) {
    try {
        ModelParams p;
        p.variant = variant_from_string(j.at("variant").get<std::string>());
        p.phi = j.at("phi").get<double>();
        p.omega = j.at("omega").get<double>();
        p.sigma = j.at("sigma").get<double>();
        p.p = j.at("p").get<double>();
        p.q = j.at("q").get<double>();
        p.alpha0 = j.at("alpha0").get<double>();
        p.alpha = j.at("alpha").get<std::vector<double>>();
        p.beta = j.at("beta").get<std::vector<double>>();
        if (p.variant == Variant::Varying) {
            const int K = static_cast<int>(p.alpha.size());
            p.basis = std::make_shared<const SplineBasis>(K);
            p.zeta1 = j.at("zeta1").get<double>();
            p.zeta2 = j.at("zeta2").get<double>();
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed parameter document: ") + e.what());
    }
}

json to_json(const FitResult& fit) {
    json j;
    j["variant"] = to_string(fit.params.variant);
    j["options"] = {{"K", fit.options.K},
                    {"m", fit.options.grid.m},
                    {"span_sds", fit.options.grid.span_sds},
                    {"lambda_alpha", fit.options.lambda_alpha},
                    {"lambda_beta", fit.options.lambda_beta}};
    j["convergence"] = convergence_json(fit.convergence);
    j["n_obs"] = fit.n_obs;
    j["loglik"] = num(fit.loglik);
    j["penalized_loglik"] = num(fit.penalized_loglik);
    j["df"] = num(fit.df);
    j["aic"] = num(fit.aic);
    j["bic"] = num(fit.bic);
    j["hq"] = num(fit.hq);
    j["params"] = to_json(fit.params);
    json est = json::array();
    for (const auto& e : fit.estimates)
        est.push_back({{"name", e.name},
                       {"estimate", num(e.estimate)},
                       {"se", num(e.se)},
                       {"lower", num(e.lower)},
                       {"upper", num(e.upper)}});
    j["estimates"] = std::move(est);
    j["covariance_available"] = fit.covariance_available;
    if (fit.covariance_available) j["working_covariance"] = matrix_json(fit.working_covariance);
    return j;
}

json to_json(const TuneResult& tune) {
    json j;
    j["lambda_alpha_grid"] = tune.lambda_alpha_grid;
    j["lambda_beta_grid"] = tune.lambda_beta_grid;
    json cells = json::array();
    for (const auto& c : tune.cells) {
        json cj = {{"lambda_alpha", c.lambda_alpha}, {"lambda_beta", c.lambda_beta}, {"ok", c.ok}};
        if (!c.error.empty()) cj["error"] = c.error;
        cj["loglik"] = num(c.loglik);
        cj["penalized_loglik"] = num(c.penalized_loglik);
        cj["df"] = num(c.df);
        cj["aic"] = num(c.aic);
        cj["bic"] = num(c.bic);
        cj["hq"] = num(c.hq);
        cj["convergence"] = convergence_json(c.convergence);
        cells.push_back(std::move(cj));
    }
    j["cells"] = std::move(cells);
    json table = json::array();
    for (std::size_t a = 0; a < tune.lambda_alpha_grid.size(); ++a) {
        json row = json::array();
        for (std::size_t b = 0; b < tune.lambda_beta_grid.size(); ++b) {
            const TuneCell& c = tune.cell(a, b);
            row.push_back(c.ok ? num(c.aic) : json(nullptr));
        }
        table.push_back(std::move(row));
    }
    j["aic_table"] = std::move(table);
    const TuneCell& best = tune.cells.at(tune.best_index);
    j["selected"] = {{"lambda_alpha", best.lambda_alpha}, {"lambda_beta", best.lambda_beta}, {"aic", num(best.aic)}};
    j["best_fit"] = to_json(tune.best_fit);
    return j;
}

ModelParams params_from_result(const json& j) {
    if (j.contains("best_fit")) return params_from_json(j.at("best_fit").at("params"));
    if (j.contains("params")) return params_from_json(j.at("params"));
    return params_from_json(j);
}

}  // namespace betssm
