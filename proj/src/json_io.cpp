#include "debias/json_io.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace debias {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("unknown key '" + key + "' in " + context);
    }
}

Json tree_node_to_json(const RegressionTree& tree, int index) {
    const TreeNode& node = tree.nodes[index];
    if (node.is_leaf)
        return Json{{"leaf", node.leaf}};
    Json j;
    j["split_dim"] = node.split_dim;
    j["threshold"] = node.threshold;
    j["left"] = tree_node_to_json(tree, node.left);
    j["right"] = tree_node_to_json(tree, node.right);
    return j;
}

int tree_node_from_json(const Json& j, RegressionTree& tree) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    if (j.contains("leaf")) {
        check_keys(j, {"leaf"}, "tree leaf node");
        tree.nodes[index].is_leaf = true;
        tree.nodes[index].leaf = j.at("leaf").get<double>();
        return index;
    }
    check_keys(j, {"split_dim", "threshold", "left", "right"}, "tree split node");
    const int dim = j.at("split_dim").get<int>();
    if (dim != 0 && dim != 1)
        throw std::invalid_argument("tree node: split_dim must be 0 or 1");
    const double threshold = j.at("threshold").get<double>();
    const int left = tree_node_from_json(j.at("left"), tree);
    const int right = tree_node_from_json(j.at("right"), tree);
    tree.nodes[index].is_leaf = false;
    tree.nodes[index].split_dim = dim;
    tree.nodes[index].threshold = threshold;
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
}

Json weight_stats_to_json(const WeightStats& s) {
    return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"ess", s.effective_sample_size}};
}

} // namespace

Json domain_to_json(const Domain& domain) {
    return Json{{"x_min", domain.x_min},
                {"y_min", domain.y_min},
                {"x_max", domain.x_max},
                {"y_max", domain.y_max}};
}

Domain domain_from_json(const Json& j) {
    check_keys(j, {"x_min", "y_min", "x_max", "y_max"}, "domain");
    return Domain(j.at("x_min").get<double>(), j.at("y_min").get<double>(),
                  j.at("x_max").get<double>(), j.at("y_max").get<double>());
}

Json mixture_to_json(const GaussianMixture& g) {
    Json components = Json::array();
    for (const auto& c : g.components()) {
        Json jc;
        jc["mean"] = {c.mean().x, c.mean().y};
        jc["cov"] = {{c.covariance().xx, c.covariance().xy},
                     {c.covariance().xy, c.covariance().yy}};
        jc["weight"] = c.weight();
        components.push_back(jc);
    }
    Json j;
    j["components"] = components;
    j["domain"] = domain_to_json(g.domain());
    return j;
}

namespace {
std::vector<GaussianComponent> components_from_json(const Json& j) {
    std::vector<GaussianComponent> components;
    for (const auto& jc : j) {
        check_keys(jc, {"mean", "cov", "weight"}, "mixture component");
        const auto& mean = jc.at("mean");
        const auto& cov = jc.at("cov");
        if (mean.size() != 2 || cov.size() != 2 || cov[0].size() != 2 || cov[1].size() != 2)
            throw std::invalid_argument("mixture component: mean must be 2-vector, cov 2x2");
        const double xy = cov[0][1].get<double>();
        if (xy != cov[1][0].get<double>())
            throw std::invalid_argument("mixture component: covariance must be symmetric");
        components.emplace_back(Vec2{mean[0].get<double>(), mean[1].get<double>()},
                                SymMat2{cov[0][0].get<double>(), xy, cov[1][1].get<double>()},
                                jc.at("weight").get<double>());
    }
    return components;
}
} // namespace

GaussianMixture mixture_from_json(const Json& j, int quadrature_resolution) {
    check_keys(j, {"components", "domain"}, "mixture document");
    return GaussianMixture(components_from_json(j.at("components")),
                           domain_from_json(j.at("domain")), quadrature_resolution);
}

Json field_to_json(const Field& field) {
    if (const auto* f = std::get_if<LinearField>(&field)) {
        Json j;
        j["type"] = "linear";
        j["a"] = {f->a1, f->a2};
        j["b"] = f->b;
        return j;
    }
    if (const auto* f = std::get_if<RbfField>(&field)) {
        Json j;
        j["type"] = "rbf";
        Json centers = Json::array();
        for (const Vec2& c : f->centers)
            centers.push_back({c.x, c.y});
        j["centers"] = centers;
        j["amplitudes"] = f->amplitudes;
        j["widths"] = f->widths;
        return j;
    }
    const auto& f = std::get<GradientBoostPredictor>(field);
    Json trees = Json::array();
    for (const auto& tree : f.trees)
        trees.push_back(tree_node_to_json(tree, 0));
    Json j;
    j["type"] = "gradient_boost";
    j["base_value"] = f.base_value;
    j["learning_rate"] = f.learning_rate;
    j["trees"] = trees;
    return j;
}

Field field_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear") {
        check_keys(j, {"type", "a", "b"}, "linear field");
        const auto& a = j.at("a");
        if (a.size() != 2)
            throw std::invalid_argument("linear field: 'a' must be a 2-vector");
        return LinearField{a[0].get<double>(), a[1].get<double>(), j.at("b").get<double>()};
    }
    if (type == "rbf") {
        check_keys(j, {"type", "centers", "amplitudes", "widths"}, "rbf field");
        RbfField f;
        for (const auto& c : j.at("centers")) {
            if (c.size() != 2)
                throw std::invalid_argument("rbf field: each center must be a 2-vector");
            f.centers.push_back({c[0].get<double>(), c[1].get<double>()});
        }
        f.amplitudes = j.at("amplitudes").get<std::vector<double>>();
        f.widths = j.at("widths").get<std::vector<double>>();
        if (f.centers.empty() || f.centers.size() != f.amplitudes.size() ||
            f.centers.size() != f.widths.size())
            throw std::invalid_argument("rbf field: centers/amplitudes/widths sizes must match");
        for (double w : f.widths)
            if (!(w > 0.0))
                throw std::invalid_argument("rbf field: widths must be positive");
        return f;
    }
    if (type == "gradient_boost") {
        check_keys(j, {"type", "base_value", "learning_rate", "trees"}, "gradient_boost field");
        GradientBoostPredictor f;
        f.base_value = j.at("base_value").get<double>();
        f.learning_rate = j.at("learning_rate").get<double>();
        for (const auto& jt : j.at("trees")) {
            RegressionTree tree;
            tree_node_from_json(jt, tree);
            f.trees.push_back(std::move(tree));
        }
        return f;
    }
    throw std::invalid_argument("unknown field type: " + type);
}

Json field_pair_to_json(const FieldPair& pair) {
    Json j;
    j["truth"] = field_to_json(pair.truth);
    j["predictor"] = field_to_json(pair.predictor);
    return j;
}

FieldPair field_pair_from_json(const Json& j) {
    check_keys(j, {"truth", "predictor"}, "field pair");
    return FieldPair{field_from_json(j.at("truth")), field_from_json(j.at("predictor"))};
}

Json risk_estimate_to_json(const RiskEstimate& est) {
    Json j;
    j["kind"] = to_string(est.kind);
    j["value"] = est.value;
    j["n"] = est.n;
    j["weight_stats"] = weight_stats_to_json(est.weight_stats);
    return j;
}

Json experiment_config_to_json(const ExperimentConfig& config) {
    Json j;
    j["domain"] = domain_to_json(config.domain);
    if (config.explicit_mixture) {
        j["mixture"] = Json{{"components", mixture_to_json(*config.explicit_mixture)["components"]}};
    } else {
        j["mixture"] = Json{{"k", config.mixture.k},
                            {"min_eigenvalue", config.mixture.min_eigenvalue},
                            {"eig_max_factor", config.mixture.eig_max_factor}};
    }
    j["function_family"] = to_string(config.function_family);
    j["predictor_family"] = to_string(config.predictor_family);
    j["n_eval"] = config.n_eval;
    j["n_train"] = config.n_train;
    j["n_runs"] = config.n_runs;
    j["rbf_centers"] = config.rbf_centers;
    j["boost"] = Json{{"n_trees", config.boost.n_trees},
                      {"max_depth", config.boost.max_depth},
                      {"learning_rate", config.boost.learning_rate},
                      {"min_leaf", config.boost.min_leaf}};
    j["kde_rule"] = to_string(config.kde_rule);
    j["kde_fit_independent"] = config.kde_fit_independent;
    j["quadrature_resolution"] = config.quadrature_resolution;
    j["master_seed"] = config.master_seed;
    j["freeze"] = config.freeze;
    j["coverage_grid"] = config.coverage_grid;
    Json estimators = Json::array();
    for (auto kind : config.estimators)
        estimators.push_back(to_string(kind));
    j["estimators"] = estimators;
    // jobs is an execution knob, not an experiment parameter: reports must be
    // byte-identical regardless of worker count, so it is never echoed.
    return j;
}

LoadedConfig config_from_json(const Json& j) {
    check_keys(j,
               {"domain", "mixture", "function_family", "predictor_family", "n_eval", "n_train",
                "n_runs", "rbf_centers", "boost", "kde_rule", "kde_fit_independent",
                "quadrature_resolution", "master_seed", "freeze", "coverage_grid", "estimators",
                "sweep_sizes", "jobs"},
               "config");

    LoadedConfig loaded;
    ExperimentConfig& c = loaded.experiment;

    if (j.contains("domain"))
        c.domain = domain_from_json(j.at("domain"));
    if (j.contains("function_family"))
        c.function_family = parse_function_family(j.at("function_family").get<std::string>());
    if (j.contains("predictor_family"))
        c.predictor_family = parse_predictor_family(j.at("predictor_family").get<std::string>());
    if (j.contains("n_eval"))
        c.n_eval = j.at("n_eval").get<int>();
    if (j.contains("n_train"))
        c.n_train = j.at("n_train").get<int>();
    if (j.contains("n_runs"))
        c.n_runs = j.at("n_runs").get<int>();
    if (j.contains("rbf_centers"))
        c.rbf_centers = j.at("rbf_centers").get<int>();
    if (j.contains("boost")) {
        const auto& jb = j.at("boost");
        check_keys(jb, {"n_trees", "max_depth", "learning_rate", "min_leaf"}, "boost");
        if (jb.contains("n_trees"))
            c.boost.n_trees = jb.at("n_trees").get<int>();
        if (jb.contains("max_depth"))
            c.boost.max_depth = jb.at("max_depth").get<int>();
        if (jb.contains("learning_rate"))
            c.boost.learning_rate = jb.at("learning_rate").get<double>();
        if (jb.contains("min_leaf"))
            c.boost.min_leaf = jb.at("min_leaf").get<int>();
    }
    if (j.contains("kde_rule"))
        c.kde_rule = parse_bandwidth_rule(j.at("kde_rule").get<std::string>());
    if (j.contains("kde_fit_independent"))
        c.kde_fit_independent = j.at("kde_fit_independent").get<bool>();
    if (j.contains("quadrature_resolution"))
        c.quadrature_resolution = j.at("quadrature_resolution").get<int>();
    if (j.contains("master_seed"))
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("freeze"))
        c.freeze = j.at("freeze").get<bool>();
    if (j.contains("coverage_grid"))
        c.coverage_grid = j.at("coverage_grid").get<int>();
    if (j.contains("estimators")) {
        c.estimators.clear();
        for (const auto& name : j.at("estimators"))
            c.estimators.push_back(parse_estimator_kind(name.get<std::string>()));
    }
    if (j.contains("jobs"))
        c.jobs = j.at("jobs").get<int>();
    if (j.contains("sweep_sizes"))
        loaded.sweep_sizes = j.at("sweep_sizes").get<std::vector<int>>();

    // Mixture last: an explicit component list needs the domain and the
    // quadrature resolution parsed above.
    if (j.contains("mixture")) {
        const auto& jm = j.at("mixture");
        if (jm.contains("components")) {
            check_keys(jm, {"components"}, "mixture");
            c.explicit_mixture = GaussianMixture(components_from_json(jm.at("components")),
                                                 c.domain, c.quadrature_resolution);
        } else {
            check_keys(jm, {"k", "min_eigenvalue", "eig_max_factor"}, "mixture");
            if (jm.contains("k"))
                c.mixture.k = jm.at("k").get<int>();
            if (jm.contains("min_eigenvalue"))
                c.mixture.min_eigenvalue = jm.at("min_eigenvalue").get<double>();
            if (jm.contains("eig_max_factor"))
                c.mixture.eig_max_factor = jm.at("eig_max_factor").get<double>();
        }
    }
    return loaded;
}

LoadedConfig load_config_file(const std::string& path) {
    return config_from_json(load_json_file(path));
}

Json report_to_json(const ExperimentConfig& config, const ExperimentReport& report) {
    Json j;
    j["config_digest"] = report.config_digest;
    j["config"] = experiment_config_to_json(config);
    j["n_runs"] = report.n_runs;
    j["excluded_from_mape"] = report.excluded_from_mape;
    Json metrics;
    for (const auto& m : report.metrics)
        metrics[to_string(m.kind)] = Json{{"mape", m.mape}, {"rmse", m.rmse}};
    j["metrics"] = metrics;
    Json trials = Json::array();
    for (std::size_t r = 0; r < report.trials.size(); ++r) {
        const auto& t = report.trials[r];
        Json jt;
        jt["trial"] = r;
        jt["seed"] = t.seed;
        jt["true_risk"] = t.true_risk;
        jt["coverage"] = t.coverage_fraction;
        if (t.mce)
            jt["mce"] = risk_estimate_to_json(*t.mce);
        if (t.ise)
            jt["ise"] = risk_estimate_to_json(*t.ise);
        if (t.ise_e)
            jt["ise_e"] = risk_estimate_to_json(*t.ise_e);
        trials.push_back(jt);
    }
    j["trials"] = trials;
    return j;
}

Json sweep_report_to_json(const ExperimentConfig& config, const std::vector<int>& sizes,
                          const SweepReport& report) {
    Json j;
    j["config_digest"] = report.config_digest;
    j["config"] = experiment_config_to_json(config);
    j["sizes"] = sizes;
    Json rows = Json::array();
    for (const auto& row : report.rows)
        rows.push_back(Json{{"n", row.n},
                            {"estimator", to_string(row.kind)},
                            {"mean_bias", row.mean_bias},
                            {"mape", row.mape}});
    j["rows"] = rows;
    return j;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": invalid JSON: " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

} // namespace debias
