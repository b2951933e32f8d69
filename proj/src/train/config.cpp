#include "ignn/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ignn {

std::string to_string(Task t) {
    switch (t) {
        case Task::node_multiclass: return "node-multiclass";
        case Task::node_multilabel: return "node-multilabel";
        case Task::graph: return "graph";
    }
    return "?";
}

std::string to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected a nonnegative integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError("empty list element in '" + v + "'");
        out.push_back(item);
    }
    return out;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& v, F conv) {
    std::vector<T> out;
    for (const auto& s : split_list(v)) out.push_back(static_cast<T>(conv(s)));
    return out;
}

std::string join(const auto& xs) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t k = 0; k < xs.size(); ++k) out << (k ? "," : "") << xs[k];
    return out.str();
}

Activation to_activation(const std::string& v) {
    try {
        return Activation::parse(v);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

using Setter = std::function<void(TrainConfig&, const std::string&, const std::filesystem::path&)>;

std::filesystem::path resolve(const std::string& v, const std::filesystem::path& base) {
    std::filesystem::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
    static const std::vector<std::pair<std::string, Setter>> table = {
        {"task",
         [](TrainConfig& c, const std::string& v, auto&) {
             if (v == "node-multiclass") c.task = Task::node_multiclass;
             else if (v == "node-multilabel") c.task = Task::node_multilabel;
             else if (v == "graph") c.task = Task::graph;
             else throw ConfigError("unknown task '" + v + "'");
         }},
        {"optimizer",
         [](TrainConfig& c, const std::string& v, auto&) {
             if (v == "sgd") c.optimizer = OptimizerKind::sgd;
             else if (v == "adam") c.optimizer = OptimizerKind::adam;
             else throw ConfigError("unknown optimizer '" + v + "'");
         }},
        {"lr", [](TrainConfig& c, const std::string& v, auto&) { c.lr = to_double(v); }},
        {"beta1", [](TrainConfig& c, const std::string& v, auto&) { c.beta1 = to_double(v); }},
        {"beta2", [](TrainConfig& c, const std::string& v, auto&) { c.beta2 = to_double(v); }},
        {"eps", [](TrainConfig& c, const std::string& v, auto&) { c.eps = to_double(v); }},
        {"momentum", [](TrainConfig& c, const std::string& v, auto&) { c.momentum = to_double(v); }},
        {"epochs", [](TrainConfig& c, const std::string& v, auto&) { c.epochs = to_u64(v); }},
        {"weight_decay", [](TrainConfig& c, const std::string& v, auto&) { c.weight_decay = to_double(v); }},
        {"seed", [](TrainConfig& c, const std::string& v, auto&) { c.seed = to_u64(v); }},
        {"hidden", [](TrainConfig& c, const std::string& v, auto&) { c.hidden = parse_list<std::size_t>(v, to_u64); }},
        {"kappa", [](TrainConfig& c, const std::string& v, auto&) { c.kappa = parse_list<double>(v, to_double); }},
        {"relation_kappas",
         [](TrainConfig& c, const std::string& v, auto&) { c.relation_kappas = parse_list<double>(v, to_double); }},
        {"activation", [](TrainConfig& c, const std::string& v, auto&) { c.activation = to_activation(v); }},
        {"b_form",
         [](TrainConfig& c, const std::string& v, auto&) {
             try {
                 c.b_form = parse_bform(v);
             } catch (const std::exception& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"head",
         [](TrainConfig& c, const std::string& v, auto&) {
             if (v == "linear") c.head = HeadKind::linear;
             else if (v == "mlp") c.head = HeadKind::mlp;
             else throw ConfigError("unknown head '" + v + "'");
         }},
        {"head_hidden", [](TrainConfig& c, const std::string& v, auto&) { c.head_hidden = to_u64(v); }},
        {"head_activation", [](TrainConfig& c, const std::string& v, auto&) { c.head_activation = to_activation(v); }},
        {"readout",
         [](TrainConfig& c, const std::string& v, auto&) {
             try {
                 c.readout = parse_readout(v);
             } catch (const std::exception& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"inter_layer_maps", [](TrainConfig& c, const std::string& v, auto&) { c.inter_layer_maps = to_bool(v); }},
        {"inter_activation", [](TrainConfig& c, const std::string& v, auto&) { c.inter_activation = to_activation(v); }},
        {"dropout", [](TrainConfig& c, const std::string& v, auto&) { c.dropout = to_double(v); }},
        {"learn_features", [](TrainConfig& c, const std::string& v, auto&) { c.learn_features = to_bool(v); }},
        {"tol", [](TrainConfig& c, const std::string& v, auto&) { c.tol = to_double(v); }},
        {"max_iter", [](TrainConfig& c, const std::string& v, auto&) { c.max_iter = to_u64(v); }},
        {"backward_tol", [](TrainConfig& c, const std::string& v, auto&) { c.backward_tol = to_double(v); }},
        {"backward_max_iter", [](TrainConfig& c, const std::string& v, auto&) { c.backward_max_iter = to_u64(v); }},
        {"warm_start", [](TrainConfig& c, const std::string& v, auto&) { c.warm_start = to_bool(v); }},
        {"edges", [](TrainConfig& c, const std::string& v, auto& b) { c.edges = resolve(v, b); }},
        {"nodes", [](TrainConfig& c, const std::string& v, auto&) { c.nodes = to_u64(v); }},
        {"relation_column", [](TrainConfig& c, const std::string& v, auto&) { c.relation_column = to_bool(v); }},
        {"features", [](TrainConfig& c, const std::string& v, auto& b) { c.features = resolve(v, b); }},
        {"labels", [](TrainConfig& c, const std::string& v, auto& b) { c.labels = resolve(v, b); }},
        {"splits", [](TrainConfig& c, const std::string& v, auto& b) { c.splits = resolve(v, b); }},
        {"graph_list", [](TrainConfig& c, const std::string& v, auto& b) { c.graph_list = resolve(v, b); }},
        {"renormalize", [](TrainConfig& c, const std::string& v, auto&) { c.renormalize = to_bool(v); }},
        {"checkpoint", [](TrainConfig& c, const std::string& v, auto& b) { c.checkpoint = resolve(v, b); }},
        {"metrics", [](TrainConfig& c, const std::string& v, auto& b) { c.metrics = resolve(v, b); }},
        {"log_every", [](TrainConfig& c, const std::string& v, auto&) { c.log_every = to_u64(v); }},
        {"quiet", [](TrainConfig& c, const std::string& v, auto&) { c.quiet = to_bool(v); }},
    };
    return table;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (hidden.empty()) throw ConfigError("hidden needs at least one layer");
    for (std::size_t h : hidden)
        if (h == 0) throw ConfigError("hidden sizes must be positive");
    if (kappa.size() != 1 && kappa.size() != hidden.size())
        throw ConfigError("kappa needs one value or one per layer");
    for (double k : kappa)
        if (!(k >= 0.0 && k < 1.0)) throw ConfigError("kappa must lie in [0, 1)");
    for (double k : relation_kappas)
        if (!(k >= 0.0 && k < 1.0)) throw ConfigError("relation_kappas must lie in [0, 1)");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
    if (momentum < 0.0) throw ConfigError("momentum must be nonnegative");
    if (!(tol > 0.0) || (backward_tol && !(*backward_tol > 0.0))) throw ConfigError("tolerances must be positive");
    if (max_iter == 0 || (backward_max_iter && *backward_max_iter == 0)) throw ConfigError("max_iter must be positive");
    if (log_every == 0) throw ConfigError("log_every must be positive");
    if (head == HeadKind::mlp && head_hidden == 0) throw ConfigError("head_hidden must be positive");
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value,
                      const std::filesystem::path& base_dir) {
    for (const auto& [name, setter] : setters()) {
        if (name == key) {
            setter(cfg, value, base_dir);
            return;
        }
    }
    throw ConfigError("unknown key '" + key + "'");
}

TrainConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    TrainConfig cfg;
    std::map<std::string, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("expected 'key = value'", lineno);
        if (auto [it, fresh] = seen.emplace(key, lineno); !fresh) {
            throw ConfigError("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")", lineno);
        }
        try {
            set_config_value(cfg, key, value, base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), lineno);
        }
    }
    return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in, path.parent_path());
}

std::string format_config(const TrainConfig& c) {
    std::ostringstream out;
    out.precision(17);
    auto opt_path = [](const std::filesystem::path& p) { return p.empty() ? std::string() : p.string(); };
    auto kv = [&](const char* k, const auto& v) { out << k << " = " << v << '\n'; };
    auto kv_path = [&](const char* k, const std::filesystem::path& p) {
        if (!p.empty()) kv(k, opt_path(p));
    };
    kv("task", to_string(c.task));
    kv("optimizer", to_string(c.optimizer));
    kv("lr", c.lr);
    kv("beta1", c.beta1);
    kv("beta2", c.beta2);
    kv("eps", c.eps);
    kv("momentum", c.momentum);
    kv("epochs", c.epochs);
    kv("weight_decay", c.weight_decay);
    kv("seed", c.seed);
    kv("hidden", join(c.hidden));
    kv("kappa", join(c.kappa));
    if (!c.relation_kappas.empty()) kv("relation_kappas", join(c.relation_kappas));
    kv("activation", c.activation.name());
    kv("b_form", to_string(c.b_form));
    kv("head", c.head == HeadKind::linear ? "linear" : "mlp");
    kv("head_hidden", c.head_hidden);
    kv("head_activation", c.head_activation.name());
    kv("readout", to_string(c.readout));
    kv("inter_layer_maps", c.inter_layer_maps ? "true" : "false");
    kv("inter_activation", c.inter_activation.name());
    kv("dropout", c.dropout);
    kv("learn_features", c.learn_features ? "true" : "false");
    kv("tol", c.tol);
    kv("max_iter", c.max_iter);
    if (c.backward_tol) kv("backward_tol", *c.backward_tol);
    if (c.backward_max_iter) kv("backward_max_iter", *c.backward_max_iter);
    kv("warm_start", c.warm_start ? "true" : "false");
    kv_path("edges", c.edges);
    if (c.nodes) kv("nodes", *c.nodes);
    kv("relation_column", c.relation_column ? "true" : "false");
    kv_path("features", c.features);
    kv_path("labels", c.labels);
    kv_path("splits", c.splits);
    kv_path("graph_list", c.graph_list);
    kv("renormalize", c.renormalize ? "true" : "false");
    kv_path("checkpoint", c.checkpoint);
    kv_path("metrics", c.metrics);
    kv("log_every", c.log_every);
    kv("quiet", c.quiet ? "true" : "false");
    return out.str();
}

}  // namespace ignn
