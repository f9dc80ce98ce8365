#include "pairtrade/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pairtrade/error.hpp"

namespace pairtrade {

namespace pt = boost::property_tree;

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

template <typename T>
T get_value(const pt::ptree& node, const std::string& key) {
    try {
        return node.get_value<T>();
    } catch (const pt::ptree_bad_data&) {
        throw ConfigError("config: bad value '" + node.data() + "' for '" + key + "'");
    }
}

bool parse_bool(const std::string& text, const std::string& key) {
    const auto v = lower(text);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + text + "'");
}

Date parse_config_date(const std::string& text, const std::string& key) {
    try {
        return parse_date(text);
    } catch (const DataError&) {
        throw ConfigError("config: '" + key + "' expects YYYY-MM-DD, got '" + text + "'");
    }
}

/// Walks the tree once and dispatches on "section.key".
class Reader {
public:
    explicit Reader(RunConfig& cfg) : cfg_(cfg) {}

    void read(const pt::ptree& root) {
        for (const auto& [name, node] : root) {
            if (node.empty()) {
                apply(name, node);
            } else {
                for (const auto& [key, leaf] : node) apply(name + "." + key, leaf);
            }
        }
        finish();
    }

private:
    void apply(const std::string& key, const pt::ptree& node) {
        const std::string& text = node.data();
        if (key == "data" || key == "data_path") {
            cfg_.data_path = text;
        } else if (key == "output_dir" || key == "out") {
            cfg_.output_dir = text;
        } else if (key == "seed") {
            cfg_.seed = get_value<std::uint64_t>(node, key);
        } else if (key == "threads" || key == "run.threads") {
            cfg_.threads = get_value<std::size_t>(node, key);
        } else if (key == "max_missing_fraction" || key == "data.max_missing_fraction") {
            cfg_.max_missing_fraction = get_value<double>(node, key);
        } else if (key.starts_with("splits.")) {
            split_key(key.substr(7), text, key);
        } else if (key == "screen.correlation_threshold") {
            cfg_.correlation_threshold = get_value<double>(node, key);
        } else if (key == "screen.sample_pairs") {
            cfg_.sample_pairs = get_value<std::size_t>(node, key);
        } else if (key == "screen.transform") {
            cfg_.transform = parse_bool(text, key);
        } else if (key == "screen.transform_shift") {
            cfg_.transform_options.shift = get_value<double>(node, key);
        } else if (key == "screen.transform_epsilon") {
            cfg_.transform_options.epsilon = get_value<double>(node, key);
        } else if (key == "coint.threshold" || key == "coint.cointegration_threshold") {
            cfg_.cointegration_threshold = get_value<double>(node, key);
        } else if (key == "coint.with_intercept") {
            cfg_.with_intercept = parse_bool(text, key);
        } else if (key == "coint.surface") {
            const auto v = lower(text);
            if (v == "engle_granger") cfg_.surface = PValueSurface::EngleGranger;
            else if (v == "unit_root") cfg_.surface = PValueSurface::UnitRoot;
            else throw ConfigError("config: coint.surface must be engle_granger or unit_root");
        } else if (key == "coint.use_returns") {
            cfg_.coint_on_returns = parse_bool(text, key);
        } else if (key == "coint.max_pairs") {
            cfg_.max_pairs = get_value<std::size_t>(node, key);
        } else if (key == "optimize.method") {
            cfg_.method = parse_method(text);
        } else if (key == "optimize.trials" || key == "optimize.budget") {
            cfg_.budget = get_value<std::size_t>(node, key);
        } else if (key == "optimize.theta_in_low") {
            cfg_.search_space.theta_in.low = get_value<double>(node, key);
        } else if (key == "optimize.theta_in_high") {
            cfg_.search_space.theta_in.high = get_value<double>(node, key);
        } else if (key == "optimize.theta_in_step") {
            set_step(cfg_.search_space.theta_in, node, key);
        } else if (key == "optimize.theta_out_low") {
            cfg_.search_space.theta_out.low = get_value<double>(node, key);
        } else if (key == "optimize.theta_out_high") {
            cfg_.search_space.theta_out.high = get_value<double>(node, key);
        } else if (key == "optimize.theta_out_step") {
            set_step(cfg_.search_space.theta_out, node, key);
        } else if (key == "optimize.objective_mode") {
            const auto v = lower(text);
            if (v == "refit_split") cfg_.objective_mode = ObjectiveMode::RefitSplit;
            else if (v == "inherit") cfg_.objective_mode = ObjectiveMode::Inherit;
            else throw ConfigError("config: optimize.objective_mode must be refit_split or inherit");
        } else if (key == "optimize.objective") {
            const auto v = lower(text);
            if (v == "cumulative_return") cfg_.objective_metric = ObjectiveMetric::CumulativeReturn;
            else if (v == "sharpe") cfg_.objective_metric = ObjectiveMetric::Sharpe;
            else throw ConfigError("config: optimize.objective must be cumulative_return or sharpe");
        } else if (key == "optimize.validation_top_k") {
            cfg_.validation_top_k = get_value<std::size_t>(node, key);
        } else if (key == "backtest.baseline_theta_in") {
            baseline_in_ = get_value<double>(node, key);
        } else if (key == "backtest.baseline_theta_out") {
            baseline_out_ = get_value<double>(node, key);
        } else if (key == "backtest.return_mode") {
            const auto v = lower(text);
            if (v == "compounded") cfg_.return_mode = ReturnMode::Compounded;
            else if (v == "arithmetic") cfg_.return_mode = ReturnMode::Arithmetic;
            else throw ConfigError("config: backtest.return_mode must be compounded or arithmetic");
        } else if (key == "backtest.legs") {
            const auto v = lower(text);
            if (v == "equal") cfg_.legs = LegWeighting::EqualNotional;
            else if (v == "beta") cfg_.legs = LegWeighting::BetaWeighted;
            else throw ConfigError("config: backtest.legs must be equal or beta");
        } else if (key == "backtest.exit_rule") {
            const auto v = lower(text);
            if (v == "band") cfg_.exit_rule = ExitRule::Band;
            else if (v == "zero_cross") cfg_.exit_rule = ExitRule::ZeroCross;
            else throw ConfigError("config: backtest.exit_rule must be band or zero_cross");
        } else if (key == "backtest.cost_per_turnover") {
            cfg_.cost_per_turnover = get_value<double>(node, key);
        } else if (key == "backtest.rolling_lookback") {
            const auto n = get_value<std::size_t>(node, key);
            cfg_.rolling_lookback = n == 0 ? std::nullopt : std::optional<std::size_t>(n);
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }

    static void set_step(ParamRange& range, const pt::ptree& node, const std::string& key) {
        const auto step = get_value<double>(node, key);
        range.step = step > 0.0 ? std::optional<double>(step) : std::nullopt;
    }

    void split_key(const std::string& name, const std::string& text, const std::string& key) {
        static const std::set<std::string> known{
            "pair_selection_start", "pair_selection_end", "training_start", "training_end",
            "validation_start",     "validation_end",     "test_start",     "test_end"};
        if (name == "training_days" || name == "test_days") {
            std::size_t value = 0;
            const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc() || end != text.data() + text.size()) {
                throw ConfigError("config: bad value '" + text + "' for '" + key + "'");
            }
            (name == "training_days" ? cfg_.training_days : cfg_.test_days) = value;
            return;
        }
        if (!known.contains(name)) throw ConfigError("config: unknown key '" + key + "'");
        split_dates_[name] = parse_config_date(text, key);
    }

    void finish() {
        if (baseline_in_ || baseline_out_) {
            try {
                cfg_.baseline_thresholds =
                    Thresholds(baseline_in_.value_or(2.0), baseline_out_.value_or(1.0));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config: baseline thresholds: ") + e.what());
            }
        }
        if (split_dates_.empty()) return;
        auto need = [&](const std::string& name) {
            const auto it = split_dates_.find(name);
            if (it == split_dates_.end()) throw ConfigError("config: missing splits." + name);
            return it->second;
        };
        auto window = [&](const std::string& prefix) {
            try {
                return WindowSpec(need(prefix + "_start"), need(prefix + "_end"));
            } catch (const std::invalid_argument&) {
                throw ConfigError("config: splits." + prefix + " ends before it starts");
            }
        };
        std::optional<WindowSpec> validation;
        if (split_dates_.contains("validation_start") || split_dates_.contains("validation_end")) {
            validation = window("validation");
        }
        cfg_.splits = SplitConfig{window("pair_selection"), window("training"), validation,
                                  window("test")};
    }

    RunConfig& cfg_;
    std::map<std::string, Date> split_dates_;
    std::optional<double> baseline_in_;
    std::optional<double> baseline_out_;
};

}  // namespace

SearchMethod parse_method(const std::string& text) {
    const auto v = lower(text);
    if (v == "grid") return SearchMethod::Grid;
    if (v == "tpe") return SearchMethod::Tpe;
    throw ConfigError("method must be grid or tpe, got '" + text + "'");
}

void RunConfig::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!(correlation_threshold >= -1.0 && correlation_threshold <= 1.0)) {
        throw ConfigError("config: correlation_threshold must be in [-1, 1]");
    }
    if (!(cointegration_threshold > 0.0 && cointegration_threshold <= 1.0)) {
        throw ConfigError("config: cointegration_threshold must be in (0, 1]");
    }
    if (!in_unit(max_missing_fraction)) {
        throw ConfigError("config: max_missing_fraction must be in [0, 1]");
    }
    if (!(transform_options.shift >= 0.0 && transform_options.shift < 1.0)) {
        throw ConfigError("config: transform_shift must be in [0, 1)");
    }
    if (!(transform_options.epsilon > 0.0)) {
        throw ConfigError("config: transform_epsilon must be > 0");
    }
    if (budget == 0) throw ConfigError("config: trials must be > 0");
    if (!(cost_per_turnover >= 0.0)) throw ConfigError("config: cost_per_turnover must be >= 0");
    if (training_days < 30 || test_days < 2) {
        throw ConfigError("config: training_days must be >= 30 and test_days >= 2");
    }
    try {
        search_space.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (splits) splits->validate();
}

BacktestOptions RunConfig::backtest_options() const {
    BacktestOptions o;
    o.mode = return_mode;
    o.legs = legs;
    o.cost_per_turnover = cost_per_turnover;
    o.signal.exit = exit_rule;
    o.signal.rolling_lookback = rolling_lookback;
    return o;
}

OptimizeOptions RunConfig::optimize_options() const {
    OptimizeOptions o;
    o.method = method;
    o.budget = budget;
    o.seed = seed;
    o.mode = objective_mode;
    o.metric = objective_metric;
    o.validation_top_k = validation_top_k;
    o.threads = threads;
    o.backtest = backtest_options();
    // The search objective is always the compounded training return.
    o.backtest.mode = ReturnMode::Compounded;
    return o;
}

RunConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    Reader(cfg).read(tree);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    auto cfg = parse_config(in);
    // Relative data paths are resolved against the config file's directory.
    if (!cfg.data_path.empty() && cfg.data_path.is_relative()) {
        cfg.data_path = path.parent_path() / cfg.data_path;
    }
    return cfg;
}

}  // namespace pairtrade
