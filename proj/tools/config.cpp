#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <corrheston/errors.hpp>

#include "experiments.hpp"

namespace corrheston::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double out = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ValidationError("config key " + key + ": not a number: '" + text + "'");
    }
    return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t out = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ValidationError("config key " + key + ": not a non-negative integer: '" + text + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ValidationError("config key " + key + ": not a boolean: '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    const std::string t = trim(text);
    if (t.empty()) return out;
    while (true) {
        const std::size_t comma = t.find(',', start);
        out.push_back(to_double(key, t.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// Wraps the parsed tree and remembers which keys were consumed.
class Reader {
public:
    explicit Reader(pt::ptree tree) : tree_(std::move(tree)) {}

    std::optional<std::string> text(const std::string& section, const std::string& key) {
        const pt::ptree* node = &tree_;
        if (!section.empty()) {
            const auto sec = tree_.get_child_optional(section);
            if (!sec) return std::nullopt;
            node = &*sec;
        }
        const auto value = node->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!value) return std::nullopt;
        const std::string name = section.empty() ? key : section + "." + key;
        used_.insert(name);
        raw_[name] = trim(*value);
        return *value;
    }

    void number(const std::string& section, const std::string& key, double& out) {
        if (auto t = text(section, key)) out = to_double(section + "." + key, *t);
    }

    void optional_number(const std::string& section, const std::string& key,
                         std::optional<double>& out) {
        if (auto t = text(section, key)) out = to_double(section + "." + key, *t);
    }

    template <class T>
    void count(const std::string& section, const std::string& key, T& out) {
        if (auto t = text(section, key)) out = static_cast<T>(to_unsigned(section + "." + key, *t));
    }

    void flag(const std::string& section, const std::string& key, bool& out) {
        if (auto t = text(section, key)) out = to_bool(section + "." + key, *t);
    }

    bool list(const std::string& section, const std::string& key, std::vector<double>& out) {
        if (auto t = text(section, key)) {
            out = to_list(section + "." + key, *t);
            return true;
        }
        return false;
    }

    void reject_unknown() const {
        for (const auto& [name, child] : tree_) {
            if (child.empty()) {
                if (!used_.count(name)) throw ValidationError("unknown config key: " + name);
                continue;
            }
            for (const auto& [key, value] : child) {
                (void)value;
                const std::string full = name + "." + key;
                if (!used_.count(full)) throw ValidationError("unknown config key: " + full);
            }
        }
    }

    [[nodiscard]] const std::map<std::string, std::string>& raw() const { return raw_; }

private:
    pt::ptree tree_;
    std::set<std::string> used_;
    std::map<std::string, std::string> raw_;
};

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

void require_positive(double x, const char* what) {
    if (!(x > 0.0)) throw ValidationError(std::string(what) + " must be positive");
}

void require_eta_grid(const ExperimentConfig& cfg) {
    if (cfg.eta_grid.empty()) throw ValidationError("model.eta_grid is empty");
    for (double e : cfg.eta_grid) {
        if (!(e >= 0.0 && e < 1.0)) throw ValidationError("eta values must lie in [0, 1)");
    }
}

void require_prob_grid(const ExperimentConfig& cfg) {
    if (cfg.bs_prices.empty()) throw ValidationError("sweep.bs_prices is empty");
    for (double p : cfg.bs_prices) {
        if (!(p > 0.0 && p < 1.0)) throw ValidationError("sweep.bs_prices must lie in (0, 1)");
    }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& experiment) {
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError("cannot read config: " + std::string(e.what()));
    }
    Reader in(std::move(tree));
    ExperimentConfig cfg;
    cfg.source = path;
    cfg.experiment = experiment;
    if (auto name = in.text("", "experiment")) {
        if (trim(*name) != experiment) {
            throw ValidationError("config is for experiment '" + trim(*name) + "', not '" +
                                  experiment + "'");
        }
    }

    in.number("market", "spot", cfg.spot);
    in.number("market", "r", cfg.r);
    in.number("market", "q", cfg.q);
    if (auto conv = in.text("market", "delta_convention")) {
        const std::string c = trim(*conv);
        if (c == "spot") {
            cfg.convention = DeltaConvention::Spot;
        } else if (c == "forward") {
            cfg.convention = DeltaConvention::Forward;
        } else {
            throw ValidationError("market.delta_convention must be spot or forward");
        }
    }

    in.number("quote", "tenor", cfg.quote.tenor);
    in.number("quote", "atm_vol", cfg.quote.atm_vol);
    in.number("quote", "rr25", cfg.quote.rr25);
    in.number("quote", "bf25", cfg.quote.bf25);

    in.number("model", "beta", cfg.beta);
    std::optional<double> eta;
    in.optional_number("model", "eta", eta);
    const bool has_grid = in.list("model", "eta_grid", cfg.eta_grid);
    if (eta && has_grid) throw ValidationError("give model.eta or model.eta_grid, not both");
    if (eta) cfg.eta_grid = {*eta};
    in.number("model", "theta", cfg.theta);
    in.number("model", "alpha", cfg.alpha);
    in.number("model", "rho_bar", cfg.rho_bar);
    in.optional_number("model", "v0", cfg.v0);
    in.optional_number("model", "rho_0", cfg.rho_0);

    in.number("sweep", "expiry", cfg.expiry);
    in.list("sweep", "tenors", cfg.tenors);
    in.list("sweep", "bs_prices", cfg.bs_prices);
    const bool has_strikes = in.list("sweep", "strikes", cfg.strikes);
    std::optional<double> kmin;
    std::optional<double> kmax;
    std::size_t kcount = 0;
    in.optional_number("sweep", "strike_min", kmin);
    in.optional_number("sweep", "strike_max", kmax);
    in.count("sweep", "strike_count", kcount);
    if (kmin || kmax || kcount) {
        if (has_strikes) throw ValidationError("give sweep.strikes or a strike range, not both");
        if (!kmin || !kmax || kcount == 0) {
            throw ValidationError("strike range needs strike_min, strike_max and strike_count");
        }
        cfg.strikes = linspace(*kmin, *kmax, kcount);
    }

    cfg.volswap.expiry = cfg.quote.tenor;
    in.number("volswap", "expiry", cfg.volswap.expiry);
    in.number("volswap", "fixings_per_year", cfg.volswap.fixings_per_year);
    in.count("volswap", "num_returns", cfg.volswap.num_returns);

    if (auto input = in.text("analytics", "input")) {
        cfg.input = trim(*input);
        if (cfg.input.is_relative()) cfg.input = path.parent_path() / cfg.input;
    }
    in.number("analytics", "bump", cfg.bump);
    in.optional_number("analytics", "beta_rr_target", cfg.beta_rr_target);

    in.count("mc", "paths", cfg.mc.paths);
    in.count("mc", "steps_per_year", cfg.mc.steps_per_year);
    in.count("mc", "seed", cfg.mc.seed);
    in.flag("mc", "bridge", cfg.mc.bridge_enabled);
    in.number("mc", "feller_refine_threshold", cfg.mc.feller_refine_threshold);
    in.number("mc", "psi_threshold", cfg.mc.psi_threshold);
    in.flag("mc", "martingale_correction", cfg.mc.martingale_correction);
    in.count("mc", "threads", cfg.mc.threads);

    if (auto out = in.text("output", "path")) cfg.output = trim(*out);

    in.reject_unknown();
    cfg.raw = in.raw();
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    const Experiment& exp = find_experiment(cfg.experiment);
    require_positive(cfg.spot, "market.spot");
    if (exp.uses_quote) cfg.quote.validate();
    if (exp.uses_mc) cfg.mc.validate();
    require_positive(cfg.beta, "model.beta");

    const std::string& name = cfg.experiment;
    if (name == "smile") {
        require_eta_grid(cfg);
        require_positive(cfg.expiry, "sweep.expiry");
        require_positive(cfg.theta, "model.theta");
        require_positive(cfg.alpha, "model.alpha");
        if (cfg.strikes.empty()) throw ValidationError("sweep.strikes is empty");
        for (double k : cfg.strikes) require_positive(k, "strikes");
    } else if (name == "calib-sweep" || name == "volswap-sweep") {
        require_eta_grid(cfg);
        if (name == "volswap-sweep") cfg.volswap.validate();
    } else if (name == "one-touch-sweep" || name == "knockout-sweep") {
        require_eta_grid(cfg);
        require_prob_grid(cfg);
    } else if (name == "rr-beta-model") {
        require_eta_grid(cfg);
        if (cfg.tenors.empty()) throw ValidationError("sweep.tenors is empty");
        for (double t : cfg.tenors) require_positive(t, "tenors");
        require_positive(cfg.bump, "analytics.bump");
    } else if (name == "k-tau") {
        require_eta_grid(cfg);
        require_positive(cfg.theta, "model.theta");
        require_positive(cfg.alpha, "model.alpha");
        if (cfg.tenors.empty()) throw ValidationError("sweep.tenors is empty");
        for (double t : cfg.tenors) require_positive(t, "tenors");
        require_positive(cfg.bump, "analytics.bump");
    } else if (name == "rr-beta-empirical") {
        if (cfg.input.empty()) throw ValidationError("analytics.input is required");
    }
}

}  // namespace corrheston::cli
