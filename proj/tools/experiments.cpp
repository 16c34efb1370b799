#include "experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include <corrheston/analytics.hpp>
#include <corrheston/calibration.hpp>
#include <corrheston/errors.hpp>
#include <corrheston/exotics.hpp>
#include <corrheston/fourier.hpp>
#include <corrheston/version.hpp>

namespace corrheston::cli {
namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

CalibrationConfig calibration_config(const ExperimentConfig& cfg) {
    CalibrationConfig c;
    c.convention = cfg.convention;
    return c;
}

CalibrationResult fit(const ExperimentConfig& cfg, const SmileQuote& quote, double eta) {
    return calibrate(quote, cfg.spot, cfg.beta, eta, cfg.r, cfg.q, std::nullopt,
                     calibration_config(cfg));
}

ModelParams fixed_params(const ExperimentConfig& cfg, double eta) {
    NaturalParams n;
    n.theta = cfg.theta;
    n.v0 = cfg.v0.value_or(cfg.theta);
    n.rho_a = cfg.rho_bar;
    n.rho_0 = cfg.rho_0.value_or(cfg.rho_bar);
    n.beta = cfg.beta;
    n.alpha = cfg.alpha;
    n.eta = eta;
    n.r = cfg.r;
    n.q = cfg.q;
    return to_raw(n, cfg.rho_bar);
}

void require_positive_eta(const ExperimentConfig& cfg) {
    for (double e : cfg.eta_grid) {
        if (!(e > 0.0)) throw ValidationError("this experiment needs eta > 0 in every grid point");
    }
}

// Heston (eta = 0) first, then the grid, all calibrated to the quote.
std::vector<CalibrationResult> calibrate_grid(const ExperimentConfig& cfg) {
    std::vector<CalibrationResult> fits;
    fits.push_back(fit(cfg, cfg.quote, 0.0));
    for (double eta : cfg.eta_grid) fits.push_back(eta == 0.0 ? fits.front() : fit(cfg, cfg.quote, eta));
    return fits;
}

void run_smile(const ExperimentConfig& cfg, CsvWriter& csv) {
    for (double eta : cfg.eta_grid) {
        const ModelParams p = fixed_params(cfg, eta);
        const std::vector<double> vols = smile_from_model(p, cfg.spot, cfg.expiry, cfg.strikes);
        for (std::size_t i = 0; i < cfg.strikes.size(); ++i) {
            csv.row({eta, cfg.strikes[i], cfg.expiry, vols[i]});
        }
    }
}

void run_calib_sweep(const ExperimentConfig& cfg, CsvWriter& csv) {
    for (double eta : cfg.eta_grid) {
        const CalibrationResult r = fit(cfg, cfg.quote, eta);
        csv.row({eta, r.params.theta(), r.params.alpha, r.params.rho_bar, r.feller_ratio,
                 r.max_residual(), r.iterations});
    }
}

void run_barrier_sweep(const ExperimentConfig& cfg, CsvWriter& csv, bool knockout) {
    const std::vector<CalibrationResult> fits = calibrate_grid(cfg);
    std::vector<ModelParams> models;
    for (const CalibrationResult& f : fits) models.push_back(f.params);

    const double tau = cfg.quote.tenor;
    std::vector<BarrierProduct> products;
    std::vector<double> probs;
    for (OptionSide side : {OptionSide::Put, OptionSide::Call}) {
        for (double p : cfg.bs_prices) {
            const double barrier =
                bs_one_touch_barrier(p, cfg.spot, cfg.quote.atm_vol, tau, cfg.r, cfg.q, side);
            BarrierProduct prod;
            prod.barrier = barrier;
            prod.expiry = tau;
            prod.strike = cfg.spot;
            if (knockout) {
                prod.kind = side == OptionSide::Call ? BarrierKind::UpAndOutPut
                                                     : BarrierKind::DownAndOutCall;
            }
            products.push_back(prod);
            probs.push_back(p);
        }
    }
    const BarrierBatch batch = price_barrier_batch(products, cfg.spot, models, cfg.mc);

    for (std::size_t m = 1; m < models.size(); ++m) {
        for (std::size_t j = 0; j < products.size(); ++j) {
            const BarrierProduct& prod = products[j];
            const McPrice& price = batch.prices()[j][m];
            const McPrice diff = batch.difference(j, m, 0);
            std::string kind;
            switch (prod.kind) {
                case BarrierKind::OneTouch: kind = prod.barrier > cfg.spot ? "up" : "down"; break;
                case BarrierKind::DownAndOutCall: kind = "down-and-out-call"; break;
                case BarrierKind::UpAndOutPut: kind = "up-and-out-put"; break;
            }
            std::vector<Cell> row{models[m].eta, kind, probs[j], prod.barrier};
            if (knockout) row.emplace_back(prod.strike);
            row.insert(row.end(), {price.value, price.std_error, price.plain_std_error,
                                   price.cv_beta, batch.prices()[j][0].value, diff.value,
                                   diff.std_error});
            csv.row(row);
        }
    }
}

void run_volswap_sweep(const ExperimentConfig& cfg, CsvWriter& csv) {
    const std::vector<CalibrationResult> fits = calibrate_grid(cfg);
    std::vector<ModelParams> models;
    for (const CalibrationResult& f : fits) models.push_back(f.params);
    const VolSwapBatch batch = price_vol_swap_batch(cfg.volswap, cfg.spot, models, cfg.mc);
    for (std::size_t m = 1; m < models.size(); ++m) {
        const McPrice diff = batch.difference(m, 0);
        csv.row({models[m].eta, models[m].alpha, batch.fair_strike[m].value,
                 batch.fair_strike[m].std_error, std::sqrt(batch.variance_strike[m].value),
                 diff.value, diff.std_error, cfg.volswap.returns()});
    }
}

void run_rr_beta_model(const ExperimentConfig& cfg, CsvWriter& csv) {
    require_positive_eta(cfg);
    for (double tenor : cfg.tenors) {
        SmileQuote quote = cfg.quote;
        quote.tenor = tenor;
        for (double eta : cfg.eta_grid) {
            const CalibrationResult r = fit(cfg, quote, eta);
            const double k =
                model_k_tau(r.params, cfg.spot, tenor, cfg.bump, cfg.convention);
            csv.row({tenor, eta, r.params.theta(), r.params.alpha, r.params.rho_bar, k,
                     model_rr_beta(k, r.params.alpha, eta, r.params.theta())});
        }
    }
}

void run_k_tau(const ExperimentConfig& cfg, CsvWriter& csv) {
    require_positive_eta(cfg);
    for (double eta : cfg.eta_grid) {
        const ModelParams p = fixed_params(cfg, eta);
        for (double tenor : cfg.tenors) {
            const double k = model_k_tau(p, cfg.spot, tenor, cfg.bump, cfg.convention);
            std::vector<Cell> row{eta, tenor, k, model_rr_beta(k, p.alpha, eta, p.theta())};
            if (cfg.beta_rr_target) {
                row.emplace_back(estimate_eta(*cfg.beta_rr_target, k, p.alpha, p.theta()));
            } else {
                row.emplace_back(std::string());
            }
            csv.row(row);
        }
    }
}

void run_rr_beta_empirical(const ExperimentConfig& cfg, CsvWriter& csv) {
    const MarketSeries series = read_market_series(cfg.input);
    const RrBetaEstimate est = estimate_rr_beta(series);
    csv.row({est.n, series.dropped_rows, est.beta_rr, est.beta_std_error, est.r_squared, est.corr,
             est.intercept});
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw EngineError("CSV row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                    out_ << format_double(v);
                } else if constexpr (std::is_same_v<T, std::string>) {
                    out_ << csv_escape(v);
                } else {
                    out_ << v;
                }
            },
            cells[i]);
    }
    out_ << '\n';
    out_.flush();
    ++rows_;
}

void CsvWriter::failure(const std::string& message) {
    out_ << "FAILED," << csv_escape(message);
    for (std::size_t i = 2; i < columns_; ++i) out_ << ',';
    out_ << '\n';
    out_.flush();
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

const std::vector<Experiment>& experiments() {
    static const std::vector<std::string> barrier_cols{
        "eta", "side", "bs_price", "barrier", "price", "price_se", "plain_se", "cv_beta",
        "heston_price", "difference", "difference_se"};
    static const std::vector<Experiment> list = [] {
        std::vector<std::string> ko_cols = barrier_cols;
        ko_cols.insert(ko_cols.begin() + 4, "strike");
        return std::vector<Experiment>{
            {"smile", "implied vol smile across strikes for fixed parameters and an eta grid",
             false, false, {"eta", "strike", "expiry", "implied_vol"}, run_smile},
            {"calib-sweep", "calibrated theta, alpha, rho_bar over an eta grid on one quote", true,
             false,
             {"eta", "theta", "alpha", "rho_bar", "feller_ratio", "max_residual", "iterations"},
             run_calib_sweep},
            {"one-touch-sweep",
             "one touch price minus Heston price by barrier (as Black-Scholes price) and eta",
             true, true, barrier_cols,
             [](const ExperimentConfig& c, CsvWriter& w) { run_barrier_sweep(c, w, false); }},
            {"knockout-sweep",
             "ATM-strike knockout price minus Heston price by barrier and eta", true, true,
             ko_cols,
             [](const ExperimentConfig& c, CsvWriter& w) { run_barrier_sweep(c, w, true); }},
            {"volswap-sweep", "volatility swap fair strike over an eta grid on one quote", true,
             true,
             {"eta", "alpha", "fair_strike", "fair_strike_se", "variance_strike_vol",
              "difference", "difference_se", "num_returns"},
             run_volswap_sweep},
            {"rr-beta-model",
             "model risk reversal beta by tenor, calibrated tenor by tenor to one quote", true,
             false, {"tenor", "eta", "theta", "alpha", "rho_bar", "k_tau", "beta_rr"},
             run_rr_beta_model},
            {"rr-beta-empirical",
             "regression of daily risk reversal changes on spot log returns from a CSV series",
             false, false,
             {"n", "dropped_rows", "beta_rr", "beta_se", "r_squared", "corr", "intercept"},
             run_rr_beta_empirical},
            {"k-tau", "slope of model risk reversal in initial correlation, and implied eta",
             false, false, {"eta", "tenor", "k_tau", "beta_rr", "eta_estimate"}, run_k_tau},
        };
    }();
    return list;
}

const Experiment& find_experiment(const std::string& name) {
    for (const Experiment& e : experiments()) {
        if (e.name == name) return e;
    }
    throw ValidationError("unknown experiment '" + name + "' (see --list)");
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out) {
    const Experiment& exp = find_experiment(cfg.experiment);
    validate_config(cfg);

    RunSummary summary;
    summary.csv = out;
    summary.manifest = out;
    summary.manifest += ".manifest.json";
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());

    nlohmann::json manifest;
    manifest["tool"] = "corrheston";
    manifest["version"] = kVersion;
    manifest["experiment"] = cfg.experiment;
    manifest["config_path"] = cfg.source.string();
    manifest["config"] = cfg.raw;
    manifest["output"] = out.string();
    manifest["seed"] = cfg.mc.seed;
    manifest["paths"] = cfg.mc.paths;
    manifest["threads"] = resolve_thread_count(cfg.mc.threads);
    manifest["started_at"] = utc_now();
    manifest["status"] = "running";
    write_json(summary.manifest, manifest);

    const auto start = std::chrono::steady_clock::now();
    std::ofstream file(out);
    if (!file) throw ValidationError("cannot write " + out.string());
    CsvWriter csv(file, exp.header);
    auto finish = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["finished_at"] = utc_now();
        manifest["elapsed_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest["rows"] = csv.rows();
    };
    try {
        exp.run(cfg, csv);
    } catch (const std::exception& e) {
        csv.failure(e.what());
        finish("failed");
        manifest["error"] = e.what();
        write_json(summary.manifest, manifest);
        throw;
    }
    finish("ok");
    write_json(summary.manifest, manifest);
    summary.rows = csv.rows();
    return summary;
}

}  // namespace corrheston::cli
