#include "qcd/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <variant>

#include "qcd/bounds.hpp"
#include "qcd/distributions.hpp"
#include "qcd/simulator.hpp"
#include "qcd/validation.hpp"

namespace qcd::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Grid {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;

    std::vector<double> values() const {
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
        return out;
    }
};

Grid parse_grid(const std::string& text) {
    Grid grid;
    char sep1 = 0;
    char sep2 = 0;
    std::istringstream in(text);
    if (!(in >> grid.start >> sep1 >> grid.stop >> sep2 >> grid.step) || sep1 != ':' ||
        sep2 != ':' || !in.eof()) {
        throw UsageError("--grid must look like start:stop:step, got '" + text + "'");
    }
    if (!(grid.start < grid.stop) || !(grid.step > 0.0)) {
        throw UsageError("--grid requires start < stop and step > 0");
    }
    return grid;
}

struct Options {
    double rho0 = 0.0;
    double rho1 = 0.5;
    std::optional<double> rho_assumed;
    double p0 = 0.1;
    std::string procedure = "both";
    std::optional<double> log_threshold;
    std::optional<std::string> grid;
    std::optional<double> alpha;
    std::uint64_t trials = 10000;
    std::uint64_t horizon = kDefaultHorizon;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    unsigned workers = 0;

    double assumed() const { return rho_assumed.value_or(rho1); }
};

// Everything a subcommand needs once flags are validated.
struct Setup {
    std::shared_ptr<const GaussianModel> f0;
    std::shared_ptr<const GaussianModel> f1;
    std::shared_ptr<const GaussianModel> f1_assumed;
    ChangePointPrior prior = ChangePointPrior::no_change();
    double theta_bar = 1.0;
    DivergencePair divergences{0.0, 0.0};
    std::vector<DetectorKind> kinds;
};

Setup make_setup(const Options& opt) {
    Setup s;
    try {
        s.f0 = std::make_shared<const GaussianModel>(opt.rho0);
        s.f1 = std::make_shared<const GaussianModel>(opt.rho1);
        s.f1_assumed = opt.assumed() == opt.rho1 ? s.f1
                                                 : std::make_shared<const GaussianModel>(opt.assumed());
        s.prior = ChangePointPrior::geometric(opt.p0);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    s.theta_bar = prior_mean(s.prior);
    s.divergences = DivergencePair(gaussian_kl(opt.rho1, opt.rho0), gaussian_kl(opt.rho1, opt.assumed()));
    if (opt.procedure == "cusum") {
        s.kinds = {DetectorKind::Cusum};
    } else if (opt.procedure == "sr") {
        s.kinds = {DetectorKind::ShiryaevRoberts};
    } else {
        s.kinds = {DetectorKind::Cusum, DetectorKind::ShiryaevRoberts};
    }
    if (opt.log_threshold && !std::isfinite(*opt.log_threshold)) {
        throw UsageError("--log-threshold must be finite");
    }
    if (opt.alpha && !(*opt.alpha > 0.0 && *opt.alpha < 1.0)) {
        throw UsageError("--alpha must lie in (0, 1)");
    }
    if (opt.trials == 0) throw UsageError("--trials must be >= 1");
    if (opt.horizon == 0) throw UsageError("--horizon must be >= 1");
    return s;
}

std::uint64_t require_seed(const Options& opt, const std::string& command) {
    if (!opt.seed) throw UsageError("--seed is required for " + command);
    return *opt.seed;
}

// JSON cannot hold NaN or infinity: unavailable values become null and
// infinite ones the string "inf".
ordered_json json_number(double value) {
    if (std::isnan(value)) return nullptr;
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return value;
}

// A table of cells that are either numbers or strings.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::variant<double, std::uint64_t, std::string>>> rows;
};

void write_table(const Table& table, const ordered_json& config, const std::string& format,
                 std::ostream& out) {
    if (format == "json") {
        ordered_json doc;
        doc["config"] = config;
        doc["rows"] = ordered_json::array();
        for (const auto& row : table.rows) {
            ordered_json obj;
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                if (const double* number = std::get_if<double>(&row[c])) {
                    obj[table.columns[c]] = json_number(*number);
                } else if (const auto* count = std::get_if<std::uint64_t>(&row[c])) {
                    obj[table.columns[c]] = *count;
                } else {
                    obj[table.columns[c]] = std::get<std::string>(row[c]);
                }
            }
            doc["rows"].push_back(std::move(obj));
        }
        out << doc.dump(2) << '\n';
        return;
    }
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            if (const double* number = std::get_if<double>(&row[c])) {
                out << format_number(*number);
            } else if (const auto* count = std::get_if<std::uint64_t>(&row[c])) {
                out << *count;
            } else {
                out << std::get<std::string>(row[c]);
            }
        }
        out << '\n';
    }
}

void emit(const Table& table, const ordered_json& config, const Options& opt, std::ostream& out) {
    if (opt.out.empty()) {
        write_table(table, config, opt.format, out);
        return;
    }
    std::ofstream file(opt.out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open output file '" + opt.out + "'");
    write_table(table, config, opt.format, file);
    file.flush();
    if (!file) throw IoError("failed writing output file '" + opt.out + "'");
}

ordered_json config_echo(const std::string& command, const Options& opt) {
    ordered_json config;
    config["command"] = command;
    config["rho0"] = opt.rho0;
    config["rho1"] = opt.rho1;
    config["rho_assumed"] = opt.assumed();
    config["p0"] = opt.p0;
    config["procedure"] = opt.procedure;
    if (opt.log_threshold) config["log_threshold"] = *opt.log_threshold;
    if (opt.grid) config["grid"] = *opt.grid;
    if (opt.alpha) config["alpha"] = *opt.alpha;
    config["trials"] = opt.trials;
    config["horizon"] = opt.horizon;
    if (opt.seed) config["seed"] = *opt.seed;
    return config;
}

double value_or_nan(const Estimate& est) { return est.value.value_or(kNaN); }

// The alpha at which threshold_for_pfa would return A, i.e. the PFA bound,
// when it lies strictly inside (0, 1).
double add_bound_at(DetectorKind kind, double A, const Setup& s) {
    const double alpha = pfa_upper_bound(kind, A, s.theta_bar);
    if (!(alpha < 1.0) || classify_regime(s.divergences) == RegimeClass::Degenerate) return kNaN;
    return add_asymptotic_upper(kind, alpha, s.theta_bar, s.divergences).value;
}

void append_metric_rows(Table& table, double log_threshold,
                        const std::map<DetectorKind, MetricsEstimate>& metrics, const Setup& s) {
    const double A = std::exp(log_threshold);
    for (DetectorKind kind : s.kinds) {
        const MetricsEstimate& m = metrics.at(kind);
        table.rows.push_back({log_threshold,
                              std::string(to_string(kind)),
                              value_or_nan(m.add),
                              m.add.std_error,
                              value_or_nan(m.pfa),
                              m.pfa.std_error,
                              value_or_nan(m.arl),
                              m.arl.std_error,
                              m.n_censored,
                              add_bound_at(kind, A, s),
                              pfa_upper_bound(kind, A, s.theta_bar),
                              arl_lower_bound(A)});
    }
}

ExperimentConfig experiment(const Options& opt, const Setup& s, std::uint64_t seed) {
    ExperimentConfig config;
    config.models = ModelTriple{s.f0, s.f1, s.f1_assumed};
    config.prior = s.prior;
    config.kinds = s.kinds;
    config.n_trials = opt.trials;
    config.horizon = opt.horizon;
    config.master_seed = seed;
    config.workers = opt.workers;
    return config;
}

int cmd_kl(const Options& opt, std::ostream& out) {
    const Setup s = make_setup(opt);
    Table table{{"d10", "d11_tilde", "gap", "regime"}, {}};
    table.rows.push_back({s.divergences.d10, s.divergences.d11_tilde, s.divergences.gap(),
                          std::string(to_string(classify_regime(s.divergences)))});
    emit(table, config_echo("kl", opt), opt, out);
    return kSuccess;
}

int cmd_bounds(const Options& opt, std::ostream& out) {
    const Setup s = make_setup(opt);
    if (opt.alpha.has_value() == opt.log_threshold.has_value()) {
        throw UsageError("bounds needs exactly one of --alpha or --log-threshold");
    }
    Table table{{"procedure", "threshold", "alpha", "bound_arl", "bound_pfa", "bound_add", "add_qualifier"},
                {}};
    for (DetectorKind kind : s.kinds) {
        double A = 0.0;
        double alpha = kNaN;
        try {
            if (opt.alpha) {
                alpha = *opt.alpha;
                A = threshold_for_pfa(kind, alpha, s.theta_bar);
            } else {
                A = std::exp(*opt.log_threshold);
                const double pfa = pfa_upper_bound(kind, A, s.theta_bar);
                if (pfa < 1.0) alpha = pfa;
            }
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        double add = kNaN;
        std::string qualifier = "unavailable";
        if (!std::isnan(alpha) && classify_regime(s.divergences) != RegimeClass::Degenerate) {
            const AddBound bound = add_asymptotic_upper(kind, alpha, s.theta_bar, s.divergences);
            add = bound.value;
            qualifier = std::string(to_string(bound.qualifier));
        }
        table.rows.push_back({std::string(to_string(kind)), A, alpha, arl_lower_bound(A),
                              pfa_upper_bound(kind, A, s.theta_bar), add, qualifier});
    }
    emit(table, config_echo("bounds", opt), opt, out);
    return kSuccess;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
    const Setup s = make_setup(opt);
    const std::uint64_t seed = require_seed(opt, "simulate");
    if (!opt.log_threshold) throw UsageError("simulate needs --log-threshold");
    ExperimentConfig config = experiment(opt, s, seed);
    config.log_threshold = *opt.log_threshold;
    Table table{kSweepColumns, {}};
    append_metric_rows(table, config.log_threshold, estimate_metrics(config), s);
    emit(table, config_echo("simulate", opt), opt, out);
    return kSuccess;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
    const Setup s = make_setup(opt);
    const std::uint64_t seed = require_seed(opt, "sweep");
    if (!opt.grid) throw UsageError("sweep needs --grid start:stop:step");
    const std::vector<double> thresholds = parse_grid(*opt.grid).values();
    const auto sweep = add_vs_logA_sweep(experiment(opt, s, seed), thresholds);
    Table table{kSweepColumns, {}};
    for (const SweepPoint& point : sweep) {
        append_metric_rows(table, point.log_threshold, point.metrics, s);
    }
    emit(table, config_echo("sweep", opt), opt, out);
    return kSuccess;
}

int cmd_validate(const Options& opt, std::ostream& out) {
    make_setup(opt);
    ValidationOptions v;
    v.rho0 = opt.rho0;
    v.rho1 = opt.rho1;
    v.rho_assumed = opt.rho_assumed.value_or(0.3);
    v.p0 = opt.p0;
    v.trials = opt.trials;
    v.horizon = opt.horizon;
    v.seed = require_seed(opt, "validate");
    v.workers = opt.workers;
    bool all_passed = true;
    for (const CheckResult& check : run_validation(v)) {
        out << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
        all_passed = all_passed && check.passed;
    }
    out << (all_passed ? "all checks passed" : "some checks failed") << '\n';
    return all_passed ? kSuccess : kCheckFailure;
}

void add_common_options(CLI::App& app, Options& opt) {
    app.add_option("--rho0", opt.rho0, "pre-change correlation")->capture_default_str();
    app.add_option("--rho1", opt.rho1, "true post-change correlation")->capture_default_str();
    app.add_option("--rho-assumed", opt.rho_assumed,
                   "post-change correlation assumed by the detector (default: rho1)");
    app.add_option("--p0", opt.p0, "geometric change-point prior parameter")->capture_default_str();
    app.add_option("--procedure", opt.procedure, "detector")
        ->check(CLI::IsMember({"cusum", "sr", "both"}))
        ->capture_default_str();
    app.add_option("--log-threshold", opt.log_threshold, "log A");
    app.add_option("--grid", opt.grid, "log A grid start:stop:step (inclusive)");
    app.add_option("--alpha", opt.alpha, "PFA target");
    app.add_option("--trials", opt.trials, "Monte Carlo trials")->capture_default_str();
    app.add_option("--horizon", opt.horizon, "samples per trial before censoring")
        ->capture_default_str();
    app.add_option("--seed", opt.seed, "master seed (required for simulations)");
    app.add_option("--out", opt.out, "output file (default: stdout)");
    app.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--workers", opt.workers, "worker threads (0 = all cores)")->capture_default_str();
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quickest change detection under post-change model mismatch"};
    app.name("qcd");
    app.require_subcommand(1);
    Options opt;
    struct Command {
        const char* name;
        const char* help;
        int (*handler)(const Options&, std::ostream&);
    };
    const Command commands[] = {
        {"kl", "KL divergences D10, D11~ and the delay regime", cmd_kl},
        {"bounds", "ARL/PFA/ADD bounds for a threshold or PFA target", cmd_bounds},
        {"simulate", "Monte Carlo metrics at one threshold", cmd_simulate},
        {"sweep", "Monte Carlo metrics over a log-threshold grid", cmd_sweep},
        {"validate", "run the self-check suite", cmd_validate},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subcommands;
    for (const Command& command : commands) {
        CLI::App* sub = app.add_subcommand(command.name, command.help);
        add_common_options(*sub, opt);
        subcommands.emplace_back(sub, &command);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return e.get_exit_code() == 0 ? kSuccess : kUsageError;
    }

    try {
        for (const auto& [sub, command] : subcommands) {
            if (sub->parsed()) return command->handler(opt, out);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace qcd::cli
