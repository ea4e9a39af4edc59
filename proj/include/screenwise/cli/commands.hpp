#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "screenwise/backtest/config.hpp"
#include "screenwise/backtest/engine.hpp"
#include "screenwise/backtest/report.hpp"
#include "screenwise/cli/manifest.hpp"
#include "screenwise/core/config.hpp"
#include "screenwise/core/error.hpp"
#include "screenwise/synthetic/world.hpp"
#include "screenwise/theory/experiment.hpp"

namespace screenwise::cli {

enum ExitCode : int { Ok = 0, Failure = 1, ConfigError = 2, DataError = 3, EstimatorAbort = 4, TheoryFailure = 5 };

inline int exit_code_for(const Error& e) {
    if (dynamic_cast<const EstimatorFailure*>(&e)) return EstimatorAbort;
    switch (e.code()) {
    case ErrorCode::Config: return ConfigError;
    case ErrorCode::Io:
    case ErrorCode::NotFound:
    case ErrorCode::Parse:
    case ErrorCode::DuplicateKey:
    case ErrorCode::InvalidValue: return DataError;
    case ErrorCode::Theory: return TheoryFailure;
    default: return Failure;
    }
}

/// One-line JSON error record.
inline std::string error_record(const Error& e, const std::string& command) {
    nlohmann::ordered_json rec;
    rec["error"] = std::string(to_string(e.code()));
    rec["command"] = command;
    rec["exit"] = exit_code_for(e);
    rec["message"] = e.what();
    if (auto* p = dynamic_cast<const ParseError*>(&e)) rec["position"] = p->position();
    if (auto* c = dynamic_cast<const ConvergenceError*>(&e)) rec["residual"] = c->residual();
    return rec.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

enum class LogLevel { Quiet, Info, Debug };

/// SCREENWISE_LOG = quiet | info | debug.
inline LogLevel log_level() {
    const char* v = std::getenv("SCREENWISE_LOG");
    if (!v) return LogLevel::Info;
    const std::string s = lowercase(v);
    if (s == "quiet") return LogLevel::Quiet;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

struct Streams {
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
    LogLevel level = log_level();

    void info(const std::string& msg) const {
        if (level != LogLevel::Quiet) err << msg << '\n';
    }
};

/// Runs `body`, mapping exceptions to an error record and an exit code.
inline int guarded(const std::string& command, const Streams& io, const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        io.err << error_record(e, command) << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        nlohmann::ordered_json rec;
        rec["error"] = "E_INTERNAL";
        rec["command"] = command;
        rec["exit"] = int(Failure);
        rec["message"] = e.what();
        io.err << rec.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
        return Failure;
    }
}

/// Loads a key-value config and applies `key=value` overrides; overrides win.
/// Relative file paths are resolved against the config file's directory.
inline KeyValueConfig load_config_with(const std::string& path,
                                       const std::vector<std::pair<std::string, std::string>>& overrides,
                                       const std::vector<std::string>& path_keys) {
    KeyValueConfig kv = path.empty() ? KeyValueConfig{} : load_key_value_config(path);
    for (const auto& [k, v] : overrides) kv.set(k, v);
    const auto base = path.empty() ? std::filesystem::path{} : std::filesystem::path(path).parent_path();
    for (const auto& key : path_keys) {
        if (!kv.has(key)) continue;
        const std::filesystem::path p = kv.text(key, "");
        if (p.empty() || p.is_absolute()) continue;
        bool overridden = false;
        for (const auto& [k, _] : overrides) overridden |= k == key;
        if (!overridden) kv.set(key, (base / p).lexically_normal().string());
    }
    return kv;
}

inline const std::vector<std::string>& bundle_path_keys() {
    static const std::vector<std::string> keys{"returns", "characteristics", "factors", "sentiment",
                                               "analyst", "rules",           "output_dir"};
    return keys;
}

inline void add_bundle_inputs(RunManifest& m, const BundlePaths& p) {
    const std::pair<const char*, const std::string*> files[] = {
        {"returns", &p.returns},     {"characteristics", &p.characteristics}, {"factors", &p.factors},
        {"sentiment", &p.sentiment}, {"analyst", &p.analyst},                 {"rules", &p.rules}};
    for (const auto& [role, path] : files)
        if (!path->empty()) m.add_input(role, *path);
}

inline void check_inputs_for(const BacktestConfig& cfg, const BundlePaths& p) {
    for (auto m : cfg.methods)
        if (needs_factors(m) && p.factors.empty())
            throw Error(ErrorCode::Config, "method " + std::string(method_name(m)) + " needs a 'factors' file");
    for (auto a : cfg.screening.agents) {
        const std::string* need = nullptr;
        const char* key = "";
        switch (a) {
        case AgentKind::Rules: need = &p.rules, key = "rules"; break;
        case AgentKind::Sentiment: need = &p.sentiment, key = "sentiment"; break;
        case AgentKind::Analyst: need = &p.analyst, key = "analyst"; break;
        default: break;
        }
        if (need && need->empty())
            throw Error(ErrorCode::Config, "agent " + std::string(agent_name(a)) + " needs a '" + key + "' file");
    }
}

inline std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + p.string() + "'");
    return out;
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
    if (dir.empty()) throw Error(ErrorCode::Config, "missing required key 'output_dir'");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
    return dir;
}

struct BacktestArgs {
    std::string config;
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// Writes ledger.csv, summary.csv, audit.csv and manifest.json to output_dir.
inline int cmd_backtest(const BacktestArgs& args, const Streams& io = {}) {
    return guarded("backtest", io, [&] {
        const auto kv = load_config_with(args.config, args.overrides, bundle_path_keys());
        const auto cfg = backtest_config_from(kv);
        const auto paths = bundle_paths_from(kv);
        if (paths.returns.empty()) throw Error(ErrorCode::Config, "missing required key 'returns'");
        check_inputs_for(cfg, paths);
        const auto dir = ensure_dir(kv.text("output_dir", ""));

        RunManifest manifest("backtest", kv, cfg.seed);
        add_bundle_inputs(manifest, paths);
        const auto data = load_bundle(paths);
        io.info("backtest " + cfg.out_sample_start.str() + ".." + cfg.out_sample_end.str() + ", " +
                std::to_string(cfg.methods.size() * cfg.objectives.size()) + " cells");
        const auto report = run_backtest(cfg, data);

        const std::pair<const char*, void (*)(std::ostream&, const BacktestReport&)> writers[] = {
            {"ledger.csv", &write_ledger}, {"summary.csv", &write_summary_table}, {"audit.csv", &write_audit}};
        for (const auto& [name, write] : writers) {
            auto out = open_output(dir / name);
            write(out, report);
            manifest.add_output((dir / name).string());
        }
        manifest.write((dir / "manifest.json").string());
        io.info("wrote " + dir.string());
        return int(Ok);
    });
}

struct TheoryArgs {
    std::string spec;
    std::vector<std::pair<std::string, std::string>> overrides;
};

/// Exit 0 iff the median error is weakly decreasing along the grid.
inline int cmd_validate_theory(const TheoryArgs& args, const Streams& io = {}) {
    return guarded("validate-theory", io, [&] {
        const auto kv = load_config_with(args.spec, args.overrides, {"output"});
        const auto cfg = theory_config_from(kv);
        const std::string output = kv.required("output");
        RunManifest manifest("validate-theory", kv, cfg.seed);
        const auto result = sharpe_convergence_experiment(cfg);
        {
            auto out = open_output(output);
            write_convergence_table(out, result);
        }
        manifest.add_output(output);
        nlohmann::ordered_json summary;
        summary["monotone"] = result.monotone;
        summary["converged"] = result.converged;
        summary["terminal_median"] = result.rows.back().q50;
        summary["notes"] = result.notes;
        manifest.set("result", summary);
        manifest.write(output + ".manifest.json");
        io.out << summary.dump() << '\n';
        return result.monotone ? int(Ok) : int(Failure);
    });
}

struct GenerateArgs {
    std::string output_dir;
    WorldSpec spec;
};

/// Writes the world files plus a ready-to-run backtest.cfg.
inline int cmd_generate_synthetic(const GenerateArgs& args, const Streams& io = {}) {
    return guarded("gen-synthetic", io, [&] {
        const auto dir = ensure_dir(args.output_dir);
        const auto world = generate_world(args.spec);
        write_world(world, dir);
        const Month start = args.spec.start + std::min(180, args.spec.months - 12);
        const Month end = args.spec.start + (args.spec.months - 1);
        auto out = open_output(dir / "backtest.cfg");
        out << "returns = returns.csv\n"
               "characteristics = characteristics.csv\n"
               "factors = factors.csv\n"
               "sentiment = sentiment.csv\n"
               "analyst = analyst.csv\n"
               "rules = rules.jsonl\n"
               "output_dir = results\n"
            << "train_window = " << std::min(180, args.spec.months - 13) << "\n"
            << "start = " << start.str() << "\nend = " << end.str() << "\n"
            << "seed = " << args.spec.seed << "\n";
        io.info("wrote " + std::to_string(args.spec.assets) + " assets x " + std::to_string(args.spec.months) +
                " months to " + dir.string());
        return int(Ok);
    });
}

struct ScreenArgs {
    std::string config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string date;
    std::string output;
};

inline DataBundle load_for(const KeyValueConfig& kv, const BacktestConfig& cfg, BundlePaths& paths) {
    paths = bundle_paths_from(kv);
    if (paths.returns.empty()) throw Error(ErrorCode::Config, "missing required key 'returns'");
    check_inputs_for(cfg, paths);
    return load_bundle(paths);
}

/// Config keys that must be present for a full backtest but are irrelevant
/// to one-date commands.
inline void default_backtest_range(KeyValueConfig& kv, Month date) {
    if (!kv.has("start")) kv.set("start", date.str());
    if (!kv.has("end")) kv.set("end", date.str());
}

/// Emits `date,asset,signal` for the consensus screen at one month.
inline int cmd_screen(const ScreenArgs& args, const Streams& io = {}) {
    return guarded("screen", io, [&] {
        auto kv = load_config_with(args.config, args.overrides, bundle_path_keys());
        const Month date = Month::parse(args.date);
        default_backtest_range(kv, date);
        auto cfg = backtest_config_from(kv);
        cfg.methods = {PrecisionMethod::Nodewise};
        BundlePaths paths;
        const auto data = load_for(kv, cfg, paths);
        const auto result = screen_assets(data.through(date), date, cfg.screening);
        std::ofstream file;
        if (!args.output.empty()) file = open_output(args.output);
        std::ostream& out = args.output.empty() ? io.out : file;
        out << "date,asset,signal\n";
        for (const auto& [asset, s] : result.signals.actionable())
            out << date.str() << ',' << asset << ',' << to_string(s) << '\n';
        io.info(std::to_string(result.signals.actionable().size()) + " screened, intersection " +
                std::to_string(result.intersection_size) + (result.fallback_used ? ", union fallback" : ""));
        return int(Ok);
    });
}

struct EstimateArgs {
    std::string config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string date;
    std::string method = "nw";
    std::string output;
};

/// Emits the precision matrix estimated on the screened assets' trailing
/// window ending at `date`, as CSV with an asset header row.
inline int cmd_estimate(const EstimateArgs& args, const Streams& io = {}) {
    return guarded("estimate", io, [&] {
        auto kv = load_config_with(args.config, args.overrides, bundle_path_keys());
        const Month date = Month::parse(args.date);
        default_backtest_range(kv, date);
        kv.set("methods", args.method);
        const auto cfg = backtest_config_from(kv);
        BundlePaths paths;
        const auto data = load_for(kv, cfg, paths);
        const auto view = data.through(date);
        const auto screen = screen_assets(view, date, cfg.screening);
        const auto screened = screen.signals.actionable_assets();
        if (screened.empty()) throw Error(ErrorCode::Degenerate, "screen at " + date.str() + " is empty");
        const auto window = align_window(view.returns, date, cfg.train_window, screened);
        std::optional<FactorPanel> factors;
        if (needs_factors(cfg.methods.front())) factors = view.factors->window(window.matrix.dates);
        PrecisionConfig pc = cfg.precision;
        pc.deep.seed = SeedSplitter(cfg.seed).seed("precision.deep", static_cast<std::uint64_t>(date.index()));
        const auto est = estimate_precision(cfg.methods.front(), window.matrix, factors ? &*factors : nullptr, pc);

        std::ofstream file;
        if (!args.output.empty()) file = open_output(args.output);
        std::ostream& out = args.output.empty() ? io.out : file;
        out << "asset";
        for (const auto& a : est.assets) out << ',' << a;
        out << '\n';
        for (Eigen::Index i = 0; i < est.gamma.rows(); ++i) {
            out << est.assets[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < est.gamma.cols(); ++j) out << ',' << format_double(est.gamma(i, j));
            out << '\n';
        }
        io.info(std::string(method_label(est.method)) + " on " + std::to_string(est.assets.size()) + " assets, " +
                std::to_string(window.dropped.size()) + " dropped for coverage");
        return int(Ok);
    });
}

}  // namespace screenwise::cli
