#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "screenwise/cli/commands.hpp"

using namespace screenwise;
using Overrides = std::vector<std::pair<std::string, std::string>>;

namespace {

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

// --set key=value pairs
void add_sets(Overrides& o, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::Config, "--set expects key=value, got '" + s + "'");
        o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Screen-then-optimize portfolio backtests and screening theory checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::tool_version);

    std::vector<std::string> sets;

    auto* bt = app.add_subcommand("backtest", "Run the rolling screen/estimate/weight backtest");
    cli::BacktestArgs bt_args;
    std::vector<std::string> methods, objectives;
    std::string start, end, output_dir, on_failure, seed, cost_bp;
    bt->add_option("-c,--config", bt_args.config, "key = value config file")->required();
    bt->add_option("--method", methods, "precision method(s): nw rnw poet deep nls");
    bt->add_option("--objective", objectives, "objective(s): gmv mv msr");
    bt->add_option("--start", start, "first out-of-sample month YYYY-MM");
    bt->add_option("--end", end, "last out-of-sample month YYYY-MM");
    bt->add_option("--seed", seed, "root seed");
    bt->add_option("--cost-bp", cost_bp, "transaction cost in basis points");
    bt->add_option("--on-failure", on_failure, "skip or abort");
    bt->add_option("-o,--output-dir", output_dir, "directory for ledger, summary, audit and manifest");
    bt->add_option("--set", sets, "override any config key: key=value");

    auto* th = app.add_subcommand("validate-theory", "Monte-Carlo check of squared Sharpe ratio convergence");
    cli::TheoryArgs th_args;
    std::string th_output, th_seed;
    th->add_option("-s,--spec", th_args.spec, "theory spec file")->required();
    th->add_option("-o,--output", th_output, "convergence table path");
    th->add_option("--seed", th_seed, "root seed");
    th->add_option("--set", sets, "override any spec key: key=value");

    auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic data bundle");
    cli::GenerateArgs gen_args;
    std::string gen_start;
    gen->add_option("-o,--output-dir", gen_args.output_dir, "target directory")->required();
    gen->add_option("--seed", gen_args.spec.seed, "root seed");
    gen->add_option("--assets", gen_args.spec.assets, "number of assets");
    gen->add_option("--months", gen_args.spec.months, "number of months");
    gen->add_option("--start", gen_start, "first month YYYY-MM");
    gen->add_option("--factors", gen_args.spec.factors, "number of factors");
    gen->add_option("--strength", gen_args.spec.predictive_strength, "predictive strength, 0 for a null world");
    gen->add_option("--late-entry", gen_args.spec.late_entry_fraction, "fraction of assets listed late");
    gen->add_option("--missing", gen_args.spec.missing_fraction, "fraction of missing characteristics");

    auto* scr = app.add_subcommand("screen", "Emit the consensus signals for one month");
    cli::ScreenArgs scr_args;
    scr->add_option("-c,--config", scr_args.config, "backtest config file")->required();
    scr->add_option("-d,--date", scr_args.date, "decision month YYYY-MM")->required();
    scr->add_option("-o,--output", scr_args.output, "CSV path (default stdout)");
    scr->add_option("--set", sets, "override any config key: key=value");

    auto* est = app.add_subcommand("estimate", "Emit a precision matrix for one month's screened set");
    cli::EstimateArgs est_args;
    est->add_option("-c,--config", est_args.config, "backtest config file")->required();
    est->add_option("-d,--date", est_args.date, "decision month YYYY-MM")->required();
    est->add_option("-m,--method", est_args.method, "precision method")->default_val("nw");
    est->add_option("-o,--output", est_args.output, "CSV path (default stdout)");
    est->add_option("--set", sets, "override any config key: key=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::ConfigError;
    }

    const cli::Streams io;
    Overrides o;
    try {
        add_sets(o, sets);
    } catch (const Error& e) {
        io.err << cli::error_record(e, "cli") << '\n';
        return cli::ConfigError;
    }

    if (*bt) {
        if (!methods.empty()) o.emplace_back("methods", join_list(methods));
        if (!objectives.empty()) o.emplace_back("objectives", join_list(objectives));
        const std::pair<const char*, std::string*> flags[] = {{"start", &start},         {"end", &end},
                                                               {"seed", &seed},           {"cost_bp", &cost_bp},
                                                               {"on_failure", &on_failure}, {"output_dir", &output_dir}};
        for (const auto& [key, value] : flags)
            if (!value->empty()) o.emplace_back(key, *value);
        bt_args.overrides = o;
        return cli::cmd_backtest(bt_args, io);
    }
    if (*th) {
        if (!th_output.empty()) o.emplace_back("output", th_output);
        if (!th_seed.empty()) o.emplace_back("seed", th_seed);
        th_args.overrides = o;
        return cli::cmd_validate_theory(th_args, io);
    }
    if (*gen) {
        if (!gen_start.empty()) {
            try {
                gen_args.spec.start = Month::parse(gen_start);
            } catch (const Error& e) {
                io.err << cli::error_record(Error(ErrorCode::Config, e.what()), "gen-synthetic") << '\n';
                return cli::ConfigError;
            }
        }
        return cli::cmd_generate_synthetic(gen_args, io);
    }
    if (*scr) {
        scr_args.overrides = o;
        return cli::cmd_screen(scr_args, io);
    }
    est_args.overrides = o;
    return cli::cmd_estimate(est_args, io);
}
