#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "screenwise/backtest/engine.hpp"
#include "screenwise/core/text.hpp"

namespace screenwise {

namespace detail {

inline std::string join(const std::vector<std::string>& parts, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace detail

inline void write_ledger(std::ostream& out, const BacktestReport& report) {
    out << "method,objective,date,gross,net,turnover,establishment_cost,p_hat,assets,flags\n";
    for (const auto& cell : report.cells)
        for (const auto& r : cell.monthly)
            out << method_name(cell.method) << ',' << objective_name(cell.objective) << ',' << r.date.str() << ','
                << format_double(r.gross) << ',' << format_double(r.net) << ',' << format_double(r.turnover) << ','
                << format_double(r.establishment_cost) << ',' << r.p_hat << ',' << detail::join(r.assets) << ','
                << detail::join(r.flags) << '\n';
}

/// Rows are methods in table order; each objective contributes SR, Returns
/// and Variance columns (annualized). Cells without a summary print NA.
inline void write_summary_table(std::ostream& out, const BacktestReport& report) {
    std::vector<PrecisionMethod> methods;
    std::vector<Objective> objectives;
    for (auto m : table_method_order())
        for (const auto& c : report.cells)
            if (c.method == m) {
                methods.push_back(m);
                break;
            }
    for (auto o : {Objective::Gmv, Objective::Mv, Objective::Msr})
        for (const auto& c : report.cells)
            if (c.objective == o) {
                objectives.push_back(o);
                break;
            }
    out << "method";
    for (auto o : objectives)
        out << ',' << objective_label(o) << "_SR," << objective_label(o) << "_Returns," << objective_label(o)
            << "_Variance";
    out << '\n';
    for (auto m : methods) {
        out << method_label(m);
        for (auto o : objectives) {
            const CellResult* cell = nullptr;
            for (const auto& c : report.cells)
                if (c.method == m && c.objective == o) cell = &c;
            if (cell && cell->summary)
                out << ',' << format_double(cell->summary->annual_sharpe) << ','
                    << format_double(cell->summary->annual_return) << ','
                    << format_double(cell->summary->annual_variance);
            else
                out << ",NA,NA,NA";
        }
        out << '\n';
    }
}

inline void write_audit(std::ostream& out, const BacktestReport& report) {
    out << "date,agent_actionable,screened,intersection_size,fallback_used,conflicts_dropped,window_assets,dropped,"
           "flags\n";
    for (const auto& a : report.audit) {
        std::vector<std::string> counts;
        for (auto n : a.agent_actionable) counts.push_back(std::to_string(n));
        std::vector<std::string> flags;
        for (auto f : a.flags) {
            for (auto& ch : f)
                if (ch == ',' || ch == '\n') ch = ' ';
            flags.push_back(std::move(f));
        }
        out << a.date.str() << ',' << detail::join(counts) << ',' << a.screened << ',' << a.intersection_size << ','
            << (a.fallback_used ? "true" : "false") << ',' << a.conflicts_dropped << ',' << a.window_assets << ','
            << detail::join(a.dropped) << ',' << detail::join(flags) << '\n';
    }
}

/// Parsed summary table: row label -> column name -> value (NaN for NA).
using SummaryTable = std::map<std::string, std::map<std::string, double>>;

inline SummaryTable read_summary_table(std::istream& in, const std::string& source = "<summary>") {
    DelimitedReader reader(in, source);
    const auto header = reader.read_header();
    if (header.empty() || header[0] != "method") reader.fail(1, "summary header must start with 'method'");
    if ((header.size() - 1) % 3 != 0) reader.fail(1, "summary columns must come in SR/Returns/Variance triples");
    for (std::size_t i = 1; i < header.size(); i += 3) {
        const auto stem = header[i].substr(0, header[i].find('_'));
        if (header[i] != stem + "_SR" || header[i + 1] != stem + "_Returns" || header[i + 2] != stem + "_Variance")
            reader.fail(1, "bad column triple starting at '" + header[i] + "'");
    }
    SummaryTable table;
    std::vector<std::string_view> f;
    while (reader.next(f)) {
        if (f.size() != header.size()) reader.fail("wrong number of fields");
        auto& row = table[std::string(f[0])];
        for (std::size_t i = 1; i < f.size(); ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (f[i] != "NA" && !parse_double(f[i], v)) reader.fail("bad value '" + std::string(f[i]) + "'");
            row[header[i]] = v;
        }
    }
    return table;
}

}  // namespace screenwise
