#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/planning.hpp"
#include "expplan/regression.hpp"

namespace expplan {

// Seventeen significant digits, enough to read back the same double.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw io_error("not a number: '" + s + "'");
    }
    if (used != s.size()) throw io_error("trailing characters in number '" + s + "'");
    return v;
}

inline std::size_t parse_index(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw io_error("not an index: '" + s + "'");
    }
    return static_cast<std::size_t>(std::stoull(s));
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    return out;
}

// ---- delimited tables ----------------------------------------------------

// Comma-separated table with a header row. Cells are stored as text; reals
// should be written with format_real so they survive a round trip.
struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw io_error("missing column '" + name + "'");
    }

    friend bool operator==(const table&, const table&) = default;
};

// Cells holding a comma or a quote are wrapped in double quotes, with inner
// quotes doubled.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cell += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += ch;
        }
    }
    if (quoted) throw io_error("unterminated quote in '" + line + "'");
    out.push_back(std::move(cell));
    return out;
}

inline std::string csv_cell(const std::string& c) {
    if (c.find('\n') != std::string::npos) throw io_error("cell contains a newline");
    if (c.find_first_of(",\"") == std::string::npos) return c;
    std::string q = "\"";
    for (char ch : c) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + '"';
}

inline void emit_results(const table& t, std::ostream& sink) {
    auto write_row = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) sink << (i ? "," : "") << csv_cell(r[i]);
        sink << '\n';
    };
    write_row(t.header);
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) throw io_error("row width does not match header");
        write_row(r);
    }
    if (!sink) throw io_error("write failed");
}

inline void emit_results(const table& t, const std::string& path) {
    auto out = open_out(path);
    emit_results(t, out);
}

inline table read_results(std::istream& in) {
    table t;
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty table");
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto r = split_csv_line(line);
        if (r.size() != t.header.size()) throw io_error("row width does not match header");
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline table read_results(const std::string& path) {
    auto in = open_in(path);
    return read_results(in);
}

// ---- function class table ------------------------------------------------
//
//   function_class 1
//   sizes <|F|> <|X|> <|A|>
//   range_bound <B>
//   contexts <id> ...
//   actions <id> ...
//   <f> <x> <a> <value>      one line per entry, any order, each exactly once

inline void write_function_class(const function_class& F, std::ostream& out) {
    out << "function_class 1\n";
    out << "sizes " << F.size() << ' ' << F.num_contexts() << ' ' << F.num_actions() << '\n';
    out << "range_bound " << format_real(F.range_bound()) << '\n';
    out << "contexts";
    for (const auto& id : F.contexts().ids()) out << ' ' << id;
    out << "\nactions";
    for (const auto& id : F.actions().ids()) out << ' ' << id;
    out << '\n';
    for (function_id f = 0; f < F.size(); ++f)
        for (context_id x = 0; x < F.num_contexts(); ++x)
            for (action_id a = 0; a < F.num_actions(); ++a)
                out << f << ' ' << x << ' ' << a << ' ' << format_real(F(f, x, a)) << '\n';
    if (!out) throw io_error("write failed");
}

namespace detail {

inline std::vector<std::string> words(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> w;
    for (std::string s; ss >> s;) w.push_back(s);
    return w;
}

inline std::vector<std::string> expect_line(std::istream& in, const std::string& key, std::size_t min_words = 1) {
    std::string line;
    while (std::getline(in, line)) {
        auto w = words(line);
        if (w.empty()) continue;
        if (w[0] != key || w.size() < min_words) throw io_error("expected '" + key + "' line, got '" + line + "'");
        return w;
    }
    throw io_error("unexpected end of file, expected '" + key + "'");
}

} // namespace detail

inline function_class read_function_class(std::istream& in) {
    detail::expect_line(in, "function_class", 2);
    auto sizes = detail::expect_line(in, "sizes", 4);
    const std::size_t nf = parse_index(sizes[1]), nx = parse_index(sizes[2]), na = parse_index(sizes[3]);
    const double B = parse_real(detail::expect_line(in, "range_bound", 2)[1]);
    auto cx = detail::expect_line(in, "contexts");
    auto ax = detail::expect_line(in, "actions");
    if (cx.size() - 1 != nx || ax.size() - 1 != na) throw io_error("identifier count does not match sizes");
    const std::size_t total = nf * nx * na;
    std::vector<double> values(total, 0.0);
    std::vector<char> seen(total, 0);
    std::size_t count = 0;
    std::string line;
    while (std::getline(in, line)) {
        auto w = detail::words(line);
        if (w.empty()) continue;
        if (w.size() != 4) throw io_error("malformed value record '" + line + "'");
        const std::size_t f = parse_index(w[0]), x = parse_index(w[1]), a = parse_index(w[2]);
        if (f >= nf || x >= nx || a >= na) throw io_error("value record out of range '" + line + "'");
        const std::size_t i = (f * nx + x) * na + a;
        if (seen[i]) throw io_error("duplicate value record '" + line + "'");
        seen[i] = 1;
        values[i] = parse_real(w[3]);
        ++count;
    }
    if (count != total) throw io_error("function class table is incomplete");
    return function_class(context_space(std::vector<std::string>(cx.begin() + 1, cx.end())),
                          action_space(std::vector<std::string>(ax.begin() + 1, ax.end())), std::move(values), B);
}

inline function_class read_function_class(const std::string& path) {
    auto in = open_in(path);
    return read_function_class(in);
}

inline void write_function_class(const function_class& F, const std::string& path) {
    auto out = open_out(path);
    write_function_class(F, out);
}

// ---- plans -----------------------------------------------------------------
//
//   plan 1
//   kind eluder|uniform|fixed
//   horizon <T>
//   delta / c_bar / range_bound / noise_bound <real>
//   class_size <|F|>          (0 when no class is attached)
//   records <n>
//   <context> <action>        eluder: planner records; fixed: "- <action>"

inline std::string to_string(plan_kind k) {
    switch (k) {
    case plan_kind::eluder: return "eluder";
    case plan_kind::uniform: return "uniform";
    case plan_kind::fixed: return "fixed";
    }
    return "?";
}

inline plan_kind plan_kind_from_string(const std::string& s) {
    if (s == "eluder") return plan_kind::eluder;
    if (s == "uniform") return plan_kind::uniform;
    if (s == "fixed") return plan_kind::fixed;
    throw io_error("unknown plan kind '" + s + "'");
}

inline void write_plan(const plan& p, std::ostream& out) {
    out << "plan 1\n";
    out << "kind " << to_string(p.kind) << '\n';
    out << "horizon " << p.horizon << '\n';
    out << "delta " << format_real(p.confidence.delta) << '\n';
    out << "c_bar " << format_real(p.confidence.c_bar) << '\n';
    out << "range_bound " << format_real(p.confidence.range_bound) << '\n';
    out << "noise_bound " << format_real(p.confidence.noise_bound) << '\n';
    out << "class_size " << (p.F ? p.F->size() : 0) << '\n';
    if (p.kind == plan_kind::fixed) {
        out << "records " << p.fixed_actions.size() << '\n';
        for (action_id a : p.fixed_actions) out << "- " << a << '\n';
    } else {
        out << "records " << p.planner_dataset.size() << '\n';
        for (const auto& z : p.planner_dataset.records()) out << z.context << ' ' << z.action << '\n';
    }
    if (!out) throw io_error("write failed");
}

// F must be supplied for eluder plans; it is checked against the stored size.
inline plan read_plan(std::istream& in, std::shared_ptr<const function_class> F = nullptr) {
    detail::expect_line(in, "plan", 2);
    plan p;
    p.kind = plan_kind_from_string(detail::expect_line(in, "kind", 2)[1]);
    p.horizon = parse_index(detail::expect_line(in, "horizon", 2)[1]);
    p.confidence.delta = parse_real(detail::expect_line(in, "delta", 2)[1]);
    p.confidence.c_bar = parse_real(detail::expect_line(in, "c_bar", 2)[1]);
    p.confidence.range_bound = parse_real(detail::expect_line(in, "range_bound", 2)[1]);
    p.confidence.noise_bound = parse_real(detail::expect_line(in, "noise_bound", 2)[1]);
    const std::size_t class_size = parse_index(detail::expect_line(in, "class_size", 2)[1]);
    const std::size_t n = parse_index(detail::expect_line(in, "records", 2)[1]);
    std::string line;
    std::size_t got = 0;
    while (got < n && std::getline(in, line)) {
        auto w = detail::words(line);
        if (w.empty()) continue;
        if (w.size() != 2) throw io_error("malformed plan record '" + line + "'");
        if (p.kind == plan_kind::fixed) {
            if (w[0] != "-") throw io_error("malformed fixed-plan record '" + line + "'");
            p.fixed_actions.push_back(parse_index(w[1]));
        } else {
            p.planner_dataset.push_back({parse_index(w[0]), parse_index(w[1])});
        }
        ++got;
    }
    if (got != n) throw io_error("plan file ends before all records were read");
    p.confidence.validate();
    if (p.kind == plan_kind::eluder) {
        if (!F) throw io_error("eluder plan needs its function class");
        if (F->size() != class_size) throw io_error("plan was built for a class of a different size");
        if (p.planner_dataset.size() != p.horizon) throw io_error("eluder plan record count differs from horizon");
        for (const auto& z : p.planner_dataset.records()) F->at(0, z.context, z.action);
        p.F = std::move(F);
    } else if (p.kind == plan_kind::fixed) {
        if (p.fixed_actions.size() != p.horizon) throw io_error("fixed plan record count differs from horizon");
    }
    if (p.horizon < 1) throw io_error("plan horizon must be at least 1");
    return p;
}

inline plan read_plan(const std::string& path, std::shared_ptr<const function_class> F = nullptr) {
    auto in = open_in(path);
    return read_plan(in, std::move(F));
}

inline void write_plan(const plan& p, const std::string& path) {
    auto out = open_out(path);
    write_plan(p, out);
}

// ---- datasets and policies -------------------------------------------------

inline table dataset_table(const labeled_dataset& D) {
    table t{{"t", "context", "action", "reward"}, {}};
    for (std::size_t i = 0; i < D.size(); ++i) {
        const auto& s = D[i];
        t.rows.push_back({std::to_string(i + 1), std::to_string(s.context), std::to_string(s.action),
                          format_real(s.reward)});
    }
    return t;
}

inline labeled_dataset dataset_from_table(const table& t) {
    const std::size_t ct = t.column("t"), cx = t.column("context"), ca = t.column("action"), cr = t.column("reward");
    labeled_dataset D;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (parse_index(r[ct]) != i + 1) throw io_error("dataset rows must be numbered 1, 2, ...");
        D.push_back({parse_index(r[cx]), parse_index(r[ca]), parse_real(r[cr])});
    }
    return D;
}

inline table policy_table(const mixture_policy& pi) {
    table t{{"member", "context", "action"}, {}};
    for (std::size_t m = 0; m < pi.size(); ++m) {
        const auto& tab = pi.members()[m].table();
        for (context_id x = 0; x < tab.size(); ++x)
            t.rows.push_back({std::to_string(m + 1), std::to_string(x), std::to_string(tab[x])});
    }
    return t;
}

inline table policy_table(const deterministic_policy& pi) { return policy_table(mixture_policy({pi})); }

inline mixture_policy policy_from_table(const table& t) {
    const std::size_t cm = t.column("member"), cx = t.column("context"), ca = t.column("action");
    std::vector<std::vector<action_id>> tabs;
    for (const auto& r : t.rows) {
        const std::size_t m = parse_index(r[cm]), x = parse_index(r[cx]);
        if (m < 1) throw io_error("policy members are numbered from 1");
        if (tabs.size() < m) tabs.resize(m);
        auto& tab = tabs[m - 1];
        if (tab.size() != x) throw io_error("policy rows must list contexts 0, 1, ... in order");
        tab.push_back(parse_index(r[ca]));
    }
    if (tabs.empty()) throw io_error("policy table is empty");
    const std::size_t width = tabs.front().size();
    std::vector<deterministic_policy> members;
    for (auto& tab : tabs) {
        if (tab.empty() || tab.size() != width) throw io_error("policy members cover different contexts");
        members.emplace_back(std::move(tab));
    }
    return mixture_policy(std::move(members));
}

} // namespace expplan
