#pragma once

// CPLEX LP text format. The writer lists every column in the objective
// (zero coefficients included) so that column order survives a round trip.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vaxnet/milp/problem.hpp"

namespace vaxnet::milp {

namespace detail {

inline std::string lp_number(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class LineWriter {
public:
    explicit LineWriter(std::ostream& os) : os_(os) {}
    void put(const std::string& s) {
        if (width_ + s.size() > 200 && width_ > 0) {
            os_ << "\n   ";
            width_ = 3;
        }
        os_ << s;
        width_ += s.size();
    }
    void end_line() {
        os_ << '\n';
        width_ = 0;
    }

private:
    std::ostream& os_;
    std::size_t width_ = 0;
};

inline void write_term(LineWriter& w, double coef, const std::string& name, bool first) {
    const bool neg = std::signbit(coef);
    std::string s;
    if (neg) s = first ? "- " : " - ";
    else s = first ? "" : " + ";
    w.put(s + lp_number(std::abs(coef)) + " " + name);
}

}  // namespace detail

inline void write_lp(const MilpProblem& p, std::ostream& os) {
    p.check();
    using detail::lp_number;
    os << "\\Problem name: " << p.name << "\n\nMaximize\n";
    detail::LineWriter w(os);
    w.put(" obj:");
    for (std::size_t j = 0; j < p.columns(); ++j) {
        w.put(" ");
        detail::write_term(w, p.objective[j], p.variables[j].name, j == 0);
    }
    w.end_line();

    os << "Subject To\n";
    for (const Row& r : p.rows) {
        w.put(" " + r.name + ":");
        if (r.terms.empty()) {
            w.put(" 0 " + (p.columns() ? p.variables[0].name : std::string()));
        }
        for (std::size_t k = 0; k < r.terms.size(); ++k) {
            w.put(" ");
            detail::write_term(w, r.terms[k].coef, p.variables[static_cast<std::size_t>(r.terms[k].column)].name, k == 0);
        }
        const char* sense = r.sense == RowSense::LessEqual ? " <= " : r.sense == RowSense::Equal ? " = " : " >= ";
        w.put(sense + lp_number(r.rhs));
        w.end_line();
    }

    os << "Bounds\n";
    for (const Variable& v : p.variables) {
        const double def_hi = v.domain == Domain::Binary ? 1.0 : kInf;
        if (v.lower == 0.0 && !std::signbit(v.lower) && v.upper == def_hi) continue;
        if (v.lower == -kInf && v.upper == kInf)
            os << " " << v.name << " free\n";
        else if (v.lower == v.upper)
            os << " " << v.name << " = " << lp_number(v.lower) << "\n";
        else
            os << " " << lp_number(v.lower) << " <= " << v.name << " <= " << lp_number(v.upper) << "\n";
    }

    auto list = [&](const char* header, Domain d) {
        bool any = false;
        for (const Variable& v : p.variables)
            if (v.domain == d) {
                if (!any) os << header << "\n";
                any = true;
                w.put(" " + v.name);
            }
        if (any) w.end_line();
    };
    list("Generals", Domain::Integer);
    list("Binaries", Domain::Binary);
    os << "End\n";
}

inline void write_lp_file(const MilpProblem& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_lp(p, out);
    out.flush();
    if (!out) throw Error("failed writing " + path);
}

namespace detail {

struct LpToken {
    enum Kind { Ident, Number, Op, Colon, Plus, Minus, Eof } kind;
    std::string text;
    double value = 0.0;
};

inline std::string lower_case(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || std::string_view("_!\"#$%&(),;?@'{}~").find(c) != std::string_view::npos;
}
inline bool ident_char(char c) {
    return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '[' || c == ']' || c == '^' || c == '|';
}

inline std::vector<LpToken> lp_tokenize(const std::string& text, std::string& problem_name) {
    std::vector<LpToken> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '\\') {
            const std::size_t eol = text.find('\n', i);
            const std::string line = text.substr(i, eol == std::string::npos ? std::string::npos : eol - i);
            const std::string tag = "\\Problem name: ";
            if (line.rfind(tag, 0) == 0) {
                problem_name = line.substr(tag.size());
                while (!problem_name.empty() && std::isspace(static_cast<unsigned char>(problem_name.back())))
                    problem_name.pop_back();
            }
            i = eol == std::string::npos ? n : eol;
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::string op(1, c);
            ++i;
            if (i < n && (text[i] == '=' || text[i] == '<' || text[i] == '>')) op += text[i++];
            if (op == "=<" || op == "<") op = "<=";
            if (op == "=>" || op == ">") op = ">=";
            if (op == "==") op = "=";
            out.push_back({LpToken::Op, op});
            continue;
        }
        if (c == ':') {
            out.push_back({LpToken::Colon, ":"});
            ++i;
            continue;
        }
        if (c == '+' || c == '-') {
            out.push_back({c == '+' ? LpToken::Plus : LpToken::Minus, std::string(1, c)});
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(text.c_str() + i, &end);
            const auto len = static_cast<std::size_t>(end - (text.c_str() + i));
            if (len == 0) throw Error("malformed number in LP file near offset " + std::to_string(i));
            out.push_back({LpToken::Number, text.substr(i, len), v});
            i += len;
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i + 1;
            while (j < n && ident_char(text[j])) ++j;
            out.push_back({LpToken::Ident, text.substr(i, j - i)});
            i = j;
            continue;
        }
        throw Error(std::string("unexpected character '") + c + "' in LP file");
    }
    out.push_back({LpToken::Eof, ""});
    return out;
}

class LpParser {
public:
    explicit LpParser(const std::string& text) { toks_ = lp_tokenize(text, p_.name); }

    MilpProblem parse() {
        enum class Sec { None, Objective, Rows, Bounds, Generals, Binaries, End } sec = Sec::None;
        bool minimise = false;
        while (peek().kind != LpToken::Eof && sec != Sec::End) {
            if (auto s = section_keyword()) {
                const std::string k = *s;
                if (k == "max" || k == "min") {
                    sec = Sec::Objective;
                    minimise = k == "min";
                    parse_objective();
                } else if (k == "st") sec = Sec::Rows;
                else if (k == "bounds") sec = Sec::Bounds;
                else if (k == "generals") sec = Sec::Generals;
                else if (k == "binaries") sec = Sec::Binaries;
                else if (k == "end") sec = Sec::End;
                continue;
            }
            switch (sec) {
            case Sec::Rows: parse_row(); break;
            case Sec::Bounds: parse_bound(); break;
            case Sec::Generals:
            case Sec::Binaries: {
                const LpToken t = next();
                if (t.kind != LpToken::Ident) throw Error("expected a column name in integer section, got '" + t.text + "'");
                const std::size_t j = column(t.text);
                p_.variables[j].domain = sec == Sec::Binaries ? Domain::Binary : Domain::Integer;
                break;
            }
            default: throw Error("unexpected token '" + peek().text + "' outside any section");
            }
        }
        for (std::size_t j = 0; j < p_.columns(); ++j) {
            auto& v = p_.variables[j];
            if (v.domain == Domain::Binary && !explicit_bounds_.count(j)) {
                v.lower = 0.0;
                v.upper = 1.0;
            }
        }
        if (minimise)
            for (double& c : p_.objective) c = -c;
        p_.check();
        return std::move(p_);
    }

private:
    const LpToken& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    LpToken next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

    /// Consumes a section keyword at the cursor if present.
    std::optional<std::string> section_keyword() {
        if (peek().kind != LpToken::Ident || peek(1).kind == LpToken::Colon) return std::nullopt;
        const std::string w = lower_case(peek().text);
        static const std::map<std::string, std::string> words = {
            {"maximize", "max"}, {"maximise", "max"}, {"maximum", "max"}, {"max", "max"},
            {"minimize", "min"}, {"minimise", "min"}, {"minimum", "min"}, {"min", "min"},
            {"st", "st"},        {"s.t.", "st"},      {"bounds", "bounds"}, {"bound", "bounds"},
            {"generals", "generals"}, {"general", "generals"}, {"gen", "generals"},
            {"integers", "generals"}, {"binaries", "binaries"}, {"binary", "binaries"},
            {"bin", "binaries"}, {"end", "end"}};
        if ((w == "subject" || w == "such") && peek(1).kind == LpToken::Ident) {
            const std::string w2 = lower_case(peek(1).text);
            if ((w == "subject" && w2 == "to") || (w == "such" && w2 == "that")) {
                pos_ += 2;
                return "st";
            }
        }
        auto it = words.find(w);
        if (it == words.end()) return std::nullopt;
        ++pos_;
        return it->second;
    }

    std::size_t column(const std::string& name) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        const auto j = static_cast<std::size_t>(p_.add_variable(name, Domain::Continuous));
        index_.emplace(name, j);
        return j;
    }

    bool at_section() const {
        if (peek().kind != LpToken::Ident || peek(1).kind == LpToken::Colon) return false;
        const std::string w = lower_case(peek().text);
        static const std::set<std::string> words = {"maximize", "maximise", "maximum", "max", "minimize", "minimise",
                                                    "minimum", "min", "subject", "such", "st", "s.t.", "bounds",
                                                    "bound", "generals", "general", "gen", "integers", "binaries",
                                                    "binary", "bin", "end"};
        return words.count(w) > 0;
    }

    /// Parses `[+|-] [number] name` terms until a non-term token.
    std::vector<std::pair<std::size_t, double>> parse_expression() {
        std::vector<std::pair<std::size_t, double>> terms;
        while (true) {
            double sign = 1.0;
            bool had_sign = false;
            while (peek().kind == LpToken::Plus || peek().kind == LpToken::Minus) {
                if (next().kind == LpToken::Minus) sign = -sign;
                had_sign = true;
            }
            double coef = 1.0;
            if (peek().kind == LpToken::Number) {
                if (peek(1).kind != LpToken::Ident || at_section_after_number()) {
                    if (had_sign) throw Error("dangling sign in LP expression");
                    break;  // a constant: not supported in expressions, left for the caller
                }
                coef = next().value;
            }
            if (peek().kind != LpToken::Ident || at_section()) {
                if (had_sign) throw Error("dangling sign in LP expression");
                break;
            }
            const std::string name = next().text;
            terms.emplace_back(column(name), sign * coef);
        }
        return terms;
    }

    bool at_section_after_number() const {
        if (peek(1).kind != LpToken::Ident || peek(2).kind == LpToken::Colon) return false;
        const std::string w = lower_case(peek(1).text);
        return w == "end" || w == "bounds" || w == "generals" || w == "binaries" || w == "subject";
    }

    void parse_objective() {
        if (peek().kind == LpToken::Ident && peek(1).kind == LpToken::Colon) pos_ += 2;
        for (const auto& [j, c] : parse_expression()) p_.objective[j] += c;
    }

    double signed_number() {
        double sign = 1.0;
        while (peek().kind == LpToken::Plus || peek().kind == LpToken::Minus)
            if (next().kind == LpToken::Minus) sign = -sign;
        const LpToken t = next();
        if (t.kind == LpToken::Number) return sign * t.value;
        if (t.kind == LpToken::Ident) {
            const std::string w = lower_case(t.text);
            if (w == "inf" || w == "infinity") return sign * kInf;
        }
        throw Error("expected a number in LP file, got '" + t.text + "'");
    }

    void parse_row() {
        std::string name = "R" + std::to_string(p_.rows.size() + 1);
        if (peek().kind == LpToken::Ident && peek(1).kind == LpToken::Colon) {
            name = next().text;
            next();
        }
        const auto expr = parse_expression();
        const LpToken op = next();
        if (op.kind != LpToken::Op) throw Error("row " + name + ": expected a comparison operator");
        const double rhs = signed_number();
        std::vector<Term> terms;
        for (const auto& [j, c] : expr) terms.push_back({static_cast<int>(j), c});
        const RowSense sense = op.text == "<=" ? RowSense::LessEqual : op.text == ">=" ? RowSense::GreaterEqual : RowSense::Equal;
        p_.add_row(name, std::move(terms), sense, rhs);
    }

    bool number_like() const {
        const auto& t = peek();
        if (t.kind == LpToken::Number || t.kind == LpToken::Plus || t.kind == LpToken::Minus) return true;
        if (t.kind == LpToken::Ident) {
            const std::string w = lower_case(t.text);
            return (w == "inf" || w == "infinity") && peek(1).kind == LpToken::Op;
        }
        return false;
    }

    void apply(std::size_t j, const std::string& op, double v, bool name_on_left) {
        auto& var = p_.variables[j];
        explicit_bounds_.insert(j);
        std::string o = op;
        if (!name_on_left) o = op == "<=" ? ">=" : op == ">=" ? "<=" : "=";
        if (o == "<=") var.upper = v;
        else if (o == ">=") var.lower = v;
        else var.lower = var.upper = v;
    }

    void parse_bound() {
        if (number_like()) {
            const double a = signed_number();
            const LpToken op1 = next();
            const LpToken name = next();
            if (op1.kind != LpToken::Op || name.kind != LpToken::Ident) throw Error("malformed bound line");
            const std::size_t j = column(name.text);
            apply(j, op1.text, a, false);
            if (peek().kind == LpToken::Op) {
                const std::string op2 = next().text;
                apply(j, op2, signed_number(), true);
            }
            return;
        }
        const LpToken name = next();
        if (name.kind != LpToken::Ident) throw Error("malformed bound line near '" + name.text + "'");
        const std::size_t j = column(name.text);
        if (peek().kind == LpToken::Ident && lower_case(peek().text) == "free") {
            next();
            explicit_bounds_.insert(j);
            p_.variables[j].lower = -kInf;
            p_.variables[j].upper = kInf;
            return;
        }
        const LpToken op = next();
        if (op.kind != LpToken::Op) throw Error("malformed bound for " + name.text);
        apply(j, op.text, signed_number(), true);
    }

    std::vector<LpToken> toks_;
    std::size_t pos_ = 0;
    MilpProblem p_;
    std::map<std::string, std::size_t> index_;
    std::set<std::size_t> explicit_bounds_;
};

}  // namespace detail

inline MilpProblem parse_lp(const std::string& text) {
    detail::LpParser parser(text);
    return parser.parse();
}

inline MilpProblem read_lp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_lp(ss.str());
}

}  // namespace vaxnet::milp
