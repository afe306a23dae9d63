// Reader for the DC subset of the MATPOWER case format.
//
// Only the tables the DC chance-constrained pipeline needs are interpreted:
//   bus:     BUS_I BUS_TYPE PD ...
//   gen:     GEN_BUS PG QG QMAX QMIN VG MBASE GEN_STATUS PMAX PMIN ...
//   branch:  F_BUS T_BUS BR_R BR_X BR_B RATE_A RATE_B RATE_C TAP SHIFT BR_STATUS ...
//   gencost: MODEL STARTUP SHUTDOWN NCOST COST...   (MODEL 2, NCOST <= 3)
// Other assignments (version, areas, cell arrays of names) are skipped.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "ccopf/case_model.hpp"
#include "ccopf/error.hpp"

namespace ccopf {
namespace {

struct Row {
    std::vector<double> values;
    int line = 0;
    int column = 0;
};

class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    bool done() const { return pos_ >= text_.size(); }
    char peek() const { return done() ? '\0' : text_[pos_]; }
    int line() const { return line_; }
    int column() const { return column_; }

    char get() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& what) const { throw InputError(what, line_, column_); }

    void skip_to_eol() {
        while (!done() && peek() != '\n') get();
    }

    // Skips blanks and comments; newlines too unless `stop_at_newline`.
    void skip_blank(bool stop_at_newline) {
        while (!done()) {
            char c = peek();
            if (c == '%' || c == '#') {
                skip_to_eol();
            } else if (c == '.' && text_.substr(pos_, 3) == "...") {
                skip_to_eol();
                if (!done()) get();
            } else if (c == '\n') {
                if (stop_at_newline) return;
                get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                return;
            }
        }
    }

    std::string identifier() {
        std::string out;
        while (!done()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
                out.push_back(get());
            } else {
                break;
            }
        }
        return out;
    }

    double number() {
        const int l = line_, c = column_;
        std::string tok;
        while (!done()) {
            char ch = peek();
            if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '+' || ch == '-') {
                // a sign only starts a token or follows an exponent marker
                if ((ch == '+' || ch == '-') && !tok.empty() && tok.back() != 'e' && tok.back() != 'E') {
                    break;
                }
                tok.push_back(get());
            } else {
                break;
            }
        }
        if (tok == "Inf" || tok == "inf" || tok == "+Inf") return kUnlimited;
        if (tok == "-Inf" || tok == "-inf") return -kUnlimited;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size()) {
            throw InputError("malformed number '" + tok + "'", l, c);
        }
        return v;
    }

    std::vector<Row> matrix() {
        // caller consumed '['
        std::vector<Row> rows;
        Row current;
        auto flush = [&] {
            if (!current.values.empty()) rows.push_back(std::move(current));
            current = Row{};
        };
        for (;;) {
            skip_blank(true);
            while (!done() && peek() == ',') {
                get();
                skip_blank(true);
            }
            if (done()) fail("unterminated matrix");
            char c = peek();
            if (c == ']') {
                get();
                flush();
                return rows;
            }
            if (c == ';' || c == '\n') {
                get();
                flush();
                continue;
            }
            if (current.values.empty()) {
                current.line = line_;
                current.column = column_;
            }
            current.values.push_back(number());
            char after = peek();
            if (!done() && !std::isspace(static_cast<unsigned char>(after)) && after != ',' &&
                after != ';' && after != ']' && after != '%') {
                fail(std::string("unexpected character '") + after + "' in matrix");
            }
        }
    }

    void skip_delimited(char open, char close) {
        // caller consumed `open`
        int depth = 1;
        while (!done() && depth > 0) {
            char c = get();
            if (c == '\'') {
                while (!done() && peek() != '\'') get();
                if (!done()) get();
            } else if (c == '%') {
                skip_to_eol();
            } else if (c == open) {
                ++depth;
            } else if (c == close) {
                --depth;
            }
        }
        if (depth > 0) fail("unterminated block");
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
};

struct RawCase {
    std::string name = "case";
    double base_mva = 100.0;
    std::map<std::string, std::vector<Row>> tables;
};

RawCase scan(std::string_view text) {
    RawCase raw;
    Scanner s(text);
    for (;;) {
        s.skip_blank(false);
        if (s.done()) break;
        const int l = s.line(), c = s.column();
        char ch = s.peek();
        if (ch == ';') {
            s.get();
            continue;
        }
        if (!std::isalpha(static_cast<unsigned char>(ch))) {
            s.fail(std::string("unexpected character '") + ch + "'");
        }
        std::string ident = s.identifier();
        if (ident == "function") {
            s.skip_blank(true);
            std::string rest;
            while (!s.done() && s.peek() != '\n') rest.push_back(s.get());
            auto eq = rest.find('=');
            std::string nm = eq == std::string::npos ? rest : rest.substr(eq + 1);
            nm.erase(std::remove_if(nm.begin(), nm.end(), [](char x) { return std::isspace(static_cast<unsigned char>(x)); }),
                     nm.end());
            if (!nm.empty()) raw.name = nm;
            continue;
        }
        if (ident == "end" || ident == "return") continue;
        s.skip_blank(true);
        if (s.peek() != '=') throw InputError("expected '=' after '" + ident + "'", l, c);
        s.get();
        s.skip_blank(true);
        const std::string field = ident.substr(ident.find('.') == std::string::npos ? 0 : ident.find('.') + 1);
        char v = s.peek();
        if (v == '[') {
            s.get();
            raw.tables[field] = s.matrix();
        } else if (v == '{') {
            s.get();
            s.skip_delimited('{', '}');
        } else if (v == '\'' || v == '"') {
            char q = s.get();
            while (!s.done() && s.peek() != q) s.get();
            if (s.done()) s.fail("unterminated string");
            s.get();
        } else {
            double value = s.number();
            if (field == "baseMVA") raw.base_mva = value;
        }
        s.skip_blank(true);
        if (s.peek() == ';') s.get();
    }
    return raw;
}

const std::vector<Row>& table(const RawCase& raw, const std::string& name) {
    auto it = raw.tables.find(name);
    if (it == raw.tables.end() || it->second.empty()) {
        throw InputError("case file has no '" + name + "' table");
    }
    return it->second;
}

void require_columns(const Row& row, std::size_t n, const std::string& what) {
    if (row.values.size() < n) {
        throw InputError(what + " row needs at least " + std::to_string(n) + " columns", row.line,
                         row.column);
    }
}

int as_id(double v, const Row& row) {
    if (v != std::floor(v)) throw InputError("bus id must be an integer", row.line, row.column);
    return static_cast<int>(v);
}

}  // namespace

GridCase parse_matpower(std::string_view text, const ParseOptions& options) {
    const RawCase raw = scan(text);
    const auto& bus_rows = table(raw, "bus");
    const auto& gen_rows = table(raw, "gen");
    const auto& branch_rows = table(raw, "branch");
    const auto& cost_rows = table(raw, "gencost");

    struct FileBus {
        int id;
        int type;
        double load;
    };
    std::vector<FileBus> file_buses;
    std::map<int, std::size_t> by_id;
    for (const auto& r : bus_rows) {
        require_columns(r, 3, "bus");
        FileBus b{as_id(r.values[0], r), static_cast<int>(r.values[1]), r.values[2]};
        if (by_id.count(b.id)) throw InputError("duplicate bus id " + std::to_string(b.id), r.line, r.column);
        by_id[b.id] = file_buses.size();
        file_buses.push_back(b);
    }
    auto lookup = [&](double v, const Row& r, const char* what) -> const FileBus& {
        int id = as_id(v, r);
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            throw InputError(std::string(what) + " references unknown bus " + std::to_string(id), r.line,
                             r.column);
        }
        return file_buses[it->second];
    };

    struct FileGen {
        int bus_id;
        double pmin, pmax, c2, c1, c0;
    };
    std::vector<FileGen> file_gens;
    if (cost_rows.size() < gen_rows.size()) {
        throw InputError("gencost has fewer rows than gen");
    }
    for (std::size_t g = 0; g < gen_rows.size(); ++g) {
        const Row& r = gen_rows[g];
        require_columns(r, 10, "gen");
        const FileBus& bus = lookup(r.values[0], r, "generator");
        const bool in_service = r.values[7] > 0.0;
        const Row& c = cost_rows[g];
        require_columns(c, 4, "gencost");
        if (static_cast<int>(c.values[0]) != 2) {
            throw InputError("only polynomial (model 2) generator costs are supported", c.line, c.column);
        }
        const int ncost = static_cast<int>(c.values[3]);
        if (ncost < 1 || ncost > 3) {
            throw InputError("polynomial cost must have 1 to 3 coefficients", c.line, c.column);
        }
        require_columns(c, static_cast<std::size_t>(4 + ncost), "gencost");
        double coef[3] = {0.0, 0.0, 0.0};  // c2, c1, c0
        for (int k = 0; k < ncost; ++k) coef[3 - ncost + k] = c.values[static_cast<std::size_t>(4 + k)];
        if (!in_service || bus.type == 4) continue;
        file_gens.push_back({bus.id, r.values[9], r.values[8], coef[0], coef[1], coef[2]});
    }

    // Reference bus: a bus without generators, preferring the file's type-3 bus.
    auto hosts_gen = [&](int id) {
        return std::any_of(file_gens.begin(), file_gens.end(), [id](const FileGen& g) { return g.bus_id == id; });
    };
    std::optional<int> slack_id;
    for (const auto& b : file_buses) {
        if (b.type == 3 && !hosts_gen(b.id)) slack_id = b.id;
    }
    if (!slack_id) {
        for (const auto& b : file_buses) {
            if (b.type != 4 && !hosts_gen(b.id)) slack_id = b.id;
        }
    }

    std::vector<Bus> buses;
    std::map<int, int> internal;
    for (const auto& b : file_buses) {
        if (b.type == 4 || (slack_id && b.id == *slack_id)) continue;
        internal[b.id] = static_cast<int>(buses.size());
        buses.push_back({b.id, b.load, false});
    }
    bool need_dummy = !slack_id;
    if (slack_id) {
        internal[*slack_id] = static_cast<int>(buses.size());
        buses.push_back({*slack_id, file_buses[by_id[*slack_id]].load, false});
    }

    std::map<std::pair<int, int>, std::size_t> merged;
    std::vector<Line> lines;
    for (const auto& r : branch_rows) {
        require_columns(r, 6, "branch");
        const FileBus& f = lookup(r.values[0], r, "branch");
        const FileBus& t = lookup(r.values[1], r, "branch");
        const bool in_service = r.values.size() < 11 || r.values[10] > 0.0;
        if (!in_service || f.type == 4 || t.type == 4) continue;
        const double x = r.values[3];
        if (!(x > 0.0)) throw InputError("branch reactance must be positive", r.line, r.column);
        if (f.id == t.id) throw InputError("branch connects a bus to itself", r.line, r.column);
        const double rate = r.values[5];
        if (rate < 0.0) throw InputError("negative branch rating", r.line, r.column);
        Line line{internal.at(f.id), internal.at(t.id), 1.0 / x, rate == 0.0 ? kUnlimited : rate,
                  default_line_epsilon()};
        if (options.merge_parallel) {
            auto key = std::minmax(line.from, line.to);
            auto it = merged.find(key);
            if (it != merged.end()) {
                Line& m = lines[it->second];
                m.susceptance += line.susceptance;
                m.flow_limit_mw += line.flow_limit_mw;
                continue;
            }
            merged[key] = lines.size();
        }
        lines.push_back(line);
    }

    if (need_dummy) {
        int max_id = 0;
        for (const auto& b : buses) max_id = std::max(max_id, b.external_id);
        double beta = 1.0;
        for (const auto& l : lines) beta = std::max(beta, l.susceptance);
        const int dummy = static_cast<int>(buses.size());
        buses.push_back({max_id + 1, 0.0, true});
        lines.push_back({0, dummy, beta, kUnlimited, default_line_epsilon()});
    }

    std::vector<Generator> gens;
    for (const auto& g : file_gens) {
        gens.push_back({internal.at(g.bus_id), g.pmin, g.pmax, g.c2, g.c1, g.c0, default_gen_epsilon()});
    }

    return GridCase(raw.name, raw.base_mva, std::move(buses), std::move(lines), std::move(gens), {});
}

GridCase load_matpower(const std::filesystem::path& path, const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open case file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_matpower(buffer.str(), options);
}

}  // namespace ccopf
