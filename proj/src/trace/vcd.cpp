#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "assertfix/error.hpp"
#include "assertfix/trace/trace.hpp"

namespace assertfix::trace {

namespace {

struct VcdToken {
    std::string text;
    int line;
};

std::vector<VcdToken> tokenize(const std::string& text) {
    std::vector<VcdToken> out;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t b = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        out.push_back({text.substr(b, i - b), line});
    }
    return out;
}

struct VarDecl {
    std::string name;
    std::string path;
    std::string id;
    std::uint32_t width = 1;
    int lsb = 0;
};

Value parse_vector(const std::string& digits, std::uint32_t width, int line) {
    if (width > 64) return Value::unknown(width);
    std::uint64_t bits = 0;
    for (char ch : digits) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (c == 'x' || c == 'z' || c == 'u' || c == '-') return Value::unknown(width);
        if (c != '0' && c != '1') throw VcdSyntaxError("bad vector digit '" + std::string(1, ch) + "'", line);
        bits = (bits << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return Value::of(width, bits);
}

} // namespace

CounterexampleTrace parse_vcd(const std::string& text, const std::string& clock, ClockEdge edge) {
    auto tokens = tokenize(text);
    std::vector<VarDecl> vars;
    std::unordered_map<std::string, std::vector<std::size_t>> by_id;
    std::vector<std::string> scope;
    std::size_t i = 0;
    auto need = [&](std::size_t k) -> const VcdToken& {
        if (k >= tokens.size()) {
            int line = tokens.empty() ? 1 : tokens.back().line;
            throw VcdSyntaxError("unexpected end of file", line);
        }
        return tokens[k];
    };
    auto skip_to_end = [&]() {
        while (need(i).text != "$end") ++i;
        ++i;
    };

    // Header.
    bool definitions_done = false;
    while (i < tokens.size() && !definitions_done) {
        const VcdToken& t = tokens[i];
        if (t.text == "$scope") {
            need(i + 2);
            scope.push_back(tokens[i + 2].text);
            i += 3;
            skip_to_end();
        } else if (t.text == "$upscope") {
            if (scope.empty()) throw VcdSyntaxError("$upscope without $scope", t.line);
            scope.pop_back();
            ++i;
            skip_to_end();
        } else if (t.text == "$var") {
            VarDecl v;
            const VcdToken& size = need(i + 2);
            try {
                v.width = static_cast<std::uint32_t>(std::stoul(size.text));
            } catch (const std::exception&) {
                throw VcdSyntaxError("bad $var size '" + size.text + "'", size.line);
            }
            if (v.width == 0) throw VcdSyntaxError("zero-width $var", size.line);
            v.id = need(i + 3).text;
            std::string ref = need(i + 4).text;
            i += 5;
            std::string range;
            while (need(i).text != "$end") range += tokens[i++].text;
            ++i;
            auto bracket = ref.find('[');
            if (bracket != std::string::npos) {
                range = ref.substr(bracket) + range;
                ref = ref.substr(0, bracket);
            }
            if (!range.empty()) {
                auto colon = range.find(':');
                if (colon != std::string::npos && range.front() == '[' && range.back() == ']') {
                    try {
                        int msb = std::stoi(range.substr(1, colon - 1));
                        int lsb = std::stoi(range.substr(colon + 1, range.size() - colon - 2));
                        v.lsb = std::min(msb, lsb);
                    } catch (const std::exception&) {
                        throw VcdSyntaxError("bad $var range '" + range + "'", t.line);
                    }
                } else {
                    ref += range; // single-bit select of a vector: keep as part of the name
                }
            }
            v.name = ref;
            for (const auto& s : scope) v.path += s + ".";
            v.path += ref;
            by_id[v.id].push_back(vars.size());
            vars.push_back(std::move(v));
        } else if (t.text == "$enddefinitions") {
            ++i;
            skip_to_end();
            definitions_done = true;
        } else if (!t.text.empty() && t.text[0] == '$') {
            ++i;
            skip_to_end();
        } else {
            throw VcdSyntaxError("unexpected '" + t.text + "' in VCD header", t.line);
        }
    }
    if (!definitions_done) throw VcdSyntaxError("missing $enddefinitions", tokens.empty() ? 1 : tokens.back().line);

    // Resolve the clock: exact path first, then leaf name.
    std::optional<std::size_t> clock_var;
    for (std::size_t k = 0; k < vars.size() && !clock_var; ++k) {
        if (vars[k].path == clock) clock_var = k;
    }
    for (std::size_t k = 0; k < vars.size() && !clock_var; ++k) {
        if (vars[k].name == clock) clock_var = k;
    }
    if (!clock_var) throw MissingClock(clock);
    const std::string clock_id = vars[*clock_var].id;

    std::vector<Value> current;
    for (const auto& v : vars) current.push_back(Value::unknown(v.width));
    std::vector<std::vector<Value>> samples(vars.size());
    Value clock_prev = Value::unknown(1);
    std::size_t n = 0;

    auto finish_timestamp = [&]() {
        Value clk = current[*clock_var];
        bool fired = false;
        if (clk.known && clock_prev.known) {
            bool now = clk.bits & 1;
            bool before = clock_prev.bits & 1;
            fired = edge == ClockEdge::Rising ? (!before && now) : (before && !now);
        }
        clock_prev = clk;
        if (!fired) return;
        for (std::size_t k = 0; k < vars.size(); ++k) samples[k].push_back(current[k]);
        ++n;
    };
    auto assign = [&](const std::string& id, const Value& v, int line) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw VcdSyntaxError("unknown identifier code '" + id + "'", line);
        for (std::size_t k : it->second) {
            Value sized = v;
            if (sized.width != vars[k].width) {
                sized.width = vars[k].width;
                if (sized.known) sized.bits &= hdl::width_mask(vars[k].width);
            }
            current[k] = vars[k].width > 64 ? Value::unknown(vars[k].width) : sized;
        }
    };

    long long time = -1;
    bool have_time = false;
    while (i < tokens.size()) {
        const VcdToken& t = tokens[i];
        const std::string& s = t.text;
        if (s[0] == '#') {
            long long next;
            try {
                next = std::stoll(s.substr(1));
            } catch (const std::exception&) {
                throw VcdSyntaxError("bad timestamp '" + s + "'", t.line);
            }
            if (have_time && next < time) throw VcdSyntaxError("timestamps go backwards", t.line);
            if (have_time && next != time) finish_timestamp();
            time = next;
            have_time = true;
            ++i;
        } else if (s == "$dumpvars" || s == "$dumpall" || s == "$dumpon" || s == "$dumpoff" || s == "$end") {
            ++i;
        } else if (s == "$comment") {
            ++i;
            skip_to_end();
        } else if (s[0] == '$') {
            throw VcdSyntaxError("unexpected '" + s + "' after definitions", t.line);
        } else if (s[0] == 'b' || s[0] == 'B') {
            const VcdToken& id = need(i + 1);
            auto it = by_id.find(id.text);
            if (it == by_id.end()) throw VcdSyntaxError("unknown identifier code '" + id.text + "'", id.line);
            std::uint32_t w = vars[it->second.front()].width;
            assign(id.text, parse_vector(s.substr(1), w, t.line), t.line);
            i += 2;
        } else if (s[0] == 'r' || s[0] == 'R') {
            const VcdToken& id = need(i + 1);
            auto it = by_id.find(id.text);
            if (it == by_id.end()) throw VcdSyntaxError("unknown identifier code '" + id.text + "'", id.line);
            assign(id.text, Value::unknown(vars[it->second.front()].width), t.line);
            i += 2;
        } else if (std::string_view("01xXzZ").find(s[0]) != std::string_view::npos) {
            if (s.size() < 2) throw VcdSyntaxError("scalar change without identifier", t.line);
            char c = s[0];
            Value v = c == '0' ? Value::of(1, 0) : c == '1' ? Value::of(1, 1) : Value::unknown(1);
            assign(s.substr(1), v, t.line);
            ++i;
        } else {
            throw VcdSyntaxError("unexpected '" + s + "'", t.line);
        }
    }
    finish_timestamp();

    CounterexampleTrace trace(clock, n);
    for (std::size_t k = 0; k < vars.size(); ++k) {
        if (vars[k].id == clock_id) continue;
        TraceSignal s;
        s.name = vars[k].name;
        s.path = vars[k].path;
        s.id = vars[k].id;
        s.width = vars[k].width;
        s.lsb = vars[k].lsb;
        s.values = std::move(samples[k]);
        if (trace.find(s.path)) continue; // duplicate declaration of the same path
        trace.add_signal(std::move(s));
    }
    return trace;
}

CounterexampleTrace parse_vcd_file(const std::string& path, const std::string& clock, ClockEdge edge) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_vcd(os.str(), clock, edge);
}

namespace {

std::string id_code(std::size_t index) {
    std::string out;
    do {
        out.push_back(static_cast<char>('!' + index % 94));
        index /= 94;
    } while (index > 0);
    return out;
}

std::string encode(const Value& v, const std::string& id) {
    if (v.width == 1) return (v.known ? (v.bits ? "1" : "0") : "x") + id;
    if (!v.known) return "bx " + id;
    std::string bits;
    std::uint64_t b = v.bits;
    do {
        bits.push_back(static_cast<char>('0' + (b & 1)));
        b >>= 1;
    } while (b);
    return "b" + std::string(bits.rbegin(), bits.rend()) + " " + id;
}

} // namespace

std::string write_vcd(const CounterexampleTrace& t) {
    std::ostringstream os;
    os << "$timescale 1ns $end\n";
    os << "$scope module top $end\n";
    const std::string clk_id = id_code(0);
    os << "$var wire 1 " << clk_id << " " << t.clock() << " $end\n";
    std::vector<std::string> ids;
    std::size_t next = 1;
    for (const auto& s : t.signals()) {
        ids.push_back(id_code(next++));
        os << "$var " << (s.width == 1 ? "wire" : "reg") << " " << s.width << " " << ids.back() << " " << s.name;
        if (s.width > 1 || s.lsb != 0) {
            os << " [" << s.lsb + static_cast<int>(s.width) - 1 << ":" << s.lsb << "]";
        }
        os << " $end\n";
    }
    os << "$upscope $end\n";
    os << "$enddefinitions $end\n";
    if (t.length() == 0) return os.str();
    os << "#0\n$dumpvars\n0" << clk_id << "\n";
    for (std::size_t k = 0; k < t.signals().size(); ++k) {
        os << encode(t.signals()[k].values[0], ids[k]) << "\n";
    }
    os << "$end\n";
    for (std::size_t c = 0; c < t.length(); ++c) {
        os << "#" << 10 * c + 5 << "\n1" << clk_id << "\n";
        if (c > 0) {
            for (std::size_t k = 0; k < t.signals().size(); ++k) {
                const Value& now = t.signals()[k].values[c];
                if (!(now == t.signals()[k].values[c - 1])) os << encode(now, ids[k]) << "\n";
            }
        }
        os << "#" << 10 * c + 10 << "\n0" << clk_id << "\n";
    }
    return os.str();
}

} // namespace assertfix::trace
