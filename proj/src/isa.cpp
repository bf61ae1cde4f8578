#include "itrm/isa.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <unordered_map>

namespace itrm {

namespace {

uint32_t inferred_register_count(const std::vector<Instruction>& lines) {
    uint32_t max_used = 0;
    bool any = false;
    for (const auto& in : lines) {
        switch (in.op) {
            case Opcode::Inc:
            case Opcode::Dec:
            case Opcode::OracleQuery:
            case Opcode::JumpIfZero:
                max_used = std::max(max_used, in.a);
                any = true;
                break;
            case Opcode::Copy:
                max_used = std::max({max_used, in.a, in.b});
                any = true;
                break;
            case Opcode::Halt:
                break;
        }
    }
    return any ? max_used + 1 : 1;
}

struct Token {
    std::string_view text;
    size_t column;  // 1-based
};

std::vector<Token> tokenize_line(std::string_view line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
            ++i;
            continue;
        }
        size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' &&
               line[i] != '#')
            ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

std::optional<uint64_t> parse_uint(std::string_view s) {
    if (s.empty()) return std::nullopt;
    uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

Program::Program(std::vector<Instruction> lines, uint32_t register_count,
                 std::string source_name)
    : lines_(std::move(lines)),
      register_count_(register_count),
      source_name_(std::move(source_name)) {
    if (lines_.empty()) throw std::invalid_argument("program must be nonempty");
    if (register_count_ == 0 || register_count_ > kMaxRegisters)
        throw std::invalid_argument("register count out of range");
}

Program parse_program(std::string_view source, std::string source_name) {
    std::vector<Instruction> lines;
    std::unordered_map<std::string, uint32_t> labels;
    struct Fixup {
        size_t instr;
        std::string label;
        size_t src_line, src_col;
    };
    std::vector<Fixup> fixups;
    std::optional<uint32_t> declared;

    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t end = source.find('\n', pos);
        std::string_view raw =
            source.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        ++line_no;
        auto toks = tokenize_line(raw);

        // Bind label prefixes to the next instruction index.
        size_t t = 0;
        while (t < toks.size() && toks[t].text.back() == ':') {
            std::string name(toks[t].text.substr(0, toks[t].text.size() - 1));
            if (name.empty() || parse_uint(name))
                throw ParseError(line_no, toks[t].column, "bad label name");
            if (labels.count(name))
                throw ParseError(line_no, toks[t].column, "duplicate label '" + name + "'");
            labels[name] = static_cast<uint32_t>(lines.size());
            ++t;
        }

        if (t < toks.size()) {
            std::string_view mn = toks[t].text;
            auto reg_operand = [&](size_t idx) -> uint32_t {
                if (idx >= toks.size())
                    throw ParseError(line_no, raw.size() + 1, "missing register operand");
                std::string_view s = toks[idx].text;
                if (s.size() < 2 || s[0] != 'r')
                    throw ParseError(line_no, toks[idx].column, "expected register 'rN'");
                auto v = parse_uint(s.substr(1));
                if (!v || *v >= kMaxRegisters)
                    throw ParseError(line_no, toks[idx].column, "bad register index");
                if (declared && *v >= *declared)
                    throw ParseError(line_no, toks[idx].column,
                                     "register index out of declared range");
                return static_cast<uint32_t>(*v);
            };
            auto expect_arity = [&](size_t n) {
                if (toks.size() - t - 1 != n)
                    throw ParseError(line_no, toks[t].column,
                                     std::string(mn) + ": expected " + std::to_string(n) +
                                         " operand(s)");
            };

            if (mn == "registers") {
                if (!lines.empty() || !labels.empty() || declared)
                    throw ParseError(line_no, toks[t].column,
                                     "'registers' header must come first");
                expect_arity(1);
                auto v = parse_uint(toks[t + 1].text);
                if (!v || *v == 0 || *v > kMaxRegisters)
                    throw ParseError(line_no, toks[t + 1].column, "bad register count");
                declared = static_cast<uint32_t>(*v);
            } else if (mn == "INC") {
                expect_arity(1);
                lines.push_back(Instruction::inc(reg_operand(t + 1)));
            } else if (mn == "DEC") {
                expect_arity(1);
                lines.push_back(Instruction::dec(reg_operand(t + 1)));
            } else if (mn == "COPY") {
                expect_arity(2);
                uint32_t src = reg_operand(t + 1);
                uint32_t dst = reg_operand(t + 2);
                lines.push_back(Instruction::copy(src, dst));
            } else if (mn == "ORACLE") {
                expect_arity(1);
                lines.push_back(Instruction::oracle(reg_operand(t + 1)));
            } else if (mn == "JZ") {
                if (toks.size() - t - 1 != 2)
                    throw ParseError(line_no, toks[t].column, "JZ: missing jump target");
                uint32_t r = reg_operand(t + 1);
                std::string_view tgt = toks[t + 2].text;
                if (auto v = parse_uint(tgt)) {
                    lines.push_back(Instruction::jz(r, static_cast<uint32_t>(*v)));
                } else {
                    lines.push_back(Instruction::jz(r, 0));
                    fixups.push_back(
                        {lines.size() - 1, std::string(tgt), line_no, toks[t + 2].column});
                }
            } else if (mn == "HALT") {
                expect_arity(0);
                lines.push_back(Instruction::halt());
            } else {
                throw ParseError(line_no, toks[t].column,
                                 "unknown mnemonic '" + std::string(mn) + "'");
            }
        }

        if (end == std::string_view::npos) break;
        pos = end + 1;
    }

    for (const auto& f : fixups) {
        auto it = labels.find(f.label);
        if (it == labels.end())
            throw ParseError(f.src_line, f.src_col, "undefined label '" + f.label + "'");
        lines[f.instr].b = it->second;
    }

    if (lines.empty()) throw ParseError(line_no, 1, "program has no instructions");
    uint32_t rc = declared ? *declared : inferred_register_count(lines);
    return Program(std::move(lines), rc, std::move(source_name));
}

std::string print_program(const Program& p) {
    std::string out;
    if (p.register_count() != inferred_register_count(p.lines())) {
        out += "registers " + std::to_string(p.register_count()) + "\n";
    }
    for (const auto& in : p.lines()) {
        switch (in.op) {
            case Opcode::Inc: out += "INC r" + std::to_string(in.a); break;
            case Opcode::Dec: out += "DEC r" + std::to_string(in.a); break;
            case Opcode::Copy:
                out += "COPY r" + std::to_string(in.a) + " r" + std::to_string(in.b);
                break;
            case Opcode::JumpIfZero:
                out += "JZ r" + std::to_string(in.a) + " " + std::to_string(in.b);
                break;
            case Opcode::OracleQuery: out += "ORACLE r" + std::to_string(in.a); break;
            case Opcode::Halt: out += "HALT"; break;
        }
        out += '\n';
    }
    return out;
}

std::vector<Diagnostic> validate(const Program& p) {
    std::vector<Diagnostic> out;
    for (size_t i = 0; i < p.size(); ++i) {
        const auto& in = p.line(i);
        auto check_reg = [&](uint32_t r) {
            if (r >= p.register_count())
                out.push_back({i, "register index r" + std::to_string(r) +
                                      " >= register count " +
                                      std::to_string(p.register_count())});
        };
        switch (in.op) {
            case Opcode::Inc:
            case Opcode::Dec:
            case Opcode::OracleQuery: check_reg(in.a); break;
            case Opcode::Copy:
                check_reg(in.a);
                check_reg(in.b);
                break;
            case Opcode::JumpIfZero:
                check_reg(in.a);
                if (in.b >= p.size())
                    out.push_back({i, "jump target " + std::to_string(in.b) +
                                          " out of range (program has " +
                                          std::to_string(p.size()) + " lines)"});
                break;
            case Opcode::Halt: break;
        }
    }
    return out;
}

}  // namespace itrm
