#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace itrm {

inline constexpr uint32_t kMaxRegisters = 256;

enum class Opcode : uint8_t { Inc, Dec, Copy, JumpIfZero, OracleQuery, Halt };

// One program line. Field use by opcode:
//   Inc/Dec/OracleQuery: a = register
//   Copy:                a = source register, b = destination register
//   JumpIfZero:          a = register, b = target line (0-based)
//   Halt:                none
struct Instruction {
    Opcode op = Opcode::Halt;
    uint32_t a = 0;
    uint32_t b = 0;

    static Instruction inc(uint32_t r) { return {Opcode::Inc, r, 0}; }
    static Instruction dec(uint32_t r) { return {Opcode::Dec, r, 0}; }
    static Instruction copy(uint32_t src, uint32_t dst) { return {Opcode::Copy, src, dst}; }
    static Instruction jz(uint32_t r, uint32_t target) { return {Opcode::JumpIfZero, r, target}; }
    static Instruction oracle(uint32_t r) { return {Opcode::OracleQuery, r, 0}; }
    static Instruction halt() { return {Opcode::Halt, 0, 0}; }

    bool operator==(const Instruction&) const = default;
};

struct Diagnostic {
    size_t line;  // 0-based program line
    std::string message;
};

class ParseError : public std::runtime_error {
public:
    ParseError(size_t line, size_t column, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ", col " +
                             std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}
    size_t line() const { return line_; }
    size_t column() const { return column_; }

private:
    size_t line_, column_;
};

// A nonempty instruction sequence with a register count. Lines are
// 0-based; execution falling off the end is an implicit Halt. Equality
// compares lines and register count; source_name is provenance only.
class Program {
public:
    Program(std::vector<Instruction> lines, uint32_t register_count,
            std::string source_name = "<memory>");

    const std::vector<Instruction>& lines() const { return lines_; }
    const Instruction& line(size_t i) const { return lines_[i]; }
    size_t size() const { return lines_.size(); }
    uint32_t register_count() const { return register_count_; }
    const std::string& source_name() const { return source_name_; }

    bool operator==(const Program& other) const {
        return lines_ == other.lines_ && register_count_ == other.register_count_;
    }

private:
    std::vector<Instruction> lines_;
    uint32_t register_count_;
    std::string source_name_;
};

// Assembly syntax: one instruction per line; `INC rN`, `DEC rN`,
// `COPY rA rB`, `JZ rN <label|number>`, `ORACLE rN`, `HALT`; labels as
// `name:` prefixes; `#` comments; optional `registers N` header before
// the first instruction. Throws ParseError.
Program parse_program(std::string_view source, std::string source_name = "<memory>");

// Canonical text: numeric jump targets, no labels or comments, a
// `registers N` header only when N exceeds the inferred count, trailing
// newline. parse(print(p)) == p.
std::string print_program(const Program& p);

// One diagnostic per invariant violation; empty iff the program is valid.
std::vector<Diagnostic> validate(const Program& p);

}  // namespace itrm
