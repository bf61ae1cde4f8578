#pragma once

// A plain successor-step interpreter written independently of the engine,
// used as the oracle for acceleration soundness checks.

#include <cstdint>
#include <optional>
#include <vector>

#include "itrm/isa.hpp"
#include "itrm/oracle.hpp"
#include "itrm/vm.hpp"

namespace ref {

inline bool halted(const itrm::Program& p, const itrm::Configuration& c) {
    return c.line >= p.size() || p.line(c.line).op == itrm::Opcode::Halt;
}

inline itrm::Configuration ref_step(const itrm::Program& p, const itrm::Configuration& c,
                                    const itrm::Oracle& o) {
    itrm::Configuration n = c;
    const itrm::Instruction& in = p.line(c.line);
    using itrm::Opcode;
    if (in.op == Opcode::Inc) {
        n.registers[in.a] += 1;
        n.line += 1;
    } else if (in.op == Opcode::Dec) {
        n.registers[in.a] = n.registers[in.a] == 0 ? 0 : n.registers[in.a] - 1;
        n.line += 1;
    } else if (in.op == Opcode::Copy) {
        n.registers[in.b] = n.registers[in.a];
        n.line += 1;
    } else if (in.op == Opcode::JumpIfZero) {
        if (n.registers[in.a] == 0)
            n.line = in.b;
        else
            n.line += 1;
    } else if (in.op == Opcode::OracleQuery) {
        n.registers[in.a] = o.query(n.registers[in.a]);
        n.line += 1;
    }
    return n;
}

// Successor configurations from `start`, inclusive, stopping early at a
// halted state or after max_steps steps.
inline std::vector<itrm::Configuration> ref_trajectory(const itrm::Program& p,
                                                       const itrm::Oracle& o,
                                                       itrm::Configuration start,
                                                       size_t max_steps) {
    std::vector<itrm::Configuration> out{start};
    for (size_t i = 0; i < max_steps && !halted(p, out.back()); ++i)
        out.push_back(ref_step(p, out.back(), o));
    return out;
}

inline itrm::Configuration initial_config(const itrm::Program& p, uint64_t input) {
    itrm::Configuration c;
    c.line = 0;
    c.registers.assign(std::max<size_t>(p.register_count(), 2), 0);
    c.registers[1] = input;
    return c;
}

// Componentwise register minima and line minimum over configs[from, to).
inline itrm::Configuration min_over(const std::vector<itrm::Configuration>& configs,
                                    size_t from, size_t to) {
    itrm::Configuration out = configs[from];
    for (size_t i = from; i < to; ++i) {
        out.line = std::min(out.line, configs[i].line);
        for (size_t r = 0; r < out.registers.size(); ++r)
            out.registers[r] = std::min(out.registers[r], configs[i].registers[r]);
    }
    return out;
}

}  // namespace ref
