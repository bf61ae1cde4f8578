#pragma once

// Deterministic random generators shared by the test suites.

#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "itrm/coding.hpp"
#include "itrm/gadgets.hpp"
#include "itrm/isa.hpp"
#include "itrm/oracle.hpp"
#include "itrm/ordinal.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline uint64_t pick(Rng& rng, uint64_t lo, uint64_t hi) {
    return std::uniform_int_distribution<uint64_t>(lo, hi)(rng);
}

inline itrm::Ordinal random_ordinal(Rng& rng, uint32_t max_exponent, uint64_t max_coeff,
                                    uint32_t max_terms = 4) {
    std::set<uint32_t, std::greater<>> exps;
    uint32_t nterms = static_cast<uint32_t>(pick(rng, 0, max_terms));
    while (exps.size() < nterms) exps.insert(static_cast<uint32_t>(pick(rng, 0, max_exponent)));
    std::vector<itrm::OrdinalTerm> terms;
    for (uint32_t e : exps) terms.push_back({e, pick(rng, 1, max_coeff)});
    return itrm::Ordinal::from_terms(std::move(terms));
}

inline itrm::Program random_program(Rng& rng, uint32_t nregs, uint32_t len,
                                    bool allow_oracle = false) {
    std::vector<itrm::Instruction> lines;
    for (uint32_t i = 0; i < len; ++i) {
        auto r = [&] { return static_cast<uint32_t>(pick(rng, 0, nregs - 1)); };
        switch (pick(rng, 0, allow_oracle ? 5 : 4)) {
            case 0: lines.push_back(itrm::Instruction::inc(r())); break;
            case 1: lines.push_back(itrm::Instruction::dec(r())); break;
            case 2: lines.push_back(itrm::Instruction::copy(r(), r())); break;
            case 3:
                lines.push_back(
                    itrm::Instruction::jz(r(), static_cast<uint32_t>(pick(rng, 0, len - 1))));
                break;
            case 4: lines.push_back(itrm::Instruction::halt()); break;
            case 5: lines.push_back(itrm::Instruction::oracle(r())); break;
        }
    }
    return itrm::Program(std::move(lines), nregs, "<random>");
}

inline std::set<uint64_t> random_nat_set(Rng& rng, uint64_t max_value, size_t max_size) {
    std::set<uint64_t> s;
    size_t n = pick(rng, 0, max_size);
    while (s.size() < n) s.insert(pick(rng, 0, max_value));
    return s;
}

inline std::vector<uint8_t> random_bits(Rng& rng, size_t min_len, size_t max_len) {
    std::vector<uint8_t> bits(pick(rng, min_len, max_len));
    for (auto& b : bits) b = static_cast<uint8_t>(pick(rng, 0, 1));
    return bits;
}

// A small random oracle tree; depth bounds the join/complement nesting.
inline itrm::OraclePtr random_oracle(Rng& rng, uint32_t depth = 2) {
    using itrm::Oracle;
    switch (pick(rng, 0, depth > 0 ? 4 : 2)) {
        case 0: return Oracle::finite(random_nat_set(rng, 12, 4));
        case 1: return Oracle::periodic(random_bits(rng, 0, 3), random_bits(rng, 1, 3));
        case 2: return Oracle::cofinite(random_nat_set(rng, 12, 4));
        case 3: return Oracle::join(random_oracle(rng, depth - 1), random_oracle(rng, depth - 1));
        default: return Oracle::complement(random_oracle(rng, depth - 1));
    }
}

// Eventual-periodicity bounds: the oracle's bit sequence is determined by
// its values on [0, prefix) followed by a cycle of the given length.
struct EventualBounds {
    uint64_t prefix;
    uint64_t cycle;
};

inline EventualBounds eventual_bounds(const itrm::Oracle& o) {
    using K = itrm::Oracle::Kind;
    switch (o.kind()) {
        case K::Finite:
        case K::StructureCode:
        case K::Cofinite: {
            uint64_t top = o.members().empty() ? 0 : *o.members().rbegin() + 1;
            return {top, 1};
        }
        case K::Periodic: return {o.prefix().size(), o.cycle().size()};
        case K::Join: {
            EventualBounds l = eventual_bounds(*o.left());
            EventualBounds r = eventual_bounds(*o.right());
            return {2 * std::max(l.prefix, r.prefix) + 2, 2 * std::lcm(l.cycle, r.cycle)};
        }
        case K::Complement: return eventual_bounds(*o.left());
        case K::OrdinalOrder: break;
    }
    throw std::invalid_argument("eventual_bounds: oracle is not eventually periodic");
}

// Exact equality of two eventually periodic reals.
inline bool reals_equal(const itrm::Oracle& a, const itrm::Oracle& b) {
    EventualBounds ba = eventual_bounds(a);
    EventualBounds bb = eventual_bounds(b);
    uint64_t horizon = std::max(ba.prefix, bb.prefix) + 2 * std::lcm(ba.cycle, bb.cycle);
    for (uint64_t n = 0; n < horizon; ++n)
        if (a.query(n) != b.query(n)) return false;
    return true;
}

inline itrm::coding::EdgeSet random_digraph(Rng& rng, uint32_t m, double density = 0.3) {
    itrm::coding::EdgeSet edges;
    for (uint32_t a = 0; a < m; ++a)
        for (uint32_t b = 0; b < m; ++b)
            if (pick(rng, 0, 999) < static_cast<uint64_t>(density * 1000)) edges.insert({a, b});
    return edges;
}

inline itrm::gadgets::Formula random_formula(Rng& rng, uint32_t quantifiers,
                                             uint32_t bound_vars = 0) {
    using F = itrm::gadgets::Formula;
    if (quantifiers > 0) {
        // Keep quantifiers outermost often enough to reach full depth.
        switch (pick(rng, 0, 2)) {
            case 0: return F::exists(random_formula(rng, quantifiers - 1, bound_vars + 1));
            case 1: return F::forall(random_formula(rng, quantifiers - 1, bound_vars + 1));
            default:
                return F::negation(F::exists(random_formula(rng, quantifiers - 1, bound_vars + 1)));
        }
    }
    auto v = [&] { return static_cast<uint32_t>(pick(rng, 0, bound_vars - 1)); };
    switch (pick(rng, 0, 3)) {
        case 0:
        case 1: return F::edge(v(), v());
        case 2: return F::negation(F::edge(v(), v()));
        default: return F::conjunction(F::edge(v(), v()), F::negation(F::edge(v(), v())));
    }
}

}  // namespace gen
