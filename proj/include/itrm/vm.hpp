#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "itrm/isa.hpp"
#include "itrm/oracle.hpp"
#include "itrm/ordinal.hpp"

namespace itrm {

// Machine state: active line plus the register vector. line == program
// length marks the implicit halt position.
struct Configuration {
    uint32_t line = 0;
    std::vector<uint64_t> registers;
    bool operator==(const Configuration&) const = default;
};

// Componentwise minima observed over an interval of the run.
struct MinProfile {
    std::vector<uint64_t> min_registers;
    uint32_t min_line = 0;
    bool operator==(const MinProfile&) const = default;
};

// Running minima over a span of configurations.
MinProfile min_profile(std::span<const Configuration> span);

struct Budgets {
    uint64_t successor_steps = 100000;
    uint32_t max_level = 3;
    size_t snapshot_window = 4096;   // retained snapshots/entries per level
    size_t trace_step_cap = 10000;   // successor-step records kept in the trace
};

struct Halted {
    uint64_t output;
    Ordinal time;
};

// Certified by a strong loop: the configuration at t1 recurs at t2 with
// nothing in between dipping below it, so the run is periodic at every
// higher limit and never halts.
struct NonHalting {
    uint32_t level;
    Ordinal t1, t2;
};

struct Exhausted {
    uint64_t steps_used;
    uint32_t deepest_level;
};

using RunOutcome = std::variant<Halted, NonHalting, Exhausted>;

std::string to_string(const RunOutcome& outcome);

enum class TraceEvent { Step, Limit, Halt, Certificate };

struct TraceRecord {
    Ordinal time;
    uint32_t line;
    std::vector<uint64_t> registers;
    TraceEvent event;
};

struct Trace {
    std::vector<TraceRecord> records;
    // One JSON object per line with fields {event, line, registers, time}.
    void write_jsonl(std::ostream& out) const;
};

struct RunResult {
    RunOutcome outcome;
    Trace trace;
    // Present for NonHalting: the configuration the certificate fixes.
    std::optional<Configuration> certified_config;
};

// Executes the instruction at c.line. Precondition: c is not halted
// (c.line < p.size() and the instruction is not Halt); throws otherwise.
Configuration step(const Program& p, const Configuration& c, const Oracle& o);

enum class LassoKind { Exact, Drift };

struct Lasso {
    size_t t1, t2;
    LassoKind kind;
    std::vector<uint64_t> shift;  // d; all zero for exact lassos
};

// Earliest lasso in a successor-step history (smallest t2, then smallest
// t1; exact matches take priority over drift at the same t2).
//
// Exact: configurations at t1 and t2 identical. Drift: lines equal and
// registers shifted by d >= 0 (d != 0), with the span verified to replay
// shifted forever: the shift vector is propagated through every step of
// the span; drift registers keep span minimum >= 1 and are never
// zero-tested; decrements and zero-tests only touch unshifted values; any
// oracle query on a shifted value must be certified constant along its
// arithmetic progression by the oracle.
std::optional<Lasso> detect_lasso(const Program& p, const Oracle& o,
                                  std::span<const Configuration> history);

// Limit configuration of an exactly periodic span: componentwise minimum
// of the registers and the minimum line.
Configuration limit_config(std::span<const Configuration> span);

// Limit configuration of a drift span [t1, t2): registers whose values
// recur (shift 0 at some position) take the minimum over those positions;
// registers drifting to infinity take 0; the line is the span minimum.
Configuration limit_config(const Program& p, std::span<const Configuration> history,
                           const Lasso& lasso);

// Transfinite run: successor steps with multi-level lasso acceleration.
// Starts at line 0 with register 1 = input, all others 0. Throws
// std::invalid_argument on invalid programs or zero budgets.
RunResult run(const Program& p, const OraclePtr& o, uint64_t input, const Budgets& b = {});

// As run, but starting from an arbitrary configuration (used to replay
// certified configurations).
RunResult run_from(const Program& p, const OraclePtr& o, Configuration start,
                   const Budgets& b = {});

// run mapped over a list of inputs; traces are dropped.
std::vector<RunOutcome> classify_halting(const Program& p, const OraclePtr& o,
                                         const std::vector<uint64_t>& inputs,
                                         const Budgets& b = {});

}  // namespace itrm
