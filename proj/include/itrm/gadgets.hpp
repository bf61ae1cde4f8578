#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itrm/coding.hpp"
#include "itrm/isa.hpp"
#include "itrm/oracle.hpp"
#include "itrm/vm.hpp"

namespace itrm::gadgets {

// Register ABI shared by all generated programs: r0 scratch, r1
// input/output, r2-r3 the flag pair of the outermost flag-limit loop,
// r4 and up allocated by the generators.

// First-order sentences over a single binary relation, with de Bruijn
// variable indices (0 = innermost quantifier). Compiled programs evaluate
// them against a coded-structure oracle; quantifiers range over the field
// of the relation.
class Formula {
public:
    enum class Kind { Edge, Not, And, Exists };

    static Formula edge(uint32_t x, uint32_t y);
    static Formula negation(Formula inner);
    static Formula conjunction(Formula left, Formula right);
    static Formula exists(Formula body);
    // Universal quantification desugars to !Ex !body.
    static Formula forall(Formula body);

    Kind kind() const { return kind_; }
    uint32_t edge_x() const { return x_; }
    uint32_t edge_y() const { return y_; }
    const Formula& left() const { return *l_; }
    const Formula& right() const { return *r_; }

    uint32_t quantifier_depth() const;
    bool is_closed() const;

    // Surface syntax: quantifiers "Ex"/"Ax" with one-letter variables,
    // atoms "E(x,y)", negation "!", conjunction "(A & B)".
    static Formula parse(std::string_view text);
    std::string to_string() const;

private:
    Kind kind_ = Kind::Edge;
    uint32_t x_ = 0, y_ = 0;
    std::shared_ptr<const Formula> l_, r_;
};

// A program fragment for composition into a flag-limit loop: instruction
// jump targets are either indices into the fragment or kFailTarget, which
// the composer wires to the loop's failure exit.
struct Fragment {
    static constexpr uint32_t kFailTarget = UINT32_MAX;
    std::vector<Instruction> code;
};

// The flag construction: iterates body for i = 0,1,2,... (counter in
// r4), flashing the flag registers r2/r3 after each pass; the flags can
// only agree after limit-many flashes, so control concluding at the loop
// head that they are equal means every pass succeeded, and the program
// halts with output 1. A body jump to kFailTarget halts with output 0.
// The body must not touch r2/r3 (throws otherwise); r5 is a reserved
// always-zero register, r6+ are free.
Program flag_limit_loop(const Fragment& body);

// flag_limit_loop with an empty body: halts at omega + c.
Program flag_counter();
// Two nested flag loops: halts at a time of CNF degree 2.
Program nested_flag_counter();

// Recognizer for a finitely describable real: halts with output 1 iff the
// oracle agrees with target on every bit, else 0 at the first
// disagreement or at the limit. target must be Finite or Periodic.
Program equality_recognizer(const OraclePtr& target);

// Fragments reading bit 2i (even) and 2i+1 (odd) of the oracle: i is read
// from r4, the bit is left in r0, scratch in r6/r7.
std::pair<Fragment, Fragment> join_splitter();

// Recognizer for join(a, b): applies the recognizing procedure for a to
// the even bits and for b to the odd bits. a and b as in
// equality_recognizer.
Program join_recognizer(const OraclePtr& a, const OraclePtr& b);

// Compiles a closed sentence to a program that, run against a
// coded-structure oracle, halts with output 1 iff the structure satisfies
// it: atomic checks are single oracle queries on pair(x,y); existential
// search scans the code for field elements, a witness yielding truth in
// finite time and exhaustion being concluded at an omega-limit.
Program fo_compile(const Formula& f, uint32_t max_depth = 3);

// Brute-force model checker over the finite field of the edge relation;
// the independent route the compiled programs are tested against.
bool eval_formula(const Formula& f, const coding::EdgeSet& edges);

// Computes the code k_i of the natural i inside a coded well-founded
// extensional structure: k_0 by the unbounded no-predecessor search
// concluded at a limit, later k_j by bounded searches below a scanned
// bound. Reads i from r1 and writes k_i back to r1; halts with output 0
// if the oracle does not have the expected shape or i >= limit.
Program decode_naturals(uint32_t limit);

enum class Safety { Safe, Unsafe, Unknown };

struct SafetyReport {
    Safety verdict;
    std::vector<RunOutcome> outcomes;        // one per input 0..n-1
    std::optional<uint64_t> witness;         // an input with a NonHalting run
};

// Safe iff the program halts on every input below input_count; an
// Exhausted run downgrades the verdict to Unknown, never to Unsafe.
SafetyReport safety_check(const Program& p, const OraclePtr& o, uint64_t input_count,
                          const Budgets& b = {});

struct RecognizerReport {
    enum class Verdict { Pass, Fail, Inconclusive };
    Verdict verdict;
    size_t target_index;
    std::vector<RunOutcome> outcomes;  // one per family member, input 0
};

// PASS iff the target member halts with output 1 and every other member
// halts with output 0; any Exhausted run makes the report INCONCLUSIVE.
RecognizerReport check_recognizer(const Program& p, const std::vector<OraclePtr>& family,
                                  size_t target_index, const Budgets& b = {});

}  // namespace itrm::gadgets
