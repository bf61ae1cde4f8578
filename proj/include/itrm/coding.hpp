#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "itrm/oracle.hpp"
#include "itrm/ordinal.hpp"
#include "itrm/pairing.hpp"

namespace itrm::coding {

using Edge = std::pair<uint32_t, uint32_t>;
using EdgeSet = std::set<Edge>;

inline constexpr uint32_t kCanonicalBound = 8;

// A finite structure (m, edges) together with the assignment used to code
// it: code = { pair(a,b) : a,b < m and edges contains (f(a), f(b)) }.
struct CodedStructure {
    uint32_t domain_size = 0;
    EdgeSet edges;
    std::vector<uint32_t> assignment;  // permutation f of {0..m-1}
    std::set<uint64_t> code;
};

// Requires edges within m x m and f a permutation of m; throws otherwise.
CodedStructure encode(uint32_t m, const EdgeSet& edges, const std::vector<uint32_t>& f);

// The coded structure whose code set, read as an increasing sequence, is
// lexicographically least over all m! assignments (ties broken by the
// lexicographically least permutation). Requires m <= kCanonicalBound.
CodedStructure canonical_code(uint32_t m, const EdgeSet& edges);

// The relation read back from a code set: (a,b) with pair(a,b) in code,
// a,b < m. Isomorphic to the encoded structure via the assignment.
EdgeSet decode(const std::set<uint64_t>& code, uint32_t m);

// Finite well-foundedness: true iff the relation has no cycle.
bool well_founded(uint32_t m, const EdgeSet& edges);

// The fixed computable enumeration of CNF ordinals below omega^omega used
// by ordinal order oracles: weight(sum of w^e*c) = sum of (e + c);
// ordinals are listed by increasing weight and, within a weight, in
// increasing ordinal order. Index 0 is the ordinal 0.
Ordinal ord_of_index(uint64_t index);
uint64_t index_of_ord(const Ordinal& o);

// Oracle coding a well-order of type delta on ord-indices; see
// Oracle::ordinal_order.
OraclePtr ordinal_order_oracle(const Ordinal& delta);

struct Structure {
    uint32_t m = 0;
    EdgeSet edges;
};

// Structure file format: first line m, then one "a b" edge per line.
// Blank lines and '#' comments are skipped. Throws std::invalid_argument.
Structure parse_structure(std::istream& in);
Structure load_structure(const std::string& path);

// The canonical code of a structure, wrapped as an oracle.
OraclePtr structure_code_oracle(const Structure& s, std::string label = "");
// Loader suitable for parse_oracle_spec's code(<path>) references.
StructureLoader structure_code_loader();

}  // namespace itrm::coding
