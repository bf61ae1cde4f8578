#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "itrm/ordinal.hpp"

namespace itrm {

class Oracle;
using OraclePtr = std::shared_ptr<const Oracle>;

// A pure, total membership predicate on naturals, representing a real.
// Every variant is defined by finite data, so queries are deterministic
// and stable across engine instances. Immutable and freely shareable.
//
// Textual form: finite{1,5,9}, cofinite{0}, periodic[1|01], join(A,B),
// compl(A), code(<structure-file>), ordorder(<cnf>).
class Oracle {
public:
    enum class Kind { Finite, Cofinite, Periodic, Join, Complement, StructureCode, OrdinalOrder };

    static OraclePtr finite(std::set<uint64_t> members);
    static OraclePtr cofinite(std::set<uint64_t> nonmembers);
    // cycle must be nonempty; bits are 0/1.
    static OraclePtr periodic(std::vector<uint8_t> prefix, std::vector<uint8_t> cycle);
    // 2i in join(x,y) iff i in x; 2i+1 in join(x,y) iff i in y.
    static OraclePtr join(OraclePtr left, OraclePtr right);
    static OraclePtr complement(OraclePtr inner);
    // Membership is the code set of a coded structure; label is used only
    // for display.
    static OraclePtr structure_code(std::set<uint64_t> code, std::string label);
    // query(pair(a,b)) = 1 iff ord(a) < ord(b) < delta under the fixed
    // enumeration ord of CNF ordinals (see coding::ord_of_index).
    static OraclePtr ordinal_order(Ordinal delta);

    uint8_t query(uint64_t n) const;

    // True only if the oracle can prove query(start + k*step) == expected
    // for every k >= 0. Used by the VM to certify that a drift lasso's
    // oracle answers stay on the observed control path forever. step >= 1.
    bool proves_constant(uint64_t start, uint64_t step, uint8_t expected) const;

    Kind kind() const { return kind_; }
    const std::set<uint64_t>& members() const { return set_; }
    const std::vector<uint8_t>& prefix() const { return prefix_; }
    const std::vector<uint8_t>& cycle() const { return cycle_; }
    const OraclePtr& left() const { return left_; }
    const OraclePtr& right() const { return right_; }
    const Ordinal& delta() const { return delta_; }

    std::string to_string() const;

private:
    Kind kind_;
    std::set<uint64_t> set_;            // Finite members / Cofinite nonmembers / code set
    std::vector<uint8_t> prefix_, cycle_;
    OraclePtr left_, right_;            // Join children; Complement uses left_
    Ordinal delta_;
    std::string label_;
};

// Loader for code(<file>) references inside oracle spec text; see
// coding::structure_code_loader for the standard one.
using StructureLoader = std::function<OraclePtr(const std::string& path)>;

// Parses the textual oracle grammar above. Throws std::invalid_argument
// on syntax errors, or when code(...) appears and no loader is given.
OraclePtr parse_oracle_spec(std::string_view text, const StructureLoader& loader = {});

}  // namespace itrm
