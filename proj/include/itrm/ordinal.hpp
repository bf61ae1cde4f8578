#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace itrm {

struct OrdinalTerm {
    uint32_t exponent;
    uint64_t coefficient;
    bool operator==(const OrdinalTerm&) const = default;
};

// An ordinal below omega^omega in Cantor normal form: a finite sum of
// terms w^e*c with strictly decreasing exponents and coefficients >= 1.
// The empty sum is 0. Canonical form is maintained on every construction,
// so operator== on the term sequence is ordinal equality.
//
// Textual form: terms joined by '+', each "w^K*C", exponent-0 terms as a
// plain integer; zero renders as "0". Example: "w^2*1+w^1*3+2".
class Ordinal {
public:
    Ordinal() = default;  // zero
    Ordinal(uint64_t n);  // finite ordinal, implicit on purpose

    static Ordinal omega_power(uint32_t exponent, uint64_t coefficient = 1);
    // Validates the CNF invariants; throws std::invalid_argument otherwise.
    static Ordinal from_terms(std::vector<OrdinalTerm> terms);

    const std::vector<OrdinalTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    // True iff nonzero with no exponent-0 term.
    bool is_limit() const { return !terms_.empty() && terms_.back().exponent > 0; }
    bool is_finite() const { return terms_.empty() || terms_.front().exponent == 0; }
    // Leading exponent; 0 for finite ordinals (including 0).
    uint32_t degree() const { return terms_.empty() ? 0 : terms_.front().exponent; }
    // Coefficient of w^e, or 0 if absent.
    uint64_t coefficient_of(uint32_t exponent) const;

    Ordinal successor() const;

    // sup over n of (start + period*n); equals start + w^(d+1) where d is
    // the leading exponent of period. Throws std::invalid_argument if
    // period is 0.
    static Ordinal limit_jump(const Ordinal& start, const Ordinal& period);

    // The unique rho with a + rho = b; requires a <= b.
    static Ordinal left_difference(const Ordinal& a, const Ordinal& b);

    friend Ordinal operator+(const Ordinal& a, const Ordinal& b);

    std::strong_ordering operator<=>(const Ordinal& other) const;
    bool operator==(const Ordinal& other) const { return terms_ == other.terms_; }

    std::string to_string() const;
    // Parses exactly the to_string grammar; throws std::invalid_argument.
    static Ordinal parse(std::string_view text);

private:
    std::vector<OrdinalTerm> terms_;
};

}  // namespace itrm
