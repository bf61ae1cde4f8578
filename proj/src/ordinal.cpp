#include "itrm/ordinal.hpp"

#include <charconv>
#include <stdexcept>

namespace itrm {

namespace {

void check_canonical(const std::vector<OrdinalTerm>& terms) {
    for (size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].coefficient == 0)
            throw std::invalid_argument("ordinal term has zero coefficient");
        if (i > 0 && terms[i - 1].exponent <= terms[i].exponent)
            throw std::invalid_argument("ordinal exponents not strictly decreasing");
    }
}

}  // namespace

Ordinal::Ordinal(uint64_t n) {
    if (n > 0) terms_.push_back({0, n});
}

Ordinal Ordinal::omega_power(uint32_t exponent, uint64_t coefficient) {
    Ordinal o;
    if (coefficient > 0) o.terms_.push_back({exponent, coefficient});
    return o;
}

Ordinal Ordinal::from_terms(std::vector<OrdinalTerm> terms) {
    check_canonical(terms);
    Ordinal o;
    o.terms_ = std::move(terms);
    return o;
}

uint64_t Ordinal::coefficient_of(uint32_t exponent) const {
    for (const auto& t : terms_)
        if (t.exponent == exponent) return t.coefficient;
    return 0;
}

Ordinal operator+(const Ordinal& a, const Ordinal& b) {
    if (b.terms_.empty()) return a;
    uint32_t lead = b.terms_.front().exponent;
    Ordinal out;
    uint64_t merged = b.terms_.front().coefficient;
    for (const auto& t : a.terms_) {
        if (t.exponent > lead)
            out.terms_.push_back(t);
        else if (t.exponent == lead)
            merged += t.coefficient;
        // terms of a below the leading exponent of b are absorbed
    }
    out.terms_.push_back({lead, merged});
    out.terms_.insert(out.terms_.end(), b.terms_.begin() + 1, b.terms_.end());
    return out;
}

Ordinal Ordinal::successor() const { return *this + Ordinal(1); }

Ordinal Ordinal::limit_jump(const Ordinal& start, const Ordinal& period) {
    if (period.is_zero()) throw std::invalid_argument("limit_jump: period must be > 0");
    return start + omega_power(period.degree() + 1);
}

Ordinal Ordinal::left_difference(const Ordinal& a, const Ordinal& b) {
    size_t i = 0;
    while (i < a.terms_.size() && i < b.terms_.size() && a.terms_[i] == b.terms_[i]) ++i;
    Ordinal out;
    if (i == a.terms_.size()) {
        out.terms_.assign(b.terms_.begin() + i, b.terms_.end());
        return out;
    }
    if (i == b.terms_.size()) throw std::invalid_argument("left_difference: a > b");
    const auto& ta = a.terms_[i];
    const auto& tb = b.terms_[i];
    if (ta.exponent == tb.exponent) {
        if (ta.coefficient > tb.coefficient)
            throw std::invalid_argument("left_difference: a > b");
        out.terms_.push_back({tb.exponent, tb.coefficient - ta.coefficient});
        out.terms_.insert(out.terms_.end(), b.terms_.begin() + i + 1, b.terms_.end());
        return out;
    }
    if (ta.exponent > tb.exponent) throw std::invalid_argument("left_difference: a > b");
    out.terms_.assign(b.terms_.begin() + i, b.terms_.end());
    return out;
}

std::strong_ordering Ordinal::operator<=>(const Ordinal& other) const {
    size_t n = std::min(terms_.size(), other.terms_.size());
    for (size_t i = 0; i < n; ++i) {
        if (terms_[i].exponent != other.terms_[i].exponent)
            return terms_[i].exponent <=> other.terms_[i].exponent;
        if (terms_[i].coefficient != other.terms_[i].coefficient)
            return terms_[i].coefficient <=> other.terms_[i].coefficient;
    }
    return terms_.size() <=> other.terms_.size();
}

std::string Ordinal::to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0) s += '+';
        const auto& t = terms_[i];
        if (t.exponent == 0) {
            s += std::to_string(t.coefficient);
        } else {
            s += "w^";
            s += std::to_string(t.exponent);
            s += '*';
            s += std::to_string(t.coefficient);
        }
    }
    return s;
}

namespace {

uint64_t parse_number(std::string_view text, size_t& pos) {
    size_t start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == start) throw std::invalid_argument("ordinal parse: expected number");
    uint64_t value = 0;
    auto res = std::from_chars(text.data() + start, text.data() + pos, value);
    if (res.ec != std::errc{}) throw std::invalid_argument("ordinal parse: number out of range");
    return value;
}

}  // namespace

Ordinal Ordinal::parse(std::string_view text) {
    if (text == "0") return {};
    std::vector<OrdinalTerm> terms;
    size_t pos = 0;
    while (true) {
        if (pos < text.size() && text[pos] == 'w') {
            ++pos;
            if (pos >= text.size() || text[pos] != '^')
                throw std::invalid_argument("ordinal parse: expected '^' after 'w'");
            ++pos;
            uint64_t e = parse_number(text, pos);
            if (pos >= text.size() || text[pos] != '*')
                throw std::invalid_argument("ordinal parse: expected '*' after exponent");
            ++pos;
            uint64_t c = parse_number(text, pos);
            if (e == 0) throw std::invalid_argument("ordinal parse: w^0 term not canonical");
            terms.push_back({static_cast<uint32_t>(e), c});
        } else {
            uint64_t c = parse_number(text, pos);
            terms.push_back({0, c});
        }
        if (pos == text.size()) break;
        if (text[pos] != '+') throw std::invalid_argument("ordinal parse: expected '+'");
        ++pos;
    }
    return from_terms(std::move(terms));
}

}  // namespace itrm
