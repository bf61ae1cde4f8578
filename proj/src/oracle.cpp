#include "itrm/oracle.hpp"

#include <charconv>
#include <numeric>
#include <stdexcept>

#include "itrm/coding.hpp"
#include "itrm/pairing.hpp"

namespace itrm {

namespace {

OraclePtr make(Oracle&& o) { return std::make_shared<const Oracle>(std::move(o)); }

}  // namespace

OraclePtr Oracle::finite(std::set<uint64_t> members) {
    Oracle o;
    o.kind_ = Kind::Finite;
    o.set_ = std::move(members);
    return make(std::move(o));
}

OraclePtr Oracle::cofinite(std::set<uint64_t> nonmembers) {
    Oracle o;
    o.kind_ = Kind::Cofinite;
    o.set_ = std::move(nonmembers);
    return make(std::move(o));
}

OraclePtr Oracle::periodic(std::vector<uint8_t> prefix, std::vector<uint8_t> cycle) {
    if (cycle.empty()) throw std::invalid_argument("periodic oracle: cycle must be nonempty");
    for (uint8_t b : prefix)
        if (b > 1) throw std::invalid_argument("periodic oracle: bits must be 0/1");
    for (uint8_t b : cycle)
        if (b > 1) throw std::invalid_argument("periodic oracle: bits must be 0/1");
    Oracle o;
    o.kind_ = Kind::Periodic;
    o.prefix_ = std::move(prefix);
    o.cycle_ = std::move(cycle);
    return make(std::move(o));
}

OraclePtr Oracle::join(OraclePtr left, OraclePtr right) {
    if (!left || !right) throw std::invalid_argument("join oracle: null child");
    Oracle o;
    o.kind_ = Kind::Join;
    o.left_ = std::move(left);
    o.right_ = std::move(right);
    return make(std::move(o));
}

OraclePtr Oracle::complement(OraclePtr inner) {
    if (!inner) throw std::invalid_argument("complement oracle: null child");
    Oracle o;
    o.kind_ = Kind::Complement;
    o.left_ = std::move(inner);
    return make(std::move(o));
}

OraclePtr Oracle::structure_code(std::set<uint64_t> code, std::string label) {
    Oracle o;
    o.kind_ = Kind::StructureCode;
    o.set_ = std::move(code);
    o.label_ = std::move(label);
    return make(std::move(o));
}

OraclePtr Oracle::ordinal_order(Ordinal delta) {
    Oracle o;
    o.kind_ = Kind::OrdinalOrder;
    o.delta_ = std::move(delta);
    return make(std::move(o));
}

uint8_t Oracle::query(uint64_t n) const {
    switch (kind_) {
        case Kind::Finite:
        case Kind::StructureCode: return set_.count(n) ? 1 : 0;
        case Kind::Cofinite: return set_.count(n) ? 0 : 1;
        case Kind::Periodic:
            if (n < prefix_.size()) return prefix_[n];
            return cycle_[(n - prefix_.size()) % cycle_.size()];
        case Kind::Join:
            return n % 2 == 0 ? left_->query(n / 2) : right_->query(n / 2);
        case Kind::Complement: return 1 - left_->query(n);
        case Kind::OrdinalOrder: {
            auto [a, b] = cantor_unpair(n);
            Ordinal oa = coding::ord_of_index(a);
            Ordinal ob = coding::ord_of_index(b);
            return (oa < ob && ob < delta_) ? 1 : 0;
        }
    }
    return 0;
}

bool Oracle::proves_constant(uint64_t start, uint64_t step, uint8_t expected) const {
    if (step == 0) return false;
    switch (kind_) {
        case Kind::Finite:
        case Kind::StructureCode: {
            if (expected == 1) return false;  // a finite set cannot cover a progression
            for (uint64_t m : set_)
                if (m >= start && (m - start) % step == 0) return false;
            return true;
        }
        case Kind::Cofinite: {
            if (expected == 0) return false;
            for (uint64_t m : set_)
                if (m >= start && (m - start) % step == 0) return false;
            return true;
        }
        case Kind::Periodic: {
            uint64_t p = start;
            while (p < prefix_.size()) {
                if (prefix_[p] != expected) return false;
                p += step;
            }
            // From p on, positions hit cycle indices (p - |prefix| + k*step) mod L.
            uint64_t L = cycle_.size();
            uint64_t r = (p - prefix_.size()) % L;
            for (uint64_t k = 0; k < L; ++k) {
                if (cycle_[(r + k * step) % L] != expected) return false;
            }
            return true;
        }
        case Kind::Join: {
            if (step % 2 == 0) {
                const OraclePtr& child = (start % 2 == 0) ? left_ : right_;
                return child->proves_constant(start / 2, step / 2, expected);
            }
            // Odd step: the progression alternates parity; split into two
            // progressions of step 2*step and recurse on both.
            auto one = [&](uint64_t s) {
                const OraclePtr& child = (s % 2 == 0) ? left_ : right_;
                return child->proves_constant(s / 2, step, expected);
            };
            return one(start) && one(start + step);
        }
        case Kind::Complement:
            return left_->proves_constant(start, step, 1 - expected);
        case Kind::OrdinalOrder:
            return false;  // no constancy certificate for order codes
    }
    return false;
}

namespace {

std::string bits_to_string(const std::vector<uint8_t>& bits) {
    std::string s;
    for (uint8_t b : bits) s += static_cast<char>('0' + b);
    return s;
}

}  // namespace

std::string Oracle::to_string() const {
    switch (kind_) {
        case Kind::Finite:
        case Kind::Cofinite: {
            std::string s = kind_ == Kind::Finite ? "finite{" : "cofinite{";
            bool first = true;
            for (uint64_t m : set_) {
                if (!first) s += ',';
                s += std::to_string(m);
                first = false;
            }
            return s + "}";
        }
        case Kind::Periodic:
            return "periodic[" + bits_to_string(prefix_) + "|" + bits_to_string(cycle_) + "]";
        case Kind::Join: return "join(" + left_->to_string() + "," + right_->to_string() + ")";
        case Kind::Complement: return "compl(" + left_->to_string() + ")";
        case Kind::StructureCode: return "code(" + label_ + ")";
        case Kind::OrdinalOrder: return "ordorder(" + delta_.to_string() + ")";
    }
    return "";
}

namespace {

class SpecParser {
public:
    SpecParser(std::string_view text, const StructureLoader& loader)
        : text_(text), loader_(loader) {}

    OraclePtr parse() {
        OraclePtr o = parse_spec();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters in oracle spec");
        return o;
    }

private:
    std::string_view text_;
    const StructureLoader& loader_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("oracle spec: " + msg + " at offset " +
                                    std::to_string(pos_));
    }
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool eat_word(std::string_view w) {
        skip_ws();
        if (text_.substr(pos_).starts_with(w)) {
            pos_ += w.size();
            return true;
        }
        return false;
    }
    uint64_t number() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ == start) fail("expected number");
        uint64_t v = 0;
        std::from_chars(text_.data() + start, text_.data() + pos_, v);
        return v;
    }
    std::set<uint64_t> number_set() {
        expect('{');
        std::set<uint64_t> s;
        skip_ws();
        if (!eat('}')) {
            while (true) {
                s.insert(number());
                if (eat('}')) break;
                expect(',');
            }
        }
        return s;
    }
    std::vector<uint8_t> bits_until(char stop1, char stop2) {
        std::vector<uint8_t> bits;
        while (pos_ < text_.size() && text_[pos_] != stop1 && text_[pos_] != stop2) {
            char c = text_[pos_];
            if (c != '0' && c != '1') fail("expected bit 0/1");
            bits.push_back(static_cast<uint8_t>(c - '0'));
            ++pos_;
        }
        return bits;
    }

    OraclePtr parse_spec() {
        if (eat_word("finite")) return Oracle::finite(number_set());
        if (eat_word("cofinite")) return Oracle::cofinite(number_set());
        if (eat_word("periodic")) {
            expect('[');
            auto prefix = bits_until('|', ']');
            expect('|');
            auto cycle = bits_until(']', ']');
            expect(']');
            if (cycle.empty()) fail("periodic cycle must be nonempty");
            return Oracle::periodic(std::move(prefix), std::move(cycle));
        }
        if (eat_word("join")) {
            expect('(');
            OraclePtr l = parse_spec();
            expect(',');
            OraclePtr r = parse_spec();
            expect(')');
            return Oracle::join(std::move(l), std::move(r));
        }
        if (eat_word("compl")) {
            expect('(');
            OraclePtr inner = parse_spec();
            expect(')');
            return Oracle::complement(std::move(inner));
        }
        if (eat_word("ordorder")) {
            expect('(');
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] != ')') ++pos_;
            Ordinal delta;
            try {
                delta = Ordinal::parse(text_.substr(start, pos_ - start));
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
            expect(')');
            return Oracle::ordinal_order(std::move(delta));
        }
        if (eat_word("code")) {
            expect('(');
            size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] != ')') ++pos_;
            std::string path(text_.substr(start, pos_ - start));
            expect(')');
            if (!loader_) fail("code(...) used but no structure loader available");
            return loader_(path);
        }
        fail("unknown oracle variant");
    }
};

}  // namespace

OraclePtr parse_oracle_spec(std::string_view text, const StructureLoader& loader) {
    return SpecParser(text, loader).parse();
}

}  // namespace itrm
