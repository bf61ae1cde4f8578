#include "itrm/gadgets.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace itrm::gadgets {

// ---------------------------------------------------------------- Formula

Formula Formula::edge(uint32_t x, uint32_t y) {
    Formula f;
    f.kind_ = Kind::Edge;
    f.x_ = x;
    f.y_ = y;
    return f;
}

Formula Formula::negation(Formula inner) {
    Formula f;
    f.kind_ = Kind::Not;
    f.l_ = std::make_shared<const Formula>(std::move(inner));
    return f;
}

Formula Formula::conjunction(Formula left, Formula right) {
    Formula f;
    f.kind_ = Kind::And;
    f.l_ = std::make_shared<const Formula>(std::move(left));
    f.r_ = std::make_shared<const Formula>(std::move(right));
    return f;
}

Formula Formula::exists(Formula body) {
    Formula f;
    f.kind_ = Kind::Exists;
    f.l_ = std::make_shared<const Formula>(std::move(body));
    return f;
}

Formula Formula::forall(Formula body) {
    return negation(exists(negation(std::move(body))));
}

uint32_t Formula::quantifier_depth() const {
    switch (kind_) {
        case Kind::Edge: return 0;
        case Kind::Not: return l_->quantifier_depth();
        case Kind::And: return std::max(l_->quantifier_depth(), r_->quantifier_depth());
        case Kind::Exists: return 1 + l_->quantifier_depth();
    }
    return 0;
}

namespace {

bool closed_below(const Formula& f, uint32_t depth) {
    switch (f.kind()) {
        case Formula::Kind::Edge: return f.edge_x() < depth && f.edge_y() < depth;
        case Formula::Kind::Not: return closed_below(f.left(), depth);
        case Formula::Kind::And:
            return closed_below(f.left(), depth) && closed_below(f.right(), depth);
        case Formula::Kind::Exists: return closed_below(f.left(), depth + 1);
    }
    return false;
}

}  // namespace

bool Formula::is_closed() const { return closed_below(*this, 0); }

namespace {

const char kVarNames[] = "xyzuvwabc";

class FormulaParser {
public:
    explicit FormulaParser(std::string_view text) : text_(text) {}

    Formula parse() {
        Formula f = parse_formula();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return f;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;
    std::vector<char> scope_;  // bound variable names, innermost last

    [[noreturn]] void fail(const std::string& msg) {
        throw std::invalid_argument("formula: " + msg + " at offset " + std::to_string(pos_));
    }
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    }
    char peek() { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    uint32_t var_index(char name) {
        for (size_t i = scope_.size(); i-- > 0;)
            if (scope_[i] == name) return static_cast<uint32_t>(scope_.size() - 1 - i);
        fail(std::string("unbound variable '") + name + "'");
    }

    Formula parse_formula() {
        skip_ws();
        // Quantifier: 'E' or 'A' followed by a variable letter (an atom
        // starts with "E(").
        if ((peek() == 'E' || peek() == 'A') && pos_ + 1 < text_.size() &&
            text_[pos_ + 1] != '(') {
            char q = text_[pos_];
            char v = text_[pos_ + 1];
            if (v < 'a' || v > 'z') fail("expected variable letter after quantifier");
            pos_ += 2;
            scope_.push_back(v);
            Formula body = parse_formula();
            scope_.pop_back();
            return q == 'E' ? Formula::exists(std::move(body))
                            : Formula::forall(std::move(body));
        }
        if (peek() == '!') {
            ++pos_;
            return Formula::negation(parse_formula());
        }
        if (peek() == '(') {
            ++pos_;
            Formula l = parse_formula();
            skip_ws();
            if (peek() == '&') {
                ++pos_;
                Formula r = parse_formula();
                skip_ws();
                if (peek() != ')') fail("expected ')'");
                ++pos_;
                return Formula::conjunction(std::move(l), std::move(r));
            }
            if (peek() != ')') fail("expected '&' or ')'");
            ++pos_;
            return l;
        }
        if (peek() == 'E' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '(') {
            pos_ += 2;
            skip_ws();
            char a = peek();
            if (a < 'a' || a > 'z') fail("expected variable");
            ++pos_;
            skip_ws();
            if (peek() != ',') fail("expected ','");
            ++pos_;
            skip_ws();
            char b = peek();
            if (b < 'a' || b > 'z') fail("expected variable");
            ++pos_;
            skip_ws();
            if (peek() != ')') fail("expected ')'");
            ++pos_;
            return Formula::edge(var_index(a), var_index(b));
        }
        fail("expected formula");
    }
};

void render(const Formula& f, uint32_t depth, std::string& out) {
    auto var = [](uint32_t depth_at, uint32_t index) {
        return kVarNames[(depth_at - 1 - index) % (sizeof(kVarNames) - 1)];
    };
    switch (f.kind()) {
        case Formula::Kind::Edge:
            out += "E(";
            out += var(depth, f.edge_x());
            out += ',';
            out += var(depth, f.edge_y());
            out += ')';
            break;
        case Formula::Kind::Not:
            out += '!';
            render(f.left(), depth, out);
            break;
        case Formula::Kind::And:
            out += '(';
            render(f.left(), depth, out);
            out += " & ";
            render(f.right(), depth, out);
            out += ')';
            break;
        case Formula::Kind::Exists:
            out += 'E';
            out += kVarNames[depth % (sizeof(kVarNames) - 1)];
            out += ' ';
            render(f.left(), depth + 1, out);
            break;
    }
}

}  // namespace

Formula Formula::parse(std::string_view text) { return FormulaParser(text).parse(); }

std::string Formula::to_string() const {
    std::string out;
    render(*this, 0, out);
    return out;
}

// ------------------------------------------------------------- AsmBuilder

namespace {

// Emits instructions with symbolic labels and allocates registers above
// the fixed ABI slots. Jumps to an always-zero register give an
// unconditional goto.
class AsmBuilder {
public:
    explicit AsmBuilder(uint32_t first_free_reg) : next_reg_(first_free_reg) {}

    uint32_t alloc() {
        if (next_reg_ >= kMaxRegisters) throw std::invalid_argument("out of registers");
        return next_reg_++;
    }
    void set_zero_reg(uint32_t zr) { zr_ = zr; }
    uint32_t zero_reg() const { return zr_; }

    std::string fresh(const char* base) {
        return std::string(base) + "$" + std::to_string(fresh_counter_++);
    }
    void label(const std::string& name) {
        if (labels_.count(name)) throw std::logic_error("duplicate label " + name);
        labels_[name] = static_cast<uint32_t>(code_.size());
    }

    void inc(uint32_t r) { code_.push_back(Instruction::inc(r)); }
    void dec(uint32_t r) { code_.push_back(Instruction::dec(r)); }
    void copy(uint32_t s, uint32_t d) { code_.push_back(Instruction::copy(s, d)); }
    void oracle(uint32_t r) { code_.push_back(Instruction::oracle(r)); }
    void halt() { code_.push_back(Instruction::halt()); }
    void jz(uint32_t r, const std::string& target) {
        fixups_.push_back({code_.size(), target});
        code_.push_back(Instruction::jz(r, 0));
    }
    void jump(const std::string& target) { jz(zr_, target); }

    Program build(std::string name) {
        for (const auto& [at, target] : fixups_) {
            auto it = labels_.find(target);
            if (it == labels_.end()) throw std::logic_error("unresolved label " + target);
            code_[at].b = it->second;
        }
        uint32_t rc = 2;
        for (const auto& in : code_) {
            switch (in.op) {
                case Opcode::Inc:
                case Opcode::Dec:
                case Opcode::OracleQuery:
                case Opcode::JumpIfZero: rc = std::max(rc, in.a + 1); break;
                case Opcode::Copy: rc = std::max({rc, in.a + 1, in.b + 1}); break;
                case Opcode::Halt: break;
            }
        }
        return Program(std::move(code_), rc, std::move(name));
    }

private:
    std::vector<Instruction> code_;
    std::unordered_map<std::string, uint32_t> labels_;
    std::vector<std::pair<size_t, std::string>> fixups_;
    uint32_t next_reg_;
    uint32_t zr_ = 0;
    uint32_t fresh_counter_ = 0;
};

// r := 0 regardless of its current content.
void emit_zero(AsmBuilder& b, uint32_t r) {
    auto loop = b.fresh("z");
    auto done = b.fresh("zd");
    b.label(loop);
    b.jz(r, done);
    b.dec(r);
    b.jump(loop);
    b.label(done);
}

// The flag flash: f1 to 0 and back to 1, f2 to 1 and back to 0.
void emit_flash(AsmBuilder& b, uint32_t f1, uint32_t f2) {
    b.dec(f1);
    b.inc(f1);
    b.inc(f2);
    b.dec(f2);
}

// Loop head comparing the flag pair: equal flags divert to equal_label
// (reached with both zero at a limit), otherwise control continues at
// body_label. Emitted first in the loop so the liminf of the active line
// lands here.
void emit_flag_head(AsmBuilder& b, uint32_t f1, uint32_t f2, const std::string& head,
                    const std::string& body, const std::string& equal) {
    auto f1zero = b.fresh("fh");
    b.label(head);
    b.jz(f1, f1zero);
    b.jz(f2, body);    // (1,0): iterate
    b.jump(equal);     // (1,1)
    b.label(f1zero);
    b.jz(f2, equal);   // (0,0): limit reached
    b.jump(body);      // (0,1)
}

// f1 := 1, f2 := 0 from any state.
void emit_flag_init(AsmBuilder& b, uint32_t f1, uint32_t f2) {
    emit_zero(b, f1);
    b.inc(f1);
    emit_zero(b, f2);
}

// dst += src, destroying src.
void emit_drain_into(AsmBuilder& b, uint32_t src, uint32_t dst) {
    auto loop = b.fresh("dr");
    auto done = b.fresh("drd");
    b.label(loop);
    b.jz(src, done);
    b.dec(src);
    b.inc(dst);
    b.jump(loop);
    b.label(done);
}

// dst += src, preserving src.
void emit_add_to(AsmBuilder& b, uint32_t src, uint32_t dst, uint32_t tmp) {
    b.copy(src, tmp);
    emit_drain_into(b, tmp, dst);
}

// Destructive comparison of a and b2.
void emit_compare(AsmBuilder& b, uint32_t a, uint32_t b2, const std::string& le_or_eq,
                  const std::string& gt, bool equality, const std::string& neq = "") {
    auto loop = b.fresh("cmp");
    auto a0 = b.fresh("cma");
    b.label(loop);
    b.jz(a, a0);
    b.jz(b2, gt);  // a > 0, b == 0
    b.dec(a);
    b.dec(b2);
    b.jump(loop);
    b.label(a0);
    if (equality) {
        b.jz(b2, le_or_eq);  // both zero: equal
        b.jump(neq);         // a == 0 < b
    } else {
        b.jump(le_or_eq);  // a <= b
    }
}

void emit_compare_eq(AsmBuilder& b, uint32_t a, uint32_t b2, const std::string& eq,
                     const std::string& neq) {
    emit_compare(b, a, b2, eq, neq, true, neq);
}

void emit_compare_le(AsmBuilder& b, uint32_t a, uint32_t b2, const std::string& le,
                     const std::string& gt) {
    emit_compare(b, a, b2, le, gt, false);
}

struct PairScratch {
    uint32_t sum, t1;
};

// out := pair(x, y) = (x+y)(x+y+1)/2 + y, preserving x and y.
void emit_pair(AsmBuilder& b, uint32_t x, uint32_t y, uint32_t out, const PairScratch& s) {
    emit_zero(b, out);
    emit_zero(b, s.sum);
    emit_add_to(b, x, s.sum, s.t1);
    emit_add_to(b, y, s.sum, s.t1);
    auto loop = b.fresh("tri");
    auto done = b.fresh("trid");
    b.label(loop);
    b.jz(s.sum, done);
    emit_add_to(b, s.sum, out, s.t1);
    b.dec(s.sum);
    b.jump(loop);
    b.label(done);
    emit_add_to(b, y, out, s.t1);
}

struct UnpairScratch {
    uint32_t rem, diag, c1, c2;
};

// (j, k) := unpair(n), preserving n.
void emit_unpair(AsmBuilder& b, uint32_t n, uint32_t j, uint32_t k, const UnpairScratch& s) {
    b.copy(n, s.rem);
    emit_zero(b, s.diag);
    auto loop = b.fresh("up");
    auto gt = b.fresh("upg");
    auto le = b.fresh("upl");
    auto subdone = b.fresh("ups");
    auto done = b.fresh("upd");
    b.label(loop);
    b.copy(s.rem, s.c1);
    b.copy(s.diag, s.c2);
    emit_compare_le(b, s.c1, s.c2, le, gt);
    b.label(gt);  // rem > diag: rem -= diag + 1, next diagonal
    b.dec(s.rem);
    b.copy(s.diag, s.c1);
    {
        auto sl = b.fresh("upb");
        b.label(sl);
        b.jz(s.c1, subdone);
        b.dec(s.c1);
        b.dec(s.rem);
        b.jump(sl);
    }
    b.label(subdone);
    b.inc(s.diag);
    b.jump(loop);
    b.label(le);  // on diagonal `diag` at offset rem: k = rem, j = diag - rem
    b.copy(s.rem, k);
    b.copy(s.diag, j);
    b.copy(s.rem, s.c1);
    {
        auto dl = b.fresh("upj");
        b.label(dl);
        b.jz(s.c1, done);
        b.dec(s.c1);
        b.dec(j);
        b.jump(dl);
    }
    b.label(done);
}

Program epilogue_and_build(AsmBuilder& b, const std::string& accept,
                           const std::string& fail, std::string name) {
    b.label(accept);
    emit_zero(b, 1);
    b.inc(1);
    b.halt();
    b.label(fail);
    emit_zero(b, 1);
    b.halt();
    return b.build(std::move(name));
}

}  // namespace

// ------------------------------------------------- flag loops and counters

Program flag_limit_loop(const Fragment& body) {
    constexpr uint32_t f1 = 2, f2 = 3, counter = 4, zr = 5;
    for (const auto& in : body.code) {
        uint32_t written = UINT32_MAX;
        switch (in.op) {
            case Opcode::Inc:
            case Opcode::Dec:
            case Opcode::OracleQuery: written = in.a; break;
            case Opcode::Copy: written = in.b; break;
            default: break;
        }
        if (written == f1 || written == f2)
            throw std::invalid_argument("flag_limit_loop: body clobbers a flag register");
        if (in.op == Opcode::JumpIfZero && in.b != Fragment::kFailTarget &&
            in.b >= body.code.size())
            throw std::invalid_argument("flag_limit_loop: body jump target out of range");
    }

    AsmBuilder b(6);
    b.set_zero_reg(zr);
    auto head = b.fresh("head");
    auto loop_body = b.fresh("body");
    auto accept = b.fresh("pass");
    auto fail = b.fresh("fail");
    b.inc(f1);
    emit_flag_head(b, f1, f2, head, loop_body, accept);
    b.label(loop_body);
    // Splice the body, rebasing internal jump targets.
    std::vector<std::string> site(body.code.size());
    for (size_t i = 0; i < body.code.size(); ++i) site[i] = b.fresh("bl");
    for (size_t i = 0; i < body.code.size(); ++i) {
        b.label(site[i]);
        const auto& in = body.code[i];
        if (in.op == Opcode::JumpIfZero) {
            if (in.b == Fragment::kFailTarget)
                b.jz(in.a, fail);
            else
                b.jz(in.a, site[in.b]);
        } else {
            switch (in.op) {
                case Opcode::Inc: b.inc(in.a); break;
                case Opcode::Dec: b.dec(in.a); break;
                case Opcode::Copy: b.copy(in.a, in.b); break;
                case Opcode::OracleQuery: b.oracle(in.a); break;
                case Opcode::Halt: b.halt(); break;
                default: break;
            }
        }
    }
    emit_flash(b, f1, f2);
    b.inc(counter);
    b.jump(head);
    return epilogue_and_build(b, accept, fail, "<flag_limit_loop>");
}

Program flag_counter() { return flag_limit_loop(Fragment{}); }

Program nested_flag_counter() {
    constexpr uint32_t of1 = 2, of2 = 3, zr = 4, if1 = 5, if2 = 6, icnt = 7, ocnt = 8;
    AsmBuilder b(9);
    b.set_zero_reg(zr);
    auto ohead = b.fresh("oh");
    auto obody = b.fresh("ob");
    auto oacc = b.fresh("oa");
    auto ihead = b.fresh("ih");
    auto ibody = b.fresh("ib");
    auto idone = b.fresh("id");
    auto fail = b.fresh("fl");  // unreachable; epilogue needs the label
    b.inc(of1);
    emit_flag_head(b, of1, of2, ohead, obody, oacc);
    b.label(obody);
    b.inc(if1);  // inner flags are (0,0) whenever the body is entered
    emit_flag_head(b, if1, if2, ihead, ibody, idone);
    b.label(ibody);
    b.inc(icnt);
    emit_flash(b, if1, if2);
    b.jump(ihead);
    b.label(idone);
    emit_flash(b, of1, of2);
    b.inc(ocnt);
    b.jump(ohead);
    return epilogue_and_build(b, oacc, fail, "<nested_flag_counter>");
}

// ------------------------------------------------------------ recognizers

namespace {

struct BitPattern {
    std::vector<uint8_t> prefix;
    std::vector<uint8_t> cycle;
};

BitPattern target_bits(const Oracle& target) {
    switch (target.kind()) {
        case Oracle::Kind::Finite: {
            BitPattern p;
            if (!target.members().empty()) {
                uint64_t top = *target.members().rbegin();
                p.prefix.resize(top + 1, 0);
                for (uint64_t m : target.members()) p.prefix[m] = 1;
            }
            p.cycle = {0};
            return p;
        }
        case Oracle::Kind::Periodic: return {target.prefix(), target.cycle()};
        default:
            throw std::invalid_argument(
                "equality_recognizer: target must be finite or periodic");
    }
}

// Emits a checker verifying the oracle bits at positions offset,
// offset+stride, ... against the target pattern: hard-coded checks for
// the prefix, then a flag-limit loop over the cycle. Control reaches
// accept only at the loop's limit; any mismatch goes to fail.
void emit_bit_checker(AsmBuilder& b, const BitPattern& bits, uint32_t stride,
                      uint32_t offset, uint32_t f1, uint32_t f2, uint32_t q, uint32_t pos,
                      const std::string& accept, const std::string& fail) {
    emit_flag_init(b, f1, f2);
    emit_zero(b, pos);
    for (uint32_t i = 0; i < offset; ++i) b.inc(pos);

    auto check_bit = [&](uint8_t expected) {
        b.copy(pos, q);
        b.oracle(q);
        if (expected == 1) {
            b.jz(q, fail);
        } else {
            auto ok = b.fresh("bc");
            b.jz(q, ok);
            b.jump(fail);
            b.label(ok);
        }
        for (uint32_t s = 0; s < stride; ++s) b.inc(pos);
    };

    for (uint8_t bit : bits.prefix) check_bit(bit);

    auto head = b.fresh("ch");
    auto body = b.fresh("cb");
    emit_flag_head(b, f1, f2, head, body, accept);
    b.label(body);
    for (uint8_t bit : bits.cycle) check_bit(bit);
    emit_flash(b, f1, f2);
    b.jump(head);
}

}  // namespace

Program equality_recognizer(const OraclePtr& target) {
    if (!target) throw std::invalid_argument("equality_recognizer: null target");
    BitPattern bits = target_bits(*target);
    constexpr uint32_t f1 = 2, f2 = 3, q = 4, pos = 5, zr = 6;
    AsmBuilder b(7);
    b.set_zero_reg(zr);
    auto accept = b.fresh("acc");
    auto fail = b.fresh("rej");
    emit_bit_checker(b, bits, 1, 0, f1, f2, q, pos, accept, fail);
    return epilogue_and_build(b, accept, fail, "<equality_recognizer>");
}

std::pair<Fragment, Fragment> join_splitter() {
    // Reads i from r4, leaves the queried bit in r0; r5 is the loop ABI's
    // zero register, r6/r7 scratch.
    auto make = [](bool odd) {
        Fragment f;
        auto& c = f.code;
        uint32_t i = 4, zr = 5, t = 6, out2 = 7;
        c.push_back(Instruction::copy(i, t));
        // zero out2
        size_t z0 = c.size();
        c.push_back(Instruction::jz(out2, static_cast<uint32_t>(z0 + 3)));
        c.push_back(Instruction::dec(out2));
        c.push_back(Instruction::jz(zr, static_cast<uint32_t>(z0)));
        // out2 := 2*i
        size_t loop = c.size();
        c.push_back(Instruction::jz(t, static_cast<uint32_t>(loop + 5)));
        c.push_back(Instruction::dec(t));
        c.push_back(Instruction::inc(out2));
        c.push_back(Instruction::inc(out2));
        c.push_back(Instruction::jz(zr, static_cast<uint32_t>(loop)));
        if (odd) c.push_back(Instruction::inc(out2));
        c.push_back(Instruction::oracle(out2));
        c.push_back(Instruction::copy(out2, 0));
        return f;
    };
    return {make(false), make(true)};
}

Program join_recognizer(const OraclePtr& a, const OraclePtr& b2) {
    if (!a || !b2) throw std::invalid_argument("join_recognizer: null component");
    BitPattern even = target_bits(*a);
    BitPattern odd = target_bits(*b2);
    constexpr uint32_t f1 = 2, f2 = 3, q = 4, pos = 5, zr = 6;
    AsmBuilder b(7);
    b.set_zero_reg(zr);
    auto second = b.fresh("odd");
    auto accept = b.fresh("acc");
    auto fail = b.fresh("rej");
    emit_bit_checker(b, even, 2, 0, f1, f2, q, pos, second, fail);
    b.label(second);
    emit_bit_checker(b, odd, 2, 1, f1, f2, q, pos, accept, fail);
    return epilogue_and_build(b, accept, fail, "<join_recognizer>");
}

// -------------------------------------------------------------- fo_compile

namespace {

struct FoRegs {
    uint32_t zr, q;
    PairScratch pair;
    UnpairScratch unpair;
    struct Depth {
        uint32_t fa, fb, n, v, j, k;
    };
    std::vector<Depth> depth;
};

class FoCompiler {
public:
    FoCompiler(AsmBuilder& b, const FoRegs& r) : b_(b), r_(r) {}

    void eval(const Formula& f, uint32_t d, const std::string& ltrue,
              const std::string& lfalse) {
        switch (f.kind()) {
            case Formula::Kind::Edge: {
                uint32_t vx = r_.depth[d - 1 - f.edge_x()].v;
                uint32_t vy = r_.depth[d - 1 - f.edge_y()].v;
                emit_pair(b_, vx, vy, r_.q, r_.pair);
                b_.oracle(r_.q);
                b_.jz(r_.q, lfalse);
                b_.jump(ltrue);
                return;
            }
            case Formula::Kind::Not:
                eval(f.left(), d, lfalse, ltrue);
                return;
            case Formula::Kind::And: {
                auto mid = b_.fresh("and");
                eval(f.left(), d, mid, lfalse);
                b_.label(mid);
                eval(f.right(), d, ltrue, lfalse);
                return;
            }
            case Formula::Kind::Exists: {
                // Scan the code for members; each member pair(j,k) names
                // two field elements to try as the witness. Exhaustion is
                // concluded at the loop's omega-limit.
                const auto& rd = r_.depth[d];
                emit_flag_init(b_, rd.fa, rd.fb);
                emit_zero(b_, rd.n);
                auto head = b_.fresh("xh");
                auto body = b_.fresh("xb");
                auto tryk = b_.fresh("xk");
                auto cont = b_.fresh("xc");
                emit_flag_head(b_, rd.fa, rd.fb, head, body, lfalse);
                b_.label(body);
                b_.copy(rd.n, r_.q);
                b_.oracle(r_.q);
                b_.jz(r_.q, cont);
                emit_unpair(b_, rd.n, rd.j, rd.k, r_.unpair);
                b_.copy(rd.j, rd.v);
                eval(f.left(), d + 1, ltrue, tryk);
                b_.label(tryk);
                b_.copy(rd.k, rd.v);
                eval(f.left(), d + 1, ltrue, cont);
                b_.label(cont);
                emit_flash(b_, rd.fa, rd.fb);
                b_.inc(rd.n);
                b_.jump(head);
                return;
            }
        }
    }

private:
    AsmBuilder& b_;
    const FoRegs& r_;
};

}  // namespace

Program fo_compile(const Formula& f, uint32_t max_depth) {
    if (!f.is_closed()) throw std::invalid_argument("fo_compile: formula must be closed");
    uint32_t depth = f.quantifier_depth();
    if (depth == 0) throw std::invalid_argument("fo_compile: sentence has no quantifier");
    if (depth > max_depth) throw std::invalid_argument("fo_compile: quantifier depth exceeds bound");

    AsmBuilder b(4);
    FoRegs r;
    // The outermost flag pair sits in the ABI slots r2/r3.
    r.depth.resize(depth);
    r.depth[0].fa = 2;
    r.depth[0].fb = 3;
    r.zr = b.alloc();
    b.set_zero_reg(r.zr);
    r.q = b.alloc();
    r.pair = {b.alloc(), b.alloc()};
    r.unpair = {b.alloc(), b.alloc(), b.alloc(), b.alloc()};
    for (uint32_t d = 0; d < depth; ++d) {
        if (d > 0) {
            r.depth[d].fa = b.alloc();
            r.depth[d].fb = b.alloc();
        }
        r.depth[d].n = b.alloc();
        r.depth[d].v = b.alloc();
        r.depth[d].j = b.alloc();
        r.depth[d].k = b.alloc();
    }
    auto accept = b.fresh("acc");
    auto fail = b.fresh("rej");
    FoCompiler(b, r).eval(f, 0, accept, fail);
    return epilogue_and_build(b, accept, fail, "<fo_compile>");
}

namespace {

std::vector<uint32_t> field_of(const coding::EdgeSet& edges) {
    std::set<uint32_t> field;
    for (const auto& [a, b] : edges) {
        field.insert(a);
        field.insert(b);
    }
    return {field.begin(), field.end()};
}

bool eval_rec(const Formula& f, const coding::EdgeSet& edges,
              const std::vector<uint32_t>& field, std::vector<uint32_t>& env) {
    switch (f.kind()) {
        case Formula::Kind::Edge: {
            uint32_t vx = env[env.size() - 1 - f.edge_x()];
            uint32_t vy = env[env.size() - 1 - f.edge_y()];
            return edges.count({vx, vy}) != 0;
        }
        case Formula::Kind::Not: return !eval_rec(f.left(), edges, field, env);
        case Formula::Kind::And:
            return eval_rec(f.left(), edges, field, env) &&
                   eval_rec(f.right(), edges, field, env);
        case Formula::Kind::Exists:
            for (uint32_t w : field) {
                env.push_back(w);
                bool ok = eval_rec(f.left(), edges, field, env);
                env.pop_back();
                if (ok) return true;
            }
            return false;
    }
    return false;
}

}  // namespace

bool eval_formula(const Formula& f, const coding::EdgeSet& edges) {
    if (!f.is_closed()) throw std::invalid_argument("eval_formula: formula must be closed");
    std::vector<uint32_t> field = field_of(edges);
    std::vector<uint32_t> env;
    return eval_rec(f, edges, field, env);
}

// --------------------------------------------------------- decode_naturals

Program decode_naturals(uint32_t limit) {
    if (limit == 0) throw std::invalid_argument("decode_naturals: limit must be positive");
    constexpr uint32_t f1 = 2, f2 = 3, zr = 4;
    AsmBuilder b(5);
    b.set_zero_reg(zr);
    uint32_t cdown = b.alloc();
    uint32_t last = b.alloc();
    uint32_t bound = b.alloc();
    uint32_t n = b.alloc();
    uint32_t q = b.alloc();
    uint32_t cand = b.alloc();
    uint32_t j2 = b.alloc(), k2 = b.alloc();
    UnpairScratch us{b.alloc(), b.alloc(), b.alloc(), b.alloc()};
    PairScratch ps{b.alloc(), b.alloc()};
    uint32_t arg = b.alloc(), ainc = b.alloc(), jp = b.alloc();
    std::vector<uint32_t> karr(limit);
    for (auto& r : karr) r = b.alloc();
    auto fail = b.fresh("fail");

    b.copy(1, cdown);

    // Bound scan: remember the last member seen; at the limit `last` holds
    // the greatest element of the (finite) code.
    {
        emit_flag_init(b, f1, f2);
        auto head = b.fresh("bh");
        auto body = b.fresh("bb");
        auto cont = b.fresh("bc");
        auto done = b.fresh("bd");
        emit_flag_head(b, f1, f2, head, body, done);
        b.label(body);
        b.copy(n, q);
        b.oracle(q);
        b.jz(q, cont);
        b.copy(n, last);
        b.label(cont);
        emit_flash(b, f1, f2);
        b.inc(n);
        b.jump(head);
        b.label(done);
        b.copy(last, bound);
        b.inc(bound);
        b.inc(bound);
    }

    // Stage 0: the no-predecessor search. For each candidate k, scan the
    // whole code at the limit; any member pair (j,k) aborts the candidate.
    {
        auto cand_loop = b.fresh("s0cand");
        auto next = b.fresh("s0next");
        auto found = b.fresh("s0ok");
        b.label(cand_loop);
        b.copy(cand, us.c1);
        b.copy(bound, us.c2);
        {
            auto in_range = b.fresh("s0rng");
            emit_compare_le(b, us.c1, us.c2, in_range, fail);
            b.label(in_range);
        }
        emit_flag_init(b, f1, f2);
        emit_zero(b, n);
        auto head = b.fresh("s0h");
        auto body = b.fresh("s0b");
        auto cont = b.fresh("s0c");
        emit_flag_head(b, f1, f2, head, body, found);
        b.label(body);
        b.copy(n, q);
        b.oracle(q);
        b.jz(q, cont);
        emit_unpair(b, n, j2, k2, us);
        b.copy(k2, us.c1);
        b.copy(cand, us.c2);
        emit_compare_eq(b, us.c1, us.c2, next, cont);
        b.label(cont);
        emit_flash(b, f1, f2);
        b.inc(n);
        b.jump(head);
        b.label(next);
        b.inc(cand);
        b.jump(cand_loop);
        b.label(found);
        b.copy(cand, karr[0]);
    }

    // After each stage t the countdown gate either outputs k_t or moves on
    // to the next stage. Stages t >= 1: bounded search for the candidate
    // whose predecessors are exactly {k_0, ..., k_{t-1}}.
    for (uint32_t t = 0; t < limit; ++t) {
        {
            auto out = b.fresh("out");
            auto past = b.fresh("past");
            b.jz(cdown, out);
            b.dec(cdown);
            b.jump(past);
            b.label(out);
            b.copy(karr[t], 1);
            b.halt();
            b.label(past);
        }
        if (t + 1 == limit) {
            b.jump(fail);  // requested index >= limit
            break;
        }

        uint32_t stage = t + 1;
        auto cand_loop = b.fresh("scand");
        auto next = b.fresh("snext");
        auto found = b.fresh("sok");
        auto after = b.fresh("safter");
        emit_zero(b, cand);
        b.label(cand_loop);
        b.copy(cand, us.c1);
        b.copy(bound, us.c2);
        {
            auto in_range = b.fresh("srng");
            emit_compare_le(b, us.c1, us.c2, in_range, fail);
            b.label(in_range);
        }
        // (b) every k_s with s < stage must be a predecessor of cand.
        for (uint32_t s = 0; s < stage; ++s) {
            emit_pair(b, karr[s], cand, q, ps);
            b.oracle(q);
            b.jz(q, next);
        }
        // (a) every predecessor of cand below the bound must be one of
        // k_0..k_{stage-1}. arg tracks pair(jp, cand) incrementally:
        // pair(j+1,c) - pair(j,c) = j + c + 1.
        {
            emit_zero(b, jp);
            emit_pair(b, zr, cand, arg, ps);
            b.copy(cand, ainc);
            b.inc(ainc);
            auto jloop = b.fresh("sj");
            auto jcont = b.fresh("sjc");
            b.label(jloop);
            b.copy(jp, us.c1);
            b.copy(bound, us.c2);
            {
                auto jbody = b.fresh("sjb");
                emit_compare_le(b, us.c1, us.c2, jbody, found);
                b.label(jbody);
            }
            b.copy(arg, q);
            b.oracle(q);
            b.jz(q, jcont);
            // jp is a predecessor: accept it only if it equals some k_s.
            for (uint32_t s = 0; s < stage; ++s) {
                auto miss = b.fresh("sm");
                b.copy(jp, us.c1);
                b.copy(karr[s], us.c2);
                emit_compare_eq(b, us.c1, us.c2, jcont, miss);
                b.label(miss);
            }
            b.jump(next);  // alien predecessor
            b.label(jcont);
            emit_add_to(b, ainc, arg, us.c1);
            b.inc(ainc);
            b.inc(jp);
            b.jump(jloop);
        }
        b.label(found);
        b.copy(cand, karr[stage]);
        b.jump(after);
        b.label(next);
        b.inc(cand);
        b.jump(cand_loop);
        b.label(after);
    }

    b.label(fail);
    emit_zero(b, 1);
    b.halt();
    return b.build("<decode_naturals>");
}

// ------------------------------------------------------- harness utilities

SafetyReport safety_check(const Program& p, const OraclePtr& o, uint64_t input_count,
                          const Budgets& b) {
    SafetyReport report{Safety::Safe, {}, std::nullopt};
    bool unknown = false;
    for (uint64_t i = 0; i < input_count; ++i) {
        RunOutcome outcome = run(p, o, i, b).outcome;
        if (std::holds_alternative<NonHalting>(outcome)) {
            report.verdict = Safety::Unsafe;
            if (!report.witness) report.witness = i;
        } else if (std::holds_alternative<Exhausted>(outcome)) {
            unknown = true;
        }
        report.outcomes.push_back(std::move(outcome));
    }
    if (report.verdict == Safety::Safe && unknown) report.verdict = Safety::Unknown;
    return report;
}

RecognizerReport check_recognizer(const Program& p, const std::vector<OraclePtr>& family,
                                  size_t target_index, const Budgets& b) {
    if (target_index >= family.size())
        throw std::invalid_argument("check_recognizer: target index out of range");
    RecognizerReport report{RecognizerReport::Verdict::Pass, target_index, {}};
    bool inconclusive = false;
    bool pass = true;
    for (size_t i = 0; i < family.size(); ++i) {
        RunOutcome outcome = run(p, family[i], 0, b).outcome;
        if (const auto* h = std::get_if<Halted>(&outcome)) {
            uint64_t want = i == target_index ? 1 : 0;
            if (h->output != want) pass = false;
        } else if (std::holds_alternative<Exhausted>(outcome)) {
            inconclusive = true;
        } else {
            pass = false;  // NonHalting: not a recognizer
        }
        report.outcomes.push_back(std::move(outcome));
    }
    report.verdict = inconclusive ? RecognizerReport::Verdict::Inconclusive
                    : pass        ? RecognizerReport::Verdict::Pass
                                  : RecognizerReport::Verdict::Fail;
    return report;
}

}  // namespace itrm::gadgets
