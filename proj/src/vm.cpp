#include "itrm/vm.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace itrm {

namespace {

uint64_t reg_or_zero(const Configuration& c, size_t i) {
    return i < c.registers.size() ? c.registers[i] : 0;
}

Configuration step_impl(const Program& p, const Configuration& c, const Oracle& o) {
    Configuration n = c;
    const Instruction& in = p.line(c.line);
    switch (in.op) {
        case Opcode::Inc:
            ++n.registers[in.a];
            ++n.line;
            break;
        case Opcode::Dec:
            if (n.registers[in.a] > 0) --n.registers[in.a];
            ++n.line;
            break;
        case Opcode::Copy:
            n.registers[in.b] = n.registers[in.a];
            ++n.line;
            break;
        case Opcode::JumpIfZero:
            n.line = (n.registers[in.a] == 0) ? in.b : n.line + 1;
            break;
        case Opcode::OracleQuery:
            n.registers[in.a] = o.query(n.registers[in.a]);
            ++n.line;
            break;
        case Opcode::Halt:
            throw std::invalid_argument("step: configuration is halted");
    }
    return n;
}

struct DriftData {
    std::vector<uint64_t> shift;
    std::vector<bool> drifting;        // no shift-0 position in the span
    std::vector<uint64_t> stable_min;  // min over shift-0 positions
    uint32_t min_line = 0;
};

// Verifies the drift conditions for the candidate span [t1, t2) by
// propagating the shift vector through each recorded step. See the
// detect_lasso contract in vm.hpp. A null oracle skips the progression
// certification; used only to recompute data of an already certified span.
std::optional<DriftData> check_drift(const Program& p, const Oracle* o,
                                     std::span<const Configuration> hist, size_t t1,
                                     size_t t2) {
    const size_t nregs = hist[t1].registers.size();
    if (hist[t1].line != hist[t2].line) return std::nullopt;

    DriftData out;
    out.shift.resize(nregs);
    bool any = false;
    for (size_t i = 0; i < nregs; ++i) {
        uint64_t a = hist[t1].registers[i];
        uint64_t b = hist[t2].registers[i];
        if (b < a) return std::nullopt;
        out.shift[i] = b - a;
        any |= out.shift[i] != 0;
    }
    if (!any) return std::nullopt;  // exact, not drift

    std::vector<uint64_t> sigma = out.shift;
    std::vector<uint64_t> span_min(nregs, UINT64_MAX);
    out.drifting.assign(nregs, true);
    out.stable_min.assign(nregs, UINT64_MAX);
    out.min_line = UINT32_MAX;

    for (size_t t = t1; t < t2; ++t) {
        const Configuration& c = hist[t];
        if (c.line >= p.size()) return std::nullopt;
        out.min_line = std::min(out.min_line, c.line);
        for (size_t i = 0; i < nregs; ++i) {
            span_min[i] = std::min(span_min[i], c.registers[i]);
            if (sigma[i] == 0) {
                out.stable_min[i] = std::min(out.stable_min[i], c.registers[i]);
                out.drifting[i] = false;
            }
        }
        const Instruction& in = p.line(c.line);
        switch (in.op) {
            case Opcode::Inc:
                break;
            case Opcode::Dec:
                // A shifted register must never hit the floor.
                if (sigma[in.a] > 0 && c.registers[in.a] == 0) return std::nullopt;
                break;
            case Opcode::Copy:
                sigma[in.b] = sigma[in.a];
                break;
            case Opcode::JumpIfZero:
                // No zero-tests on registers holding shifted values.
                if (sigma[in.a] > 0) return std::nullopt;
                break;
            case Opcode::OracleQuery: {
                if (sigma[in.a] > 0) {
                    uint64_t answer = hist[t + 1].registers[in.a];
                    if (o && !o->proves_constant(c.registers[in.a], sigma[in.a],
                                                 static_cast<uint8_t>(answer)))
                        return std::nullopt;
                    sigma[in.a] = 0;
                }
                break;
            }
            case Opcode::Halt:
                return std::nullopt;
        }
    }
    if (sigma != out.shift) return std::nullopt;
    for (size_t i = 0; i < nregs; ++i)
        if (out.shift[i] > 0 && span_min[i] == 0) return std::nullopt;
    return out;
}

Configuration exact_limit(std::span<const Configuration> span) {
    Configuration out = span.front();
    for (const Configuration& c : span) {
        out.line = std::min(out.line, c.line);
        for (size_t i = 0; i < out.registers.size(); ++i)
            out.registers[i] = std::min(out.registers[i], c.registers[i]);
    }
    return out;
}

Configuration drift_limit(const DriftData& d, size_t nregs) {
    Configuration out;
    out.line = d.min_line;
    out.registers.resize(nregs);
    for (size_t i = 0; i < nregs; ++i)
        out.registers[i] = d.drifting[i] ? 0 : d.stable_min[i];
    return out;
}

uint64_t config_hash(const Configuration& c) {
    uint64_t h = 1469598103934665603ull ^ c.line;
    for (uint64_t v : c.registers) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

// Componentwise minima plus the step events of an interval: a MinProfile
// extended with the event sets the drift conditions at levels >= 1 need.
struct Profile {
    std::vector<uint64_t> min_regs;
    uint32_t min_line = 0;
    bool any_oracle = false;
    std::set<uint32_t> jz_targets;
    std::set<std::pair<uint32_t, uint32_t>> copy_pairs;

    static Profile of(const Configuration& c) {
        Profile p;
        p.min_regs = c.registers;
        p.min_line = c.line;
        return p;
    }
    void fold_config(const Configuration& c) {
        min_line = std::min(min_line, c.line);
        for (size_t i = 0; i < min_regs.size(); ++i)
            min_regs[i] = std::min(min_regs[i], c.registers[i]);
    }
    void fold(const Profile& o) {
        min_line = std::min(min_line, o.min_line);
        for (size_t i = 0; i < min_regs.size(); ++i)
            min_regs[i] = std::min(min_regs[i], o.min_regs[i]);
        any_oracle |= o.any_oracle;
        jz_targets.insert(o.jz_targets.begin(), o.jz_targets.end());
        copy_pairs.insert(o.copy_pairs.begin(), o.copy_pairs.end());
    }
    void note_step(const Instruction& in) {
        switch (in.op) {
            case Opcode::JumpIfZero: jz_targets.insert(in.a); break;
            case Opcode::Copy: copy_pairs.insert({in.a, in.b}); break;
            case Opcode::OracleQuery: any_oracle = true; break;
            default: break;
        }
    }
};

struct LevelEntry {
    Ordinal time;
    Configuration cfg;
    Profile into;  // minima/events over (previous entry, this entry]
};

class Engine {
public:
    Engine(const Program& p, const OraclePtr& o, const Budgets& b)
        : p_(p), oracle_(o), b_(b) {
        if (!o) throw std::invalid_argument("run: null oracle");
        auto diags = validate(p);
        if (!diags.empty())
            throw std::invalid_argument("run: invalid program: " + diags.front().message);
        if (b_.successor_steps == 0 || b_.max_level == 0)
            throw std::invalid_argument("run: budgets must be positive");
        if (b_.snapshot_window < 2) throw std::invalid_argument("run: snapshot window too small");
        width_ = std::max<size_t>(p.register_count(), 2);
    }

    RunResult run(Configuration start) {
        if (start.registers.size() > width_ || start.line > p_.size())
            throw std::invalid_argument("run: start configuration does not fit the program");
        start.registers.resize(width_, 0);
        cfg_ = std::move(start);
        now_ = Ordinal(0);
        seg_start_ = Ordinal(0);
        entries_.assign(b_.max_level, {});
        pending_.assign(b_.max_level, Profile::of(cfg_));
        for (auto& e : entries_) e.push_back({Ordinal(0), cfg_, Profile::of(cfg_)});
        reset_segment();

        bool recorded = false;
        while (true) {
            bool halting = cfg_.line >= p_.size() || p_.line(cfg_.line).op == Opcode::Halt;
            if (!recorded) record(now_, cfg_, halting ? TraceEvent::Halt : TraceEvent::Step);
            if (halting) {
                result_.outcome = Halted{reg_or_zero(cfg_, 1), now_};
                break;
            }
            if (steps_used_ >= b_.successor_steps) {
                result_.outcome = Exhausted{steps_used_, deepest_};
                break;
            }
            const Instruction& in = p_.line(cfg_.line);
            Configuration next = step_impl(p_, cfg_, *oracle_);
            ++steps_used_;
            now_ = now_ + Ordinal(1);
            pending_[0].note_step(in);
            pending_[0].fold_config(next);
            cfg_ = std::move(next);
            push_snapshot(cfg_);
            recorded = false;

            auto hit = detect_at_newest();
            if (!hit) continue;
            Ordinal t1_time = seg_start_ + Ordinal(static_cast<uint64_t>(hit->t1));
            Ordinal limit_time =
                Ordinal::limit_jump(t1_time, Ordinal(static_cast<uint64_t>(hit->t2 - hit->t1)));
            if (auto outcome = cascade(1, limit_time, std::move(hit->limit))) {
                result_.outcome = *outcome;
                break;
            }
            reset_segment();
            recorded = true;  // cascade recorded the limit stage
        }
        return std::move(result_);
    }

private:
    struct Hit {
        size_t t1, t2;
        Configuration limit;
    };

    const Program& p_;
    const OraclePtr& oracle_;
    Budgets b_;
    size_t width_ = 2;

    Configuration cfg_;
    Ordinal now_, seg_start_;
    uint64_t steps_used_ = 0;
    uint32_t deepest_ = 0;

    std::vector<Configuration> hist_;
    std::unordered_map<uint64_t, std::vector<size_t>> exact_buckets_;
    std::map<uint32_t, std::vector<size_t>> line_buckets_;

    std::vector<std::vector<LevelEntry>> entries_;  // entries_[l-1] holds level l
    std::vector<Profile> pending_;                  // pending_[l-1]: since last level-l entry

    RunResult result_;
    size_t step_records_ = 0;

    void record(const Ordinal& time, const Configuration& c, TraceEvent ev) {
        if (ev == TraceEvent::Step) {
            if (step_records_ >= b_.trace_step_cap) return;
            ++step_records_;
        }
        result_.trace.records.push_back({time, c.line, c.registers, ev});
    }

    void reset_segment() {
        seg_start_ = now_;
        hist_.clear();
        exact_buckets_.clear();
        line_buckets_.clear();
        push_snapshot(cfg_);
    }

    void push_snapshot(const Configuration& c) {
        if (hist_.size() >= b_.snapshot_window) {
            // Prune in half-window blocks so the index rebuild amortizes.
            size_t keep = b_.snapshot_window / 2;
            size_t drop = hist_.size() - keep;
            hist_.erase(hist_.begin(), hist_.begin() + static_cast<ptrdiff_t>(drop));
            exact_buckets_.clear();
            line_buckets_.clear();
            for (size_t i = 0; i < hist_.size(); ++i) {
                exact_buckets_[config_hash(hist_[i])].push_back(i);
                line_buckets_[hist_[i].line].push_back(i);
            }
        }
        hist_.push_back(c);
        size_t idx = hist_.size() - 1;
        exact_buckets_[config_hash(c)].push_back(idx);
        line_buckets_[c.line].push_back(idx);
    }

    std::optional<Hit> detect_at_newest() {
        size_t t2 = hist_.size() - 1;
        if (t2 == 0) return std::nullopt;
        const Configuration& c = hist_[t2];
        for (size_t t1 : exact_buckets_[config_hash(c)]) {
            if (t1 >= t2) break;
            if (hist_[t1] == c) {
                auto span = std::span<const Configuration>(hist_).subspan(t1, t2 - t1);
                return Hit{t1, t2, exact_limit(span)};
            }
        }
        // Newest candidates first (shortest spans); a bounded number of
        // attempts per step keeps detection linear. A missed pair only
        // delays acceleration until the pattern recurs.
        const auto& bucket = line_buckets_[c.line];
        size_t tries = 0;
        for (size_t i = bucket.size(); i-- > 0 && tries < 24;) {
            size_t t1 = bucket[i];
            if (t1 >= t2) continue;
            ++tries;
            if (auto d = check_drift(p_, oracle_.get(), hist_, t1, t2))
                return Hit{t1, t2, drift_limit(*d, width_)};
        }
        return std::nullopt;
    }

    // Processes the limit stage (time, cfg) at the given level, cascading
    // upward while lassos fire among the level entries. Returns an outcome
    // when the run is decided; otherwise resumes execution at the deepest
    // limit stage reached.
    std::optional<RunOutcome> cascade(uint32_t level, Ordinal time, Configuration c) {
        while (true) {
            deepest_ = std::max(deepest_, level);
            bool halting = c.line >= p_.size() || p_.line(c.line).op == Opcode::Halt;
            if (halting) {
                record(time, c, TraceEvent::Halt);
                return Halted{reg_or_zero(c, 1), time};
            }
            auto& lv = entries_[level - 1];
            Profile m = pending_[level - 1];
            m.fold_config(c);

            // Strong-loop certificate: a previous entry with the same
            // configuration such that nothing between it and now dips below
            // that configuration. The run is then periodic at every higher
            // limit and never halts.
            {
                Profile acc = m;
                for (size_t j = lv.size(); j-- > 0;) {
                    if (lv[j].cfg == c && acc.min_regs == c.registers &&
                        acc.min_line == c.line) {
                        record(time, c, TraceEvent::Certificate);
                        result_.certified_config = c;
                        return NonHalting{level, lv[j].time, time};
                    }
                    acc.fold(lv[j].into);
                }
            }

            record(time, c, TraceEvent::Limit);
            lv.push_back({time, c, m});
            if (lv.size() > b_.snapshot_window)
                lv.erase(lv.begin(), lv.begin() + static_cast<ptrdiff_t>(lv.size() -
                                                                         b_.snapshot_window));
            if (level < b_.max_level) pending_[level].fold(m);
            pending_[level - 1] = Profile::of(c);

            size_t k = lv.size() - 1;
            std::optional<size_t> pair_j;
            Profile period = m;  // fold of entry profiles over (j, k]
            // Exact lasso first: any earlier entry with an equal configuration.
            for (size_t j = 0; j < k; ++j) {
                if (lv[j].cfg == c) {
                    pair_j = j;
                    Profile acc = lv[k].into;
                    for (size_t i = k - 1; i > j; --i) acc.fold(lv[i].into);
                    period = acc;
                    break;
                }
            }
            std::vector<uint64_t> shift(width_, 0);
            if (!pair_j) {
                // Drift lasso between limit entries, earliest pair.
                // Conservative: the period must contain no oracle query, no
                // copy touching a drifting register, and no zero-test on
                // one; drifting registers stay >= 1 throughout.
                Profile acc = lv[k].into;
                for (size_t j = k; j-- > 0;) {
                    if (j < k - 1) acc.fold(lv[j + 1].into);
                    const LevelEntry& e = lv[j];
                    if (e.cfg.line != c.line || acc.any_oracle) continue;
                    bool ok = true, any = false;
                    std::vector<uint64_t> cand(width_, 0);
                    for (size_t i = 0; i < width_ && ok; ++i) {
                        uint64_t a = e.cfg.registers[i], b2 = c.registers[i];
                        if (b2 < a) {
                            ok = false;
                            break;
                        }
                        cand[i] = b2 - a;
                        any |= cand[i] != 0;
                        if (cand[i] > 0) {
                            if (acc.min_regs[i] == 0) ok = false;
                            if (acc.jz_targets.count(static_cast<uint32_t>(i))) ok = false;
                            for (const auto& [s, d] : acc.copy_pairs)
                                if (s == i || d == i) ok = false;
                        }
                    }
                    if (ok && any) {  // keep scanning down: smallest j wins
                        pair_j = j;
                        period = acc;
                        shift = std::move(cand);
                    }
                }
            }
            if (!pair_j) {
                // Resume at this limit stage; lower levels anchor here.
                for (uint32_t l = 1; l < level; ++l) {
                    entries_[l - 1] = {{time, c, Profile::of(c)}};
                    pending_[l - 1] = Profile::of(c);
                }
                cfg_ = std::move(c);
                now_ = time;
                return std::nullopt;
            }
            if (level == b_.max_level) return Exhausted{steps_used_, deepest_};

            Ordinal period_ord = Ordinal::left_difference(lv[*pair_j].time, time);
            Ordinal next_time = Ordinal::limit_jump(lv[*pair_j].time, period_ord);
            Configuration next_cfg;
            next_cfg.line = period.min_line;
            next_cfg.registers.resize(width_);
            for (size_t i = 0; i < width_; ++i)
                next_cfg.registers[i] = shift[i] > 0 ? 0 : period.min_regs[i];
            ++level;
            time = std::move(next_time);
            c = std::move(next_cfg);
        }
    }
};

}  // namespace

Configuration step(const Program& p, const Configuration& c, const Oracle& o) {
    if (c.line >= p.size() || p.line(c.line).op == Opcode::Halt)
        throw std::invalid_argument("step: configuration is halted");
    if (c.registers.size() < p.register_count())
        throw std::invalid_argument("step: register vector too short");
    return step_impl(p, c, o);
}

std::optional<Lasso> detect_lasso(const Program& p, const Oracle& o,
                                  std::span<const Configuration> history) {
    for (size_t t2 = 1; t2 < history.size(); ++t2) {
        for (size_t t1 = 0; t1 < t2; ++t1) {
            if (history[t1] == history[t2])
                return Lasso{t1, t2, LassoKind::Exact,
                             std::vector<uint64_t>(history[t1].registers.size(), 0)};
        }
        for (size_t t1 = 0; t1 < t2; ++t1) {
            if (auto d = check_drift(p, &o, history, t1, t2))
                return Lasso{t1, t2, LassoKind::Drift, d->shift};
        }
    }
    return std::nullopt;
}

MinProfile min_profile(std::span<const Configuration> span) {
    if (span.empty()) throw std::invalid_argument("min_profile: empty span");
    Configuration m = exact_limit(span);
    return MinProfile{std::move(m.registers), m.line};
}

Configuration limit_config(std::span<const Configuration> span) {
    if (span.empty()) throw std::invalid_argument("limit_config: empty span");
    return exact_limit(span);
}

Configuration limit_config(const Program& p, std::span<const Configuration> history,
                           const Lasso& lasso) {
    if (lasso.t2 >= history.size() || lasso.t1 >= lasso.t2)
        throw std::invalid_argument("limit_config: bad lasso indices");
    if (lasso.kind == LassoKind::Exact)
        return exact_limit(history.subspan(lasso.t1, lasso.t2 - lasso.t1));
    // Re-derive the per-position shifts; the span was already certified,
    // so the oracle progression checks are skipped.
    auto d = check_drift(p, nullptr, history, lasso.t1, lasso.t2);
    if (!d) throw std::invalid_argument("limit_config: span is not a drift lasso");
    return drift_limit(*d, history[lasso.t1].registers.size());
}

RunResult run(const Program& p, const OraclePtr& o, uint64_t input, const Budgets& b) {
    Configuration start;
    start.line = 0;
    start.registers.assign(std::max<size_t>(p.register_count(), 2), 0);
    start.registers[1] = input;
    return Engine(p, o, b).run(std::move(start));
}

RunResult run_from(const Program& p, const OraclePtr& o, Configuration start,
                   const Budgets& b) {
    return Engine(p, o, b).run(std::move(start));
}

std::vector<RunOutcome> classify_halting(const Program& p, const OraclePtr& o,
                                         const std::vector<uint64_t>& inputs,
                                         const Budgets& b) {
    std::vector<RunOutcome> out;
    out.reserve(inputs.size());
    for (uint64_t i : inputs) out.push_back(run(p, o, i, b).outcome);
    return out;
}

std::string to_string(const RunOutcome& outcome) {
    if (const auto* h = std::get_if<Halted>(&outcome))
        return "Halted output=" + std::to_string(h->output) + " time=" + h->time.to_string();
    if (const auto* n = std::get_if<NonHalting>(&outcome))
        return "NonHalting level=" + std::to_string(n->level) + " t1=" + n->t1.to_string() +
               " t2=" + n->t2.to_string();
    const auto& e = std::get<Exhausted>(outcome);
    return "Exhausted steps=" + std::to_string(e.steps_used) +
           " deepest_level=" + std::to_string(e.deepest_level);
}

void Trace::write_jsonl(std::ostream& out) const {
    for (const TraceRecord& r : records) {
        nlohmann::json j;
        switch (r.event) {
            case TraceEvent::Step: j["event"] = "step"; break;
            case TraceEvent::Limit: j["event"] = "limit"; break;
            case TraceEvent::Halt: j["event"] = "halt"; break;
            case TraceEvent::Certificate: j["event"] = "certificate"; break;
        }
        j["line"] = r.line;
        j["registers"] = r.registers;
        j["time"] = r.time.to_string();
        out << j.dump() << '\n';
    }
}

}  // namespace itrm
