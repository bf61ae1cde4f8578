#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "itrm/vm.hpp"
#include "support/generators.hpp"
#include "support/reference_vm.hpp"

using namespace itrm;

namespace {
const OraclePtr kEmpty = Oracle::finite({});

Configuration cfg(uint32_t line, std::vector<uint64_t> regs) {
    return Configuration{line, std::move(regs)};
}
}  // namespace

TEST_CASE("step") {
    Program p = parse_program("INC r0\nHALT");
    auto c1 = step(p, cfg(0, {0, 0}), *kEmpty);
    CHECK(c1 == cfg(1, {1, 0}));

    Program jz = parse_program("JZ r0 0\nHALT");
    CHECK(step(jz, cfg(0, {0, 0}), *kEmpty).line == 0);
    CHECK(step(jz, cfg(0, {3, 0}), *kEmpty).line == 1);

    Program q = parse_program("ORACLE r0\nHALT");
    auto oracle7 = Oracle::finite({7});
    CHECK(step(q, cfg(0, {7, 0}), *oracle7) == cfg(1, {1, 0}));
    CHECK(step(q, cfg(0, {6, 0}), *oracle7) == cfg(1, {0, 0}));

    Program d = parse_program("DEC r0\nHALT");
    CHECK(step(d, cfg(0, {0, 0}), *kEmpty) == cfg(1, {0, 0}));  // floor at zero

    CHECK_THROWS_AS(step(p, cfg(1, {0, 0}), *kEmpty), std::invalid_argument);
}

TEST_CASE("limit_config of exact spans") {
    auto c = cfg(2, {3, 1});
    std::vector<Configuration> constant{c, c, c};
    CHECK(limit_config(constant) == c);

    std::vector<Configuration> span{cfg(2, {3, 0}), cfg(3, {4, 0}), cfg(4, {3, 0}),
                                    cfg(3, {5, 0})};
    Configuration lim = limit_config(span);
    CHECK(lim.line == 2);
    CHECK(lim.registers[0] == 3);
}

TEST_CASE("detect_lasso exact") {
    Program p = parse_program("JZ r0 0");
    std::vector<Configuration> hist{cfg(0, {0}), cfg(0, {0})};
    auto l = detect_lasso(p, *kEmpty, hist);
    REQUIRE(l.has_value());
    CHECK(l->kind == LassoKind::Exact);
    CHECK(l->t1 == 0);
    CHECK(l->t2 == 1);
}

TEST_CASE("detect_lasso drift on the inc-loop") {
    Program p = parse_program("loop: INC r0\nJZ r1 loop\nHALT");
    auto hist = ref::ref_trajectory(p, *kEmpty, ref::initial_config(p, 0), 40);
    auto l = detect_lasso(p, *kEmpty, hist);
    REQUIRE(l.has_value());
    CHECK(l->kind == LassoKind::Drift);
    CHECK(l->shift == std::vector<uint64_t>{1, 0});
    Configuration lim = limit_config(p, hist, *l);
    CHECK(lim == cfg(0, {0, 0}));
}

TEST_CASE("detect_lasso declines zero-tested growing registers") {
    // r0 grows every period and is zero-tested: the drift conditions fail.
    Program p = parse_program(
        "loop: INC r0\n"
        "JZ r0 3\n"
        "JZ r1 loop\n"
        "HALT");
    auto hist = ref::ref_trajectory(p, *kEmpty, ref::initial_config(p, 0), 60);
    CHECK_FALSE(detect_lasso(p, *kEmpty, hist).has_value());
}

TEST_CASE("drift acceleration matches reference simulation") {
    Program p = parse_program("loop: INC r0\nJZ r1 loop\nHALT");
    auto hist = ref::ref_trajectory(p, *kEmpty, ref::initial_config(p, 0), 60);
    auto l = detect_lasso(p, *kEmpty, hist);
    REQUIRE(l.has_value());
    size_t period = l->t2 - l->t1;
    // non-drifting registers match the reference minimum over 3 periods
    Configuration lim = limit_config(p, hist, *l);
    Configuration refmin = ref::min_over(hist, l->t1, l->t1 + 3 * period);
    CHECK(lim.line == refmin.line);
    CHECK(lim.registers[1] == refmin.registers[1]);
    // the drifting register exceeds any bound across periods
    for (size_t n = 1; n <= 5; ++n)
        CHECK(hist[l->t1 + n * period].registers[0] ==
              hist[l->t1].registers[0] + n * l->shift[0]);
}

TEST_CASE("run: trivial halts") {
    Program halt = parse_program("HALT");
    auto r = run(halt, kEmpty, 0);
    CHECK(std::get<Halted>(r.outcome).output == 0);
    CHECK(std::get<Halted>(r.outcome).time == Ordinal(0));

    // implicit halt falling off the end
    Program off = parse_program("INC r0");
    auto r2 = run(off, kEmpty, 9);
    CHECK(std::get<Halted>(r2.outcome).output == 9);
    CHECK(std::get<Halted>(r2.outcome).time == Ordinal(1));
}

TEST_CASE("run: output preserves input when register 1 is untouched") {
    Program p = parse_program("INC r0\nDEC r0\nHALT");
    auto r = run(p, kEmpty, 7);
    CHECK(std::get<Halted>(r.outcome).output == 7);
}

TEST_CASE("run: inc-loop certifies non-halting") {
    Program p = parse_program("loop: INC r0\nJZ r1 loop\nHALT");
    auto r = run(p, kEmpty, 0, {.successor_steps = 10000});
    REQUIRE(std::holds_alternative<NonHalting>(r.outcome));
    const auto& nh = std::get<NonHalting>(r.outcome);
    CHECK(nh.level <= 2);
    CHECK(nh.t1 < nh.t2);
    REQUIRE(r.certified_config.has_value());
    // replaying from the certified configuration reproduces the certificate
    auto replay = run_from(p, kEmpty, *r.certified_config);
    REQUIRE(std::holds_alternative<NonHalting>(replay.outcome));
    CHECK(*replay.certified_config == *r.certified_config);
    CHECK(Ordinal::left_difference(std::get<NonHalting>(replay.outcome).t1,
                                   std::get<NonHalting>(replay.outcome).t2) ==
          Ordinal::left_difference(nh.t1, nh.t2));
}

TEST_CASE("run: oracle-dependent halting") {
    Program p = parse_program("ORACLE r1\nHALT");
    CHECK(std::get<Halted>(run(p, Oracle::finite({5}), 5).outcome).output == 1);
    CHECK(std::get<Halted>(run(p, Oracle::finite({5}), 4).outcome).output == 0);
}

TEST_CASE("classify_halting") {
    Program halt = parse_program("HALT");
    auto rs = classify_halting(halt, kEmpty, {0, 1, 2, 3, 4});
    for (const auto& r : rs) CHECK(std::holds_alternative<Halted>(r));

    // the loop tests a register that stays zero, so every input diverges
    Program pure = parse_program("loop: INC r0\nJZ r2 loop\nHALT");
    auto rs2 = classify_halting(pure, kEmpty, {0, 1, 2, 3, 4});
    for (const auto& r : rs2) CHECK(std::holds_alternative<NonHalting>(r));

    // halts iff the input is even
    Program parity = parse_program(
        "loop: JZ r1 yes\n"
        "DEC r1\n"
        "JZ r1 spin\n"
        "DEC r1\n"
        "JZ r0 loop\n"
        "yes: HALT\n"
        "spin: JZ r0 spin\n");
    auto rs3 = classify_halting(parity, kEmpty, {0, 1, 2, 3});
    CHECK(std::holds_alternative<Halted>(rs3[0]));
    CHECK(std::holds_alternative<NonHalting>(rs3[1]));
    CHECK(std::holds_alternative<Halted>(rs3[2]));
    CHECK(std::holds_alternative<NonHalting>(rs3[3]));
}

TEST_CASE("budgets") {
    Program loop = parse_program("loop: INC r0\nJZ r2 loop\nHALT");
    auto r = run(loop, kEmpty, 0, {.successor_steps = 3, .max_level = 1,
                                   .snapshot_window = 2});
    CHECK(std::holds_alternative<Exhausted>(r.outcome));
    CHECK(std::get<Exhausted>(r.outcome).steps_used == 3);
    CHECK_THROWS_AS(run(loop, kEmpty, 0, {.successor_steps = 0}), std::invalid_argument);
    CHECK_THROWS_AS(run(loop, kEmpty, 0, {.successor_steps = 10, .max_level = 0}),
                    std::invalid_argument);
    Program bad({Instruction::jz(0, 9)}, 1);
    CHECK_THROWS_AS(run(bad, kEmpty, 0), std::invalid_argument);
}

TEST_CASE("trace: strictly increasing timestamps, determinism, export") {
    // A finite prefix, then a spin: the first limit stage differs from the
    // start (a plain limit record), the second certifies.
    Program p = parse_program("INC r0\nspin: JZ r2 spin");
    auto r1 = run(p, kEmpty, 1, {.successor_steps = 5000});
    auto r2 = run(p, kEmpty, 1, {.successor_steps = 5000});
    REQUIRE(!r1.trace.records.empty());
    for (size_t i = 0; i + 1 < r1.trace.records.size(); ++i)
        CHECK(r1.trace.records[i].time < r1.trace.records[i + 1].time);
    std::ostringstream a, b;
    r1.trace.write_jsonl(a);
    r2.trace.write_jsonl(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("\"event\":\"limit\"") != std::string::npos);
    CHECK(a.str().find("\"event\":\"certificate\"") != std::string::npos);

    // the step cap keeps step records bounded but never drops limit stages
    auto r3 = run(p, kEmpty, 1, {.successor_steps = 5000, .max_level = 3, .snapshot_window = 4096,
                                 .trace_step_cap = 4});
    size_t steps = 0, limits = 0;
    for (const auto& rec : r3.trace.records) {
        steps += rec.event == TraceEvent::Step;
        limits += rec.event != TraceEvent::Step;
    }
    CHECK(steps <= 4);
    CHECK(limits >= 1);
}

TEST_CASE("acceleration soundness on random exact lassos") {
    gen::Rng rng(2025);
    int found = 0;
    while (found < 30) {
        Program p = gen::random_program(rng, 3, 6);
        auto hist = ref::ref_trajectory(p, *kEmpty, ref::initial_config(p, 2), 120);
        if (ref::halted(p, hist.back())) continue;
        auto l = detect_lasso(p, *kEmpty, hist);
        if (!l || l->kind != LassoKind::Exact) continue;
        size_t period = l->t2 - l->t1;
        if (l->t1 + 3 * period >= hist.size()) continue;
        Configuration lim =
            limit_config(std::span<const Configuration>(hist).subspan(l->t1, period));
        CHECK(lim == ref::min_over(hist, l->t1, l->t1 + 3 * period));
        ++found;
    }
}

TEST_CASE("accelerated runs agree with plain simulation") {
    // Differential check against the reference interpreter: a finite-time
    // halt must be reproduced step-exactly; a transfinite halt or a
    // non-halting certificate means the plain run never halts.
    gen::Rng rng(60902);
    const size_t kRefSteps = 5000;
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        Program p = gen::random_program(rng, 4, 8, true);
        OraclePtr o = gen::random_oracle(rng);
        uint64_t input = gen::pick(rng, 0, 4);
        auto r = run(p, o, input, {.successor_steps = 20000});
        auto traj = ref::ref_trajectory(p, *o, ref::initial_config(p, input), kRefSteps);
        bool ref_halts = ref::halted(p, traj.back());
        if (const auto* h = std::get_if<Halted>(&r.outcome)) {
            if (h->time.is_finite()) {
                uint64_t t = h->time.coefficient_of(0);
                REQUIRE(ref_halts);
                REQUIRE(traj.size() == t + 1);
                CHECK(traj.back().registers[1] == h->output);
            } else {
                CHECK_FALSE(ref_halts);
            }
            ++checked;
        } else if (std::holds_alternative<NonHalting>(r.outcome)) {
            CHECK_FALSE(ref_halts);
            ++checked;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("run determinism across engines") {
    gen::Rng rng(4096);
    for (int i = 0; i < 40; ++i) {
        Program p = gen::random_program(rng, 3, 7);
        auto a = run(p, kEmpty, i % 5, {.successor_steps = 2000});
        auto b = run(p, kEmpty, i % 5, {.successor_steps = 2000});
        CHECK(to_string(a.outcome) == to_string(b.outcome));
        CHECK(a.trace.records.size() == b.trace.records.size());
    }
}
