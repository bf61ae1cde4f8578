#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "itrm/oracle.hpp"
#include "support/generators.hpp"

using namespace itrm;

TEST_CASE("query per variant") {
    // 2 = 2*1 and 1 is in the left component
    CHECK(Oracle::join(Oracle::finite({1}), Oracle::finite({}))->query(2) == 1);
    CHECK(Oracle::complement(Oracle::finite({0}))->query(0) == 0);
    // periodic word 1 0 1 0 1 ...
    auto per = Oracle::periodic({1}, {0, 1});
    CHECK(per->query(4) == 1);
    CHECK(per->query(0) == 1);
    CHECK(per->query(1) == 0);
    CHECK(Oracle::cofinite({3})->query(3) == 0);
    CHECK(Oracle::cofinite({3})->query(4) == 1);
    CHECK(Oracle::structure_code({2, 5}, "s")->query(5) == 1);
}

TEST_CASE("purity: repeated queries are stable") {
    auto o = parse_oracle_spec("join(periodic[1|01],compl(finite{2,4}))");
    for (uint64_t n = 0; n < 200; ++n) CHECK(o->query(n) == o->query(n));
}

TEST_CASE("join split laws") {
    auto nothing = Oracle::join(Oracle::finite({}), Oracle::finite({}));
    for (uint64_t n = 0; n < 100; ++n) CHECK(nothing->query(n) == 0);
    auto j0 = Oracle::join(Oracle::finite({0}), Oracle::finite({5}));
    CHECK(j0->query(0) == 1);
    CHECK(j0->query(1) == Oracle::finite({5})->query(0));

    gen::Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::set<uint64_t> xs, ys;
        for (int i = 0; i < 8; ++i) xs.insert(gen::pick(rng, 0, 600));
        for (int i = 0; i < 8; ++i) ys.insert(gen::pick(rng, 0, 600));
        auto x = Oracle::finite(xs);
        auto y = Oracle::finite(ys);
        auto j = Oracle::join(x, y);
        for (uint64_t n = 0; n < 1000; ++n) {
            CHECK(j->query(2 * n) == x->query(n));
            CHECK(j->query(2 * n + 1) == y->query(n));
        }
    }
}

TEST_CASE("complement involution") {
    auto o = Oracle::periodic({0, 1}, {1, 1, 0});
    auto cc = Oracle::complement(Oracle::complement(o));
    for (uint64_t n = 0; n < 300; ++n) CHECK(cc->query(n) == o->query(n));
}

TEST_CASE("spec text round trips") {
    for (const char* text : {"finite{1,5,9}", "cofinite{0}", "periodic[1|01]",
                             "join(finite{1},cofinite{})", "compl(finite{})",
                             "ordorder(w^1*1)", "periodic[|10]"}) {
        auto o = parse_oracle_spec(text);
        CHECK(o->to_string() == text);
        CHECK(parse_oracle_spec(o->to_string())->to_string() == text);
    }
}

TEST_CASE("spec text errors") {
    CHECK_THROWS_AS(parse_oracle_spec("finite{1,"), std::invalid_argument);
    CHECK_THROWS_AS(parse_oracle_spec("periodic[1|]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_oracle_spec("nonsense{}"), std::invalid_argument);
    CHECK_THROWS_AS(parse_oracle_spec("finite{1} trailing"), std::invalid_argument);
    CHECK_THROWS_AS(parse_oracle_spec("code(x.struct)"), std::invalid_argument);
    CHECK_THROWS_AS(Oracle::periodic({1}, {}), std::invalid_argument);
}

TEST_CASE("proves_constant") {
    auto f2 = Oracle::finite({2});
    CHECK(f2->proves_constant(3, 1, 0));
    CHECK_FALSE(f2->proves_constant(1, 1, 0));  // the progression hits 2
    CHECK_FALSE(f2->proves_constant(3, 1, 1));  // finite sets never prove 1
    CHECK(f2->proves_constant(0, 3, 0));        // 0,3,6,... misses 2
    CHECK_FALSE(f2->proves_constant(0, 2, 0));

    auto co = Oracle::cofinite({5});
    CHECK(co->proves_constant(6, 1, 1));
    CHECK_FALSE(co->proves_constant(5, 1, 1));
    CHECK_FALSE(co->proves_constant(6, 1, 0));

    auto per = Oracle::periodic({}, {1, 0});
    CHECK(per->proves_constant(0, 2, 1));
    CHECK(per->proves_constant(1, 2, 0));
    CHECK_FALSE(per->proves_constant(0, 1, 1));
    auto perp = Oracle::periodic({0}, {1});
    CHECK(perp->proves_constant(1, 1, 1));
    CHECK_FALSE(perp->proves_constant(0, 1, 1));  // prefix bit differs

    auto j = Oracle::join(Oracle::finite({}), Oracle::cofinite({}));
    CHECK(j->proves_constant(0, 2, 0));   // even positions: left, all 0
    CHECK(j->proves_constant(1, 2, 1));   // odd positions: right, all 1
    CHECK_FALSE(j->proves_constant(0, 1, 0));  // odd-step mix

    auto cj = Oracle::complement(j);
    CHECK(cj->proves_constant(0, 2, 1));

    CHECK_FALSE(Oracle::ordinal_order(Ordinal(1))->proves_constant(0, 1, 0));

    // Whatever is proved must hold on a long sampled prefix.
    gen::Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::set<uint64_t> s;
        for (int i = 0; i < 5; ++i) s.insert(gen::pick(rng, 0, 60));
        auto o = Oracle::join(Oracle::finite(s), Oracle::periodic({1}, {0, 1, 1}));
        uint64_t start = gen::pick(rng, 0, 40);
        uint64_t step = gen::pick(rng, 1, 6);
        for (uint8_t expected : {0, 1}) {
            if (o->proves_constant(start, step, expected)) {
                for (uint64_t k = 0; k < 300; ++k)
                    REQUIRE(o->query(start + k * step) == expected);
            }
        }
    }
}
