#include <gtest/gtest.h>

#include <livegen/generator.hpp>
#include <livegen/liveness.hpp>
#include <livegen/rng.hpp>

#include "support.hpp"

using namespace livegen;

namespace {

std::vector<Variable> small_vars()
{
    std::vector<Variable> vs;
    for (std::uint32_t i = 0; i < 4; ++i)
        vs.push_back({{"x" + std::to_string(i), i}, types::i32, VarKind::Local});
    return vs;
}

ExprPtr random_expr(Rng& rng, const std::vector<Variable>& vs)
{
    ExprPtr e = rng.chance(0.3) ? build::lit(static_cast<std::int64_t>(rng.below(5))) : build::ref(rng.pick(vs));
    if (rng.chance(0.5))
        e = build::binary(BinaryOp::Add, e, build::ref(rng.pick(vs)));
    return e;
}

/// Arbitrary (not necessarily fully live) loop-free or looping statement
/// over four variables; used for property checks of the transfer function.
StmtPtr random_stmt(Rng& rng, const std::vector<Variable>& vs, int depth)
{
    std::vector<StmtPtr> stmts;
    int n = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < n; ++k) {
        double r = rng.unit();
        if (depth > 0 && r < 0.2)
            stmts.push_back(build::if_else(build::binary(BinaryOp::Lt, random_expr(rng, vs), build::lit(3)),
                                           random_stmt(rng, vs, depth - 1), random_stmt(rng, vs, depth - 1)));
        else if (depth > 0 && r < 0.4)
            stmts.push_back(build::while_loop(build::binary(BinaryOp::Lt, random_expr(rng, vs), build::lit(3)),
                                              random_stmt(rng, vs, depth - 1)));
        else
            stmts.push_back(build::assign(rng.pick(vs), random_expr(rng, vs)));
    }
    return build::block(stmts);
}

LiveSet subset(const std::vector<Variable>& vs, unsigned mask)
{
    LiveSet s;
    for (std::size_t i = 0; i < vs.size(); ++i)
        if (mask & (1u << i))
            s.insert(vs[i].id);
    return s;
}

} // namespace

TEST(Liveness, FibonacciDerivation)
{
    FunctionDef f = fixtures::fibonacci();
    LivenessResult r = check_fully_live(f);
    ASSERT_TRUE(r.ok()) << r.violations.front().rule;
    const VarId n = f.find("n")->id, a = f.find("a")->id, b = f.find("b")->id, t = f.find("t")->id;

    EXPECT_EQ(r.live_in, LiveSet{n});
    const LivenessTriple* loop = r.triple_at(fixtures::fibonacci_loop_path);
    ASSERT_TRUE(loop);
    EXPECT_EQ(loop->live_in, (LiveSet{a, b, n}));
    EXPECT_EQ(loop->live_out, LiveSet{a});

    StmtPath body = fixtures::fibonacci_loop_path;
    body.push_back(0);
    const LivenessTriple* body_triple = r.triple_at(body);
    ASSERT_TRUE(body_triple);
    EXPECT_EQ(body_triple->live_out, (LiveSet{a, b, n}));

    // Inner triples of the loop body as printed in the derivation.
    StmtPath p = body;
    p.push_back(0);
    EXPECT_EQ(r.triple_at(p)->live_out, (LiveSet{b, n, t}));
    p.back() = 1;
    p.push_back(0);
    EXPECT_EQ(r.triple_at(p)->live_out, (LiveSet{a, n, t}));
    p.back() = 1;
    p.push_back(0);
    EXPECT_EQ(r.triple_at(p)->live_in, (LiveSet{a, n, t}));
    EXPECT_EQ(r.triple_at(p)->live_out, (LiveSet{a, b, n}));
}

TEST(Liveness, DeadStoreRejectedAtFirstAssignment)
{
    LivenessResult r = check_fully_live(fixtures::dead_store());
    ASSERT_EQ(r.violations.size(), 1u);
    EXPECT_EQ(r.violations[0].rule, "assign-target-dead");
    EXPECT_EQ(r.violations[0].location, StmtPath{0});
}

TEST(Liveness, EmptyLiveSetRules)
{
    using namespace build;
    const Variable x{{"x", 0}, types::i32, VarKind::Local};
    // x = 1; <empty>; return x: the skip sees {x} and is fine.
    EXPECT_TRUE(live_in(*block({assign(x, lit(1)), ret(x)}), {}).ok());

    // A return with something still live after it.
    auto has = [](const LivenessResult& r, const std::string& rule) {
        for (const auto& v : r.violations)
            if (v.rule == rule)
                return true;
        return false;
    };
    LivenessResult r = live_in(*ret(x), LiveSet{x.id});
    EXPECT_TRUE(has(r, "return-liveout-nonempty"));

    // A sequence whose middle set is empty: x = 1 kills everything before it.
    const Variable y{{"y", 1}, types::i32, VarKind::Local};
    r = live_in(*seq(assign(y, lit(2)), seq(assign(x, lit(1)), ret(x))), {});
    EXPECT_TRUE(has(r, "empty-live-set-sequence"));

    // A loop nothing is live after.
    r = live_in(*while_loop(binary(BinaryOp::Lt, ref(x), lit(3)), assign(x, lit(1))), {});
    EXPECT_TRUE(has(r, "while-liveout-empty"));
}

TEST(Liveness, WhileLiveInIncludesConditionVariables)
{
    using namespace build;
    const Variable x{{"x", 0}, types::i32, VarKind::Local};
    const Variable y{{"y", 1}, types::i32, VarKind::Local};
    // while (x < 3) { x = y; } with y live after: x is read by the
    // condition before the body first redefines it.
    StmtPtr w = while_loop(binary(BinaryOp::Lt, ref(x), lit(3)), assign(x, ref(y)));
    EXPECT_EQ(transfer(*w, LiveSet{y.id}), (LiveSet{x.id, y.id}));
}

TEST(Liveness, TransferIsMonotone)
{
    auto vs = small_vars();
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        StmtPtr s = random_stmt(rng, vs, 2);
        for (unsigned lo = 0; lo < 16; ++lo)
            for (unsigned hi = lo; hi < 16; ++hi)
                if ((lo & hi) == lo) {
                    ASSERT_TRUE(transfer(*s, subset(vs, lo)).subset_of(transfer(*s, subset(vs, hi))));
                }
    }
}

TEST(Liveness, LoopSolutionIsLeastFixedPoint)
{
    // Brute force over all 16 subsets: the loop's body live-out must be a
    // fixed point of B -> out | FV(c) | f_body(B) and contained in every
    // other fixed point.
    auto vs = small_vars();
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        ExprPtr cond = build::binary(BinaryOp::Lt, random_expr(rng, vs), build::lit(3));
        StmtPtr body = random_stmt(rng, vs, 1);
        StmtPtr loop = build::while_loop(cond, body);
        LiveSet out = subset(vs, static_cast<unsigned>(rng.below(16)) | 1u);

        LivenessResult r = live_in(*loop, out);
        const LivenessTriple* bt = r.triple_at({0});
        ASSERT_TRUE(bt);
        const LiveSet base = out | free_vars(*cond);
        auto step = [&](const LiveSet& b) { return base | transfer(*body, b); };
        ASSERT_EQ(step(bt->live_out), bt->live_out);
        for (unsigned mask = 0; mask < 16; ++mask) {
            LiveSet candidate = subset(vs, mask);
            if (step(candidate) == candidate) {
                ASSERT_TRUE(bt->live_out.subset_of(candidate));
            }
        }
    }
}

TEST(Liveness, GeneratedLoopsMatchTransfer)
{
    // The recorded live-in of every statement equals the pure transfer
    // function applied to its recorded live-out.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GeneratorConfig cfg;
        cfg.seed = seed;
        FunctionDef f = generate_function(cfg);
        LivenessResult r = check_fully_live(f);
        ASSERT_TRUE(r.ok());
        for (const auto& t : r.triples)
            ASSERT_EQ(transfer(*t.statement, t.live_out), t.live_in) << to_string(t.path);
    }
}
