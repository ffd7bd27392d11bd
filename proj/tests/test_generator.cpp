#include <gtest/gtest.h>

#include <functional>
#include <set>

#include <livegen/cfg_liveness.hpp>
#include <livegen/emitter.hpp>
#include <livegen/generator.hpp>
#include <livegen/rng.hpp>
#include <livegen/well_formed.hpp>

using namespace livegen;

namespace {

GeneratorConfig seeded(std::uint64_t seed)
{
    GeneratorConfig cfg;
    cfg.seed = seed;
    return cfg;
}

void walk(const Statement& s, int depth, const std::function<void(const Statement&, int)>& visit)
{
    visit(s, depth);
    if (const auto* q = s.as<Sequence>()) {
        walk(*q->first, depth, visit);
        walk(*q->second, depth, visit);
    } else if (const auto* i = s.as<If>()) {
        walk(*i->then_branch, depth + 1, visit);
        walk(*i->else_branch, depth + 1, visit);
    } else if (const auto* w = s.as<While>()) {
        walk(*w->body, depth + 1, visit);
    }
}

void walk_expr(const Expression& e, const std::function<void(const Expression&)>& visit)
{
    visit(e);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Unary> || std::is_same_v<T, Cast>)
                walk_expr(*n.operand, visit);
            else if constexpr (std::is_same_v<T, Binary>) {
                walk_expr(*n.lhs, visit);
                walk_expr(*n.rhs, visit);
            } else if constexpr (std::is_same_v<T, Index>)
                walk_expr(*n.index, visit);
        },
        e.node);
}

void for_each_expr(const Statement& s, const std::function<void(const Expression&)>& visit)
{
    walk(s, 0, [&](const Statement& st, int) {
        if (const auto* a = st.as<Assign>())
            walk_expr(*a->rhs, visit);
        else if (const auto* i = st.as<If>())
            walk_expr(*i->cond, visit);
        else if (const auto* w = st.as<While>())
            walk_expr(*w->cond, visit);
        else if (const auto* fm = st.as<ForMapReduce>())
            walk_expr(*fm->element, visit);
    });
}

} // namespace

TEST(Rng, DeterministicAndInRange)
{
    Rng a(5), b(5), c(6);
    EXPECT_EQ(a.next(), b.next());
    EXPECT_NE(a.next(), c.next());
    Rng r(1);
    for (int k = 0; k < 10000; ++k) {
        EXPECT_LT(r.below(7), 7u);
        std::int64_t v = r.range(-3, 3);
        EXPECT_GE(v, -3);
        EXPECT_LE(v, 3);
        double u = r.unit();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
    EXPECT_THROW(r.below(0), std::invalid_argument);
}

TEST(Rng, WeightedRespectsZeroWeights)
{
    Rng r(2);
    const unsigned w[] = {0, 3, 0, 1};
    std::size_t counts[4] = {};
    for (int k = 0; k < 4000; ++k)
        ++counts[r.weighted(w)];
    EXPECT_EQ(counts[0], 0u);
    EXPECT_EQ(counts[2], 0u);
    EXPECT_GT(counts[1], counts[3] * 2);
    const unsigned zero[] = {0, 0};
    EXPECT_EQ(r.weighted(zero), 2u);
}

TEST(Generator, SameSeedSameFunction)
{
    for (std::uint64_t seed : {0ull, 1ull, 42ull, 123456789ull}) {
        std::string a = emit_function(generate_function(seeded(seed)));
        std::string b = emit_function(generate_function(seeded(seed)));
        EXPECT_EQ(a, b);
    }
    EXPECT_NE(emit_function(generate_function(seeded(3))), emit_function(generate_function(seeded(4))));
}

TEST(Generator, OutputIsWellFormedAndFullyLive)
{
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        FunctionDef f = generate_function(seeded(seed));
        auto wf = well_formed(f);
        ASSERT_TRUE(wf.empty()) << seed << ": " << wf.front().rule << " at " << wf.front().location;
        LivenessResult r = check_fully_live(f);
        ASSERT_TRUE(r.ok()) << seed << ": " << r.violations.front().rule;
        ASSERT_TRUE(find_dead_assignments(f).empty()) << seed;
        ASSERT_TRUE(uninitialized_reads(f).empty()) << seed;
    }
}

TEST(Generator, StatementBudgetRespected)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GeneratorConfig cfg = seeded(seed);
        cfg.allow_loops = false; // loops add forced statements outside the budget
        cfg.max_total_stmts = 7;
        FunctionDef f = generate_function(cfg);
        int counted = 0;
        walk(*f.body, 0, [&](const Statement& s, int) { counted += s.as<Assign>() || s.as<If>(); });
        EXPECT_LE(counted, 7) << seed;
    }
}

TEST(Generator, NestingDepthRespected)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GeneratorConfig cfg = seeded(seed);
        cfg.max_stmt_depth = 2;
        FunctionDef f = generate_function(cfg);
        int deepest = 0;
        walk(*f.body, 0, [&](const Statement&, int d) { deepest = std::max(deepest, d); });
        EXPECT_LE(deepest, 2) << seed;
    }
}

TEST(Generator, FeatureFlagsRespected)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GeneratorConfig cfg = seeded(seed);
        cfg.type_universe = TypeUniverse::IntOnly;
        cfg.allow_division = false;
        cfg.allow_bitwise = false;
        cfg.allow_loops = false;
        FunctionDef f = generate_function(cfg);
        for (const Variable& v : f.all_variables())
            EXPECT_TRUE(v.type.is_integer()) << v.id.name;
        walk(*f.body, 0, [&](const Statement& s, int) {
            EXPECT_FALSE(s.as<While>());
            EXPECT_FALSE(s.as<ForMapReduce>());
        });
        for_each_expr(*f.body, [&](const Expression& e) {
            if (const auto* b = std::get_if<Binary>(&e.node)) {
                EXPECT_FALSE(is_division(b->op));
                EXPECT_FALSE(is_bitwise(b->op));
            }
            if (const auto* u = std::get_if<Unary>(&e.node)) {
                EXPECT_NE(u->op, UnaryOp::BitNot);
            }
            EXPECT_TRUE(type_of(e).is_integer());
        });
    }
}

TEST(Generator, FloatOnlyUsesFloatingVariables)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GeneratorConfig cfg = seeded(seed);
        cfg.type_universe = TypeUniverse::FloatOnly;
        FunctionDef f = generate_function(cfg);
        for (const Variable& v : f.all_variables())
            if (v.kind != VarKind::Global && v.kind != VarKind::LoopIndex) {
                EXPECT_TRUE(v.type.is_float()) << v.id.name;
            }
        EXPECT_TRUE(check_fully_live(f).ok());
    }
}

TEST(Generator, LoopBodiesEndByAssigningAConditionVariable)
{
    int loops = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        FunctionDef f = generate_function(seeded(seed));
        walk(*f.body, 0, [&](const Statement& s, int) {
            const auto* w = s.as<While>();
            if (!w)
                return;
            ++loops;
            auto stmts = flatten(w->body);
            ASSERT_FALSE(stmts.empty());
            const auto* last = stmts.back()->as<Assign>();
            ASSERT_TRUE(last);
            EXPECT_TRUE(free_vars(*w->cond).contains(last->target));
        });
    }
    EXPECT_GT(loops, 20);
}

TEST(Generator, GuardsOnDivisionAndShifts)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        FunctionDef f = generate_function(seeded(seed));
        for_each_expr(*f.body, [&](const Expression& e) {
            const auto* b = std::get_if<Binary>(&e.node);
            if (!b)
                return;
            if (is_division(b->op)) {
                EXPECT_TRUE(detail::is_division_guard(*b->rhs));
            }
            if (is_shift(b->op)) {
                EXPECT_TRUE(detail::is_shift_clamp(*b->rhs, type_of(*b->lhs).width));
            }
        });
    }
}

TEST(Generator, ConfigValidation)
{
    GeneratorConfig cfg;
    cfg.max_block_stmts = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);

    cfg = GeneratorConfig{};
    cfg.fresh_var_prob = 1.5;
    EXPECT_THROW(cfg.validate(), ConfigError);

    cfg = GeneratorConfig{};
    for (auto& [op, w] : cfg.binary_weights)
        if (is_comparison(op))
            w = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);

    cfg = GeneratorConfig{};
    EXPECT_NO_THROW(cfg.validate());
    GeneratorConfig other = cfg;
    other.seed = 99;
    EXPECT_EQ(config_hash(cfg), config_hash(other));
    other.allow_bitwise = false;
    EXPECT_NE(config_hash(cfg), config_hash(other));
}

TEST(Generator, ForLoopsAppearByDefaultOnly)
{
    int with = 0, without = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        GeneratorConfig cfg = seeded(seed);
        walk(*generate_function(cfg).body, 0, [&](const Statement& s, int) { with += s.as<ForMapReduce>() != nullptr; });
        cfg.allow_for_loops = false;
        walk(*generate_function(cfg).body, 0,
             [&](const Statement& s, int) { without += s.as<ForMapReduce>() != nullptr; });
    }
    EXPECT_GT(with, 0);
    EXPECT_EQ(without, 0);
}
