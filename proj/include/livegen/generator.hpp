#pragma once

// Liveness-driven random program generation.
//
// Code is generated backwards, starting from `return v` with live set {v}.
// Each new statement is prepended to the current fragment and the live set
// is replaced by the statement's live-in set. Assignments only ever target
// a live variable, and a block stops growing as soon as its live set becomes
// empty, so every generated assignment is live by construction. Loops pick
// a set of loop-carried variables up front and repair the body afterwards
// so that the chosen set is exactly the least fixed point of the loop.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ast.hpp"
#include "liveness.hpp"
#include "rng.hpp"

namespace livegen {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TypeUniverse { All, IntOnly, FloatOnly };
enum class StmtKind { Assign, If, While, ForMapReduce };

inline std::string_view to_string(TypeUniverse u)
{
    switch (u) {
    case TypeUniverse::All: return "all";
    case TypeUniverse::IntOnly: return "int";
    case TypeUniverse::FloatOnly: return "fp";
    }
    return "?";
}

struct LiteralRange {
    LiteralValue lo;
    LiteralValue hi;
};

/// Full range of the type for integers, [-1e6, 1e6] for floating types.
inline LiteralRange default_literal_range(ScalarType t)
{
    if (t.is_float())
        return {-1e6, 1e6};
    if (t.is_signed()) {
        std::int64_t hi = t.width == 64 ? INT64_MAX : (std::int64_t{1} << (t.width - 1)) - 1;
        return {-hi - 1, hi};
    }
    std::uint64_t hi = t.width == 64 ? UINT64_MAX : (std::uint64_t{1} << t.width) - 1;
    return {std::uint64_t{0}, hi};
}

struct GeneratorConfig {
    std::uint64_t seed = 0;
    int max_block_stmts = 6;
    int max_stmt_depth = 3;
    int max_expr_depth = 4;
    /// Statements counted against the budget: assignments, ifs, loops (the
    /// map-reduce pattern counts two). Loop repair and termination
    /// statements are forced and not counted.
    int max_total_stmts = 80;
    bool allow_loops = true;
    bool allow_for_loops = true;
    bool allow_bitwise = true;
    bool allow_division = true;
    TypeUniverse type_universe = TypeUniverse::All;

    std::map<StmtKind, unsigned> stmt_weights{
        {StmtKind::Assign, 6}, {StmtKind::If, 2}, {StmtKind::While, 1}, {StmtKind::ForMapReduce, 1}};

    /// Arithmetic operators are weighted 4x the bitwise ones; comparisons
    /// and && / || are only drawn for conditions.
    std::map<BinaryOp, unsigned> binary_weights{
        {BinaryOp::Add, 4}, {BinaryOp::Sub, 4}, {BinaryOp::Mul, 4}, {BinaryOp::Div, 4},
        {BinaryOp::Mod, 1}, {BinaryOp::Shl, 1}, {BinaryOp::Shr, 1}, {BinaryOp::BitAnd, 1},
        {BinaryOp::BitOr, 1}, {BinaryOp::BitXor, 1},
        {BinaryOp::Lt, 1}, {BinaryOp::Gt, 1}, {BinaryOp::Le, 1}, {BinaryOp::Ge, 1},
        {BinaryOp::Eq, 1}, {BinaryOp::Ne, 1},
        {BinaryOp::LogAnd, 1}, {BinaryOp::LogOr, 1}};
    std::map<UnaryOp, unsigned> unary_weights{{UnaryOp::Negate, 1}, {UnaryOp::BitNot, 1}};

    double fresh_var_prob = 0.2;
    double literal_leaf_prob = 0.2;
    /// Probability that an operand is generated at another type and cast.
    double cast_prob = 0.15;
    /// Per-type overrides; unlisted types use default_literal_range.
    std::map<ScalarType, LiteralRange> literal_ranges;
    std::string function_name = "f";

    LiteralRange literal_range(ScalarType t) const
    {
        auto it = literal_ranges.find(t);
        return it != literal_ranges.end() ? it->second : default_literal_range(t);
    }

    unsigned weight(BinaryOp op) const
    {
        auto it = binary_weights.find(op);
        if (it == binary_weights.end())
            return 0;
        if ((is_division(op) && !allow_division) || (is_bitwise(op) && !allow_bitwise))
            return 0;
        return it->second;
    }

    unsigned weight(UnaryOp op) const
    {
        auto it = unary_weights.find(op);
        if (it == unary_weights.end() || (op == UnaryOp::BitNot && !allow_bitwise))
            return 0;
        return it->second;
    }

    unsigned weight(StmtKind k) const
    {
        auto it = stmt_weights.find(k);
        if (it == stmt_weights.end())
            return 0;
        if ((k == StmtKind::While || k == StmtKind::ForMapReduce) && !allow_loops)
            return 0;
        if (k == StmtKind::ForMapReduce && !allow_for_loops)
            return 0;
        return it->second;
    }

    std::vector<ScalarType> type_pool() const
    {
        switch (type_universe) {
        case TypeUniverse::IntOnly: return {std::begin(types::integers), std::end(types::integers)};
        case TypeUniverse::FloatOnly: return {std::begin(types::floats), std::end(types::floats)};
        case TypeUniverse::All: break;
        }
        return {std::begin(types::all), std::end(types::all)};
    }

    void validate() const
    {
        if (max_block_stmts < 1 || max_stmt_depth < 1 || max_expr_depth < 0 || max_total_stmts < 0)
            throw ConfigError("size limits must be positive");
        if (fresh_var_prob < 0 || fresh_var_prob > 1 || literal_leaf_prob < 0 || literal_leaf_prob > 1 ||
            cast_prob < 0 || cast_prob > 1)
            throw ConfigError("probabilities must lie in [0, 1]");
        unsigned stmts = 0;
        for (StmtKind k : {StmtKind::Assign, StmtKind::If, StmtKind::While, StmtKind::ForMapReduce})
            stmts += weight(k);
        if (stmts == 0)
            throw ConfigError("no statement kind has positive weight under the active flags");
        unsigned arith = weight(UnaryOp::Negate) + weight(UnaryOp::BitNot);
        unsigned cmp = 0;
        for (BinaryOp op : all_binary_ops) {
            if (is_comparison(op))
                cmp += weight(op);
            else if (!is_logical(op))
                arith += weight(op);
        }
        if (arith == 0)
            throw ConfigError("no expression operator has positive weight under the active flags");
        if (cmp == 0 && (weight(StmtKind::If) > 0 || weight(StmtKind::While) > 0))
            throw ConfigError("conditions need at least one comparison operator with positive weight");
        for (const auto& [t, r] : literal_ranges) {
            if (!t.valid())
                throw ConfigError("literal range for an invalid type");
            bool empty = std::visit(
                [](auto a, auto b) {
                    if constexpr (std::is_same_v<decltype(a), decltype(b)>)
                        return a > b;
                    else
                        return true;
                },
                r.lo, r.hi);
            if (empty || r.lo.index() != default_literal_range(t).lo.index())
                throw ConfigError("empty or mistyped literal range for " + short_type_name(t));
        }
    }

    /// Everything except the seed, in a stable textual form.
    std::string canonical() const
    {
        std::ostringstream os;
        os << "types=" << to_string(type_universe) << " loops=" << allow_loops << " for-loops=" << allow_for_loops
           << " bitwise=" << allow_bitwise << " division=" << allow_division
           << " max-block-stmts=" << max_block_stmts << " max-stmt-depth=" << max_stmt_depth
           << " max-expr-depth=" << max_expr_depth << " max-total-stmts=" << max_total_stmts
           << " fresh-var-prob=" << fresh_var_prob << " literal-leaf-prob=" << literal_leaf_prob
           << " cast-prob=" << cast_prob << " stmt-weights=";
        for (const auto& [k, w] : stmt_weights)
            os << static_cast<int>(k) << ':' << w << ',';
        os << " op-weights=";
        for (const auto& [k, w] : binary_weights)
            os << op_token(k) << ':' << w << ',';
        for (const auto& [k, w] : unary_weights)
            os << 'u' << op_token(k) << ':' << w << ',';
        return os.str();
    }
};

/// FNV-1a over the canonical configuration text.
inline std::string config_hash(const GeneratorConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : cfg.canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct GenState {
    Rng rng;
    LiveSet live;
    std::vector<Variable> pool;
    int stmt_budget = 0;
    int depth = 0;
    std::uint32_t next_index = 0;
    std::map<VarKind, unsigned> name_counters;
    std::optional<Variable> array_size;
    std::optional<Variable> loop_index;

    explicit GenState(std::uint64_t seed) : rng(seed) {}
};

/// A generated run of statements (in program order) with its live-in set.
struct Fragment {
    std::vector<StmtPtr> stmts;
    LiveSet live_in;
};

class Generator {
public:
    explicit Generator(GeneratorConfig cfg) : cfg_(std::move(cfg)), state_(cfg_.seed)
    {
        cfg_.validate();
        types_ = cfg_.type_pool();
        state_.stmt_budget = cfg_.max_total_stmts;
    }

    const GeneratorConfig& config() const { return cfg_; }
    GenState& state() { return state_; }

    FunctionDef generate_function()
    {
        Variable ret = new_var(VarKind::Local, random_type());
        std::vector<StmtPtr> body{build::ret(ret)};
        LiveSet live{ret.id};
        while (!live.empty() && state_.stmt_budget > 0) {
            Fragment block = random_statement_block(live, 0);
            if (block.stmts.empty())
                break;
            body.insert(body.begin(), block.stmts.begin(), block.stmts.end());
            live = std::move(block.live_in);
        }
        state_.live = live;

        FunctionDef draft;
        draft.name = cfg_.function_name;
        draft.body = build::block(body);
        draft.return_var = ret.id;
        return finalize_function(std::move(draft), live);
    }

    /// Prepends random statements to a fragment whose live-out is
    /// `live_out` until the block limit or the budget is reached, or the
    /// live set becomes empty (anything earlier would be dead).
    Fragment random_statement_block(const LiveSet& live_out, int depth, int max_stmts = -1)
    {
        if (max_stmts < 0)
            max_stmts = cfg_.max_block_stmts;
        std::vector<StmtPtr> reversed;
        LiveSet live = live_out;
        int count = 0;
        while (!live.empty() && count < max_stmts && state_.stmt_budget > 0) {
            auto frag = random_statement(live, depth);
            if (!frag)
                break;
            for (auto it = frag->stmts.rbegin(); it != frag->stmts.rend(); ++it)
                reversed.push_back(*it);
            live = std::move(frag->live_in);
            ++count;
        }
        return {{reversed.rbegin(), reversed.rend()}, live};
    }

    std::optional<Fragment> random_statement(const LiveSet& live_out, int depth)
    {
        const bool has_local = !assignable(live_out).empty();
        for (int attempt = 0; attempt < 8; ++attempt) {
            unsigned w[4] = {
                has_local ? cfg_.weight(StmtKind::Assign) : 0u,
                depth < cfg_.max_stmt_depth ? cfg_.weight(StmtKind::If) : 0u,
                depth < cfg_.max_stmt_depth ? cfg_.weight(StmtKind::While) : 0u,
                has_local && state_.stmt_budget >= 2 ? cfg_.weight(StmtKind::ForMapReduce) : 0u,
            };
            std::size_t k = state_.rng.weighted(w);
            std::optional<Fragment> f;
            switch (k) {
            case 0: f = gen_assignment(live_out); break;
            case 1: f = gen_if(live_out, depth); break;
            case 2: f = gen_while(live_out, depth); break;
            case 3: f = gen_for_map_reduce(live_out); break;
            default: return std::nullopt;
            }
            if (f)
                return f;
        }
        return std::nullopt;
    }

    /// v = e with v drawn from the live locals.
    std::optional<Fragment> gen_assignment(const LiveSet& live_out)
    {
        std::vector<Variable> targets = assignable(live_out);
        if (targets.empty())
            return std::nullopt;
        const Variable v = state_.rng.pick(targets);
        ExprPtr rhs = gen_expression(v.type, 0);
        --state_.stmt_budget;
        LiveSet in = transfer_assign(live_out, v.id, *rhs);
        return Fragment{{build::assign(v, rhs)}, std::move(in)};
    }

    /// Both branches are generated against the same live-out set; the
    /// live-in is L1 ∪ L2 ∪ FV(c).
    std::optional<Fragment> gen_if(const LiveSet& live_out, int depth)
    {
        if (depth >= cfg_.max_stmt_depth || state_.stmt_budget <= 0)
            return std::nullopt;
        --state_.stmt_budget;
        Fragment then_part = random_statement_block(live_out, depth + 1);
        Fragment else_part = random_statement_block(live_out, depth + 1);
        if (then_part.stmts.empty() && else_part.stmts.empty()) {
            ++state_.stmt_budget;
            return std::nullopt;
        }
        ExprPtr cond = gen_condition(false);
        LiveSet in = then_part.live_in | else_part.live_in | free_vars(*cond);
        return Fragment{{build::if_else(cond, build::block(then_part.stmts), build::block(else_part.stmts))},
                        std::move(in)};
    }

    std::optional<Fragment> gen_while(const LiveSet& live_out, int depth)
    {
        if (!cfg_.allow_loops || depth >= cfg_.max_stmt_depth || state_.stmt_budget <= 0)
            return std::nullopt;
        --state_.stmt_budget;

        ExprPtr cond = gen_condition(true);
        LiveSet cond_vars = free_vars(*cond);
        const LiveSet carried = sample_loop_carried(live_out | cond_vars);
        const LiveSet body_out = live_out | carried | cond_vars;

        // Generation runs backwards, so the forced final statement (an
        // assignment to a condition variable) comes first.
        std::vector<Variable> steppable = assignable(cond_vars);
        const Variable u = state_.rng.pick(steppable);
        ExprPtr step_rhs = gen_expression(u.type, 0);
        LiveSet mid = transfer_assign(body_out, u.id, *step_rhs);
        Fragment rest = random_statement_block(mid, depth + 1, std::max(cfg_.max_block_stmts - 1, 0));
        std::vector<StmtPtr> body = rest.stmts;
        body.push_back(build::assign(u, step_rhs));
        const LiveSet body_in = rest.stmts.empty() ? mid : rest.live_in;

        // Loop-carried variables without an upward-exposed use in the body
        // (f_body(∅) is exactly that set) would not be in the least fixed
        // point; force a use of each of them.
        const LiveSet exposed = transfer(*build::block(body), LiveSet{});
        const LiveSet unused = carried - exposed;
        if (!unused.empty()) {
            if (body_in.empty()) {
                // The body starts with a constant assignment; give it a
                // right-hand side reading the unused variables instead.
                const auto& first = std::get<Assign>(body.front()->node);
                const Variable& w = *find_var(first.target);
                body.front() = build::assign(w, expression_over(unused, w.type));
            } else if (std::vector<Variable> repairable = assignable(body_in); !repairable.empty()) {
                const Variable v = state_.rng.pick(repairable);
                LiveSet required = unused;
                // Killing a loop-carried variable at the top of the body
                // would drop it from the fixed point unless it is also read.
                if (carried.contains(v.id))
                    required.insert(v.id);
                body.insert(body.begin(), build::assign(v, expression_over(required, v.type)));
            } else {
                // Nothing assignable is live into the body: make the
                // condition read the unused variables.
                ScalarType t = find_var(*unused.begin())->type;
                ExprPtr extra = build::binary(BinaryOp::Ne, expression_over(unused, t), literal_value(t, 0));
                cond = build::binary(BinaryOp::LogAnd, cond, extra);
                cond_vars = free_vars(*cond);
            }
        }

        StmtPtr body_stmt = build::block(body);
        LiveSet in = transfer(*body_stmt, body_out) | live_out | cond_vars;
        return Fragment{{build::while_loop(cond, body_stmt)}, std::move(in)};
    }

    /// acc = e0; for (i = 0; i < N; i++) acc = acc op f(arr[i]);
    std::optional<Fragment> gen_for_map_reduce(const LiveSet& live_out)
    {
        if (!cfg_.allow_loops || !cfg_.allow_for_loops || state_.stmt_budget < 2)
            return std::nullopt;
        std::vector<Variable> accs = assignable(live_out);
        if (accs.empty())
            return std::nullopt;
        const Variable acc = state_.rng.pick(accs);
        const ScalarType t = acc.type;
        const ScalarType elem_type = state_.rng.chance(0.6) ? t : random_type();
        const Variable arr = new_var(VarKind::ArrayParam, elem_type);
        const Variable n = ensure_array_size();
        const Variable i = ensure_loop_index();

        ExprPtr element = build::convert(t, build::index(arr, build::ref(i)));
        double shape = state_.rng.unit();
        if (shape >= 0.35) {
            std::optional<BinaryOp> op = pick_arith_op(t);
            if (op) {
                ExprPtr other = gen_expression(t, std::max(cfg_.max_expr_depth - 1, 1));
                element = state_.rng.chance(0.5) ? make_binary(*op, t, element, other)
                                                  : make_binary(*op, t, other, element);
            }
        }

        std::vector<BinaryOp> combine_ops{BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul};
        std::vector<unsigned> combine_w{4, 1, 2};
        if (t.is_integer() && cfg_.allow_bitwise)
            for (BinaryOp op : {BinaryOp::BitAnd, BinaryOp::BitOr, BinaryOp::BitXor}) {
                combine_ops.push_back(op);
                combine_w.push_back(1);
            }
        for (std::size_t k = 0; k < combine_ops.size(); ++k)
            combine_w[k] = cfg_.weight(combine_ops[k]) ? combine_w[k] : 0;
        std::size_t pick = state_.rng.weighted(combine_w);
        BinaryOp combine = pick < combine_ops.size() ? combine_ops[pick] : BinaryOp::Add;

        StmtPtr loop = build::make({ForMapReduce{acc.id, arr.id, n.id, i.id, combine, element}});
        ExprPtr init = gen_expression(t, 0);
        StmtPtr pre = build::assign(acc, init);
        state_.stmt_budget -= 2;
        LiveSet in = transfer(*build::seq(pre, loop), live_out);
        return Fragment{{pre, loop}, std::move(in)};
    }

    ExprPtr gen_expression(ScalarType want, int depth)
    {
        if (depth >= cfg_.max_expr_depth)
            return leaf(want);
        if (depth > 0 && state_.rng.chance(0.3))
            return leaf(want);

        std::vector<unsigned> w;
        std::vector<BinaryOp> bin;
        for (BinaryOp op : all_binary_ops) {
            if (is_comparison(op) || is_logical(op))
                continue;
            bin.push_back(op);
            w.push_back(cfg_.weight(op));
        }
        w.push_back(cfg_.weight(UnaryOp::Negate));
        w.push_back(cfg_.weight(UnaryOp::BitNot));
        std::size_t k = state_.rng.weighted(w);
        if (k == w.size())
            return leaf(want);

        auto operand = [&] {
            ScalarType t = state_.rng.chance(cfg_.cast_prob) ? random_type() : want;
            return build::convert(want, gen_expression(t, depth + 1));
        };
        if (k == bin.size())
            return build::unary(UnaryOp::Negate, operand());
        if (k == bin.size() + 1)
            return make_unary_int(UnaryOp::BitNot, want, operand());
        ExprPtr lhs = operand();
        ExprPtr rhs = operand();
        return make_binary(bin[k], want, std::move(lhs), std::move(rhs));
    }

    /// Builds `a op b` at type `want` (both operands already of that type),
    /// inserting integer conversions for integer-only operators on floats,
    /// the (e + c) divisor guard and the shift-amount mask.
    ExprPtr make_binary(BinaryOp op, ScalarType want, ExprPtr a, ExprPtr b)
    {
        if (requires_integer(op) && want.is_float()) {
            ScalarType it = want.width == 32 ? types::i32 : types::i64;
            return build::cast(want, make_binary(op, it, build::cast(it, std::move(a)), build::cast(it, std::move(b))));
        }
        if (is_division(op)) {
            std::int64_t c = state_.rng.range(1, 16);
            b = build::binary(BinaryOp::Add, std::move(b), literal_value(want, c));
        } else if (is_shift(op)) {
            b = build::binary(BinaryOp::BitAnd, std::move(b), literal_value(want, want.width - 1));
        }
        return build::binary(op, std::move(a), std::move(b));
    }

    /// Condition with at least one variable. For loops the condition reads at
    /// least one local so the body can end by assigning it.
    ExprPtr gen_condition(bool require_local)
    {
        ExprPtr c = comparison(require_local);
        unsigned lw[2] = {cfg_.weight(BinaryOp::LogAnd), cfg_.weight(BinaryOp::LogOr)};
        if (state_.rng.chance(0.15)) {
            std::size_t k = state_.rng.weighted(lw);
            if (k < 2)
                c = build::binary(k == 0 ? BinaryOp::LogAnd : BinaryOp::LogOr, c, comparison(false));
        }
        return c;
    }

    /// An expression of type `want` in which every variable of `vars` occurs.
    ExprPtr expression_over(const LiveSet& vars, ScalarType want)
    {
        std::vector<ExprPtr> parts;
        for (const VarId& id : vars)
            parts.push_back(build::convert(want, read(*find_var(id))));
        for (std::size_t k = parts.size(); k > 1; --k)
            std::swap(parts[k - 1], parts[state_.rng.below(k)]);
        // Balanced pairwise folding keeps the tree shallow.
        while (parts.size() > 1) {
            std::vector<ExprPtr> next;
            for (std::size_t k = 0; k + 1 < parts.size(); k += 2) {
                std::optional<BinaryOp> op = pick_arith_op(want);
                next.push_back(make_binary(op.value_or(BinaryOp::Add), want, parts[k], parts[k + 1]));
            }
            if (parts.size() % 2)
                next.push_back(parts.back());
            parts = std::move(next);
        }
        return parts.front();
    }

    /// Initializes every local that is live into the body, either with a
    /// literal or with a parameter value, then drops unreferenced variables.
    FunctionDef finalize_function(FunctionDef draft, const LiveSet& live_in)
    {
        draft.initializers.clear();
        for (const VarId& id : live_in) {
            const Variable* v = find_var(id);
            if (!v || v->kind != VarKind::Local)
                continue;
            const Variable local = *v;
            ExprPtr init;
            if (state_.rng.chance(0.5)) {
                std::vector<Variable> same;
                for (const Variable& p : state_.pool)
                    if (p.kind == VarKind::ScalarParam && p.type == local.type)
                        same.push_back(p);
                Variable param = same.empty() ? new_var(VarKind::ScalarParam, local.type) : state_.rng.pick(same);
                init = build::ref(param);
            } else {
                init = literal(local.type);
            }
            draft.initializers.push_back({local.id, init});
        }

        LiveSet referenced = used_vars(*draft.body);
        collect_assigned(*draft.body, referenced);
        referenced.insert(draft.return_var);
        for (const Assign& a : draft.initializers) {
            referenced.insert(a.target);
            collect_free_vars(*a.rhs, referenced);
        }
        draft.params.clear();
        draft.locals.clear();
        draft.array_size.reset();
        for (const Variable& v : state_.pool) {
            if (!referenced.contains(v.id))
                continue;
            if (v.is_param())
                draft.params.push_back(v);
            else if (v.kind == VarKind::Global)
                draft.array_size = v;
            else
                draft.locals.push_back(v);
        }
        return draft;
    }

    Variable new_var(VarKind kind, ScalarType t)
    {
        std::string prefix;
        switch (kind) {
        case VarKind::Local: prefix = "v"; break;
        case VarKind::ScalarParam: prefix = "p"; break;
        case VarKind::PointerParam: prefix = "q"; break;
        case VarKind::ArrayParam: prefix = "arr"; break;
        case VarKind::Global: prefix = "N"; break;
        case VarKind::LoopIndex: prefix = "i"; break;
        }
        unsigned& counter = state_.name_counters[kind];
        std::string name = prefix;
        if (kind != VarKind::Global && kind != VarKind::LoopIndex)
            name += std::to_string(counter);
        ++counter;
        Variable v{{std::move(name), state_.next_index++}, t, kind};
        state_.pool.push_back(v);
        return v;
    }

    const Variable* find_var(const VarId& id) const
    {
        for (const Variable& v : state_.pool)
            if (v.id == id)
                return &v;
        return nullptr;
    }

private:
    ScalarType random_type() { return state_.rng.pick(types_); }

    ExprPtr literal_value(ScalarType t, std::int64_t v)
    {
        return build::lit(v, t);
    }

    ExprPtr literal(ScalarType t)
    {
        LiteralRange r = cfg_.literal_range(t);
        if (t.is_float()) {
            double lo = std::get<double>(r.lo), hi = std::get<double>(r.hi);
            double v = lo + state_.rng.unit() * (hi - lo);
            if (t.width == 32)
                v = static_cast<float>(v);
            // Two decimals keep the emitted literals short.
            v = std::round(v * 100.0) / 100.0;
            if (t.width == 32)
                v = static_cast<float>(v);
            return build::lit_float(v, t);
        }
        if (t.is_signed()) {
            std::int64_t v = state_.rng.range(std::get<std::int64_t>(r.lo), std::get<std::int64_t>(r.hi));
            return build::make({Literal{v, t}});
        }
        std::uint64_t lo = std::get<std::uint64_t>(r.lo), hi = std::get<std::uint64_t>(r.hi);
        std::uint64_t v = hi - lo == UINT64_MAX ? state_.rng.next() : lo + state_.rng.below(hi - lo + 1);
        return build::lit_unsigned(v, t);
    }

    ExprPtr read(const Variable& v)
    {
        return v.kind == VarKind::PointerParam ? build::deref(v) : build::ref(v);
    }

    std::vector<Variable> assignable(const LiveSet& live) const
    {
        std::vector<Variable> out;
        for (const VarId& id : live)
            if (const Variable* v = find_var(id); v && v->kind == VarKind::Local)
                out.push_back(*v);
        return out;
    }

    ExprPtr leaf(ScalarType want)
    {
        if (state_.rng.chance(cfg_.literal_leaf_prob))
            return literal(want);
        return variable_leaf(want, false);
    }

    /// An existing readable variable (preferring ones of the wanted type)
    /// or, with probability fresh_var_prob, a fresh local or parameter.
    ExprPtr variable_leaf(ScalarType want, bool locals_only)
    {
        std::vector<Variable> all, same;
        for (const Variable& v : state_.pool) {
            bool ok = locals_only ? v.kind == VarKind::Local
                                  : (v.kind == VarKind::Local || v.kind == VarKind::ScalarParam ||
                                     v.kind == VarKind::PointerParam);
            if (!ok)
                continue;
            all.push_back(v);
            if (v.type == want)
                same.push_back(v);
        }
        if (!all.empty() && !state_.rng.chance(cfg_.fresh_var_prob)) {
            const Variable v = !same.empty() && state_.rng.chance(0.7) ? state_.rng.pick(same) : state_.rng.pick(all);
            return build::convert(want, read(v));
        }
        VarKind kind = VarKind::Local;
        if (!locals_only) {
            double r = state_.rng.unit();
            kind = r < 0.5 ? VarKind::Local : r < 0.85 ? VarKind::ScalarParam : VarKind::PointerParam;
        }
        return read(new_var(kind, want));
    }

    ExprPtr comparison(bool require_local)
    {
        std::vector<BinaryOp> ops;
        std::vector<unsigned> w;
        for (BinaryOp op : all_binary_ops)
            if (is_comparison(op)) {
                ops.push_back(op);
                w.push_back(cfg_.weight(op));
            }
        std::size_t k = state_.rng.weighted(w);
        BinaryOp op = k < ops.size() ? ops[k] : BinaryOp::Ne;
        ScalarType t = random_type();
        ExprPtr subject = variable_leaf(t, require_local);
        ExprPtr other = gen_expression(t, std::max(cfg_.max_expr_depth - 2, 1));
        if (state_.rng.chance(0.5))
            return build::binary(op, subject, other);
        return build::binary(op, other, subject);
    }

    ExprPtr make_unary_int(UnaryOp op, ScalarType want, ExprPtr a)
    {
        if (want.is_float()) {
            ScalarType it = want.width == 32 ? types::i32 : types::i64;
            return build::cast(want, build::unary(op, build::cast(it, std::move(a))));
        }
        return build::unary(op, std::move(a));
    }

    std::optional<BinaryOp> pick_arith_op(ScalarType)
    {
        std::vector<BinaryOp> ops;
        std::vector<unsigned> w;
        for (BinaryOp op : all_binary_ops)
            if (!is_comparison(op) && !is_logical(op)) {
                ops.push_back(op);
                w.push_back(cfg_.weight(op));
            }
        std::size_t k = state_.rng.weighted(w);
        if (k >= ops.size())
            return std::nullopt;
        return ops[k];
    }

    LiveSet sample_loop_carried(const LiveSet& excluded)
    {
        // Geometric size with mean 1.5 (success probability 0.4), capped at 4.
        int size = 0;
        while (size < 4 && state_.rng.chance(0.6))
            ++size;
        LiveSet chosen;
        for (int k = 0; k < size; ++k) {
            std::vector<Variable> candidates;
            for (const Variable& v : state_.pool)
                if (v.kind == VarKind::Local && !excluded.contains(v.id) && !chosen.contains(v.id))
                    candidates.push_back(v);
            if (!candidates.empty() && state_.rng.chance(0.5))
                chosen.insert(state_.rng.pick(candidates).id);
            else
                chosen.insert(new_var(VarKind::Local, random_type()).id);
        }
        return chosen;
    }

    Variable ensure_array_size()
    {
        if (!state_.array_size)
            state_.array_size = new_var(VarKind::Global, types::u32);
        return *state_.array_size;
    }

    Variable ensure_loop_index()
    {
        if (!state_.loop_index)
            state_.loop_index = new_var(VarKind::LoopIndex, types::u32);
        return *state_.loop_index;
    }

    static void collect_assigned(const Statement& s, LiveSet& out)
    {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Assign>)
                    out.insert(n.target);
                else if constexpr (std::is_same_v<T, Sequence>) {
                    collect_assigned(*n.first, out);
                    collect_assigned(*n.second, out);
                } else if constexpr (std::is_same_v<T, If>) {
                    collect_assigned(*n.then_branch, out);
                    collect_assigned(*n.else_branch, out);
                } else if constexpr (std::is_same_v<T, While>) {
                    collect_assigned(*n.body, out);
                } else if constexpr (std::is_same_v<T, ForMapReduce>) {
                    out.insert(n.accumulator);
                    out.insert(n.array);
                    out.insert(n.index);
                    out.insert(n.bound);
                }
            },
            s.node);
    }

    GeneratorConfig cfg_;
    GenState state_;
    std::vector<ScalarType> types_;
};

inline FunctionDef generate_function(const GeneratorConfig& cfg)
{
    return Generator(cfg).generate_function();
}

} // namespace livegen
