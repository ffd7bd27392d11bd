#pragma once

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "ast.hpp"

namespace livegen {

struct WellFormedViolation {
    std::string location;
    std::string rule;
    std::string detail;
};

namespace detail {

inline bool is_c_identifier(const std::string& s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

inline bool literal_matches_type(const Literal& l)
{
    if (l.type.is_float())
        return std::holds_alternative<double>(l.value);
    if (l.type.is_signed())
        return std::holds_alternative<std::int64_t>(l.value);
    return std::holds_alternative<std::uint64_t>(l.value);
}

inline bool is_nonzero_literal(const Expression& e, ScalarType t)
{
    const auto* l = e.as<Literal>();
    if (!l || l->type != t)
        return false;
    return std::visit([](auto v) { return v != 0; }, l->value);
}

/// True if `e` is `(x + c)` with c a nonzero literal of the same type.
inline bool is_division_guard(const Expression& e)
{
    const auto* b = e.as<Binary>();
    return b && b->op == BinaryOp::Add && is_nonzero_literal(*b->rhs, type_of(*b->lhs));
}

/// True if `e` is `(x & (width - 1))`.
inline bool is_shift_clamp(const Expression& e, unsigned width)
{
    const auto* b = e.as<Binary>();
    if (!b || b->op != BinaryOp::BitAnd)
        return false;
    const auto* l = b->rhs->as<Literal>();
    if (!l || l->type != type_of(*b->lhs))
        return false;
    return std::visit([&](auto v) { return v == static_cast<decltype(v)>(width - 1); }, l->value);
}

class WellFormedChecker {
public:
    explicit WellFormedChecker(const FunctionDef& f) : f_(f) {}

    std::vector<WellFormedViolation> run()
    {
        check_declarations();
        for (std::size_t i = 0; i < f_.initializers.size(); ++i) {
            const Assign& a = f_.initializers[i];
            std::string loc = "initializer " + std::to_string(i);
            check_assign_target(a.target, loc);
            check_expr(*a.rhs, loc, {});
        }
        if (!f_.body) {
            add("body", "missing-body", "function has no body");
            return std::move(out_);
        }
        StmtPath path;
        check_stmt(*f_.body, path);
        check_final_return();
        return std::move(out_);
    }

private:
    struct ExprContext {
        bool condition = false;
        const ForMapReduce* loop = nullptr;
    };

    void add(std::string loc, std::string rule, std::string detail)
    {
        out_.push_back({std::move(loc), std::move(rule), std::move(detail)});
    }

    void check_declarations()
    {
        std::set<std::uint32_t> indices;
        std::set<std::string> names;
        for (const Variable& v : f_.all_variables()) {
            if (!indices.insert(v.id.index).second)
                add(v.id.name, "duplicate-var-index", "index " + std::to_string(v.id.index));
            if (!names.insert(v.id.name).second)
                add(v.id.name, "duplicate-var-name", v.id.name);
            if (!is_c_identifier(v.id.name))
                add(v.id.name, "invalid-identifier", v.id.name);
            if (!v.type.valid())
                add(v.id.name, "invalid-type", "width " + std::to_string(v.type.width));
        }
        for (const Variable& v : f_.params)
            if (!v.is_param())
                add(v.id.name, "bad-variable-kind", "parameter list holds a " + std::string(to_string(v.kind)));
        for (const Variable& v : f_.locals)
            if (v.kind != VarKind::Local && v.kind != VarKind::LoopIndex)
                add(v.id.name, "bad-variable-kind", "local list holds a " + std::string(to_string(v.kind)));
        if (f_.array_size && (f_.array_size->kind != VarKind::Global || f_.array_size->type != types::u32))
            add(f_.array_size->id.name, "bad-variable-kind", "array size must be an unsigned 32-bit global");
        if (!f_.name.empty() && !is_c_identifier(f_.name))
            add(f_.name, "invalid-identifier", f_.name);
        const Variable* r = f_.find(f_.return_var);
        if (!r)
            add("return", "undeclared-variable", f_.return_var.name);
        else if (r->kind != VarKind::Local && r->kind != VarKind::ScalarParam)
            add("return", "bad-return-variable", r->id.name + " is not a scalar");
    }

    const Variable* lookup(const VarId& id, const std::string& loc)
    {
        const Variable* v = f_.find(id);
        if (!v)
            add(loc, "undeclared-variable", id.name);
        return v;
    }

    void check_assign_target(const VarId& target, const std::string& loc)
    {
        const Variable* v = lookup(target, loc);
        if (!v)
            return;
        if (v->is_param())
            add(loc, "assign-to-parameter", target.name);
        else if (v->kind != VarKind::Local)
            add(loc, "assign-to-non-local", target.name);
    }

    void check_expr(const Expression& e, const std::string& loc, ExprContext ctx)
    {
        std::visit([&](const auto& n) { check_node(n, loc, ctx); }, e.node);
    }

    void check_node(const Literal& l, const std::string& loc, ExprContext)
    {
        if (!l.type.valid())
            add(loc, "invalid-type", "literal");
        else if (!literal_matches_type(l))
            add(loc, "literal-type-mismatch", short_type_name(l.type));
    }

    void check_node(const VarRef& r, const std::string& loc, ExprContext ctx)
    {
        const Variable* v = lookup(r.var, loc);
        if (!v)
            return;
        if (v->kind == VarKind::PointerParam || v->kind == VarKind::ArrayParam)
            add(loc, "pointer-used-as-scalar", r.var.name);
        if (v->kind == VarKind::LoopIndex && !(ctx.loop && ctx.loop->index == r.var))
            add(loc, "loop-index-outside-loop", r.var.name);
        if (v->type != r.type)
            add(loc, "var-type-mismatch", r.var.name);
    }

    void check_node(const Deref& d, const std::string& loc, ExprContext)
    {
        const Variable* v = lookup(d.pointer, loc);
        if (!v)
            return;
        if (v->kind != VarKind::PointerParam)
            add(loc, "deref-of-non-pointer", d.pointer.name);
        if (v->type != d.type)
            add(loc, "var-type-mismatch", d.pointer.name);
    }

    void check_node(const Index& ix, const std::string& loc, ExprContext ctx)
    {
        const Variable* v = lookup(ix.array, loc);
        if (v && v->kind != VarKind::ArrayParam)
            add(loc, "index-of-non-array", ix.array.name);
        if (v && v->type != ix.type)
            add(loc, "var-type-mismatch", ix.array.name);
        if (!ctx.loop) {
            add(loc, "index-outside-for", ix.array.name);
        } else {
            const auto* r = ix.index->as<VarRef>();
            if (!r || r->var != ctx.loop->index)
                add(loc, "index-not-loop-variable", ix.array.name);
            if (ix.array != ctx.loop->array)
                add(loc, "index-of-foreign-array", ix.array.name);
        }
        check_expr(*ix.index, loc, ctx);
    }

    void check_node(const Unary& u, const std::string& loc, ExprContext ctx)
    {
        if (u.op == UnaryOp::BitNot && type_of(*u.operand).is_float())
            add(loc, "integer-op-on-float", "~");
        check_expr(*u.operand, loc, ctx);
    }

    void check_node(const Cast& c, const std::string& loc, ExprContext ctx)
    {
        if (!c.type.valid())
            add(loc, "invalid-type", "cast");
        check_expr(*c.operand, loc, ctx);
    }

    void check_node(const Binary& b, const std::string& loc, ExprContext ctx)
    {
        ScalarType lt = type_of(*b.lhs);
        ScalarType rt = type_of(*b.rhs);
        std::string tok(op_token(b.op));
        if (lt != rt)
            add(loc, "operand-type-mismatch", tok);
        if (requires_integer(b.op) && (lt.is_float() || rt.is_float()))
            add(loc, "integer-op-on-float", tok);
        if (is_division(b.op) && !is_division_guard(*b.rhs))
            add(loc, "unguarded-division", tok);
        if (is_shift(b.op) && !is_shift_clamp(*b.rhs, lt.width))
            add(loc, "unclamped-shift", tok);
        if (is_logical(b.op) && !ctx.condition)
            add(loc, "logical-op-outside-condition", tok);
        // && and || stay legal only directly beneath a condition root.
        ExprContext child = ctx;
        if (!is_logical(b.op))
            child.condition = false;
        check_expr(*b.lhs, loc, child);
        check_expr(*b.rhs, loc, child);
    }

    void check_stmt(const Statement& s, StmtPath& path)
    {
        std::string loc = to_string(path);
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Assign>) {
                    check_assign_target(n.target, loc);
                    check_expr(*n.rhs, loc, {});
                } else if constexpr (std::is_same_v<T, Return>) {
                    returns_.push_back(path);
                    lookup(n.var, loc);
                } else if constexpr (std::is_same_v<T, Sequence>) {
                    visit_child(*n.first, path, 0);
                    visit_child(*n.second, path, 1);
                } else if constexpr (std::is_same_v<T, If>) {
                    check_expr(*n.cond, loc, {true, nullptr});
                    visit_child(*n.then_branch, path, 0);
                    visit_child(*n.else_branch, path, 1);
                } else if constexpr (std::is_same_v<T, While>) {
                    check_expr(*n.cond, loc, {true, nullptr});
                    visit_child(*n.body, path, 0);
                } else if constexpr (std::is_same_v<T, ForMapReduce>) {
                    check_for(n, loc);
                }
            },
            s.node);
    }

    void visit_child(const Statement& s, StmtPath& path, int step)
    {
        path.push_back(step);
        check_stmt(s, path);
        path.pop_back();
    }

    void check_for(const ForMapReduce& n, const std::string& loc)
    {
        check_assign_target(n.accumulator, loc);
        if (const Variable* a = lookup(n.array, loc); a && a->kind != VarKind::ArrayParam)
            add(loc, "index-of-non-array", n.array.name);
        if (!f_.array_size || f_.array_size->id != n.bound)
            add(loc, "bad-loop-bound", n.bound.name);
        if (const Variable* i = lookup(n.index, loc); i && i->kind != VarKind::LoopIndex)
            add(loc, "bad-loop-index", n.index.name);
        if (is_comparison(n.combine) || is_logical(n.combine) || is_division(n.combine) || is_shift(n.combine))
            add(loc, "bad-combine-operator", std::string(op_token(n.combine)));
        const Variable* acc = f_.find(n.accumulator);
        if (acc && type_of(*n.element) != acc->type)
            add(loc, "operand-type-mismatch", "map-reduce element");
        if (acc && acc->type.is_float() && requires_integer(n.combine))
            add(loc, "integer-op-on-float", std::string(op_token(n.combine)));
        bool has_index = false;
        find_index(*n.element, n.array, has_index);
        if (!has_index)
            add(loc, "for-element-missing-index", n.array.name);
        check_expr(*n.element, loc, {false, &n});
    }

    static void find_index(const Expression& e, const VarId& array, bool& found)
    {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Index>) {
                    if (n.array == array)
                        found = true;
                } else if constexpr (std::is_same_v<T, Unary> || std::is_same_v<T, Cast>) {
                    find_index(*n.operand, array, found);
                } else if constexpr (std::is_same_v<T, Binary>) {
                    find_index(*n.lhs, array, found);
                    find_index(*n.rhs, array, found);
                }
            },
            e.node);
    }

    void check_final_return()
    {
        // The final leaf of the right spine must be Return(return_var), and
        // no other Return may appear.
        StmtPath path;
        const Statement* cur = f_.body.get();
        while (const auto* q = cur->as<Sequence>()) {
            path.push_back(1);
            cur = q->second.get();
        }
        const auto* r = cur->as<Return>();
        if (!r)
            add(to_string(path), "missing-final-return", "body does not end in a return");
        else if (r->var != f_.return_var)
            add(to_string(path), "return-var-mismatch", r->var.name);
        for (const StmtPath& p : returns_)
            if (p != path)
                add(to_string(p), "misplaced-return", "return before the end of the body");
    }

    const FunctionDef& f_;
    std::vector<WellFormedViolation> out_;
    std::vector<StmtPath> returns_;
};

} // namespace detail

/// All violations of the AST invariants; empty iff `f` is well formed.
inline std::vector<WellFormedViolation> well_formed(const FunctionDef& f)
{
    return detail::WellFormedChecker(f).run();
}

} // namespace livegen
