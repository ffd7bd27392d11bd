#pragma once

// JSON form of a FunctionDef. Every node is an object with a "kind"
// discriminator and its children under named fields; variables are
// referenced by name and declared once in "params"/"locals"/"array_size".
//
//   {"name": "f",
//    "params": [{"name": "n", "index": 0, "type": "i32", "kind": "scalar-param"}],
//    "locals": [...], "array_size": null | {...},
//    "initializers": [{"kind": "assign", ...}],
//    "body": {"kind": "seq", "first": ..., "second": ...},
//    "return_var": "a"}
//
// Expressions: literal{type,value} var{name} unary{op,operand}
// binary{op,lhs,rhs} cast{type,operand} deref{name} index{array,index}.
// Statements: assign{target,rhs} return{var} empty seq{first,second}
// if{cond,then,else} while{cond,body}
// for_map_reduce{acc,array,bound,index,op,element}; "block"{stmts} is
// accepted on input as shorthand for a right-nested seq.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ast.hpp"

namespace livegen {

class SerializeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline json var_to_json(const Variable& v)
{
    return {{"name", v.id.name}, {"index", v.id.index}, {"type", short_type_name(v.type)},
            {"kind", std::string(to_string(v.kind))}};
}

inline json expr_to_json(const Expression& e)
{
    return std::visit(
        [](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal>) {
                json j{{"kind", "literal"}, {"type", short_type_name(n.type)}};
                std::visit([&](auto v) { j["value"] = v; }, n.value);
                return j;
            } else if constexpr (std::is_same_v<T, VarRef>) {
                return {{"kind", "var"}, {"name", n.var.name}};
            } else if constexpr (std::is_same_v<T, Unary>) {
                return {{"kind", "unary"}, {"op", std::string(op_token(n.op))}, {"operand", expr_to_json(*n.operand)}};
            } else if constexpr (std::is_same_v<T, Binary>) {
                return {{"kind", "binary"},
                        {"op", std::string(op_token(n.op))},
                        {"lhs", expr_to_json(*n.lhs)},
                        {"rhs", expr_to_json(*n.rhs)}};
            } else if constexpr (std::is_same_v<T, Cast>) {
                return {{"kind", "cast"}, {"type", short_type_name(n.type)}, {"operand", expr_to_json(*n.operand)}};
            } else if constexpr (std::is_same_v<T, Deref>) {
                return {{"kind", "deref"}, {"name", n.pointer.name}};
            } else {
                return {{"kind", "index"}, {"array", n.array.name}, {"index", expr_to_json(*n.index)}};
            }
        },
        e.node);
}

inline json stmt_to_json(const Statement& s)
{
    return std::visit(
        [](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Assign>)
                return {{"kind", "assign"}, {"target", n.target.name}, {"rhs", expr_to_json(*n.rhs)}};
            else if constexpr (std::is_same_v<T, Return>)
                return {{"kind", "return"}, {"var", n.var.name}};
            else if constexpr (std::is_same_v<T, EmptyBlock>)
                return {{"kind", "empty"}};
            else if constexpr (std::is_same_v<T, Sequence>)
                return {{"kind", "seq"}, {"first", stmt_to_json(*n.first)}, {"second", stmt_to_json(*n.second)}};
            else if constexpr (std::is_same_v<T, If>)
                return {{"kind", "if"},
                        {"cond", expr_to_json(*n.cond)},
                        {"then", stmt_to_json(*n.then_branch)},
                        {"else", stmt_to_json(*n.else_branch)}};
            else if constexpr (std::is_same_v<T, While>)
                return {{"kind", "while"}, {"cond", expr_to_json(*n.cond)}, {"body", stmt_to_json(*n.body)}};
            else
                return {{"kind", "for_map_reduce"},
                        {"acc", n.accumulator.name},
                        {"array", n.array.name},
                        {"bound", n.bound.name},
                        {"index", n.index.name},
                        {"op", std::string(op_token(n.combine))},
                        {"element", expr_to_json(*n.element)}};
        },
        s.node);
}

class Reader {
public:
    explicit Reader(FunctionDef& f) : f_(f) {}

    Variable variable(const json& j, VarKind default_kind)
    {
        Variable v;
        v.id.name = field(j, "name").get<std::string>();
        v.id.index = j.contains("index") ? j["index"].get<std::uint32_t>() : next_index_;
        next_index_ = std::max(next_index_, v.id.index + 1);
        v.type = type(field(j, "type"));
        v.kind = default_kind;
        if (j.contains("kind")) {
            auto k = parse_var_kind(j["kind"].get<std::string>());
            if (!k)
                throw SerializeError("unknown variable kind '" + j["kind"].get<std::string>() + "'");
            v.kind = *k;
        }
        return v;
    }

    ExprPtr expr(const json& j)
    {
        const std::string kind = field(j, "kind").get<std::string>();
        if (kind == "literal") {
            ScalarType t = type(field(j, "type"));
            const json& v = field(j, "value");
            if (t.is_float())
                return build::lit_float(v.get<double>(), t);
            if (t.is_signed())
                return build::make({Literal{v.get<std::int64_t>(), t}});
            return build::lit_unsigned(v.get<std::uint64_t>(), t);
        }
        if (kind == "var") {
            const Variable& v = lookup(field(j, "name"));
            return build::ref(v);
        }
        if (kind == "unary") {
            auto op = parse_unary_op(field(j, "op").get<std::string>());
            if (!op)
                throw SerializeError("unknown unary operator '" + j["op"].get<std::string>() + "'");
            return build::unary(*op, expr(field(j, "operand")));
        }
        if (kind == "binary") {
            auto op = parse_binary_op(field(j, "op").get<std::string>());
            if (!op)
                throw SerializeError("unknown binary operator '" + j["op"].get<std::string>() + "'");
            return build::binary(*op, expr(field(j, "lhs")), expr(field(j, "rhs")));
        }
        if (kind == "cast")
            return build::cast(type(field(j, "type")), expr(field(j, "operand")));
        if (kind == "deref")
            return build::deref(lookup(field(j, "name")));
        if (kind == "index")
            return build::index(lookup(field(j, "array")), expr(field(j, "index")));
        throw SerializeError("unknown expression kind '" + kind + "'");
    }

    StmtPtr stmt(const json& j)
    {
        const std::string kind = field(j, "kind").get<std::string>();
        if (kind == "assign")
            return build::assign(lookup(field(j, "target")).id, expr(field(j, "rhs")));
        if (kind == "return")
            return build::make({Return{lookup(field(j, "var")).id}});
        if (kind == "empty")
            return build::empty();
        if (kind == "seq")
            return build::seq(stmt(field(j, "first")), stmt(field(j, "second")));
        if (kind == "block") {
            std::vector<StmtPtr> stmts;
            for (const json& s : field(j, "stmts"))
                stmts.push_back(stmt(s));
            return build::block(stmts);
        }
        if (kind == "if")
            return build::if_else(expr(field(j, "cond")), stmt(field(j, "then")), stmt(field(j, "else")));
        if (kind == "while")
            return build::while_loop(expr(field(j, "cond")), stmt(field(j, "body")));
        if (kind == "for_map_reduce") {
            auto op = parse_binary_op(field(j, "op").get<std::string>());
            if (!op)
                throw SerializeError("unknown combine operator");
            return build::make({ForMapReduce{lookup(field(j, "acc")).id, lookup(field(j, "array")).id,
                                             lookup(field(j, "bound")).id, lookup(field(j, "index")).id, *op,
                                             expr(field(j, "element"))}});
        }
        throw SerializeError("unknown statement kind '" + kind + "'");
    }

    static const json& field(const json& j, const char* name)
    {
        if (!j.is_object() || !j.contains(name))
            throw SerializeError(std::string("missing field '") + name + "'");
        return j[name];
    }

private:
    static ScalarType type(const json& j)
    {
        auto t = parse_short_type_name(j.get<std::string>());
        if (!t)
            throw SerializeError("unknown type '" + j.get<std::string>() + "'");
        return *t;
    }

    const Variable& lookup(const json& name)
    {
        const Variable* v = f_.find(name.get<std::string>());
        if (!v)
            throw SerializeError("undeclared variable '" + name.get<std::string>() + "'");
        return *v;
    }

    FunctionDef& f_;
    std::uint32_t next_index_ = 0;
};

} // namespace detail

inline nlohmann::json to_json(const FunctionDef& f)
{
    using detail::json;
    json params = json::array(), locals = json::array(), inits = json::array();
    for (const auto& v : f.params)
        params.push_back(detail::var_to_json(v));
    for (const auto& v : f.locals)
        locals.push_back(detail::var_to_json(v));
    for (const auto& a : f.initializers)
        inits.push_back({{"kind", "assign"}, {"target", a.target.name}, {"rhs", detail::expr_to_json(*a.rhs)}});
    return {{"name", f.name},
            {"params", params},
            {"locals", locals},
            {"array_size", f.array_size ? detail::var_to_json(*f.array_size) : json(nullptr)},
            {"initializers", inits},
            {"body", detail::stmt_to_json(*f.body)},
            {"return_var", f.return_var.name}};
}

/// Parses the JSON form. Structural problems (missing fields, unknown
/// kinds, undeclared names) throw SerializeError; semantic invariants are
/// left to well_formed().
inline FunctionDef function_from_json(const nlohmann::json& j)
{
    using detail::Reader;
    FunctionDef f;
    Reader r(f);
    try {
        if (j.contains("name"))
            f.name = j["name"].get<std::string>();
        if (j.contains("params"))
            for (const auto& p : j["params"])
                f.params.push_back(r.variable(p, VarKind::ScalarParam));
        if (j.contains("locals"))
            for (const auto& l : j["locals"])
                f.locals.push_back(r.variable(l, VarKind::Local));
        if (j.contains("array_size") && !j["array_size"].is_null())
            f.array_size = r.variable(j["array_size"], VarKind::Global);
        if (j.contains("initializers"))
            for (const auto& i : j["initializers"]) {
                StmtPtr s = r.stmt(i);
                const auto* a = s->as<Assign>();
                if (!a)
                    throw SerializeError("initializers must be assignments");
                f.initializers.push_back(*a);
            }
        f.body = r.stmt(Reader::field(j, "body"));
        const Variable* ret = f.find(Reader::field(j, "return_var").get<std::string>());
        if (!ret)
            throw SerializeError("undeclared return variable");
        f.return_var = ret->id;
    } catch (const nlohmann::json::exception& e) {
        throw SerializeError(std::string("malformed AST JSON: ") + e.what());
    }
    return f;
}

} // namespace livegen
