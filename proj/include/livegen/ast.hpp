#pragma once

// Abstract syntax for the generated C subset: scalar variables, pointer and
// array parameters, side-effect-free expressions, and structured statements
// (assignment, return, empty block, sequence, if/else, while and the
// map-reduce for loop over an array parameter).
//
// All nodes are immutable once built and are shared through
// shared_ptr<const T>, so subtrees can be reused freely across rewrites.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace livegen {

// ---------------------------------------------------------------------------
// Scalar types

struct ScalarType {
    enum class Kind : std::uint8_t { SignedInt, UnsignedInt, Float };

    Kind kind = Kind::SignedInt;
    std::uint8_t width = 32;

    constexpr bool is_integer() const { return kind != Kind::Float; }
    constexpr bool is_float() const { return kind == Kind::Float; }
    constexpr bool is_signed() const { return kind == Kind::SignedInt; }

    constexpr bool valid() const
    {
        if (kind == Kind::Float)
            return width == 32 || width == 64;
        return width == 8 || width == 16 || width == 32 || width == 64;
    }

    friend constexpr bool operator==(ScalarType, ScalarType) = default;
    friend constexpr auto operator<=>(ScalarType, ScalarType) = default;
};

namespace types {
inline constexpr ScalarType i8{ScalarType::Kind::SignedInt, 8};
inline constexpr ScalarType i16{ScalarType::Kind::SignedInt, 16};
inline constexpr ScalarType i32{ScalarType::Kind::SignedInt, 32};
inline constexpr ScalarType i64{ScalarType::Kind::SignedInt, 64};
inline constexpr ScalarType u8{ScalarType::Kind::UnsignedInt, 8};
inline constexpr ScalarType u16{ScalarType::Kind::UnsignedInt, 16};
inline constexpr ScalarType u32{ScalarType::Kind::UnsignedInt, 32};
inline constexpr ScalarType u64{ScalarType::Kind::UnsignedInt, 64};
inline constexpr ScalarType f32{ScalarType::Kind::Float, 32};
inline constexpr ScalarType f64{ScalarType::Kind::Float, 64};

inline constexpr ScalarType all[] = {i8, i16, i32, i64, u8, u16, u32, u64, f32, f64};
inline constexpr ScalarType integers[] = {i8, i16, i32, i64, u8, u16, u32, u64};
inline constexpr ScalarType floats[] = {f32, f64};
} // namespace types

/// C spelling of the type, using the <stdint.h> exact-width names.
inline std::string c_type_name(ScalarType t)
{
    if (t.is_float())
        return t.width == 32 ? "float" : "double";
    return std::string(t.is_signed() ? "int" : "uint") + std::to_string(t.width) + "_t";
}

/// Short name used in serialized ASTs: i8..i64, u8..u64, f32, f64.
inline std::string short_type_name(ScalarType t)
{
    char prefix = t.is_float() ? 'f' : (t.is_signed() ? 'i' : 'u');
    return prefix + std::to_string(t.width);
}

inline std::optional<ScalarType> parse_short_type_name(std::string_view s)
{
    for (ScalarType t : types::all)
        if (short_type_name(t) == s)
            return t;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Variables

struct VarId {
    std::string name;
    std::uint32_t index = 0;

    friend bool operator==(const VarId& a, const VarId& b)
    {
        return a.index == b.index && a.name == b.name;
    }
    friend std::strong_ordering operator<=>(const VarId& a, const VarId& b)
    {
        if (auto c = a.index <=> b.index; c != 0)
            return c;
        return a.name.compare(b.name) <=> 0;
    }
};

enum class VarKind : std::uint8_t {
    Local,
    ScalarParam,
    PointerParam,
    ArrayParam,
    Global,    // the array-size variable N
    LoopIndex, // induction variable of the map-reduce for loop
};

inline std::string_view to_string(VarKind k)
{
    switch (k) {
    case VarKind::Local: return "local";
    case VarKind::ScalarParam: return "scalar-param";
    case VarKind::PointerParam: return "pointer-param";
    case VarKind::ArrayParam: return "array-param";
    case VarKind::Global: return "global";
    case VarKind::LoopIndex: return "loop-index";
    }
    return "?";
}

inline std::optional<VarKind> parse_var_kind(std::string_view s)
{
    for (VarKind k : {VarKind::Local, VarKind::ScalarParam, VarKind::PointerParam,
                      VarKind::ArrayParam, VarKind::Global, VarKind::LoopIndex})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

/// For pointer and array parameters `type` is the pointee/element type.
struct Variable {
    VarId id;
    ScalarType type;
    VarKind kind = VarKind::Local;

    bool is_param() const
    {
        return kind == VarKind::ScalarParam || kind == VarKind::PointerParam ||
               kind == VarKind::ArrayParam;
    }
    bool assignable() const { return kind == VarKind::Local; }

    friend bool operator==(const Variable&, const Variable&) = default;
};

// ---------------------------------------------------------------------------
// Live sets

/// Finite set of variables, kept sorted by VarId.
class LiveSet {
public:
    LiveSet() = default;
    LiveSet(std::initializer_list<VarId> ids)
    {
        for (const auto& id : ids)
            insert(id);
    }

    bool empty() const { return ids_.empty(); }
    std::size_t size() const { return ids_.size(); }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }

    bool contains(const VarId& id) const
    {
        return std::binary_search(ids_.begin(), ids_.end(), id);
    }

    bool insert(const VarId& id)
    {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it != ids_.end() && *it == id)
            return false;
        ids_.insert(it, id);
        return true;
    }

    bool erase(const VarId& id)
    {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || !(*it == id))
            return false;
        ids_.erase(it);
        return true;
    }

    LiveSet& operator|=(const LiveSet& other)
    {
        std::vector<VarId> out;
        out.reserve(ids_.size() + other.ids_.size());
        std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                       std::back_inserter(out));
        ids_ = std::move(out);
        return *this;
    }

    LiveSet& operator-=(const LiveSet& other)
    {
        std::vector<VarId> out;
        out.reserve(ids_.size());
        std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                            std::back_inserter(out));
        ids_ = std::move(out);
        return *this;
    }

    friend LiveSet operator|(LiveSet a, const LiveSet& b) { return a |= b; }
    friend LiveSet operator-(LiveSet a, const LiveSet& b) { return a -= b; }

    LiveSet intersect(const LiveSet& other) const
    {
        LiveSet r;
        std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                              std::back_inserter(r.ids_));
        return r;
    }

    bool subset_of(const LiveSet& other) const
    {
        return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
    }

    const std::vector<VarId>& ids() const { return ids_; }

    friend bool operator==(const LiveSet&, const LiveSet&) = default;

private:
    std::vector<VarId> ids_;
};

inline std::string to_string(const LiveSet& s)
{
    std::string out = "{";
    bool first = true;
    for (const auto& id : s) {
        if (!first)
            out += ", ";
        out += id.name;
        first = false;
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// Expressions

enum class UnaryOp : std::uint8_t { Negate, BitNot, LogNot };

enum class BinaryOp : std::uint8_t {
    Add, Sub, Mul, Div, Mod,
    Shl, Shr, BitAnd, BitOr, BitXor,
    Lt, Gt, Le, Ge, Eq, Ne,
    LogAnd, LogOr,
};

inline constexpr BinaryOp all_binary_ops[] = {
    BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Mod,
    BinaryOp::Shl, BinaryOp::Shr, BinaryOp::BitAnd, BinaryOp::BitOr, BinaryOp::BitXor,
    BinaryOp::Lt, BinaryOp::Gt, BinaryOp::Le, BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne,
    BinaryOp::LogAnd, BinaryOp::LogOr,
};

inline std::string_view op_token(BinaryOp op)
{
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Shl: return "<<";
    case BinaryOp::Shr: return ">>";
    case BinaryOp::BitAnd: return "&";
    case BinaryOp::BitOr: return "|";
    case BinaryOp::BitXor: return "^";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::LogAnd: return "&&";
    case BinaryOp::LogOr: return "||";
    }
    return "?";
}

inline std::string_view op_token(UnaryOp op)
{
    switch (op) {
    case UnaryOp::Negate: return "-";
    case UnaryOp::BitNot: return "~";
    case UnaryOp::LogNot: return "!";
    }
    return "?";
}

inline std::optional<BinaryOp> parse_binary_op(std::string_view s)
{
    for (BinaryOp op : all_binary_ops)
        if (op_token(op) == s)
            return op;
    return std::nullopt;
}

inline std::optional<UnaryOp> parse_unary_op(std::string_view s)
{
    for (UnaryOp op : {UnaryOp::Negate, UnaryOp::BitNot, UnaryOp::LogNot})
        if (op_token(op) == s)
            return op;
    return std::nullopt;
}

inline bool is_comparison(BinaryOp op)
{
    return op >= BinaryOp::Lt && op <= BinaryOp::Ne;
}
inline bool is_logical(BinaryOp op) { return op == BinaryOp::LogAnd || op == BinaryOp::LogOr; }
inline bool is_shift(BinaryOp op) { return op == BinaryOp::Shl || op == BinaryOp::Shr; }
inline bool is_division(BinaryOp op) { return op == BinaryOp::Div || op == BinaryOp::Mod; }

/// Operators C only defines on integer operands.
inline bool requires_integer(BinaryOp op)
{
    return op == BinaryOp::Mod || is_shift(op) || op == BinaryOp::BitAnd ||
           op == BinaryOp::BitOr || op == BinaryOp::BitXor;
}

/// Bitwise in the feature-flag sense: &, |, ^, shifts (and unary ~).
inline bool is_bitwise(BinaryOp op)
{
    return is_shift(op) || op == BinaryOp::BitAnd || op == BinaryOp::BitOr ||
           op == BinaryOp::BitXor;
}

struct Expression;
using ExprPtr = std::shared_ptr<const Expression>;

/// Signed integers are held as int64, unsigned as uint64, floats as double.
using LiteralValue = std::variant<std::int64_t, std::uint64_t, double>;

struct Literal {
    LiteralValue value;
    ScalarType type;
};

struct VarRef {
    VarId var;
    ScalarType type;
};

struct Unary {
    UnaryOp op;
    ExprPtr operand;
};

struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Cast {
    ScalarType type;
    ExprPtr operand;
};

/// `*p` for a pointer parameter; `type` is the pointee type.
struct Deref {
    VarId pointer;
    ScalarType type;
};

/// `arr[i]`; only legal inside the element expression of a map-reduce loop.
struct Index {
    VarId array;
    ScalarType type;
    ExprPtr index;
};

struct Expression {
    std::variant<Literal, VarRef, Unary, Binary, Cast, Deref, Index> node;

    template <class T>
    const T* as() const { return std::get_if<T>(&node); }
};

/// Integer type in which C evaluates comparisons and logical operators.
inline constexpr ScalarType condition_type = types::i32;

inline ScalarType type_of(const Expression& e)
{
    return std::visit(
        [](const auto& n) -> ScalarType {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Literal> || std::is_same_v<T, VarRef> ||
                          std::is_same_v<T, Cast> || std::is_same_v<T, Deref> ||
                          std::is_same_v<T, Index>)
                return n.type;
            else if constexpr (std::is_same_v<T, Unary>)
                return n.op == UnaryOp::LogNot ? condition_type : type_of(*n.operand);
            else {
                if (is_comparison(n.op) || is_logical(n.op))
                    return condition_type;
                return type_of(*n.lhs);
            }
        },
        e.node);
}

// ---------------------------------------------------------------------------
// Statements

struct Statement;
using StmtPtr = std::shared_ptr<const Statement>;

struct Assign {
    VarId target;
    ExprPtr rhs;
};

struct Return {
    VarId var;
};

struct EmptyBlock {};

struct Sequence {
    StmtPtr first;
    StmtPtr second;
};

struct If {
    ExprPtr cond;
    StmtPtr then_branch;
    StmtPtr else_branch;
};

struct While {
    ExprPtr cond;
    StmtPtr body;
};

/// for (i = 0; i < bound; i++) accumulator = accumulator <combine> element;
struct ForMapReduce {
    VarId accumulator;
    VarId array;
    VarId bound;
    VarId index;
    BinaryOp combine;
    ExprPtr element;
};

struct Statement {
    std::variant<Assign, Return, EmptyBlock, Sequence, If, While, ForMapReduce> node;

    template <class T>
    const T* as() const { return std::get_if<T>(&node); }
};

// ---------------------------------------------------------------------------
// Functions

struct FunctionDef {
    std::string name = "f";
    std::vector<Variable> params;
    /// Locals, including the loop index of map-reduce loops (declared in the
    /// loop header when emitted).
    std::vector<Variable> locals;
    std::vector<Assign> initializers;
    StmtPtr body;
    VarId return_var;
    std::optional<Variable> array_size;

    const Variable* find(const VarId& id) const
    {
        for (const auto& v : params)
            if (v.id == id)
                return &v;
        for (const auto& v : locals)
            if (v.id == id)
                return &v;
        if (array_size && array_size->id == id)
            return &*array_size;
        return nullptr;
    }

    const Variable* find(std::string_view name) const
    {
        for (const auto& v : params)
            if (v.id.name == name)
                return &v;
        for (const auto& v : locals)
            if (v.id.name == name)
                return &v;
        if (array_size && array_size->id.name == name)
            return &*array_size;
        return nullptr;
    }

    std::vector<Variable> all_variables() const
    {
        std::vector<Variable> out = params;
        out.insert(out.end(), locals.begin(), locals.end());
        if (array_size)
            out.push_back(*array_size);
        return out;
    }

    ScalarType return_type() const
    {
        const Variable* v = find(return_var);
        if (!v)
            throw std::logic_error("return variable '" + return_var.name + "' is not declared");
        return v->type;
    }
};

// ---------------------------------------------------------------------------
// Builders

namespace build {

inline ExprPtr make(Expression e) { return std::make_shared<const Expression>(std::move(e)); }
inline StmtPtr make(Statement s) { return std::make_shared<const Statement>(std::move(s)); }

inline ExprPtr lit(std::int64_t v, ScalarType t = types::i32)
{
    if (t.is_float())
        return make({Literal{static_cast<double>(v), t}});
    if (!t.is_signed())
        return make({Literal{static_cast<std::uint64_t>(v), t}});
    return make({Literal{v, t}});
}
inline ExprPtr lit_unsigned(std::uint64_t v, ScalarType t) { return make({Literal{v, t}}); }
inline ExprPtr lit_float(double v, ScalarType t = types::f64) { return make({Literal{v, t}}); }

inline ExprPtr ref(const Variable& v) { return make({VarRef{v.id, v.type}}); }
inline ExprPtr deref(const Variable& p) { return make({Deref{p.id, p.type}}); }
inline ExprPtr index(const Variable& arr, ExprPtr i) { return make({Index{arr.id, arr.type, std::move(i)}}); }
inline ExprPtr unary(UnaryOp op, ExprPtr e) { return make({Unary{op, std::move(e)}}); }
inline ExprPtr binary(BinaryOp op, ExprPtr a, ExprPtr b)
{
    return make({Binary{op, std::move(a), std::move(b)}});
}
inline ExprPtr cast(ScalarType t, ExprPtr e) { return make({Cast{t, std::move(e)}}); }

/// Casts only when the operand type differs from `t`.
inline ExprPtr convert(ScalarType t, ExprPtr e)
{
    if (type_of(*e) == t)
        return e;
    return cast(t, std::move(e));
}

inline StmtPtr assign(const VarId& v, ExprPtr e) { return make({Assign{v, std::move(e)}}); }
inline StmtPtr assign(const Variable& v, ExprPtr e) { return assign(v.id, std::move(e)); }
inline StmtPtr ret(const Variable& v) { return make({Return{v.id}}); }
inline StmtPtr empty() { return make({EmptyBlock{}}); }
inline StmtPtr seq(StmtPtr a, StmtPtr b) { return make({Sequence{std::move(a), std::move(b)}}); }
inline StmtPtr if_else(ExprPtr c, StmtPtr t, StmtPtr f)
{
    return make({If{std::move(c), std::move(t), std::move(f)}});
}
inline StmtPtr while_loop(ExprPtr c, StmtPtr body) { return make({While{std::move(c), std::move(body)}}); }

/// Right-nested sequence of the statements; EmptyBlock for an empty list.
inline StmtPtr block(const std::vector<StmtPtr>& stmts)
{
    if (stmts.empty())
        return empty();
    StmtPtr acc = stmts.back();
    for (auto it = stmts.rbegin() + 1; it != stmts.rend(); ++it)
        acc = seq(*it, acc);
    return acc;
}

} // namespace build

/// Flattens nested Sequence nodes into the list of their non-sequence leaves,
/// dropping EmptyBlocks.
inline void flatten(const StmtPtr& s, std::vector<StmtPtr>& out)
{
    if (const auto* q = s->as<Sequence>()) {
        flatten(q->first, out);
        flatten(q->second, out);
    } else if (!s->as<EmptyBlock>()) {
        out.push_back(s);
    }
}

inline std::vector<StmtPtr> flatten(const StmtPtr& s)
{
    std::vector<StmtPtr> out;
    flatten(s, out);
    return out;
}

// ---------------------------------------------------------------------------
// Free variables

inline void collect_free_vars(const Expression& e, LiveSet& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, VarRef>)
                out.insert(n.var);
            else if constexpr (std::is_same_v<T, Deref>)
                out.insert(n.pointer);
            else if constexpr (std::is_same_v<T, Index>) {
                out.insert(n.array);
                collect_free_vars(*n.index, out);
            } else if constexpr (std::is_same_v<T, Unary> || std::is_same_v<T, Cast>)
                collect_free_vars(*n.operand, out);
            else if constexpr (std::is_same_v<T, Binary>) {
                collect_free_vars(*n.lhs, out);
                collect_free_vars(*n.rhs, out);
            }
        },
        e.node);
}

/// Variables occurring syntactically in `e`. `*p` contributes p and `a[i]`
/// contributes a together with the variables of the index.
inline LiveSet free_vars(const Expression& e)
{
    LiveSet out;
    collect_free_vars(e, out);
    return out;
}

/// Every variable read anywhere inside `s` (conditions, right-hand sides,
/// returned variables, loop operands).
inline void collect_used_vars(const Statement& s, LiveSet& out)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Assign>)
                collect_free_vars(*n.rhs, out);
            else if constexpr (std::is_same_v<T, Return>)
                out.insert(n.var);
            else if constexpr (std::is_same_v<T, Sequence>) {
                collect_used_vars(*n.first, out);
                collect_used_vars(*n.second, out);
            } else if constexpr (std::is_same_v<T, If>) {
                collect_free_vars(*n.cond, out);
                collect_used_vars(*n.then_branch, out);
                collect_used_vars(*n.else_branch, out);
            } else if constexpr (std::is_same_v<T, While>) {
                collect_free_vars(*n.cond, out);
                collect_used_vars(*n.body, out);
            } else if constexpr (std::is_same_v<T, ForMapReduce>) {
                out.insert(n.accumulator);
                out.insert(n.bound);
                out.insert(n.index);
                collect_free_vars(*n.element, out);
            }
        },
        s.node);
}

inline LiveSet used_vars(const Statement& s)
{
    LiveSet out;
    collect_used_vars(s, out);
    return out;
}

/// Statement paths address nodes of the statement tree: Sequence children
/// are 0 (first) and 1 (second), If branches 0 (then) and 1 (else), a While
/// body is 0, and the combine assignment of a map-reduce loop is 0 (its
/// implicit index initialization and increment are 1 and 2).
using StmtPath = std::vector<int>;

inline std::string to_string(const StmtPath& p)
{
    std::string out = "body";
    for (int i : p)
        out += "/" + std::to_string(i);
    return out;
}

/// Node at `path` below `root`, or nullptr if the path does not resolve to a
/// statement node.
inline const Statement* resolve(const Statement& root, const StmtPath& path)
{
    const Statement* cur = &root;
    for (int step : path) {
        if (const auto* q = cur->as<Sequence>())
            cur = step == 0 ? q->first.get() : step == 1 ? q->second.get() : nullptr;
        else if (const auto* i = cur->as<If>())
            cur = step == 0 ? i->then_branch.get() : step == 1 ? i->else_branch.get() : nullptr;
        else if (const auto* w = cur->as<While>())
            cur = step == 0 ? w->body.get() : nullptr;
        else
            return nullptr;
        if (!cur)
            return nullptr;
    }
    return cur;
}

} // namespace livegen
