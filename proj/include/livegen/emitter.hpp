#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <vector>

#include "ast.hpp"

namespace livegen {

struct EmitOptions {
    int indent_width = 4;
    /// Text of the leading block comment (e.g. seed and configuration);
    /// empty for none.
    std::string header_comment;
};

namespace detail {

inline std::string format_float(double v, ScalarType t)
{
    char buf[64];
    auto res = t.width == 32 ? std::to_chars(buf, buf + sizeof buf, static_cast<float>(v))
                             : std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    if (t.width == 32)
        s += "f";
    return s;
}

inline std::string format_literal(const Literal& l)
{
    const ScalarType t = l.type;
    if (t.is_float()) {
        double v = std::get<double>(l.value);
        std::string s = format_float(v, t);
        return v < 0 || std::signbit(v) ? "(" + s + ")" : s;
    }
    if (!t.is_signed()) {
        std::uint64_t v = std::get<std::uint64_t>(l.value);
        switch (t.width) {
        case 32: return std::to_string(v) + "u";
        case 64: return std::to_string(v) + "ull";
        default: return "((" + c_type_name(t) + ")" + std::to_string(v) + "u)";
        }
    }
    std::int64_t v = std::get<std::int64_t>(l.value);
    std::string digits;
    if (t.width == 64 && v == INT64_MIN)
        digits = "(-9223372036854775807LL - 1)";
    else if (t.width == 64)
        digits = v < 0 ? "(" + std::to_string(v) + "LL)" : std::to_string(v) + "LL";
    else if (v == INT32_MIN)
        digits = "(-2147483647 - 1)";
    else
        digits = v < 0 ? "(" + std::to_string(v) + ")" : std::to_string(v);
    if (t.width == 32)
        return digits;
    return "((" + c_type_name(t) + ")" + digits + ")";
}

class CEmitter {
public:
    explicit CEmitter(const EmitOptions& opts) : opts_(opts) {}

    std::string function(const FunctionDef& f)
    {
        if (!opts_.header_comment.empty())
            out_ += "/* " + opts_.header_comment + " */\n";
        out_ += "#include <stdint.h>\n\n";
        if (f.array_size)
            out_ += "extern " + c_type_name(f.array_size->type) + " " + f.array_size->id.name + ";\n\n";

        out_ += c_type_name(f.return_type()) + " " + f.name + "(";
        if (f.params.empty())
            out_ += "void";
        for (std::size_t i = 0; i < f.params.size(); ++i) {
            const Variable& p = f.params[i];
            if (i)
                out_ += ", ";
            out_ += c_type_name(p.type) + (p.kind == VarKind::ScalarParam ? " " : " *") + p.id.name;
        }
        out_ += ")\n{\n";

        ++level_;
        for (const Variable& v : f.locals) {
            if (v.kind == VarKind::LoopIndex)
                continue;
            std::string decl = c_type_name(v.type) + " " + v.id.name;
            for (const Assign& init : f.initializers)
                if (init.target == v.id) {
                    decl += " = " + expr(*init.rhs);
                    break;
                }
            line(decl + ";");
        }
        statements(f.body);
        --level_;
        out_ += "}\n";
        return std::move(out_);
    }

    std::string expr(const Expression& e)
    {
        return std::visit([&](const auto& n) { return node(n); }, e.node);
    }

    void statement(const StmtPtr& s) { statements(s); }
    std::string take() { return std::move(out_); }

private:
    void line(const std::string& text)
    {
        out_.append(static_cast<std::size_t>(level_ * opts_.indent_width), ' ');
        out_ += text;
        out_ += '\n';
    }

    void statements(const StmtPtr& s)
    {
        for (const StmtPtr& st : flatten(s))
            single(*st);
    }

    void nested(const StmtPtr& s)
    {
        ++level_;
        statements(s);
        --level_;
    }

    void single(const Statement& s)
    {
        if (const auto* a = s.as<Assign>()) {
            line(a->target.name + " = " + expr(*a->rhs) + ";");
        } else if (const auto* r = s.as<Return>()) {
            line("return " + r->var.name + ";");
        } else if (const auto* i = s.as<If>()) {
            line("if (" + expr(*i->cond) + ") {");
            nested(i->then_branch);
            line("} else {");
            nested(i->else_branch);
            line("}");
        } else if (const auto* w = s.as<While>()) {
            line("while (" + expr(*w->cond) + ") {");
            nested(w->body);
            line("}");
        } else if (const auto* fm = s.as<ForMapReduce>()) {
            const std::string& i = fm->index.name;
            line("for (unsigned int " + i + " = 0; " + i + " < " + fm->bound.name + "; " + i + "++) {");
            ++level_;
            line(fm->accumulator.name + " = (" + fm->accumulator.name + " " + std::string(op_token(fm->combine)) +
                 " " + expr(*fm->element) + ");");
            --level_;
            line("}");
        }
    }

    std::string node(const Literal& l) { return format_literal(l); }
    std::string node(const VarRef& r) { return r.var.name; }
    std::string node(const Deref& d) { return "(*" + d.pointer.name + ")"; }
    std::string node(const Index& ix) { return ix.array.name + "[" + expr(*ix.index) + "]"; }
    std::string node(const Cast& c) { return "((" + c_type_name(c.type) + ")" + expr(*c.operand) + ")"; }
    std::string node(const Unary& u) { return "(" + std::string(op_token(u.op)) + expr(*u.operand) + ")"; }
    std::string node(const Binary& b)
    {
        return "(" + expr(*b.lhs) + " " + std::string(op_token(b.op)) + " " + expr(*b.rhs) + ")";
    }

    const EmitOptions& opts_;
    std::string out_;
    int level_ = 0;
};

} // namespace detail

/// C99 translation unit holding the function: <stdint.h> preamble, the
/// extern array-size global when used, declarations of all locals (live-in
/// locals carry their initializer), and a fully parenthesized body.
inline std::string emit_function(const FunctionDef& f, const EmitOptions& opts = {})
{
    return detail::CEmitter(opts).function(f);
}

inline std::string emit_expression(const Expression& e)
{
    EmitOptions opts;
    return detail::CEmitter(opts).expr(e);
}

} // namespace livegen
