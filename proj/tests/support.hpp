#pragma once

// Fixtures and helpers shared by the unit tests and the acceptance runner.

#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <livegen/ast.hpp>

namespace livegen::fixtures {

/// a = 0; b = 1; while (n > 0) { t = a + b; a = b; b = t; n = n - 1 } return a
/// with n a local initialized from the parameter n_in.
inline FunctionDef fibonacci()
{
    using namespace build;
    const Variable n_in{{"n_in", 0}, types::i32, VarKind::ScalarParam};
    const Variable n{{"n", 1}, types::i32, VarKind::Local};
    const Variable a{{"a", 2}, types::i32, VarKind::Local};
    const Variable b{{"b", 3}, types::i32, VarKind::Local};
    const Variable t{{"t", 4}, types::i32, VarKind::Local};

    StmtPtr loop_body = block({assign(t, binary(BinaryOp::Add, ref(a), ref(b))), assign(a, ref(b)),
                               assign(b, ref(t)), assign(n, binary(BinaryOp::Sub, ref(n), lit(1)))});
    FunctionDef f;
    f.name = "fib";
    f.params = {n_in};
    f.locals = {n, a, b, t};
    f.initializers = {{n.id, ref(n_in)}};
    f.body = block({assign(a, lit(0)), assign(b, lit(1)),
                    while_loop(binary(BinaryOp::Gt, ref(n), lit(0)), loop_body), ret(a)});
    f.return_var = a.id;
    return f;
}

/// Path of the while loop inside fibonacci(): third statement of the body.
inline const StmtPath fibonacci_loop_path{1, 1, 0};

/// x = a; x = b; return x, with a and b parameters.
inline FunctionDef dead_store()
{
    using namespace build;
    const Variable a{{"a", 0}, types::i32, VarKind::ScalarParam};
    const Variable b{{"b", 1}, types::i32, VarKind::ScalarParam};
    const Variable x{{"x", 2}, types::i32, VarKind::Local};
    FunctionDef f;
    f.params = {a, b};
    f.locals = {x};
    f.body = block({assign(x, ref(a)), assign(x, ref(b)), ret(x)});
    f.return_var = x.id;
    return f;
}

inline void collect_assign_paths(const Statement& s, StmtPath& path, std::vector<StmtPath>& out)
{
    auto child = [&](const Statement& c, int step) {
        path.push_back(step);
        collect_assign_paths(c, path, out);
        path.pop_back();
    };
    if (s.as<Assign>())
        out.push_back(path);
    else if (const auto* q = s.as<Sequence>()) {
        child(*q->first, 0);
        child(*q->second, 1);
    } else if (const auto* i = s.as<If>()) {
        child(*i->then_branch, 0);
        child(*i->else_branch, 1);
    } else if (const auto* w = s.as<While>()) {
        child(*w->body, 0);
    }
}

/// Paths of the explicit Assign statements of `s`.
inline std::vector<StmtPath> assign_paths(const Statement& s)
{
    std::vector<StmtPath> out;
    StmtPath path;
    collect_assign_paths(s, path, out);
    return out;
}

/// Copy of `root` with the node at `path` replaced by `replacement`.
inline StmtPtr replace_at(const StmtPtr& root, const StmtPath& path, std::size_t depth, StmtPtr replacement)
{
    if (depth == path.size())
        return replacement;
    const int step = path[depth];
    auto sub = [&](const StmtPtr& c) { return replace_at(c, path, depth + 1, replacement); };
    if (const auto* q = root->as<Sequence>())
        return step == 0 ? build::seq(sub(q->first), q->second) : build::seq(q->first, sub(q->second));
    if (const auto* i = root->as<If>())
        return step == 0 ? build::if_else(i->cond, sub(i->then_branch), i->else_branch)
                         : build::if_else(i->cond, i->then_branch, sub(i->else_branch));
    const auto& w = std::get<While>(root->node);
    return build::while_loop(w.cond, sub(w.body));
}

inline StmtPtr replace_at(const StmtPtr& root, const StmtPath& path, StmtPtr replacement)
{
    return replace_at(root, path, 0, std::move(replacement));
}

/// Source text with /* */ and // comments blanked out.
inline std::string strip_comments(std::string_view src)
{
    std::string out;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src.compare(i, 2, "/*") == 0) {
            std::size_t end = src.find("*/", i + 2);
            i = end == std::string_view::npos ? src.size() : end + 1;
            out += ' ';
        } else if (src.compare(i, 2, "//") == 0) {
            std::size_t end = src.find('\n', i);
            i = end == std::string_view::npos ? src.size() : end - 1;
        } else {
            out += src[i];
        }
    }
    return out;
}

inline std::vector<std::string> identifiers(std::string_view code)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < code.size();) {
        if (std::isalpha(static_cast<unsigned char>(code[i])) || code[i] == '_') {
            std::size_t j = i;
            while (j < code.size() && (std::isalnum(static_cast<unsigned char>(code[j])) || code[j] == '_'))
                ++j;
            out.emplace_back(code.substr(i, j - i));
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(code[i]))) {
            // Skip numeric literals including suffixes such as 10ull.
            while (i < code.size() && (std::isalnum(static_cast<unsigned char>(code[i])) || code[i] == '.'))
                ++i;
        } else {
            ++i;
        }
    }
    return out;
}

/// Violations of the flag contract found by a syntactic scan; each entry
/// names the offending token.
inline std::vector<std::string> scan_int_only(std::string_view src)
{
    std::vector<std::string> bad;
    std::string code = strip_comments(src);
    for (const auto& id : identifiers(code))
        if (id == "float" || id == "double")
            bad.push_back(id);
    for (std::size_t i = 0; i < code.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(code[i])) ||
            (i > 0 && (std::isalnum(static_cast<unsigned char>(code[i - 1])) || code[i - 1] == '_')))
            continue;
        std::size_t j = i;
        while (j < code.size() && (std::isalnum(static_cast<unsigned char>(code[j])) || code[j] == '.'))
            ++j;
        std::string lit = code.substr(i, j - i);
        if (lit.find('.') != std::string::npos || lit.find_first_of("eE") != std::string::npos)
            bad.push_back(lit);
        i = j;
    }
    return bad;
}

inline std::vector<std::string> scan_no_division(std::string_view src)
{
    std::vector<std::string> bad;
    for (char c : strip_comments(src))
        if (c == '/' || c == '%')
            bad.emplace_back(1, c);
    return bad;
}

inline std::vector<std::string> scan_no_bitwise(std::string_view src)
{
    std::vector<std::string> bad;
    std::string code = strip_comments(src);
    for (std::size_t i = 0; i < code.size(); ++i) {
        char c = code[i];
        if ((c == '&' || c == '|') && i + 1 < code.size() && code[i + 1] == c) {
            ++i; // && and || are logical
            continue;
        }
        if (c == '&' || c == '|' || c == '^' || c == '~')
            bad.emplace_back(1, c);
        else if ((c == '<' || c == '>') && i + 1 < code.size() && code[i + 1] == c)
            bad.emplace_back(2, c);
    }
    return bad;
}

inline std::vector<std::string> scan_no_loops(std::string_view src)
{
    std::vector<std::string> bad;
    for (const auto& id : identifiers(strip_comments(src)))
        if (id == "while" || id == "for" || id == "do" || id == "goto")
            bad.push_back(id);
    return bad;
}

} // namespace livegen::fixtures
