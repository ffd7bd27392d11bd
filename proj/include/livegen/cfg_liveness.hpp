#pragma once

// Classical liveness over a control-flow graph: the structured body is
// lowered to atomic nodes (assignments, returns, condition evaluations) and
// solved by backward worklist iteration. Shares nothing with the structural
// engine beyond the AST and LiveSet, so the two can check each other.

#include <algorithm>
#include <deque>
#include <string>
#include <vector>

#include "ast.hpp"

namespace livegen {

struct CfgNode {
    enum class Kind { Assign, Return, Condition };

    Kind kind = Kind::Assign;
    VarId target;  // Assign: variable written; Return: variable returned
    LiveSet reads; // gen set
    StmtPath path; // originating statement
    std::vector<std::size_t> successors;
};

struct Cfg {
    std::vector<CfgNode> nodes;
    /// Entry node; absent when the lowered body has no nodes at all.
    std::optional<std::size_t> entry;

    std::vector<std::size_t> exits() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].successors.empty())
                out.push_back(i);
        return out;
    }

    std::size_t edge_count() const
    {
        std::size_t n = 0;
        for (const auto& node : nodes)
            n += node.successors.size();
        return n;
    }
};

namespace detail {

class CfgBuilder {
public:
    static constexpr std::size_t none = static_cast<std::size_t>(-1);

    Cfg build(const Statement& body)
    {
        StmtPath path;
        std::size_t entry = lower(body, none, path);
        if (entry != none)
            cfg_.entry = entry;
        return std::move(cfg_);
    }

private:
    std::size_t add(CfgNode node, std::size_t next)
    {
        if (next != none)
            node.successors.push_back(next);
        cfg_.nodes.push_back(std::move(node));
        return cfg_.nodes.size() - 1;
    }

    // Lowers `s` so that control continues at `next` afterwards; returns the
    // entry node of `s` (which is `next` itself for an empty block).
    std::size_t lower(const Statement& s, std::size_t next, StmtPath& path)
    {
        if (const auto* a = s.as<Assign>()) {
            return add({CfgNode::Kind::Assign, a->target, free_vars(*a->rhs), path, {}}, next);
        }
        if (const auto* r = s.as<Return>()) {
            return add({CfgNode::Kind::Return, r->var, LiveSet{r->var}, path, {}}, none);
        }
        if (s.as<EmptyBlock>())
            return next;
        if (const auto* q = s.as<Sequence>()) {
            path.push_back(1);
            std::size_t second = lower(*q->second, next, path);
            path.back() = 0;
            std::size_t first = lower(*q->first, second, path);
            path.pop_back();
            return first;
        }
        if (const auto* i = s.as<If>()) {
            path.push_back(0);
            std::size_t then_entry = lower(*i->then_branch, next, path);
            path.back() = 1;
            std::size_t else_entry = lower(*i->else_branch, next, path);
            path.pop_back();
            CfgNode cond{CfgNode::Kind::Condition, {}, free_vars(*i->cond), path, {}};
            for (std::size_t succ : {then_entry, else_entry})
                if (succ != none)
                    cond.successors.push_back(succ);
            return add(std::move(cond), none);
        }
        if (const auto* w = s.as<While>()) {
            std::size_t cond = add({CfgNode::Kind::Condition, {}, free_vars(*w->cond), path, {}}, none);
            path.push_back(0);
            std::size_t body_entry = lower(*w->body, cond, path);
            path.pop_back();
            cfg_.nodes[cond].successors.push_back(body_entry);
            if (next != none)
                cfg_.nodes[cond].successors.push_back(next);
            return cond;
        }
        const auto& fm = std::get<ForMapReduce>(s.node);
        // i = 0; while (i < N) { acc = acc op f(arr[i]); i = i + 1; }
        std::size_t cond = add({CfgNode::Kind::Condition, {}, LiveSet{fm.index, fm.bound}, path, {}}, none);
        StmtPath sub = path;
        sub.push_back(2);
        std::size_t incr = add({CfgNode::Kind::Assign, fm.index, LiveSet{fm.index}, sub, {}}, cond);
        LiveSet reads = free_vars(*fm.element);
        reads.insert(fm.accumulator);
        sub.back() = 0;
        std::size_t combine = add({CfgNode::Kind::Assign, fm.accumulator, reads, sub, {}}, incr);
        cfg_.nodes[cond].successors.push_back(combine);
        if (next != none)
            cfg_.nodes[cond].successors.push_back(next);
        sub.back() = 1;
        return add({CfgNode::Kind::Assign, fm.index, LiveSet{}, sub, {}}, cond);
    }

    Cfg cfg_;
};

} // namespace detail

/// Lowers the function body. Initializers are not part of the graph.
inline Cfg build_cfg(const FunctionDef& f)
{
    return detail::CfgBuilder{}.build(*f.body);
}

inline Cfg build_cfg(const Statement& s)
{
    return detail::CfgBuilder{}.build(s);
}

struct DataflowSolution {
    std::vector<LiveSet> live_in;
    std::vector<LiveSet> live_out;
};

enum class WorklistOrder { Fifo, Lifo, ReversePostorder };

/// Least solution of live_out(n) = ∪ live_in(succ), live_in(n) = gen ∪
/// (live_out \ kill), with empty live-out at exit nodes.
inline DataflowSolution solve_liveness(const Cfg& g, WorklistOrder order = WorklistOrder::Fifo)
{
    const std::size_t n = g.nodes.size();
    DataflowSolution sol{std::vector<LiveSet>(n), std::vector<LiveSet>(n)};
    std::vector<std::vector<std::size_t>> preds(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t s : g.nodes[i].successors)
            preds[s].push_back(i);

    // Initial order: exits first, then everything else. For reverse
    // postorder we use postorder of the forward graph (a good order for
    // backward problems), falling back to index order for unreached nodes.
    std::vector<std::size_t> initial;
    if (order == WorklistOrder::ReversePostorder) {
        std::vector<char> seen(n, 0);
        std::vector<std::pair<std::size_t, std::size_t>> stack;
        if (g.entry) {
            stack.push_back({*g.entry, 0});
            seen[*g.entry] = 1;
        }
        while (!stack.empty()) {
            auto& [node, next_child] = stack.back();
            if (next_child < g.nodes[node].successors.size()) {
                std::size_t s = g.nodes[node].successors[next_child++];
                if (!seen[s]) {
                    seen[s] = 1;
                    stack.push_back({s, 0});
                }
            } else {
                initial.push_back(node);
                stack.pop_back();
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!seen[i])
                initial.push_back(i);
    } else {
        for (std::size_t i : g.exits())
            initial.push_back(i);
        for (std::size_t i = 0; i < n; ++i)
            if (!g.nodes[i].successors.empty())
                initial.push_back(i);
        if (order == WorklistOrder::Lifo)
            std::reverse(initial.begin(), initial.end());
    }

    std::deque<std::size_t> work(initial.begin(), initial.end());
    std::vector<char> queued(n, 1);
    while (!work.empty()) {
        std::size_t i;
        if (order == WorklistOrder::Lifo) {
            i = work.back();
            work.pop_back();
        } else {
            i = work.front();
            work.pop_front();
        }
        queued[i] = 0;

        const CfgNode& node = g.nodes[i];
        LiveSet out;
        for (std::size_t s : node.successors)
            out |= sol.live_in[s];
        LiveSet in = out;
        if (node.kind == CfgNode::Kind::Assign)
            in.erase(node.target);
        in |= node.reads;

        sol.live_out[i] = std::move(out);
        if (in != sol.live_in[i]) {
            sol.live_in[i] = std::move(in);
            for (std::size_t p : preds[i])
                if (!queued[p]) {
                    queued[p] = 1;
                    work.push_back(p);
                }
        }
    }
    return sol;
}

/// Paths of every assignment whose target is not live immediately after it.
inline std::vector<StmtPath> find_dead_assignments(const Cfg& g, const DataflowSolution& sol)
{
    std::vector<StmtPath> dead;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const CfgNode& node = g.nodes[i];
        if (node.kind == CfgNode::Kind::Assign && !sol.live_out[i].contains(node.target))
            dead.push_back(node.path);
    }
    std::sort(dead.begin(), dead.end());
    return dead;
}

inline std::vector<StmtPath> find_dead_assignments(const FunctionDef& f)
{
    Cfg g = build_cfg(f);
    return find_dead_assignments(g, solve_liveness(g));
}

/// Live-in set at the function entry (empty for an empty graph).
inline LiveSet entry_live_in(const Cfg& g, const DataflowSolution& sol)
{
    return g.entry ? sol.live_in[*g.entry] : LiveSet{};
}

/// Locals that may be read before any definition, counting the
/// initializers. Empty for every finalized generator output.
inline LiveSet uninitialized_reads(const FunctionDef& f)
{
    Cfg g = build_cfg(f);
    LiveSet live = entry_live_in(g, solve_liveness(g));
    for (auto it = f.initializers.rbegin(); it != f.initializers.rend(); ++it) {
        live.erase(it->target);
        live |= free_vars(*it->rhs);
    }
    LiveSet out;
    for (const VarId& id : live) {
        const Variable* v = f.find(id);
        if (!v || v->kind == VarKind::Local || v->kind == VarKind::LoopIndex)
            out.insert(id);
    }
    return out;
}

} // namespace livegen
