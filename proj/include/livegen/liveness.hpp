#pragma once

// Structural liveness: a bottom-up evaluation of the liveness inference
// rules (Return, Skip, Assign, Sequence, If, While). Each rule computes the
// live-in set from the live-out set and checks the rule's side conditions;
// a statement is fully live iff no side condition fails.

#include <string>
#include <vector>

#include "ast.hpp"

namespace livegen {

struct LivenessViolation {
    StmtPath location;
    /// One of: assign-target-dead, empty-live-set-skip,
    /// empty-live-set-sequence, while-liveout-empty, non-minimal-fixed-point,
    /// return-liveout-nonempty.
    std::string rule;
    std::string detail;
};

/// {live_in} statement {live_out} as it appears in the derivation.
struct LivenessTriple {
    LiveSet live_in;
    const Statement* statement = nullptr;
    StmtPath path;
    LiveSet live_out;
};

struct LivenessResult {
    LiveSet live_in;
    std::vector<LivenessViolation> violations;
    std::vector<LivenessTriple> triples;

    bool ok() const { return violations.empty(); }

    const LivenessTriple* triple_at(const StmtPath& p) const
    {
        for (const auto& t : triples)
            if (t.path == p)
                return &t;
        return nullptr;
    }
};

/// (live_out \ {target}) ∪ FV(rhs)
inline LiveSet transfer_assign(const LiveSet& live_out, const VarId& target, const Expression& rhs)
{
    LiveSet in = live_out;
    in.erase(target);
    collect_free_vars(rhs, in);
    return in;
}

namespace detail {

class StructuralLiveness {
public:
    explicit StructuralLiveness(bool record) : record_(record) {}

    LiveSet eval(const Statement& s, const LiveSet& out, StmtPath& path)
    {
        LiveSet in = std::visit([&](const auto& n) { return rule(n, out, path); }, s.node);
        if (record_)
            result_.triples.push_back({in, &s, path, out});
        return in;
    }

    LivenessResult take(LiveSet live_in)
    {
        result_.live_in = std::move(live_in);
        return std::move(result_);
    }

private:
    void violation(const StmtPath& at, const char* rule, std::string detail)
    {
        if (record_)
            result_.violations.push_back({at, rule, std::move(detail)});
    }

    LiveSet child(const Statement& s, const LiveSet& out, StmtPath& path, int step)
    {
        path.push_back(step);
        LiveSet in = eval(s, out, path);
        path.pop_back();
        return in;
    }

    LiveSet rule(const Return& r, const LiveSet& out, StmtPath& path)
    {
        if (!out.empty())
            violation(path, "return-liveout-nonempty", "live after return: " + to_string(out));
        return LiveSet{r.var};
    }

    LiveSet rule(const EmptyBlock&, const LiveSet& out, StmtPath& path)
    {
        if (out.empty())
            violation(path, "empty-live-set-skip", "empty block with empty live set");
        return out;
    }

    LiveSet rule(const Assign& a, const LiveSet& out, StmtPath& path)
    {
        if (!out.contains(a.target))
            violation(path, "assign-target-dead", a.target.name + " is not live after the assignment");
        return transfer_assign(out, a.target, *a.rhs);
    }

    LiveSet rule(const Sequence& q, const LiveSet& out, StmtPath& path)
    {
        LiveSet mid = child(*q.second, out, path, 1);
        if (mid.empty())
            violation(path, "empty-live-set-sequence", "nothing live between the two statements");
        return child(*q.first, mid, path, 0);
    }

    LiveSet rule(const If& i, const LiveSet& out, StmtPath& path)
    {
        LiveSet in = child(*i.then_branch, out, path, 0);
        in |= child(*i.else_branch, out, path, 1);
        collect_free_vars(*i.cond, in);
        return in;
    }

    LiveSet rule(const While& w, const LiveSet& out, StmtPath& path)
    {
        if (out.empty())
            violation(path, "while-liveout-empty", "loop with empty live-out set");
        LiveSet base = out | free_vars(*w.cond);

        // Ascending Kleene iteration of B -> out ∪ FV(c) ∪ f_body(B).
        LiveSet body_out = base;
        for (;;) {
            LiveSet next = base | quiet(*w.body, body_out);
            if (next == body_out)
                break;
            body_out = std::move(next);
        }

        LiveSet body_in = child(*w.body, body_out, path, 0);

        LiveSet used = used_vars(*w.body);
        for (const VarId& b : body_out - base)
            if (!used.contains(b))
                violation(path, "non-minimal-fixed-point", b.name + " is loop-carried but never used in the body");

        // The condition is evaluated before the body, so its variables are
        // live into the loop even when the body redefines them first.
        return body_in | base;
    }

    LiveSet rule(const ForMapReduce& fm, const LiveSet& out, StmtPath& path)
    {
        // Desugared: i = 0; while (i < N) { acc = acc op f(arr[i]); i = i + 1; }
        if (out.empty())
            violation(path, "while-liveout-empty", "loop with empty live-out set");
        LiveSet base = out;
        base.insert(fm.index);
        base.insert(fm.bound);

        LiveSet combine_reads = free_vars(*fm.element);
        combine_reads.insert(fm.accumulator);
        auto body_in = [&](const LiveSet& b) {
            LiveSet after_combine = b; // i = i + 1 kills i and reads it again
            after_combine.insert(fm.index);
            LiveSet in = after_combine;
            in.erase(fm.accumulator);
            in |= combine_reads;
            return std::pair{after_combine, in};
        };

        LiveSet body_out = base;
        for (;;) {
            LiveSet next = base | body_in(body_out).second;
            if (next == body_out)
                break;
            body_out = std::move(next);
        }

        auto [combine_out, loop_body_in] = body_in(body_out);
        StmtPath at = path;
        at.push_back(2);
        if (!body_out.contains(fm.index))
            violation(at, "assign-target-dead", fm.index.name + " increment is dead");
        at.back() = 0;
        if (!combine_out.contains(fm.accumulator))
            violation(at, "assign-target-dead", fm.accumulator.name + " is not live after the combine step");

        LiveSet loop_in = loop_body_in | base;
        at.back() = 1;
        if (!loop_in.contains(fm.index))
            violation(at, "assign-target-dead", fm.index.name + " initialization is dead");
        loop_in.erase(fm.index);
        return loop_in;
    }

    LiveSet quiet(const Statement& s, const LiveSet& out)
    {
        StructuralLiveness inner(false);
        StmtPath scratch;
        return inner.eval(s, out, scratch);
    }

    bool record_;
    LivenessResult result_;
};

} // namespace detail

/// Live-in set of `s` under `live_out`, without checking any side
/// condition. This is the plain transfer function of the statement.
inline LiveSet transfer(const Statement& s, const LiveSet& live_out)
{
    detail::StructuralLiveness engine(false);
    StmtPath path;
    return engine.eval(s, live_out, path);
}

/// Derives {L_in} s {live_out}. Every violated side condition found in the
/// single bottom-up pass is reported; live_in is always the transfer result.
inline LivenessResult live_in(const Statement& s, const LiveSet& live_out)
{
    detail::StructuralLiveness engine(true);
    StmtPath path;
    LiveSet in = engine.eval(s, live_out, path);
    return engine.take(std::move(in));
}

/// Full-liveness check of a function body against an empty live-out set.
/// Initializers are not part of the derivation; they exist to define the
/// body's live-in variables.
inline LivenessResult check_fully_live(const FunctionDef& f)
{
    return live_in(*f.body, LiveSet{});
}

} // namespace livegen
