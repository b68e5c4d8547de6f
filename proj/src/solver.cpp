#include "uclock/solver.hpp"

#include "uclock/preprocess.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace uclock {

namespace {

// Internal literal encoding: variable v (0-based) -> 2v positive, 2v+1 negated.
inline int mk_lit(int var0, bool neg) { return 2 * var0 + (neg ? 1 : 0); }
inline int lit_var(int lit) { return lit >> 1; }
inline bool lit_neg(int lit) { return lit & 1; }
inline int lit_not(int lit) { return lit ^ 1; }

inline int from_dimacs(int lit)
{
    int v = lit > 0 ? lit : -lit;
    return mk_lit(v - 1, lit < 0);
}

double wall_seconds()
{
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

double luby(double y, int x)
{
    int size, seq;
    for (size = 1, seq = 0; size < x + 1; ++seq, size = 2 * size + 1)
        ;
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x = x % size;
    }
    return std::pow(y, seq);
}

} // namespace

// Clause arena layout: [size][activity-slot][lit0][lit1]... per clause; a
// clause reference is the offset of its size word. Binary clauses are fully
// resolved from the watcher (the blocker is the other literal), so they
// never touch the arena during propagation.

CdclSolver::CdclSolver(int num_vars, const std::vector<std::vector<int>>& clauses)
    : nvars_(num_vars)
{
    watches_.resize(2 * static_cast<std::size_t>(nvars_));
    assign_.assign(nvars_, 0);
    level_.assign(nvars_, 0);
    reason_.assign(nvars_, -1);
    activity_.assign(nvars_, 0.0);
    heap_pos_.assign(nvars_, -1);
    phase_.assign(nvars_, -1);
    seen_.assign(nvars_, 0);
    lbd_stamp_.assign(static_cast<std::size_t>(nvars_) + 1, 0);

    std::size_t total = 0;
    for (const auto& c : clauses)
        total += c.size() + 2;
    arena_.reserve(total);

    std::vector<int> lits;
    for (const auto& raw : clauses) {
        lits.clear();
        bool tautology = false;
        for (int dl : raw) {
            int l = from_dimacs(dl);
            if (std::find(lits.begin(), lits.end(), l) != lits.end())
                continue;
            if (std::find(lits.begin(), lits.end(), lit_not(l)) != lits.end()) {
                tautology = true;
                break;
            }
            lits.push_back(l);
        }
        if (tautology)
            continue;
        if (lits.empty()) {
            contradiction_ = true;
            return;
        }
        if (lits.size() == 1) {
            units_.push_back(lits[0]);
            continue;
        }
        add_clause_internal(lits, false);
    }
}

int CdclSolver::add_clause_internal(const std::vector<int>& lits, bool learnt, int lbd)
{
    int ref = static_cast<int>(arena_.size());
    arena_.push_back(static_cast<int>(lits.size()));
    arena_.push_back(learnt ? static_cast<int>(learnt_lbds_.size()) : -1);
    if (learnt) {
        learnt_lbds_.push_back(lbd);
        learnt_refs_.push_back(ref);
    }
    for (int l : lits)
        arena_.push_back(l);

    if (lits.size() == 2) {
        watches_[lit_not(lits[0])].push_back(Watch{ref, lits[1], true});
        watches_[lit_not(lits[1])].push_back(Watch{ref, lits[0], true});
    } else {
        watches_[lit_not(lits[0])].push_back(Watch{ref, lits[1], false});
        watches_[lit_not(lits[1])].push_back(Watch{ref, lits[0], false});
    }
    return ref;
}

bool CdclSolver::value_lit(int lit) const
{
    signed char a = assign_[lit >> 1];
    return a != 0 && (a > 0) != (lit & 1);
}

bool CdclSolver::is_false_lit(int lit) const
{
    signed char a = assign_[lit >> 1];
    return a != 0 && (a > 0) == (lit & 1);
}

bool CdclSolver::enqueue(int lit, int reason)
{
    int v = lit >> 1;
    if (assign_[v] != 0)
        return value_lit(lit);
    assign_[v] = (lit & 1) ? -1 : 1;
    level_[v] = static_cast<int>(trail_lim_.size());
    reason_[v] = reason;
    trail_.push_back(lit);
    return true;
}

int CdclSolver::propagate()
{
    while (qhead_ < trail_.size()) {
        int lit = trail_[qhead_++];
        ++stats_.propagations;
        auto& ws = watches_[lit];
        std::size_t keep = 0;
        std::size_t n = ws.size();
        for (std::size_t i = 0; i < n; ++i) {
            Watch w = ws[i];
            if (w.binary) {
                // The blocker is the only other literal.
                if (value_lit(w.blocker)) {
                    ws[keep++] = w;
                    continue;
                }
                if (is_false_lit(w.blocker)) {
                    for (std::size_t j = i; j < n; ++j)
                        ws[keep++] = ws[j];
                    ws.resize(keep);
                    qhead_ = trail_.size();
                    return w.clause;
                }
                enqueue(w.blocker, w.clause);
                ws[keep++] = w;
                continue;
            }
            if (value_lit(w.blocker)) {
                ws[keep++] = w;
                continue;
            }
            int* c = &arena_[w.clause];
            int size = c[0];
            int* cl = c + 2;
            int false_lit = lit ^ 1;
            if (cl[0] == false_lit)
                std::swap(cl[0], cl[1]);
            if (value_lit(cl[0])) {
                ws[keep++] = Watch{w.clause, cl[0], false};
                continue;
            }
            bool moved = false;
            for (int j = 2; j < size; ++j) {
                if (!is_false_lit(cl[j])) {
                    std::swap(cl[1], cl[j]);
                    watches_[lit_not(cl[1])].push_back(Watch{w.clause, cl[0], false});
                    moved = true;
                    break;
                }
            }
            if (moved)
                continue;
            ws[keep++] = Watch{w.clause, cl[0], false};
            if (is_false_lit(cl[0])) {
                for (std::size_t j = i + 1; j < n; ++j)
                    ws[keep++] = ws[j];
                ws.resize(keep);
                qhead_ = trail_.size();
                return w.clause;
            }
            enqueue(cl[0], w.clause);
        }
        ws.resize(keep);
    }
    return -1;
}

void CdclSolver::set_phase_hint(const std::vector<bool>& hint)
{
    for (int v = 0; v < nvars_; ++v) {
        std::size_t idx = static_cast<std::size_t>(v) + 1;
        if (idx < hint.size())
            phase_[v] = hint[idx] ? 1 : -1;
    }
}

void CdclSolver::bump_var(int var)
{
    activity_[var] += var_inc_;
    if (activity_[var] > 1e100) {
        for (auto& a : activity_)
            a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_pos_[var] >= 0)
        heap_up(heap_pos_[var]);
}

void CdclSolver::decay()
{
    var_inc_ /= 0.95;
}

bool CdclSolver::lit_redundant(int lit, unsigned levels_mask)
{
    // Checks that `lit` is implied by literals already in the learnt clause.
    // Marks set on success persist (memoization) and land in to_clear_.
    redundant_stack_.clear();
    redundant_stack_.push_back(lit);
    std::size_t marked_from = to_clear_.size();
    while (!redundant_stack_.empty()) {
        int l = redundant_stack_.back();
        redundant_stack_.pop_back();
        int v = l >> 1;
        int r = reason_[v];
        if (r < 0) {
            for (std::size_t i = marked_from; i < to_clear_.size(); ++i)
                seen_[to_clear_[i]] = 0;
            to_clear_.resize(marked_from);
            return false;
        }
        const int* c = &arena_[r];
        int size = c[0];
        const int* cl = c + 2;
        for (int j = 0; j < size; ++j) {
            int cv = cl[j] >> 1;
            if (cv == v || seen_[cv] || level_[cv] == 0)
                continue;
            if (reason_[cv] < 0 || !((levels_mask >> (level_[cv] & 31)) & 1)) {
                for (std::size_t i = marked_from; i < to_clear_.size(); ++i)
                    seen_[to_clear_[i]] = 0;
                to_clear_.resize(marked_from);
                return false;
            }
            seen_[cv] = 1;
            to_clear_.push_back(cv);
            redundant_stack_.push_back(cl[j]);
        }
    }
    return true;
}

int CdclSolver::analyze(int confl, std::vector<int>& learnt)
{
    learnt.clear();
    learnt.push_back(0); // slot for the asserting literal
    to_clear_.clear();
    int path = 0;
    int idx = static_cast<int>(trail_.size()) - 1;
    int cur_level = static_cast<int>(trail_lim_.size());
    int p = -1;

    int c = confl;
    do {
        const int* cd = &arena_[c];
        int size = cd[0];
        const int* cl = cd + 2;
        for (int j = 0; j < size; ++j) {
            int lit = cl[j];
            int v = lit >> 1;
            if (lit == p || seen_[v] || level_[v] == 0)
                continue;
            seen_[v] = 1;
            to_clear_.push_back(v);
            bump_var(v);
            if (level_[v] >= cur_level)
                ++path;
            else
                learnt.push_back(lit);
        }
        while (!seen_[trail_[idx] >> 1])
            --idx;
        p = trail_[idx];
        c = reason_[p >> 1];
        seen_[p >> 1] = 0;
        --path;
    } while (path > 0);
    learnt[0] = lit_not(p);

    // Minimization: drop literals implied by the rest of the clause.
    unsigned mask = 0;
    for (std::size_t i = 1; i < learnt.size(); ++i)
        mask |= 1u << (level_[learnt[i] >> 1] & 31);
    std::size_t keep = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
        int v = learnt[i] >> 1;
        if (reason_[v] < 0 || !lit_redundant(learnt[i], mask))
            learnt[keep++] = learnt[i];
    }
    learnt.resize(keep);

    for (int v : to_clear_)
        seen_[v] = 0;

    // LBD: number of distinct decision levels in the learnt clause.
    ++lbd_stamp_counter_;
    last_lbd_ = 0;
    for (int lit : learnt) {
        int lvl = level_[lit >> 1];
        if (lbd_stamp_[lvl] != lbd_stamp_counter_) {
            lbd_stamp_[lvl] = lbd_stamp_counter_;
            ++last_lbd_;
        }
    }

    int back = 0;
    if (learnt.size() > 1) {
        std::size_t best = 1;
        for (std::size_t i = 2; i < learnt.size(); ++i)
            if (level_[learnt[i] >> 1] > level_[learnt[best] >> 1])
                best = i;
        std::swap(learnt[1], learnt[best]);
        back = level_[learnt[1] >> 1];
    }
    return back;
}

void CdclSolver::backtrack(int target)
{
    if (static_cast<int>(trail_lim_.size()) <= target)
        return;
    std::size_t floor = static_cast<std::size_t>(trail_lim_[target]);
    for (std::size_t i = trail_.size(); i-- > floor;) {
        int v = trail_[i] >> 1;
        phase_[v] = assign_[v];
        assign_[v] = 0;
        reason_[v] = -1;
        if (heap_pos_[v] < 0)
            heap_insert(v);
    }
    trail_.resize(floor);
    trail_lim_.resize(target);
    qhead_ = floor;
}

void CdclSolver::heap_insert(int var)
{
    heap_pos_[var] = static_cast<int>(heap_.size());
    heap_.push_back(var);
    heap_up(heap_pos_[var]);
}

void CdclSolver::heap_up(int pos)
{
    int var = heap_[pos];
    while (pos > 0) {
        int parent = (pos - 1) >> 1;
        if (activity_[heap_[parent]] >= activity_[var])
            break;
        heap_[pos] = heap_[parent];
        heap_pos_[heap_[pos]] = pos;
        pos = parent;
    }
    heap_[pos] = var;
    heap_pos_[var] = pos;
}

void CdclSolver::heap_down(int pos)
{
    int var = heap_[pos];
    int n = static_cast<int>(heap_.size());
    for (;;) {
        int child = 2 * pos + 1;
        if (child >= n)
            break;
        if (child + 1 < n && activity_[heap_[child + 1]] > activity_[heap_[child]])
            ++child;
        if (activity_[heap_[child]] <= activity_[var])
            break;
        heap_[pos] = heap_[child];
        heap_pos_[heap_[pos]] = pos;
        pos = child;
    }
    heap_[pos] = var;
    heap_pos_[var] = pos;
}

int CdclSolver::heap_pop()
{
    int top = heap_[0];
    heap_pos_[top] = -1;
    heap_[0] = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_pos_[heap_[0]] = 0;
        heap_down(0);
    }
    return top;
}

int CdclSolver::pick_branch()
{
    while (!heap_.empty()) {
        int v = heap_pop();
        if (is_free(v))
            return v;
    }
    return -1;
}

void CdclSolver::reduce_db()
{
    // Only called at decision level 0. Keeps binaries and glue-2 clauses,
    // drops the worst half of the rest by LBD (ties: longer first), then
    // rebuilds the arena and watch lists.
    std::vector<int> cand;
    for (int ref : learnt_refs_)
        if (arena_[ref] > 2 && learnt_lbds_[arena_[ref + 1]] > 2)
            cand.push_back(ref);
    if (cand.size() < 64)
        return;
    std::sort(cand.begin(), cand.end(), [&](int a, int b) {
        int la = learnt_lbds_[arena_[a + 1]], lb = learnt_lbds_[arena_[b + 1]];
        if (la != lb)
            return la > lb;
        return arena_[a] > arena_[b];
    });

    std::vector<int> drops(cand.begin(), cand.begin() + cand.size() / 2);
    std::sort(drops.begin(), drops.end());
    auto dropped = [&](int ref) {
        return std::binary_search(drops.begin(), drops.end(), ref);
    };

    std::vector<int> old_arena;
    old_arena.swap(arena_);
    std::vector<int> old_lbds;
    old_lbds.swap(learnt_lbds_);
    learnt_refs_.clear();
    for (auto& ws : watches_)
        ws.clear();

    // At level 0 reasons are never consulted again; clear them.
    for (auto& r : reason_)
        r = -1;

    std::vector<int> lits;
    std::size_t pos = 0;
    while (pos < old_arena.size()) {
        int size = old_arena[pos];
        int lbd_slot = old_arena[pos + 1];
        const int* cl = &old_arena[pos + 2];
        int ref = static_cast<int>(pos);
        pos += 2 + static_cast<std::size_t>(size);
        if (lbd_slot >= 0 && dropped(ref))
            continue;
        lits.assign(cl, cl + size);
        // Re-watch two non-false literals so propagation stays complete.
        int slot = 0;
        for (int j = 0; j < size && slot < 2; ++j)
            if (!is_false_lit(lits[j]))
                std::swap(lits[slot++], lits[j]);
        add_clause_internal(lits, lbd_slot >= 0, lbd_slot >= 0 ? old_lbds[lbd_slot] : 0);
    }
}

SolveResult CdclSolver::solve(const std::vector<int>& assumptions, double budget_sec)
{
    SolveResult res;
    double t0 = wall_seconds();
    auto finish = [&](SolveStatus status) {
        stats_.seconds = wall_seconds() - t0;
        res.status = status;
        res.stats = stats_;
        return res;
    };

    if (contradiction_)
        return finish(SolveStatus::Unsat);

    for (int l : units_)
        if (!enqueue(l, -1))
            return finish(SolveStatus::Unsat);
    for (int dl : assumptions) {
        int l = from_dimacs(dl);
        if ((l >> 1) >= nvars_)
            throw InputError("assumption literal out of range");
        if (!enqueue(l, -1))
            return finish(SolveStatus::Unsat);
    }
    if (propagate() >= 0)
        return finish(SolveStatus::Unsat);

    for (int v = 0; v < nvars_; ++v)
        if (heap_pos_[v] < 0 && is_free(v))
            heap_insert(v);

    // Restart policy: forced when the short-term LBD average runs hot
    // against the long-term one (unsettled search), plus a Luby fallback so
    // satisfiable instances still cycle phases.
    double lbd_fast = 0.0, lbd_slow = 0.0;
    int restarts = 0;
    std::uint64_t luby_budget = static_cast<std::uint64_t>(luby(2.0, restarts) * 1024);
    std::uint64_t conflicts_here = 0;
    std::uint64_t reduce_round = 0;
    std::uint64_t next_reduce = 2000;
    std::uint64_t decision_ticks = 0;
    std::vector<int> learnt;

    for (;;) {
        int confl = propagate();
        if (confl >= 0) {
            ++stats_.conflicts;
            ++conflicts_here;
            if (trail_lim_.empty())
                return finish(SolveStatus::Unsat);
            int back = analyze(confl, learnt);
            backtrack(back);
            if (learnt.size() == 1) {
                if (!enqueue(learnt[0], -1))
                    return finish(SolveStatus::Unsat);
            } else {
                int ref = add_clause_internal(learnt, true, last_lbd_);
                enqueue(learnt[0], ref);
            }
            decay();
            lbd_fast += (last_lbd_ - lbd_fast) / 32.0;
            lbd_slow += (last_lbd_ - lbd_slow) / 8192.0;
            if ((stats_.conflicts & 511) == 0 && wall_seconds() - t0 > budget_sec)
                return finish(SolveStatus::Timeout);
        } else {
            bool unsettled = conflicts_here >= 64 && lbd_fast > 1.25 * lbd_slow;
            if (unsettled || conflicts_here >= luby_budget) {
                if (conflicts_here >= luby_budget)
                    luby_budget = static_cast<std::uint64_t>(luby(2.0, ++restarts) * 1024);
                conflicts_here = 0;
                lbd_fast = lbd_slow; // cool down so restarts do not cascade
                backtrack(0);
                if (stats_.conflicts >= next_reduce) {
                    reduce_db();
                    ++reduce_round;
                    next_reduce = stats_.conflicts + 2000 + 300 * reduce_round;
                }
                if (wall_seconds() - t0 > budget_sec)
                    return finish(SolveStatus::Timeout);
                continue;
            }
            if ((++decision_ticks & 4095) == 0 && wall_seconds() - t0 > budget_sec)
                return finish(SolveStatus::Timeout);
            int v = pick_branch();
            if (v < 0) {
                res.model.assign(static_cast<std::size_t>(nvars_) + 1, false);
                for (int var = 0; var < nvars_; ++var)
                    res.model[static_cast<std::size_t>(var) + 1] = assign_[var] > 0;
                return finish(SolveStatus::Sat);
            }
            ++stats_.decisions;
            trail_lim_.push_back(static_cast<int>(trail_.size()));
            enqueue(mk_lit(v, phase_[v] <= 0), -1);
        }
    }
}

namespace {

SolveResult verify_or_throw(const CnfFormula& f, SolveResult res, const char* backend)
{
    if (res.status == SolveStatus::Sat && !model_satisfies(f, res.model))
        throw InternalError(std::string(backend) +
                            " returned a model that violates the formula");
    return res;
}

} // namespace

SolveResult solve_external(const CnfFormula& f, const std::vector<int>& assumptions,
                           const std::string& cmd, double budget_sec)
{
    if (cmd.empty())
        throw InputError("external solver requested but no command configured (set " +
                         std::string(kExternalSolverEnv) + ")");

    CnfFormula with_assumptions = f;
    for (int lit : assumptions)
        with_assumptions.clauses.push_back({lit});

    std::string stem = "uclock_cnf_" + std::to_string(::getpid()) + "_" +
                       std::to_string(reinterpret_cast<std::uintptr_t>(&f) & 0xffff);
    std::string dir = [] {
        const char* t = std::getenv("TMPDIR");
        return std::string(t && *t ? t : "/tmp");
    }();
    std::string cnf_path = dir + "/" + stem + ".cnf";
    std::string out_path = dir + "/" + stem + ".out";
    write_dimacs_file(with_assumptions, cnf_path);

    std::string shell = cmd + " " + cnf_path + " > " + out_path + " 2>/dev/null";
    double t0 = wall_seconds();
    int rc = std::system(shell.c_str());
    (void)budget_sec; // budget enforcement is the caller's loop; subprocess runs to completion

    std::ifstream out(out_path);
    if (!out) {
        std::remove(cnf_path.c_str());
        throw InputError("external solver produced no output (rc=" + std::to_string(rc) + ")");
    }
    SolveResult res;
    try {
        res = read_solver_output(out, with_assumptions.num_vars);
    } catch (...) {
        std::remove(cnf_path.c_str());
        std::remove(out_path.c_str());
        throw;
    }
    std::remove(cnf_path.c_str());
    std::remove(out_path.c_str());
    res.stats.seconds = wall_seconds() - t0;
    return verify_or_throw(f, std::move(res), "external solver");
}

SolveResult solve(const CnfFormula& f, const std::vector<int>& assumptions,
                  const SolveOptions& options)
{
    if (options.backend == SolveOptions::Backend::External) {
        std::string cmd = options.external_cmd;
        if (cmd.empty()) {
            const char* env = std::getenv(kExternalSolverEnv);
            cmd = env ? env : "";
        }
        return solve_external(f, assumptions, cmd, options.budget_sec);
    }

    // Assumptions become unit clauses ahead of preprocessing, which then
    // constant-folds everything they imply.
    double t0 = wall_seconds();
    const std::vector<std::vector<int>>* clauses = &f.clauses;
    std::vector<std::vector<int>> with_assumptions;
    if (!assumptions.empty()) {
        with_assumptions = f.clauses;
        for (int lit : assumptions)
            with_assumptions.push_back({lit});
        clauses = &with_assumptions;
    }
    Preprocessed pre = preprocess_cnf(f.num_vars, *clauses);
    if (pre.contradiction) {
        SolveResult res;
        res.status = SolveStatus::Unsat;
        res.stats.seconds = wall_seconds() - t0;
        return res;
    }
    CdclSolver solver(f.num_vars, pre.clauses);
    if (!options.phase_hint.empty())
        solver.set_phase_hint(options.phase_hint);
    SolveResult res = solver.solve({}, options.budget_sec - (wall_seconds() - t0));
    if (res.status == SolveStatus::Sat)
        extend_model(pre, res.model);
    res.stats.seconds = wall_seconds() - t0;
    return verify_or_throw(f, std::move(res), "embedded solver");
}

} // namespace uclock
