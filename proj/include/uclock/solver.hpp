// SAT backends: an embedded CDCL (watched literals with a binary-clause fast
// path, first-UIP learning with minimization, VSIDS, phase saving, Luby
// restarts, learned-clause reduction) and an adapter that shells out to any
// DIMACS solver. Every SAT model is re-checked against the full clause set
// before it is returned.

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "uclock/cnf.hpp"

namespace uclock {

class CdclSolver {
public:
    CdclSolver(int num_vars, const std::vector<std::vector<int>>& clauses);

    // Assumptions are injected as unit clauses at decision level 0; Unsat
    // means unsatisfiable under the assumptions. One solve per instance.
    SolveResult solve(const std::vector<int>& assumptions = {},
                      double budget_sec = std::numeric_limits<double>::infinity());

    void set_phase_hint(const std::vector<bool>& hint); // 1-based by var

private:
    struct Watch {
        int clause;  // arena offset
        int blocker; // for binaries, the other literal
        bool binary;
    };

    int nvars_;
    bool contradiction_ = false;
    std::vector<int> arena_; // [size][lbd slot][lits...] per clause
    std::vector<int> units_;
    std::vector<int> learnt_lbds_;
    std::vector<int> learnt_refs_;
    std::vector<std::vector<Watch>> watches_;
    std::vector<signed char> assign_; // 0 free, 1 true, -1 false (by var)
    std::vector<int> level_;
    std::vector<int> reason_; // arena offset or -1
    std::vector<int> trail_;
    std::vector<int> trail_lim_;
    std::size_t qhead_ = 0;

    std::vector<double> activity_;
    double var_inc_ = 1.0;
    std::vector<int> heap_;
    std::vector<int> heap_pos_;
    std::vector<signed char> phase_;
    std::vector<char> seen_;
    std::vector<int> to_clear_;
    std::vector<int> redundant_stack_;
    std::vector<std::uint64_t> lbd_stamp_;
    std::uint64_t lbd_stamp_counter_ = 0;
    int last_lbd_ = 0;

    SolveStats stats_;

    int add_clause_internal(const std::vector<int>& lits, bool learnt, int lbd = 0);
    bool value_lit(int lit) const;
    bool is_false_lit(int lit) const;
    bool is_free(int var) const { return assign_[var] == 0; }

    bool enqueue(int lit, int reason);
    int propagate(); // conflicting arena offset or -1
    int analyze(int confl, std::vector<int>& learnt);
    bool lit_redundant(int lit, unsigned levels_mask);
    void backtrack(int level);
    void bump_var(int var);
    void decay();
    int pick_branch();
    void heap_insert(int var);
    int heap_pop();
    void heap_up(int pos);
    void heap_down(int pos);
    void reduce_db();
};

struct SolveOptions {
    enum class Backend { Embedded, External } backend = Backend::Embedded;
    double budget_sec = std::numeric_limits<double>::infinity();
    std::string external_cmd; // executable invoked as: cmd <dimacs-file>
    // Initial decision polarities (1-based by variable); vars beyond the
    // vector keep the default. Purely heuristic, embedded backend only.
    std::vector<bool> phase_hint;
};

// Environment variable naming the default external solver command.
inline constexpr const char* kExternalSolverEnv = "UCLOCK_SAT_SOLVER";

SolveResult solve(const CnfFormula& f, const std::vector<int>& assumptions = {},
                  const SolveOptions& options = {});

// Runs `cmd <path-to-dimacs>` and parses the s/v protocol.
SolveResult solve_external(const CnfFormula& f, const std::vector<int>& assumptions,
                           const std::string& cmd, double budget_sec);

} // namespace uclock
