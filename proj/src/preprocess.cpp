// CNF preprocessing for the embedded backend: unit propagation to fixpoint
// followed by occurrence-bounded variable elimination (resolution replaces a
// variable's clauses when that does not grow the formula). Eliminated
// definitions are kept for model reconstruction.

#include "uclock/preprocess.hpp"

#include <algorithm>

namespace uclock {

namespace {

constexpr int kOccurrenceCap = 24; // vars busier than this are left alone
constexpr int kResolventCap = 20;  // widest resolvent we are willing to add

// Resolve a (containing +v) with b (containing -v); false when tautological.
bool resolve(const std::vector<int>& a, const std::vector<int>& b, int v,
             std::vector<int>& out)
{
    out.clear();
    for (int l : a)
        if (l != v)
            out.push_back(l);
    for (int l : b) {
        if (l == -v)
            continue;
        bool dup = false;
        for (int x : out) {
            if (x == l) {
                dup = true;
                break;
            }
            if (x == -l)
                return false;
        }
        if (!dup)
            out.push_back(l);
    }
    return true;
}

} // namespace

Preprocessed preprocess_cnf(int num_vars, const std::vector<std::vector<int>>& input)
{
    Preprocessed pre;
    pre.num_vars = num_vars;

    // value per var: 0 free, 1 true, -1 false
    std::vector<signed char> value(static_cast<std::size_t>(num_vars) + 1, 0);
    std::vector<std::vector<int>> clauses;
    clauses.reserve(input.size());

    std::vector<int> unit_queue;
    auto push_unit = [&](int lit) {
        int v = std::abs(lit);
        signed char want = lit > 0 ? 1 : -1;
        if (value[v] == 0) {
            value[v] = want;
            unit_queue.push_back(lit);
            return true;
        }
        return value[v] == want;
    };

    for (const auto& raw : input) {
        std::vector<int> c;
        bool tautology = false;
        for (int l : raw) {
            if (std::find(c.begin(), c.end(), l) != c.end())
                continue;
            if (std::find(c.begin(), c.end(), -l) != c.end()) {
                tautology = true;
                break;
            }
            c.push_back(l);
        }
        if (tautology)
            continue;
        if (c.empty()) {
            pre.contradiction = true;
            return pre;
        }
        if (c.size() == 1) {
            if (!push_unit(c[0])) {
                pre.contradiction = true;
                return pre;
            }
            continue;
        }
        clauses.push_back(std::move(c));
    }

    // Unit propagation to fixpoint over the whole clause list.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::vector<int>> next;
        next.reserve(clauses.size());
        for (auto& c : clauses) {
            bool satisfied = false;
            std::vector<int> left;
            for (int l : c) {
                signed char v = value[std::abs(l)];
                if (v == 0) {
                    left.push_back(l);
                } else if ((v > 0) == (l > 0)) {
                    satisfied = true;
                    break;
                }
            }
            if (satisfied)
                continue;
            if (left.empty()) {
                pre.contradiction = true;
                return pre;
            }
            if (left.size() == 1) {
                if (!push_unit(left[0])) {
                    pre.contradiction = true;
                    return pre;
                }
                changed = true;
                continue;
            }
            if (left.size() != c.size())
                changed = true;
            next.push_back(std::move(left));
        }
        clauses = std::move(next);
    }

    // Occurrence lists (clause indices; lazily invalidated by a tombstone).
    std::vector<std::vector<int>> occ_pos(num_vars + 1), occ_neg(num_vars + 1);
    std::vector<char> dead(clauses.size(), 0);
    auto index_clause = [&](int ci) {
        for (int l : clauses[ci])
            (l > 0 ? occ_pos[l] : occ_neg[-l]).push_back(ci);
    };
    for (std::size_t ci = 0; ci < clauses.size(); ++ci)
        index_clause(static_cast<int>(ci));

    auto live_list = [&](std::vector<int>& lst) -> std::vector<int>& {
        lst.erase(std::remove_if(lst.begin(), lst.end(), [&](int ci) { return dead[ci]; }),
                  lst.end());
        return lst;
    };

    std::vector<int> resolvent;
    for (int pass = 0; pass < 12; ++pass) {
        bool eliminated_any = false;
        for (int v = 1; v <= num_vars; ++v) {
            if (value[v] != 0)
                continue;
            auto& pos = live_list(occ_pos[v]);
            auto& neg = live_list(occ_neg[v]);
            if (pos.empty() && neg.empty())
                continue;
            if (static_cast<int>(pos.size() + neg.size()) > kOccurrenceCap)
                continue;

            // Count non-tautological resolvents; bail out on growth.
            std::vector<std::vector<int>> resolvents;
            bool ok = true;
            for (int pi : pos) {
                for (int ni : neg) {
                    if (!resolve(clauses[pi], clauses[ni], v, resolvent))
                        continue;
                    if (static_cast<int>(resolvent.size()) > kResolventCap ||
                        resolvents.size() >= pos.size() + neg.size()) {
                        ok = false;
                        break;
                    }
                    resolvents.push_back(resolvent);
                }
                if (!ok)
                    break;
            }
            if (!ok)
                continue;

            Preprocessed::Eliminated elim;
            elim.var = v;
            for (int ci : pos) {
                elim.saved.push_back(clauses[ci]);
                dead[ci] = 1;
            }
            for (int ci : neg) {
                elim.saved.push_back(clauses[ci]);
                dead[ci] = 1;
            }
            pre.eliminated.push_back(std::move(elim));
            value[v] = 2; // mark as eliminated, excluded from future passes

            for (auto& r : resolvents) {
                bool unit_conflict = false;
                if (r.size() == 1) {
                    if (!push_unit(r[0]))
                        unit_conflict = true;
                } else {
                    clauses.push_back(std::move(r));
                    dead.push_back(0);
                    index_clause(static_cast<int>(clauses.size()) - 1);
                }
                if (unit_conflict) {
                    pre.contradiction = true;
                    return pre;
                }
            }
            eliminated_any = true;
        }
        if (!eliminated_any)
            break;
        // Units discovered during elimination are folded in on the next
        // pass only via occurrence checks; run a cheap re-propagation here.
        while (!unit_queue.empty()) {
            int lit = unit_queue.back();
            unit_queue.pop_back();
            int uv = std::abs(lit);
            auto& same = live_list(lit > 0 ? occ_pos[uv] : occ_neg[uv]);
            for (int ci : same)
                dead[ci] = 1;
            auto& other = live_list(lit > 0 ? occ_neg[uv] : occ_pos[uv]);
            for (int ci : other) {
                if (dead[ci])
                    continue;
                auto& c = clauses[ci];
                c.erase(std::remove(c.begin(), c.end(), lit > 0 ? -uv : uv), c.end());
                if (c.empty()) {
                    pre.contradiction = true;
                    return pre;
                }
                if (c.size() == 1) {
                    if (!push_unit(c[0])) {
                        pre.contradiction = true;
                        return pre;
                    }
                    dead[ci] = 1;
                }
            }
        }
    }

    for (std::size_t ci = 0; ci < clauses.size(); ++ci)
        if (!dead[ci])
            pre.clauses.push_back(std::move(clauses[ci]));
    for (int v = 1; v <= num_vars; ++v)
        if (value[v] == 1 || value[v] == -1)
            pre.clauses.push_back({value[v] > 0 ? v : -v});
    return pre;
}

void extend_model(const Preprocessed& pre, std::vector<bool>& model)
{
    // Reverse elimination order; v becomes true exactly when some saved
    // clause containing +v is not satisfied by its other literals (the
    // symmetric case for -v cannot co-occur, its resolvent would be false).
    for (auto it = pre.eliminated.rbegin(); it != pre.eliminated.rend(); ++it) {
        bool value = false;
        for (const auto& clause : it->saved) {
            bool has_pos = false;
            bool satisfied = false;
            for (int l : clause) {
                int v = std::abs(l);
                if (v == it->var) {
                    if (l > 0)
                        has_pos = true;
                    continue;
                }
                if (model[static_cast<std::size_t>(v)] == (l > 0)) {
                    satisfied = true;
                    break;
                }
            }
            if (!satisfied && has_pos) {
                value = true;
                break;
            }
        }
        model[static_cast<std::size_t>(it->var)] = value;
    }
}

} // namespace uclock
