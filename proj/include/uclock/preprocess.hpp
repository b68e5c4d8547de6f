// Equivalence-preserving CNF preprocessing: unit propagation plus bounded
// variable elimination. The reduced formula is equisatisfiable with the
// input and a model of it extends to a model of the input via the saved
// eliminated definitions.

#pragma once

#include <vector>

namespace uclock {

struct Preprocessed {
    int num_vars = 0;
    bool contradiction = false;
    std::vector<std::vector<int>> clauses;
    struct Eliminated {
        int var;
        std::vector<std::vector<int>> saved; // clauses removed with this var
    };
    std::vector<Eliminated> eliminated; // in elimination order
};

Preprocessed preprocess_cnf(int num_vars, const std::vector<std::vector<int>>& clauses);

// Assigns every eliminated variable in `model` (1-based) so the original
// formula is satisfied, given a model of the reduced formula.
void extend_model(const Preprocessed& pre, std::vector<bool>& model);

} // namespace uclock
