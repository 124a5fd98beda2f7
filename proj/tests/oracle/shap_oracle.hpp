#pragma once

// Exact Shapley values for small tree ensembles by explicit enumeration
// over feature subsets, with cover-weighted expectations conditioning a
// path on the subset. Exponential in the feature count; keep it <= ~12.

#include <span>
#include <vector>

#include "cep/gbt.hpp"

namespace cep::oracle {

// Expected ensemble margin when only the features in `subset_mask` are
// fixed to the row's values and the rest follow cover proportions.
double subset_value(const TreeEnsemble& model, std::span<const double> row,
                    unsigned subset_mask);

// phi[i] for every feature; base (empty-subset value) goes to *base.
std::vector<double> shapley_bruteforce(const TreeEnsemble& model, std::span<const double> row,
                                       double* base);

}  // namespace cep::oracle
