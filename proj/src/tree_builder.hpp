#pragma once

#include <vector>

#include "jitvc/learners.hpp"

namespace jitvc::learners::detail {

enum class BoostCriterion { Friedman, SecondOrder };

struct RegressionTreeOptions {
    BoostCriterion criterion = BoostCriterion::Friedman;
    std::size_t max_depth = 3;
    double lambda = 0;
    double min_child_weight = 0;
};

// Tree over per-sample first/second-order loss derivatives. Leaves hold the
// Newton step (before any learning rate).
Tree fit_boosting_tree(const Matrix& x, const std::vector<double>& grad, const std::vector<double>& hess,
                       const RegressionTreeOptions& options);

}  // namespace jitvc::learners::detail
