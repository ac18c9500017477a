#pragma once

#include <cmath>

#include "voterlab/errors.hpp"

namespace voterlab {

// The two off-diagonal acceptance probabilities of the binary model:
// alpha01 is the probability that a node holding 0 accepts a sampled
// opinion 1, alpha10 the reverse. Diagonal entries are irrelevant (a node
// sampling its own opinion never changes) and are not stored.
class AcceptanceMatrix {
public:
    AcceptanceMatrix(double alpha01, double alpha10)
        : alpha01_(alpha01), alpha10_(alpha10) {
        if (!(alpha01 >= 0.0 && alpha01 <= 1.0) || !(alpha10 >= 0.0 && alpha10 <= 1.0))
            throw invalid_parameter("acceptance probabilities must lie in [0,1]");
    }

    static AcceptanceMatrix unbiased(double alpha) { return {alpha, alpha}; }

    double alpha01() const { return alpha01_; }
    double alpha10() const { return alpha10_; }

    bool is_unbiased() const { return alpha01_ == alpha10_; }
    bool is_frozen() const { return alpha01_ == 0.0 && alpha10_ == 0.0; }

    // Common acceptance probability in the unbiased case.
    double alpha() const {
        if (!is_unbiased())
            throw invalid_parameter("alpha is defined only for unbiased matrices");
        return alpha01_;
    }

    // Relative fitness r = alpha01 / alpha10; requires alpha10 > 0.
    double fitness() const {
        if (alpha10_ == 0.0)
            throw invalid_parameter("fitness r is undefined when alpha10 = 0");
        return alpha01_ / alpha10_;
    }

    // Bias gap eps = alpha10 - alpha01 (positive when opinion 0 is favored).
    double eps() const { return alpha10_ - alpha01_; }

    // Acceptance probability when a node holding c samples opinion c' != c.
    double accept_probability(int c) const { return c == 0 ? alpha01_ : alpha10_; }

    AcceptanceMatrix swapped() const { return {alpha10_, alpha01_}; }

private:
    double alpha01_;
    double alpha10_;
};

} // namespace voterlab
