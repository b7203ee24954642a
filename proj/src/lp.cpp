#include "lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dualsynth::lp {

void Problem::add_le(std::vector<double> coeffs, double rhs) {
    constraints.push_back({std::move(coeffs), Relation::LessEqual, rhs});
}

void Problem::add_eq(std::vector<double> coeffs, double rhs) {
    constraints.push_back({std::move(coeffs), Relation::Equal, rhs});
}

void Problem::add_bounds(std::size_t var, double lo, double hi) {
    std::vector<double> row(num_vars, 0.0);
    row[var] = 1.0;
    add_le(row, hi);
    row[var] = -1.0;
    add_le(std::move(row), -lo);
}

namespace {

// Dense phase-one simplex with Bland's rule.
//
// Columns: [x+ (n) | x- (n) | slacks (#<= rows) | artificials (rows)].
// Every row is scaled so its rhs is nonnegative; the artificials form the
// starting basis. The phase-one objective is the sum of artificials.
class PhaseOne {
public:
    explicit PhaseOne(const Problem& p) : n_(p.num_vars), rows_(p.constraints.size()) {
        std::size_t slacks = 0;
        for (const auto& c : p.constraints) {
            if (c.relation == Relation::LessEqual) ++slacks;
        }
        slack_begin_ = 2 * n_;
        art_begin_ = slack_begin_ + slacks;
        cols_ = art_begin_ + rows_;
        tab_.assign(rows_ * (cols_ + 1), 0.0);
        basis_.resize(rows_);

        std::size_t s = 0;
        for (std::size_t r = 0; r < rows_; ++r) {
            const auto& c = p.constraints[r];
            const double sign = c.rhs < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) {
                at(r, j) = sign * c.coeffs[j];
                at(r, n_ + j) = -sign * c.coeffs[j];
            }
            if (c.relation == Relation::LessEqual) {
                at(r, slack_begin_ + s) = sign;
                ++s;
            }
            at(r, art_begin_ + r) = 1.0;
            rhs(r) = sign * c.rhs;
            basis_[r] = art_begin_ + r;
        }
    }

    std::optional<std::vector<double>> solve() {
        // reduced cost of column j for min sum(artificials): -(sum of rows)
        std::vector<double> cost(cols_ + 1, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t j = 0; j <= cols_; ++j) cost[j] -= at(r, j);
        }
        for (std::size_t r = 0; r < rows_; ++r) cost[art_begin_ + r] += 1.0;

        const std::size_t max_pivots = 50 * (rows_ + cols_) + 100;
        for (std::size_t iter = 0; iter < max_pivots; ++iter) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (cost[j] < -kEpsilon) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) break;

            std::size_t leave = rows_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows_; ++r) {
                const double a = at(r, enter);
                if (a > kEpsilon) {
                    const double ratio = rhs(r) / a;
                    if (ratio < best - kEpsilon ||
                        (std::abs(ratio - best) <= kEpsilon && basis_[r] < basis_[leave])) {
                        best = ratio;
                        leave = r;
                    }
                }
            }
            // Phase one is bounded below by zero, so an unbounded column cannot occur.
            if (leave == rows_) break;
            pivot(leave, enter, cost);
        }

        // -cost[rhs column] is the current sum of artificials
        const double infeasibility = -cost[cols_];
        if (infeasibility > kEpsilon * std::max<double>(1.0, static_cast<double>(rows_))) {
            return std::nullopt;
        }
        std::vector<double> x(n_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const std::size_t b = basis_[r];
            if (b < n_) {
                x[b] += rhs(r);
            } else if (b < 2 * n_) {
                x[b - n_] -= rhs(r);
            }
        }
        return x;
    }

private:
    double& at(std::size_t r, std::size_t c) { return tab_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }

    void pivot(std::size_t row, std::size_t col, std::vector<double>& cost) {
        const double p = at(row, col);
        for (std::size_t j = 0; j <= cols_; ++j) at(row, j) /= p;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == row) continue;
            const double f = at(r, col);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(r, j) -= f * at(row, j);
        }
        const double f = cost[col];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols_; ++j) cost[j] -= f * at(row, j);
        }
        basis_[row] = col;
    }

    std::size_t n_;
    std::size_t rows_;
    std::size_t slack_begin_ = 0;
    std::size_t art_begin_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> tab_;
    std::vector<std::size_t> basis_;
};

void validate(const Problem& p) {
    for (std::size_t r = 0; r < p.constraints.size(); ++r) {
        const auto& c = p.constraints[r];
        if (c.coeffs.size() != p.num_vars) {
            throw std::invalid_argument("lp: constraint " + std::to_string(r) + " has " +
                                        std::to_string(c.coeffs.size()) + " coefficients, expected " +
                                        std::to_string(p.num_vars));
        }
        if (!std::isfinite(c.rhs)) {
            throw std::invalid_argument("lp: constraint " + std::to_string(r) + " has a non-finite rhs");
        }
    }
}

}  // namespace

std::optional<std::vector<double>> find_feasible_point(const Problem& problem) {
    validate(problem);
    if (problem.constraints.empty()) return std::vector<double>(problem.num_vars, 0.0);
    return PhaseOne(problem).solve();
}

bool feasible(const Problem& problem) { return find_feasible_point(problem).has_value(); }

}  // namespace dualsynth::lp
