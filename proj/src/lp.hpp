#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace dualsynth::lp {

/// Feasibility tolerance used for every comparison inside the solver.
inline constexpr double kEpsilon = 1e-9;

enum class Relation { LessEqual, Equal };

struct Constraint {
    std::vector<double> coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

/// Pure feasibility problem over free (sign-unrestricted) real variables.
struct Problem {
    std::size_t num_vars = 0;
    std::vector<Constraint> constraints;

    void add_le(std::vector<double> coeffs, double rhs);
    void add_eq(std::vector<double> coeffs, double rhs);
    /// lo <= x[var] <= hi
    void add_bounds(std::size_t var, double lo, double hi);
};

/// Returns a point satisfying every constraint (within kEpsilon), or nullopt
/// if the polyhedron is empty. Throws std::invalid_argument on a row whose
/// length differs from num_vars.
std::optional<std::vector<double>> find_feasible_point(const Problem& problem);

bool feasible(const Problem& problem);

}  // namespace dualsynth::lp
