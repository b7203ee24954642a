#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dualsynth::geometry {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Matrix identity(std::size_t n);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    Vector apply(std::span<const double> x) const;
    std::vector<std::vector<double>> to_rows() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Closed axis-aligned hyperrectangle. The empty box is an explicit state.
class Box {
public:
    Box() = default;
    Box(Vector lower, Vector upper);
    static Box empty_box(std::size_t dim);

    std::size_t dim() const { return lower_.size(); }
    bool empty() const { return empty_; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    double lower(std::size_t d) const { return lower_[d]; }
    double upper(std::size_t d) const { return upper_[d]; }
    double side(std::size_t d) const { return upper_[d] - lower_[d]; }
    double volume() const;
    Vector center() const;

    bool contains(std::span<const double> point, double tol = 0.0) const;
    bool contains(const Box& other, double tol = 0.0) const;
    /// Closed intersection is nonempty.
    bool intersects(const Box& other) const;
    /// Intersection has nonempty interior.
    bool interior_intersects(const Box& other) const;
    Box intersection(const Box& other) const;

    /// All 2^dim corners, corner k taking upper[d] where bit d of k is set.
    std::vector<Vector> vertices() const;

    std::string to_string() const;

    friend bool operator==(const Box&, const Box&) = default;

private:
    Vector lower_;
    Vector upper_;
    bool empty_ = false;
};

struct Proposition {
    std::string name;
    Box region;
};

/// s[t+1] = A s[t] + B u[t], u in input_set, s in domain, s[0] in initial_set.
struct ControlSystem {
    Matrix A;
    Matrix B;
    Box input_set;
    Box domain;
    Box initial_set;
    std::vector<Proposition> propositions;

    std::size_t state_dim() const { return A.rows(); }
    std::size_t input_dim() const { return B.cols(); }

    /// Throws InputError naming the first violated invariant.
    void validate() const;
    Vector step(std::span<const double> s, std::span<const double> u) const;
};

/// exists u in U with A x + B u in (target cap domain)
bool reach_exists_from_point(std::span<const double> x, const Box& target, const ControlSystem& sys);

/// R_p: every point of `from` can be steered into `to` in one step.
/// Decided on the vertices of `from`, since the set of points that can reach a
/// convex target is itself convex.
bool reach_pessimistic(const Box& from, const Box& to, const ControlSystem& sys);

/// R_o: some point of `from` can be steered into `to` in one step.
bool reach_optimistic(const Box& from, const Box& to, const ControlSystem& sys);

/// Relative and absolute depth a landing point must keep from the target's faces
/// to count as interior.
inline constexpr double kInteriorMargin = 1e-6;
inline constexpr double kInteriorFloor = 1e-7;

/// Like reach_optimistic, but the landing point must lie in the interior of the
/// target. The optimistic abstraction uses this form: otherwise a state sitting on
/// a shared face chains optimistic edges across every neighbour with 0 in U.
bool reach_optimistic_interior(const Box& from, const Box& to, const ControlSystem& sys);

/// An input steering x into `target` with the largest achievable uniform
/// margin from the target's faces (relative to side length, at most 1/2).
/// Returns nullopt if no input reaches the target at all.
std::optional<Vector> select_input(std::span<const double> x, const Box& target, const ControlSystem& sys);

}  // namespace dualsynth::geometry
