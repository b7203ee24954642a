#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "errors.hpp"
#include "lp.hpp"

namespace dualsynth::geometry {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols_) throw std::invalid_argument("matrix rows have different lengths");
        std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(r * m.cols_));
    }
    return m;
}

Vector Matrix::apply(std::span<const double> x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix/vector dimension mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
        y[r] = acc;
    }
    return y;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
    std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out[r][c] = (*this)(r, c);
    return out;
}

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size()) throw std::invalid_argument("box bounds have different dimensions");
    if (lower_.empty()) throw std::invalid_argument("box must have dimension >= 1");
    for (std::size_t d = 0; d < lower_.size(); ++d) {
        if (!std::isfinite(lower_[d]) || !std::isfinite(upper_[d]))
            throw std::invalid_argument("box bounds must be finite");
        if (lower_[d] > upper_[d]) {
            throw std::invalid_argument("box lower bound exceeds upper bound in dimension " + std::to_string(d));
        }
    }
}

Box Box::empty_box(std::size_t dim) {
    Box b;
    b.lower_.assign(dim, 0.0);
    b.upper_.assign(dim, 0.0);
    b.empty_ = true;
    return b;
}

double Box::volume() const {
    if (empty_) return 0.0;
    double v = 1.0;
    for (std::size_t d = 0; d < dim(); ++d) v *= side(d);
    return v;
}

Vector Box::center() const {
    Vector c(dim());
    for (std::size_t d = 0; d < dim(); ++d) c[d] = 0.5 * (lower_[d] + upper_[d]);
    return c;
}

bool Box::contains(std::span<const double> point, double tol) const {
    if (empty_ || point.size() != dim()) return false;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (point[d] < lower_[d] - tol || point[d] > upper_[d] + tol) return false;
    }
    return true;
}

bool Box::contains(const Box& other, double tol) const {
    if (other.empty_) return true;
    if (empty_) return false;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (other.lower_[d] < lower_[d] - tol || other.upper_[d] > upper_[d] + tol) return false;
    }
    return true;
}

bool Box::intersects(const Box& other) const {
    if (empty_ || other.empty_) return false;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (std::max(lower_[d], other.lower_[d]) > std::min(upper_[d], other.upper_[d])) return false;
    }
    return true;
}

bool Box::interior_intersects(const Box& other) const {
    if (empty_ || other.empty_) return false;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (std::max(lower_[d], other.lower_[d]) >= std::min(upper_[d], other.upper_[d])) return false;
    }
    return true;
}

Box Box::intersection(const Box& other) const {
    if (!intersects(other)) return empty_box(dim());
    Vector lo(dim()), hi(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        lo[d] = std::max(lower_[d], other.lower_[d]);
        hi[d] = std::min(upper_[d], other.upper_[d]);
    }
    return {std::move(lo), std::move(hi)};
}

std::vector<Vector> Box::vertices() const {
    std::vector<Vector> out;
    if (empty_) return out;
    const std::size_t n = dim();
    out.reserve(std::size_t{1} << n);
    for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
        Vector v(n);
        for (std::size_t d = 0; d < n; ++d) v[d] = (k >> d) & 1U ? upper_[d] : lower_[d];
        out.push_back(std::move(v));
    }
    return out;
}

std::string Box::to_string() const {
    if (empty_) return "{}";
    std::ostringstream os;
    for (std::size_t d = 0; d < dim(); ++d) {
        if (d) os << "x";
        os << "[" << lower_[d] << "," << upper_[d] << "]";
    }
    return os.str();
}

void ControlSystem::validate() const {
    const std::size_t n = A.rows();
    if (n == 0 || A.cols() != n) throw InputError("dynamics.A must be a nonempty square matrix");
    if (B.rows() != n) throw InputError("dynamics.B must have as many rows as A");
    if (B.cols() == 0) throw InputError("dynamics.B must have at least one column");
    if (input_set.empty() || input_set.dim() != B.cols())
        throw InputError("input_set dimension must equal the number of columns of B");
    if (domain.empty() || domain.dim() != n) throw InputError("domain dimension must equal the state dimension");
    if (initial_set.empty() || initial_set.dim() != n)
        throw InputError("initial_set dimension must equal the state dimension");
    if (!domain.contains(initial_set)) throw InputError("initial_set must lie inside domain");
    std::set<std::string> names;
    for (const auto& p : propositions) {
        if (p.name.empty()) throw InputError("proposition with empty name");
        if (!names.insert(p.name).second) throw InputError("duplicate proposition '" + p.name + "'");
        if (p.region.empty() || p.region.dim() != n)
            throw InputError("proposition '" + p.name + "' has the wrong dimension");
        if (!domain.contains(p.region)) throw InputError("proposition '" + p.name + "' must lie inside domain");
    }
}

Vector ControlSystem::step(std::span<const double> s, std::span<const double> u) const {
    Vector next = A.apply(s);
    const Vector bu = B.apply(u);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] += bu[k];
    return next;
}

namespace {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Interval hull of A*X + B*U, component k. X may be a single point (lo == hi).
Interval image_hull(std::size_t k, const Box& from, const ControlSystem& sys) {
    Interval out;
    for (std::size_t j = 0; j < sys.A.cols(); ++j) {
        const double a = sys.A(k, j);
        const double p = a * from.lower(j);
        const double q = a * from.upper(j);
        out.lo += std::min(p, q);
        out.hi += std::max(p, q);
    }
    for (std::size_t j = 0; j < sys.B.cols(); ++j) {
        const double b = sys.B(k, j);
        const double p = b * sys.input_set.lower(j);
        const double q = b * sys.input_set.upper(j);
        out.lo += std::min(p, q);
        out.hi += std::max(p, q);
    }
    return out;
}

// Exact "no" answer when the interval hull of the one-step image misses the target.
bool hull_misses(const Box& from, const Box& target, const ControlSystem& sys) {
    for (std::size_t k = 0; k < target.dim(); ++k) {
        const Interval iv = image_hull(k, from, sys);
        if (iv.hi < target.lower(k) - lp::kEpsilon || iv.lo > target.upper(k) + lp::kEpsilon) return true;
    }
    return false;
}

Box clipped_target(const Box& target, const ControlSystem& sys) {
    if (target.dim() != sys.state_dim()) throw std::invalid_argument("target box has the wrong dimension");
    return target.intersection(sys.domain);
}

// LP over u only: u in U, lo <= A x + B u <= hi.
lp::Problem point_problem(std::span<const double> x, const Vector& lo, const Vector& hi, const ControlSystem& sys) {
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    const Vector ax = sys.A.apply(x);
    lp::Problem p;
    p.num_vars = m;
    for (std::size_t j = 0; j < m; ++j) p.add_bounds(j, sys.input_set.lower(j), sys.input_set.upper(j));
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> row(m);
        for (std::size_t j = 0; j < m; ++j) row[j] = sys.B(k, j);
        p.add_le(row, hi[k] - ax[k]);
        for (double& c : row) c = -c;
        p.add_le(std::move(row), ax[k] - lo[k]);
    }
    return p;
}

}  // namespace

bool reach_exists_from_point(std::span<const double> x, const Box& target, const ControlSystem& sys) {
    if (x.size() != sys.state_dim()) throw std::invalid_argument("point has the wrong dimension");
    const Box y = clipped_target(target, sys);
    if (y.empty()) return false;
    const Box point(Vector(x.begin(), x.end()), Vector(x.begin(), x.end()));
    if (hull_misses(point, y, sys)) return false;
    return lp::feasible(point_problem(x, y.lower(), y.upper(), sys));
}

bool reach_pessimistic(const Box& from, const Box& to, const ControlSystem& sys) {
    if (from.empty()) throw std::invalid_argument("reach_pessimistic: source box is empty");
    const Box y = clipped_target(to, sys);
    if (y.empty()) return false;
    if (hull_misses(from, y, sys)) return false;
    for (const auto& v : from.vertices()) {
        if (!reach_exists_from_point(v, y, sys)) return false;
    }
    return true;
}

namespace {

// LP in (x, u): x in from, u in U, lo <= A x + B u <= hi.
bool joint_feasible(const Box& from, const Vector& lo, const Vector& hi, const ControlSystem& sys) {
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    lp::Problem p;
    p.num_vars = n + m;
    for (std::size_t d = 0; d < n; ++d) p.add_bounds(d, from.lower(d), from.upper(d));
    for (std::size_t j = 0; j < m; ++j) p.add_bounds(n + j, sys.input_set.lower(j), sys.input_set.upper(j));
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<double> row(n + m);
        for (std::size_t d = 0; d < n; ++d) row[d] = sys.A(k, d);
        for (std::size_t j = 0; j < m; ++j) row[n + j] = sys.B(k, j);
        p.add_le(row, hi[k]);
        for (double& c : row) c = -c;
        p.add_le(std::move(row), -lo[k]);
    }
    return lp::feasible(p);
}

}  // namespace

bool reach_optimistic(const Box& from, const Box& to, const ControlSystem& sys) {
    if (from.empty() || to.empty()) throw std::invalid_argument("reach_optimistic: empty box");
    const Box y = clipped_target(to, sys);
    if (y.empty()) return false;
    if (hull_misses(from, y, sys)) return false;
    return joint_feasible(from, y.lower(), y.upper(), sys);
}

bool reach_optimistic_interior(const Box& from, const Box& to, const ControlSystem& sys) {
    if (from.empty() || to.empty()) throw std::invalid_argument("reach_optimistic_interior: empty box");
    const Box y = clipped_target(to, sys);
    if (y.empty()) return false;
    Vector lo(y.dim()), hi(y.dim());
    for (std::size_t k = 0; k < y.dim(); ++k) {
        const double margin = std::max(kInteriorMargin * y.side(k), kInteriorFloor);
        lo[k] = y.lower(k) + margin;
        hi[k] = y.upper(k) - margin;
        if (lo[k] > hi[k]) return false;
    }
    const Box inner(lo, hi);
    if (hull_misses(from, inner, sys)) return false;
    return joint_feasible(from, lo, hi, sys);
}

std::optional<Vector> select_input(std::span<const double> x, const Box& target, const ControlSystem& sys) {
    const Box y = clipped_target(target, sys);
    if (y.empty()) return std::nullopt;
    const std::size_t n = sys.state_dim();

    auto solve_with_margin = [&](double t) {
        Vector lo(n), hi(n);
        for (std::size_t k = 0; k < n; ++k) {
            lo[k] = y.lower(k) + t * y.side(k);
            hi[k] = y.upper(k) - t * y.side(k);
        }
        return lp::find_feasible_point(point_problem(x, lo, hi, sys));
    };

    auto best = solve_with_margin(0.0);
    if (!best) return std::nullopt;
    double ok = 0.0;
    double bad = 0.5 + 1e-12;
    if (auto centered = solve_with_margin(0.5)) {
        best = std::move(centered);
        ok = 0.5;
    } else {
        for (int it = 0; it < 30 && bad - ok > 1e-6; ++it) {
            const double mid = 0.5 * (ok + bad);
            if (auto sol = solve_with_margin(mid)) {
                best = std::move(sol);
                ok = mid;
            } else {
                bad = mid;
            }
        }
    }
    Vector u = std::move(*best);
    for (std::size_t j = 0; j < u.size(); ++j)
        u[j] = std::clamp(u[j], sys.input_set.lower(j), sys.input_set.upper(j));
    return u;
}

}  // namespace dualsynth::geometry
