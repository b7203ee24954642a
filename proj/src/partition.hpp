#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace dualsynth::partition {

/// Root index (0-based), then one child index (1-based) per refinement step.
using RegionId = std::vector<int>;

std::string to_string(const RegionId& id);

enum class Status { Unexplored, Winning, Maybe, Losing };

const char* to_string(Status s);

struct Node {
    RegionId id;
    geometry::Box box;
    std::vector<std::string> labels;  // sorted
    std::ptrdiff_t parent = -1;
    std::vector<std::size_t> children;
    Status status = Status::Unexplored;
    bool initial = false;
    int splits = 0;  // how many ancestors (including itself, once refined) were split
};

/// Box partition of dom(S) with its refinement history. Node indices are
/// stable; leaves() lists the current leaves in lexicographic RegionId order.
class PartitionForest {
public:
    /// Axis grid induced by the domain and every proposition region's coordinates.
    static PartitionForest initial(const geometry::ControlSystem& sys);

    int iteration() const { return iteration_; }
    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(std::size_t index) const { return nodes_.at(index); }
    const std::vector<std::size_t>& roots() const { return roots_; }
    const std::vector<std::size_t>& leaves() const { return leaves_; }
    bool is_leaf(std::size_t index) const { return nodes_.at(index).children.empty(); }

    /// Throws std::out_of_range for an unknown id.
    std::size_t find(const RegionId& id) const;

    void set_status(std::size_t leaf, Status s);

    /// Child boxes split_m would produce, in child-index order.
    static std::vector<geometry::Box> split_boxes(const geometry::Box& box, int m);
    /// True if every child of a split would keep all sides >= min_cell.
    bool can_split(std::size_t leaf, int m, double min_cell) const;

    /// Splits a Maybe leaf into m children; returns their node indices.
    std::vector<std::size_t> split(std::size_t leaf, int m);

    /// Winning/Losing leaves get one pass-through child keeping their status,
    /// Maybe leaves are split. The three sets must partition the leaves.
    void advance_iteration(const std::set<RegionId>& winning, const std::set<RegionId>& losing,
                           const std::set<RegionId>& maybe, int m);

    /// Leaf whose closed box contains s; the lexicographically smallest on ties.
    std::size_t locate(std::span<const double> s) const;

    const geometry::Box& domain() const { return domain_; }
    const geometry::Box& initial_set() const { return initial_set_; }

private:
    std::size_t add_node(RegionId id, geometry::Box box, std::vector<std::string> labels, std::ptrdiff_t parent);
    void rebuild_leaves();

    geometry::Box domain_;
    geometry::Box initial_set_;
    std::vector<Node> nodes_;
    std::vector<std::size_t> roots_;
    std::vector<std::size_t> leaves_;
    int iteration_ = 0;
};

/// Positive-measure overlap with the initial set, judged per dimension; a
/// dimension in which the initial set is flat only needs closed overlap.
bool touches_initial(const geometry::Box& cell, const geometry::Box& initial);

}  // namespace dualsynth::partition
