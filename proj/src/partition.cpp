#include "partition.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include "errors.hpp"

namespace dualsynth::partition {

using geometry::Box;
using geometry::Vector;

std::string to_string(const RegionId& id) {
    std::string out;
    for (std::size_t k = 0; k < id.size(); ++k) {
        if (k) out += '.';
        out += std::to_string(id[k]);
    }
    return out;
}

const char* to_string(Status s) {
    switch (s) {
        case Status::Winning: return "winning";
        case Status::Maybe: return "maybe";
        case Status::Losing: return "losing";
        case Status::Unexplored: break;
    }
    return "unexplored";
}

bool touches_initial(const Box& cell, const Box& initial) {
    if (cell.empty() || initial.empty()) return false;
    for (std::size_t d = 0; d < cell.dim(); ++d) {
        const double lo = std::max(cell.lower(d), initial.lower(d));
        const double hi = std::min(cell.upper(d), initial.upper(d));
        if (initial.side(d) > 0.0 ? lo >= hi : lo > hi) return false;
    }
    return true;
}

PartitionForest PartitionForest::initial(const geometry::ControlSystem& sys) {
    sys.validate();
    const std::size_t n = sys.state_dim();
    for (std::size_t d = 0; d < n; ++d) {
        if (sys.domain.side(d) <= 0.0) throw InputError("domain has zero width in dimension " + std::to_string(d));
    }
    std::vector<std::vector<double>> cuts(n);
    for (std::size_t d = 0; d < n; ++d) {
        cuts[d] = {sys.domain.lower(d), sys.domain.upper(d)};
        for (const auto& p : sys.propositions) {
            if (p.region.side(d) <= 0.0) {
                throw InputError("proposition '" + p.name + "' has zero width in dimension " + std::to_string(d) +
                                 " and cannot be preserved by a box partition");
            }
            cuts[d].push_back(p.region.lower(d));
            cuts[d].push_back(p.region.upper(d));
        }
        std::sort(cuts[d].begin(), cuts[d].end());
        cuts[d].erase(std::unique(cuts[d].begin(), cuts[d].end()), cuts[d].end());
    }

    PartitionForest f;
    f.domain_ = sys.domain;
    f.initial_set_ = sys.initial_set;

    std::vector<std::size_t> counts(n), idx(n, 0);
    std::size_t total = 1;
    for (std::size_t d = 0; d < n; ++d) {
        counts[d] = cuts[d].size() - 1;
        total *= counts[d];
    }
    for (std::size_t k = 0; k < total; ++k) {
        Vector lo(n), hi(n);
        for (std::size_t d = 0; d < n; ++d) {
            lo[d] = cuts[d][idx[d]];
            hi[d] = cuts[d][idx[d] + 1];
        }
        Box cell(lo, hi);
        std::vector<std::string> labels;
        for (const auto& p : sys.propositions) {
            if (p.region.contains(cell)) {
                labels.push_back(p.name);
            } else if (p.region.interior_intersects(cell)) {
                throw InternalError("grid cell " + cell.to_string() + " straddles proposition '" + p.name + "'");
            }
        }
        std::sort(labels.begin(), labels.end());
        f.roots_.push_back(f.add_node({static_cast<int>(k)}, std::move(cell), std::move(labels), -1));
        for (std::size_t d = 0; d < n; ++d) {
            if (++idx[d] < counts[d]) break;
            idx[d] = 0;
        }
    }
    f.rebuild_leaves();
    return f;
}

std::size_t PartitionForest::add_node(RegionId id, Box box, std::vector<std::string> labels, std::ptrdiff_t parent) {
    Node node;
    node.id = std::move(id);
    node.initial = touches_initial(box, initial_set_);
    node.box = std::move(box);
    node.labels = std::move(labels);
    node.parent = parent;
    if (parent >= 0) node.splits = nodes_[static_cast<std::size_t>(parent)].splits;
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

void PartitionForest::rebuild_leaves() {
    leaves_.clear();
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
        if (nodes_[i].children.empty()) {
            leaves_.push_back(i);
            return;
        }
        for (std::size_t c : nodes_[i].children) visit(c);
    };
    for (std::size_t r : roots_) visit(r);
}

std::size_t PartitionForest::find(const RegionId& id) const {
    if (id.empty() || id[0] < 0 || static_cast<std::size_t>(id[0]) >= roots_.size())
        throw std::out_of_range("unknown region " + to_string(id));
    std::size_t cur = roots_[static_cast<std::size_t>(id[0])];
    for (std::size_t k = 1; k < id.size(); ++k) {
        const auto& ch = nodes_[cur].children;
        if (id[k] < 1 || static_cast<std::size_t>(id[k]) > ch.size())
            throw std::out_of_range("unknown region " + to_string(id));
        cur = ch[static_cast<std::size_t>(id[k] - 1)];
    }
    return cur;
}

void PartitionForest::set_status(std::size_t leaf, Status s) {
    if (!is_leaf(leaf)) throw std::logic_error("set_status on interior node " + to_string(nodes_[leaf].id));
    nodes_[leaf].status = s;
}

namespace {

std::vector<int> prime_factors_descending(int m) {
    std::vector<int> out;
    for (int p = 2; p * p <= m; ++p) {
        while (m % p == 0) {
            out.push_back(p);
            m /= p;
        }
    }
    if (m > 1) out.push_back(m);
    std::sort(out.rbegin(), out.rend());
    return out;
}

// Cells per axis: each prime factor of m goes to the axis whose current
// cell side is longest (lowest axis on ties), largest factor first.
std::vector<int> axis_counts(const Box& box, int m) {
    std::vector<int> counts(box.dim(), 1);
    for (int f : prime_factors_descending(m)) {
        std::size_t best = 0;
        for (std::size_t d = 1; d < box.dim(); ++d) {
            if (box.side(d) / counts[d] > box.side(best) / counts[best]) best = d;
        }
        counts[best] *= f;
    }
    return counts;
}

}  // namespace

std::vector<Box> PartitionForest::split_boxes(const Box& box, int m) {
    if (m < 2) throw std::invalid_argument("split factor m must be at least 2");
    if (box.empty()) throw std::invalid_argument("cannot split an empty box");
    const std::vector<int> counts = axis_counts(box, m);
    const std::size_t n = box.dim();
    std::vector<Box> out;
    out.reserve(static_cast<std::size_t>(m));
    std::vector<int> idx(n, 0);
    for (int k = 0; k < m; ++k) {
        Vector lo(n), hi(n);
        for (std::size_t d = 0; d < n; ++d) {
            const double w = box.side(d) / counts[d];
            lo[d] = idx[d] == 0 ? box.lower(d) : box.lower(d) + w * idx[d];
            hi[d] = idx[d] + 1 == counts[d] ? box.upper(d) : box.lower(d) + w * (idx[d] + 1);
        }
        out.emplace_back(std::move(lo), std::move(hi));
        for (std::size_t d = 0; d < n; ++d) {
            if (++idx[d] < counts[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

bool PartitionForest::can_split(std::size_t leaf, int m, double min_cell) const {
    for (const Box& b : split_boxes(nodes_.at(leaf).box, m)) {
        for (std::size_t d = 0; d < b.dim(); ++d) {
            if (b.side(d) < min_cell) return false;
        }
    }
    return true;
}

std::vector<std::size_t> PartitionForest::split(std::size_t leaf, int m) {
    if (!is_leaf(leaf)) throw std::logic_error("split of interior node " + to_string(nodes_[leaf].id));
    if (nodes_[leaf].status != Status::Maybe) {
        throw std::logic_error("split of " + to_string(nodes_[leaf].id) + " with status " +
                               to_string(nodes_[leaf].status) + "; only maybe leaves may be split");
    }
    std::vector<Box> boxes = split_boxes(nodes_[leaf].box, m);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < boxes.size(); ++k) {
        RegionId id = nodes_[leaf].id;
        id.push_back(static_cast<int>(k + 1));
        const std::size_t c =
            add_node(std::move(id), std::move(boxes[k]), nodes_[leaf].labels, static_cast<std::ptrdiff_t>(leaf));
        nodes_[c].splits += 1;
        out.push_back(c);
    }
    nodes_[leaf].children = out;
    return out;
}

void PartitionForest::advance_iteration(const std::set<RegionId>& winning, const std::set<RegionId>& losing,
                                        const std::set<RegionId>& maybe, int m) {
    if (m < 2) throw std::invalid_argument("split factor m must be at least 2");
    if (winning.size() + losing.size() + maybe.size() != leaves_.size())
        throw std::invalid_argument("advance_iteration: sets do not partition the leaves");
    for (std::size_t leaf : leaves_) {
        const RegionId& id = nodes_[leaf].id;
        const int hits = static_cast<int>(winning.count(id) + losing.count(id) + maybe.count(id));
        if (hits != 1) throw std::invalid_argument("advance_iteration: leaf " + to_string(id) + " is in " +
                                                   std::to_string(hits) + " sets");
    }
    const std::vector<std::size_t> old = leaves_;
    for (std::size_t leaf : old) {
        const RegionId id = nodes_[leaf].id;
        if (maybe.count(id)) {
            nodes_[leaf].status = Status::Maybe;
            split(leaf, m);
            continue;
        }
        const Status s = winning.count(id) ? Status::Winning : Status::Losing;
        nodes_[leaf].status = s;
        RegionId cid = id;
        cid.push_back(1);
        const std::size_t c = add_node(std::move(cid), nodes_[leaf].box, nodes_[leaf].labels,
                                       static_cast<std::ptrdiff_t>(leaf));
        nodes_[c].status = s;
        nodes_[leaf].children = {c};
    }
    ++iteration_;
    rebuild_leaves();
}

std::size_t PartitionForest::locate(std::span<const double> s) const {
    if (!domain_.contains(s)) throw std::out_of_range("locate: point outside the domain");
    std::function<std::ptrdiff_t(std::size_t)> descend = [&](std::size_t i) -> std::ptrdiff_t {
        if (!nodes_[i].box.contains(s)) return -1;
        if (nodes_[i].children.empty()) return static_cast<std::ptrdiff_t>(i);
        for (std::size_t c : nodes_[i].children) {
            const std::ptrdiff_t r = descend(c);
            if (r >= 0) return r;
        }
        return -1;
    };
    for (std::size_t r : roots_) {
        const std::ptrdiff_t hit = descend(r);
        if (hit >= 0) return static_cast<std::size_t>(hit);
    }
    throw InternalError("locate: leaves do not cover the domain");
}

}  // namespace dualsynth::partition
