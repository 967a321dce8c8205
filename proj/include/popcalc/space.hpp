#pragma once

// Finite discrete state spaces and dense row-major indexing of ordered tuples.

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace popcalc {

using Tuple = std::vector<int>;

struct DiscreteSpace {
    std::vector<std::string> labels;
    // optional geometry for neighborhood rules: one row per point (0 rows = none)
    Eigen::MatrixXd coords;

    int size() const { return static_cast<int>(labels.size()); }
    bool has_coords() const { return coords.rows() == size() && size() > 0; }
    int index_of(const std::string& label) const;  // DomainError if absent
    bool same_points(const DiscreteSpace& o) const { return labels == o.labels; }

    static DiscreteSpace with_size(int n);  // labels "x1".."xn"
    static DiscreteSpace named(std::vector<std::string> labels);
};

// Largest dense tuple table we are willing to allocate (entry count).
inline constexpr std::size_t kMaxTupleCells = std::size_t{1} << 26;

// S^n, guarded against overflowing the dense-table budget.
std::size_t tuple_count(int space_size, int n);

// row-major: first element most significant
std::size_t tuple_index(int space_size, const Tuple& t);
Tuple tuple_at(int space_size, int n, std::size_t index);

// odometer step over X^n in index order; false after the last tuple
bool next_tuple(int space_size, Tuple& t);

std::string tuple_to_string(const DiscreteSpace& space, const Tuple& t);
Tuple tuple_from_labels(const DiscreteSpace& space, const std::vector<std::string>& labels);

}  // namespace popcalc
