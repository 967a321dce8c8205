#pragma once

// Set partitions over small tagged ground sets, with the restricted families
// used by the population-process transitions (branching, association,
// at-most-one-measurement). Enumeration is lazy, in restricted-growth-string
// lexicographic order, and partitions are kept in canonical form: elements
// ascending within a block, blocks ascending by smallest element.

#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

namespace popcalc {

enum class Tag : std::uint8_t { State, Measurement };

// Tagged ground set {0, 1, ..., n-1}; tags[i] classifies element i.
struct GroundSet {
    std::vector<Tag> tags;

    int size() const { return static_cast<int>(tags.size()); }

    static GroundSet states(int n) { return GroundSet{std::vector<Tag>(n, Tag::State)}; }
    static GroundSet measurements(int m) {
        return GroundSet{std::vector<Tag>(m, Tag::Measurement)};
    }
    // n state-tagged elements 0..n-1 followed by m measurement-tagged elements n..n+m-1.
    static GroundSet mixed(int n_states, int n_meas);
};

struct Partition {
    std::vector<std::vector<int>> blocks;

    int block_count() const { return static_cast<int>(blocks.size()); }
    int element_count() const;
    // "{1,3}|{2}" with 1-based element labels; "{}" for the empty partition.
    std::string to_string() const;

    bool operator==(const Partition&) const = default;
};

enum class ConstraintKind : std::uint8_t {
    Unrestricted,
    Branching,
    Association,
    AtMostOneMeasurement,
};

// Admissibility predicates over canonical partitions of a tagged ground set.
//
// Branching: at most one block made of State-tagged elements only (the birth
// block; a partition with none corresponds to an empty birth when
// allow_empty_special is set), and every other block holds exactly one
// Measurement-tagged element (a parent) plus any number of State elements.
//
// Association: at most one block made of Measurement-tagged elements only (the
// clutter block; absent means empty clutter when allow_empty_special is set),
// and every other block holds exactly one State-tagged element plus any number
// of Measurement elements.
//
// AtMostOneMeasurement: no block holds two Measurement-tagged elements.
struct PartitionConstraint {
    ConstraintKind kind = ConstraintKind::Unrestricted;
    bool allow_empty_special = true;

    static PartitionConstraint unrestricted() { return {ConstraintKind::Unrestricted, true}; }
    static PartitionConstraint branching(bool allow_empty_birth = true) {
        return {ConstraintKind::Branching, allow_empty_birth};
    }
    static PartitionConstraint association(bool allow_empty_clutter = true) {
        return {ConstraintKind::Association, allow_empty_clutter};
    }
    static PartitionConstraint at_most_one_measurement() {
        return {ConstraintKind::AtMostOneMeasurement, true};
    }

    bool admits(const Partition& p, const GroundSet& ground) const;
};

PartitionConstraint constraint_from_name(const std::string& name);

// Lazy generator over all partitions of {0..n-1} in restricted-growth-string
// lexicographic order. n = 0 yields the single empty partition.
class PartitionEnumerator {
public:
    explicit PartitionEnumerator(int n);
    // Writes the next partition into `out` and returns true, or returns false
    // when exhausted.
    bool next(Partition& out);

private:
    int n_;
    bool done_ = false;
    bool first_ = true;
    std::vector<int> rgs_;   // rgs_[i] = block id of element i
    std::vector<int> maxv_;  // maxv_[i] = max(rgs_[0..i])
    bool advance();
};

// Lazy generator over partitions admitted by `constraint`; same order as the
// unrestricted enumeration (it is a filtered subsequence of it). Infeasible
// combinations yield nothing.
class RestrictedEnumerator {
public:
    RestrictedEnumerator(GroundSet ground, PartitionConstraint constraint);
    bool next(Partition& out);

private:
    GroundSet ground_;
    PartitionConstraint constraint_;
    PartitionEnumerator inner_;
};

// Eager convenience wrappers (desk scale: Bell(8) = 4140).
std::vector<Partition> enumerate_partitions(int n);
std::vector<Partition> enumerate_restricted(const GroundSet& ground,
                                            const PartitionConstraint& constraint);

// Bell numbers B(0)..B(25) from the Bell triangle; DomainError outside that range.
std::uint64_t bell_number(int n);

}  // namespace popcalc
