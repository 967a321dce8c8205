#include "popcalc/partitions.hpp"

#include <algorithm>
#include <array>

#include "popcalc/errors.hpp"

namespace popcalc {

GroundSet GroundSet::mixed(int n_states, int n_meas) {
    GroundSet g;
    g.tags.assign(n_states, Tag::State);
    g.tags.insert(g.tags.end(), n_meas, Tag::Measurement);
    return g;
}

int Partition::element_count() const {
    int n = 0;
    for (const auto& b : blocks) n += static_cast<int>(b.size());
    return n;
}

std::string Partition::to_string() const {
    if (blocks.empty()) return "{}";
    std::string s;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) s += '|';
        s += '{';
        for (std::size_t j = 0; j < blocks[i].size(); ++j) {
            if (j) s += ',';
            s += std::to_string(blocks[i][j] + 1);
        }
        s += '}';
    }
    return s;
}

bool PartitionConstraint::admits(const Partition& p, const GroundSet& ground) const {
    auto meas_count = [&](const std::vector<int>& block) {
        int c = 0;
        for (int e : block) c += ground.tags.at(e) == Tag::Measurement ? 1 : 0;
        return c;
    };
    switch (kind) {
        case ConstraintKind::Unrestricted:
            return true;
        case ConstraintKind::Branching: {
            int pure_state_blocks = 0;
            for (const auto& b : p.blocks) {
                const int m = meas_count(b);
                if (m == 0)
                    ++pure_state_blocks;
                else if (m != 1)
                    return false;
            }
            if (pure_state_blocks > 1) return false;
            if (!allow_empty_special && pure_state_blocks == 0) return false;
            return true;
        }
        case ConstraintKind::Association: {
            int pure_meas_blocks = 0;
            for (const auto& b : p.blocks) {
                const int s = static_cast<int>(b.size()) - meas_count(b);
                if (s == 0)
                    ++pure_meas_blocks;
                else if (s != 1)
                    return false;
            }
            if (pure_meas_blocks > 1) return false;
            if (!allow_empty_special && pure_meas_blocks == 0) return false;
            return true;
        }
        case ConstraintKind::AtMostOneMeasurement: {
            for (const auto& b : p.blocks)
                if (meas_count(b) > 1) return false;
            return true;
        }
    }
    return false;
}

PartitionConstraint constraint_from_name(const std::string& name) {
    if (name == "unrestricted") return PartitionConstraint::unrestricted();
    if (name == "branching") return PartitionConstraint::branching();
    if (name == "association") return PartitionConstraint::association();
    if (name == "at_most_one_measurement") return PartitionConstraint::at_most_one_measurement();
    throw DomainError("unknown partition constraint: " + name);
}

PartitionEnumerator::PartitionEnumerator(int n) : n_(n) {
    if (n < 0) throw DomainError("partition enumeration needs n >= 0, got " + std::to_string(n));
    rgs_.assign(n, 0);
    maxv_.assign(n, 0);
}

bool PartitionEnumerator::advance() {
    // Next restricted growth string in lexicographic order: rightmost position
    // that can still grow (rgs_[i] <= maxv_[i-1]) is bumped, suffix reset to 0.
    for (int i = n_ - 1; i >= 1; --i) {
        if (rgs_[i] <= maxv_[i - 1]) {
            ++rgs_[i];
            maxv_[i] = std::max(maxv_[i - 1], rgs_[i]);
            for (int j = i + 1; j < n_; ++j) {
                rgs_[j] = 0;
                maxv_[j] = maxv_[i];
            }
            return true;
        }
    }
    return false;
}

bool PartitionEnumerator::next(Partition& out) {
    if (done_) return false;
    if (first_) {
        first_ = false;
    } else if (n_ == 0 || !advance()) {
        done_ = true;
        return false;
    }
    out.blocks.clear();
    const int nblocks = n_ == 0 ? 0 : maxv_[n_ - 1] + 1;
    out.blocks.resize(nblocks);
    for (int i = 0; i < n_; ++i) out.blocks[rgs_[i]].push_back(i);
    // Restricted growth strings already give blocks ordered by smallest
    // element with ascending members: canonical by construction.
    return true;
}

RestrictedEnumerator::RestrictedEnumerator(GroundSet ground, PartitionConstraint constraint)
    : ground_(std::move(ground)), constraint_(constraint), inner_(ground_.size()) {}

bool RestrictedEnumerator::next(Partition& out) {
    while (inner_.next(out)) {
        if (constraint_.admits(out, ground_)) return true;
    }
    return false;
}

std::vector<Partition> enumerate_partitions(int n) {
    std::vector<Partition> all;
    PartitionEnumerator en(n);
    Partition p;
    while (en.next(p)) all.push_back(p);
    return all;
}

std::vector<Partition> enumerate_restricted(const GroundSet& ground,
                                            const PartitionConstraint& constraint) {
    std::vector<Partition> all;
    RestrictedEnumerator en(ground, constraint);
    Partition p;
    while (en.next(p)) all.push_back(p);
    return all;
}

std::uint64_t bell_number(int n) {
    constexpr int kMax = 25;
    if (n < 0 || n > kMax)
        throw DomainError("bell_number defined for 0 <= n <= 25, got " + std::to_string(n));
    if (n == 0) return 1;
    // Bell triangle; row r starts with the last entry of row r-1 and
    // B(n) is the first entry of row n. Rows beyond n-1 are never needed
    // (row n's tail entry would be B(n+1), which overflows at n = 25).
    std::array<std::uint64_t, kMax + 1> prev{}, cur{};
    prev[0] = 1;
    for (int r = 1; r < n; ++r) {
        cur[0] = prev[r - 1];
        for (int c = 1; c <= r; ++c) cur[c] = cur[c - 1] + prev[c - 1];
        prev = cur;
    }
    return prev[n - 1];
}

}  // namespace popcalc
