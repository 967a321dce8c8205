#include "popcalc/space.hpp"

#include "popcalc/errors.hpp"

namespace popcalc {

int DiscreteSpace::index_of(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
        if (labels[static_cast<std::size_t>(i)] == label) return i;
    throw DomainError("label not in space: " + label);
}

DiscreteSpace DiscreteSpace::with_size(int n) {
    DiscreteSpace s;
    for (int i = 1; i <= n; ++i) s.labels.push_back("x" + std::to_string(i));
    return s;
}

DiscreteSpace DiscreteSpace::named(std::vector<std::string> labels) {
    DiscreteSpace s;
    s.labels = std::move(labels);
    return s;
}

std::size_t tuple_count(int space_size, int n) {
    if (space_size <= 0 || n < 0) throw DomainError("tuple_count needs a non-empty space, n >= 0");
    std::size_t c = 1;
    for (int i = 0; i < n; ++i) {
        c *= static_cast<std::size_t>(space_size);
        if (c > kMaxTupleCells)
            throw DomainError("dense tuple table over " + std::to_string(space_size) + "^" +
                              std::to_string(n) + " points exceeds the cell budget");
    }
    return c;
}

std::size_t tuple_index(int space_size, const Tuple& t) {
    std::size_t idx = 0;
    for (int x : t) {
        if (x < 0 || x >= space_size) throw DomainError("tuple entry outside the space");
        idx = idx * static_cast<std::size_t>(space_size) + static_cast<std::size_t>(x);
    }
    return idx;
}

Tuple tuple_at(int space_size, int n, std::size_t index) {
    Tuple t(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        t[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(space_size));
        index /= static_cast<std::size_t>(space_size);
    }
    return t;
}

bool next_tuple(int space_size, Tuple& t) {
    for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
        auto& v = t[static_cast<std::size_t>(i)];
        if (++v < space_size) return true;
        v = 0;
    }
    return false;
}

std::string tuple_to_string(const DiscreteSpace& space, const Tuple& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ',';
        s += space.labels.at(static_cast<std::size_t>(t[i]));
    }
    return s + ")";
}

Tuple tuple_from_labels(const DiscreteSpace& space, const std::vector<std::string>& labels) {
    Tuple t;
    t.reserve(labels.size());
    for (const auto& l : labels) t.push_back(space.index_of(l));
    return t;
}

}  // namespace popcalc
