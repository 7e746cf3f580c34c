#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace starfish {
    // On-chain operation tally. One operation is one channel-state manipulation recorded by a
    // contract; counts only grow.
    class op_counter {
    public:
        explicit op_counter(std::size_t nodes = 0): _per_node(nodes, 0) {}

        void record(std::size_t node, const std::string &kind, std::uint64_t count = 1);
        std::uint64_t total() const noexcept { return _total; }
        std::uint64_t node(std::size_t n) const { return n < _per_node.size() ? _per_node[n] : 0; }
        std::uint64_t kind(const std::string &k) const;
        const std::vector<std::uint64_t> &per_node() const noexcept { return _per_node; }
        const std::map<std::string, std::uint64_t> &per_kind() const noexcept { return _per_kind; }
        void merge(const op_counter &o);
    private:
        std::vector<std::uint64_t> _per_node;
        std::map<std::string, std::uint64_t> _per_kind {};
        std::uint64_t _total = 0;
    };
}
