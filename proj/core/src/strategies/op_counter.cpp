#include <starfish/strategies/op_counter.hpp>

namespace starfish {
    void op_counter::record(const std::size_t node, const std::string &kind, const std::uint64_t count)
    {
        if (node >= _per_node.size())
            _per_node.resize(node + 1, 0);
        _per_node[node] += count;
        _per_kind[kind] += count;
        _total += count;
    }

    std::uint64_t op_counter::kind(const std::string &k) const
    {
        const auto it = _per_kind.find(k);
        return it == _per_kind.end() ? 0 : it->second;
    }

    void op_counter::merge(const op_counter &o)
    {
        if (o._per_node.size() > _per_node.size())
            _per_node.resize(o._per_node.size(), 0);
        for (std::size_t i = 0; i < o._per_node.size(); ++i)
            _per_node[i] += o._per_node[i];
        for (const auto &[k, v]: o._per_kind)
            _per_kind[k] += v;
        _total += o._total;
    }
}
