#pragma once

#include <vector>

#include "relic/pnr.hpp"

namespace relic::test {

// Minimal fabric for a kernel set under a mode, with explicit channel width.
inline FabricArch fabric_for(const std::vector<DataflowGraph> &kernels, DesignMode mode, int w,
                             int separation = 2)
{
    ResourceCounts rc = size_requirements(kernels, mode);
    return minimal_fabric(rc, w, kernels.front().data_width, separation, "test_fabric");
}

inline CompiledDesign compile_on_minimal(const DataflowGraph &kernel, DesignMode mode, int w,
                                         int separation = 2, uint64_t seed = 1)
{
    FabricArch arch = fabric_for({kernel}, mode, w, separation);
    return compile(kernel, arch, mode, seed);
}

} // namespace relic::test
