#pragma once

#include <cstdint>
#include <vector>

#include "corrugate/fields.hpp"
#include "corrugate/grid.hpp"
#include "corrugate/primitive_decomp.hpp"

namespace corrugate {

struct FramePair {
    ImmersionField nu, b;
    std::vector<std::uint8_t> defined;  // nodes carrying a frame
    double seam_mismatch = 0.0;         // worst rotation angle between neighbouring frames, radians
    Patch region;                       // swept region (whole chart for global frames)
};

struct FrameAudit {
    double unit = 0.0;    // max ||nu|-1|, ||b|-1|
    double orth = 0.0;    // max |nu.b|
    double normal = 0.0;  // max |nu.d_i w|, |b.d_i w|
};

// Orthogonal propagation over the whole chart.
FramePair normal_pair(const ImmersionField& w);
FramePair normal_pair(const ImmersionField& w, const MapDerivatives& d);
// Same sweep restricted to the support rectangle of a patch; nodes outside stay zero.
FramePair normal_pair_on_patch(const ImmersionField& w, const MapDerivatives& d, const Patch& patch);

FrameAudit audit_frame(const FramePair& f, const MapDerivatives& d);

inline constexpr double kSeamTolerance = 1e-6;

}  // namespace corrugate
