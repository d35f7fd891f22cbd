#pragma once

#include "reslab/dataset.hpp"
#include "reslab/grid.hpp"

#include <cstddef>
#include <cstdint>

namespace reslab {

struct Phantom {
    Grid image;
    BinaryMask mask;
};

inline constexpr std::size_t kMinPhantomSize = 64;

/// Synthetic brain-like slice: a wobbly head ellipse with a bright rim, folded
/// cortex band with sulci, darker interior, optional deep nuclei, and dark
/// ventricles, all under a smooth multiplicative bias field and a fine tissue
/// texture. Object values lie in (0, 0.98]; background is exactly 0 and the
/// mask marks object pixels. Pure function of its arguments.
Phantom make_phantom(std::uint64_t seed, std::size_t height, std::size_t width);

/// `count` phantoms with per-image seeds derived from (seed, role, index).
/// Stems are `phantom_<role>_<index>` with zero-padded indices.
Dataset make_phantom_set(std::uint64_t seed, DatasetRole role, std::size_t count, std::size_t size);

}  // namespace reslab
