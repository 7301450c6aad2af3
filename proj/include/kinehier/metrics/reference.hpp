#pragma once

namespace kinehier::metrics::reference {

// Published numbers on real scans of storage furniture. They are kept for
// side-by-side display only; the synthetic desk-scale setup is not
// comparable and nothing is tested against them.
inline constexpr double kStorageCleanTypeError = 1.16;
inline constexpr double kStorageCleanExistError = 1.2;
inline constexpr double kStorageCleanDirError = 2.22;
inline constexpr double kStorageCleanRootError = 0.0;
inline constexpr double kStorageCleanTreeF1 = 99.73;

inline constexpr double kStorageCleanSegmentationMap = 0.922;
inline constexpr double kStorageNoisySegmentationMap = 0.907;

} // namespace kinehier::metrics::reference
