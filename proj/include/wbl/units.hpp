// units.hpp — physical constants and unit conventions.
//
// Energies are in eV, times in fs, currents internally in electrons/fs.

#pragma once

namespace wbl {

// Reduced Planck constant, eV fs
inline constexpr double kHbar = 0.6582119569;

// 1 electron/fs expressed in nA
inline constexpr double kNanoampPerElectronFs = 1.602176634e5;

}  // namespace wbl
