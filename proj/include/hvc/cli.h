#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hvc/audio_io.h"

namespace hvc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // operational failure, rejection, exhaustion
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Largest per-window relative L-infinity difference between exact-length DFT
// magnitude spectra of aligned, non-overlapping windows.
double max_window_magnitude_difference(const AudioBuffer& a, const AudioBuffer& b,
                                       std::size_t window);

}  // namespace hvc
