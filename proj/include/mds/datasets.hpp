#pragma once

namespace mds::datasets {

// Builtin color dataset: averaged similarity ratings for all pairs of 14
// spectral hues, labeled by wavelength in nanometers.  Values are the
// published two-decimal similarities with unit self-similarity; loaders turn
// them into dissimilarities via delta = 1 - s.  data/ekman.txt ships the
// same table for reference and for use with external tools.
inline constexpr const char* ekman_similarities =
    "434 445 465 472 490 504 537 555 584 600 610 628 651 674\n"
    "1.00 0.86 0.42 0.42 0.18 0.06 0.07 0.04 0.02 0.07 0.09 0.12 0.13 0.16\n"
    "0.86 1.00 0.50 0.44 0.22 0.09 0.07 0.07 0.02 0.04 0.07 0.11 0.13 0.17\n"
    "0.42 0.50 1.00 0.81 0.47 0.17 0.10 0.08 0.02 0.01 0.02 0.01 0.05 0.10\n"
    "0.42 0.44 0.81 1.00 0.54 0.25 0.10 0.09 0.02 0.01 0.00 0.01 0.02 0.04\n"
    "0.18 0.22 0.47 0.54 1.00 0.61 0.31 0.26 0.07 0.02 0.02 0.01 0.02 0.04\n"
    "0.06 0.09 0.17 0.25 0.61 1.00 0.62 0.45 0.14 0.08 0.02 0.02 0.02 0.01\n"
    "0.07 0.07 0.10 0.10 0.31 0.62 1.00 0.73 0.22 0.14 0.05 0.02 0.02 0.02\n"
    "0.04 0.07 0.08 0.09 0.26 0.45 0.73 1.00 0.33 0.19 0.04 0.03 0.02 0.02\n"
    "0.02 0.02 0.02 0.02 0.07 0.14 0.22 0.33 1.00 0.58 0.37 0.27 0.20 0.23\n"
    "0.07 0.04 0.01 0.01 0.02 0.08 0.14 0.19 0.58 1.00 0.74 0.50 0.41 0.28\n"
    "0.09 0.07 0.02 0.00 0.02 0.02 0.05 0.04 0.37 0.74 1.00 0.76 0.62 0.55\n"
    "0.12 0.11 0.01 0.01 0.01 0.02 0.02 0.03 0.27 0.50 0.76 1.00 0.85 0.68\n"
    "0.13 0.13 0.05 0.02 0.02 0.02 0.02 0.02 0.20 0.41 0.62 0.85 1.00 0.76\n"
    "0.16 0.17 0.10 0.04 0.04 0.01 0.02 0.02 0.23 0.28 0.55 0.68 0.76 1.00\n";

}  // namespace mds::datasets
