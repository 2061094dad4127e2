#pragma once

#include <array>

namespace emr::testing {

// Measured pixel sizes at 1024 px width and the resulting field of view.
struct ReferenceRow {
  double magnification;
  double x_um;
  double y_um;
  double diagonal_um;
  double pixel_size_um;
};

inline constexpr std::array<ReferenceRow, 7> kReferenceCalibration{{
    {40, 2988.281, 2146.875, 3679.524, 2.918243164},
    {100, 1195.313, 858.75, 1471.81, 1.167297852},
    {250, 478.125, 343.5, 588.724, 0.466918945},
    {500, 239.063, 171.75, 294.362, 0.233459961},
    {1000, 119.531, 85.875, 147.181, 0.116729492},
    {2000, 59.766, 42.937, 73.59, 0.058365234},
    {4000, 29.883, 21.469, 36.795, 0.029182617},
}};

}  // namespace emr::testing
