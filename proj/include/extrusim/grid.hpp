#pragma once

#include <stdexcept>
#include <vector>

namespace extrusim {

// Uniform cell-centered grid over the normalized domain [0, 1].
struct Grid {
  int M;
  double dx;
  std::vector<double> centers;  // (j + 1/2) / M

  explicit Grid(int cells) : M(cells), dx(1.0 / cells) {
    if (cells < 16) throw std::invalid_argument("Grid: need at least 16 cells");
    centers.resize(cells);
    for (int j = 0; j < cells; ++j)
      centers[j] = (j + 0.5) / static_cast<double>(cells);
  }
};

}  // namespace extrusim
