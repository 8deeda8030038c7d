#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pertprox/driver.hpp"

namespace pertprox {

// CSV layout, field order fixed:
//   t,x_1,...,x_d,f_lambda,grad_map_norm,perturbed
// Reals are written with 17 significant digits so a read-back is bit-exact.
void write_trajectory_csv(std::ostream& out, const std::vector<IterateRecord>& iterates, int dimension);
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<IterateRecord>& iterates,
                          int dimension);

// Reads the layout above. Fields not stored in the CSV (perturbation seeds, arrival
// points) are left empty. Throws Error on a malformed file.
std::vector<IterateRecord> read_trajectory_csv(std::istream& in);
std::vector<IterateRecord> read_trajectory_csv(const std::filesystem::path& path);

}  // namespace pertprox
