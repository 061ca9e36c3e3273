#pragma once

// Direction search for Cartan characters: rank of the stacked direction
// contractions sum_l v_l F^{il}_kappa over a candidate grid.

#include <cstddef>
#include <vector>

#include "cartan/linalg.hpp"

namespace cartan::kernels {

using Direction = std::vector<Rational>;

/// rows x r matrix with entries sum_l v_l F[kappa](i, l); F[kappa] is rows x n.
QMatrix contract(const std::vector<QMatrix>& F, const Direction& v);

struct DirectionPick {
  std::size_t index = 0;
  std::size_t rank = 0;
};

/// Candidate maximizing rank([stacked; contract(F, v)]); the first maximum wins.
DirectionPick best_direction_serial(const std::vector<QMatrix>& F, const QMatrix& stacked,
                                    const std::vector<Direction>& candidates);
DirectionPick best_direction_omp(const std::vector<QMatrix>& F, const QMatrix& stacked,
                                 const std::vector<Direction>& candidates);

/// Unit vectors, unit-pair sums, then `random_count` seeded random directions.
std::vector<Direction> direction_grid(std::size_t n, std::size_t random_count, std::uint64_t seed);

QMatrix stack(const QMatrix& top, const QMatrix& bottom);

}  // namespace cartan::kernels
