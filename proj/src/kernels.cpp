#include "cartan/kernels.hpp"

#include <random>

namespace cartan::kernels {

QMatrix contract(const std::vector<QMatrix>& F, const Direction& v) {
  std::size_t r = F.size();
  std::size_t n = v.size();
  std::size_t rows = r ? F[0].rows() : 0;
  QMatrix m(rows, r);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t i = 0; i < rows; ++i) {
      Rational acc = 0;
      for (std::size_t l = 0; l < n; ++l)
        if (v[l] != 0 && F[k](i, l) != 0) acc += v[l] * F[k](i, l);
      m(i, k) = acc;
    }
  return m;
}

QMatrix stack(const QMatrix& top, const QMatrix& bottom) {
  if (top.rows() == 0) return bottom;
  QMatrix out(top.rows() + bottom.rows(), bottom.cols());
  for (std::size_t i = 0; i < top.rows(); ++i)
    for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
  for (std::size_t i = 0; i < bottom.rows(); ++i)
    for (std::size_t j = 0; j < bottom.cols(); ++j) out(top.rows() + i, j) = bottom(i, j);
  return out;
}

namespace {

std::size_t candidate_rank(const std::vector<QMatrix>& F, const QMatrix& stacked,
                           const Direction& v) {
  return rank(stack(stacked, contract(F, v)));
}

DirectionPick first_max(const std::vector<std::size_t>& ranks) {
  DirectionPick best;
  for (std::size_t c = 0; c < ranks.size(); ++c)
    if (c == 0 || ranks[c] > best.rank) best = {c, ranks[c]};
  return best;
}

}  // namespace

DirectionPick best_direction_serial(const std::vector<QMatrix>& F, const QMatrix& stacked,
                                    const std::vector<Direction>& candidates) {
  std::vector<std::size_t> ranks(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    ranks[c] = candidate_rank(F, stacked, candidates[c]);
  return first_max(ranks);
}

DirectionPick best_direction_omp(const std::vector<QMatrix>& F, const QMatrix& stacked,
                                 const std::vector<Direction>& candidates) {
  std::vector<std::size_t> ranks(candidates.size());
  const long count = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < count; ++c) ranks[c] = candidate_rank(F, stacked, candidates[c]);
  // ties resolved serially in enumeration order
  return first_max(ranks);
}

std::vector<Direction> direction_grid(std::size_t n, std::size_t random_count, std::uint64_t seed) {
  std::vector<Direction> grid;
  for (std::size_t i = 0; i < n; ++i) {
    Direction v(n, Rational(0));
    v[i] = 1;
    grid.push_back(v);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      Direction v(n, Rational(0));
      v[i] = 1;
      v[j] = 1;
      grid.push_back(v);
    }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num(-9, 9), den(1, 5);
  for (std::size_t c = 0; c < random_count; ++c) {
    Direction v(n);
    for (auto& x : v) {
      x = Rational(num(rng), den(rng));
      x.canonicalize();
    }
    grid.push_back(v);
  }
  return grid;
}

}  // namespace cartan::kernels
