#include "cartan/sampling.hpp"

#include <algorithm>

namespace cartan {

Rational random_rational(std::mt19937_64& rng, bool positive, int bound) {
  std::uniform_int_distribution<int> num(positive ? 1 : -bound, bound);
  std::uniform_int_distribution<int> den(1, 23);
  while (true) {
    Rational q(num(rng), den(rng));
    if (q == 0) continue;
    q.canonicalize();
    return q;
  }
}

namespace {

void collect(const Expr& e, std::vector<IndetId>& out) {
  for (IndetId id : indeterminates(e)) {
    out.push_back(id);
    const IndetInfo& info = indet_info(id);
    if (info.opaque)
      for (const auto& a : info.args) collect(a, out);
  }
}

}  // namespace

NumericPoint random_point(const std::vector<Expr>& exprs, std::mt19937_64& rng, bool positive,
                          const NumericPoint& fixed) {
  std::vector<IndetId> ids;
  for (const auto& e : exprs) collect(e, ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  NumericPoint pt = fixed;
  for (IndetId id : ids)
    if (!pt.count(id)) pt[id] = random_rational(rng, positive);
  return pt;
}

}  // namespace cartan
