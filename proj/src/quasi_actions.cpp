#include "soficlab/quasi_actions.hpp"

namespace soficlab {

std::size_t degradation_support(const Rational& delta, std::size_t carrier) {
  Rational scaled = delta * static_cast<std::int64_t>(carrier);
  BigInt num = boost::multiprecision::numerator(scaled);
  BigInt den = boost::multiprecision::denominator(scaled);
  BigInt ceil = (num + den - 1) / den;
  std::size_t k = ceil.convert_to<std::size_t>();
  if (k < 2) k = 2;
  return std::min(k, carrier);
}

QuasiActionTable<Elt> regular_table(const FiniteGroup& g) {
  std::map<Elt, Permutation> entries;
  auto perms = regular_action(g);
  for (std::size_t h = 0; h < perms.size(); ++h) entries.emplace(static_cast<Elt>(h), std::move(perms[h]));
  return QuasiActionTable<Elt>(g.order(), std::move(entries));
}

QuasiActionTable<Elt> shift_table(std::size_t carrier, Elt max_abs) {
  if (carrier == 0) fail(ErrorCode::InvalidArgument, "empty carrier");
  if (max_abs < 0) fail(ErrorCode::InvalidArgument, "negative shift range");
  std::map<Elt, Permutation> entries;
  const auto m = static_cast<Elt>(carrier);
  for (Elt k = -max_abs; k <= max_abs; ++k) {
    std::vector<Point> image(carrier);
    for (Elt x = 0; x < m; ++x) image[x] = static_cast<Point>(((x + k) % m + m) % m);
    entries.emplace(k, Permutation(std::move(image)));
  }
  return QuasiActionTable<Elt>(carrier, std::move(entries));
}

}  // namespace soficlab
