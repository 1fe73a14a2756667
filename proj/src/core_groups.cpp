#include "soficlab/core_groups.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include <boost/pending/disjoint_sets.hpp>

#include "soficlab/errors.hpp"
#include "soficlab/rng.hpp"

namespace soficlab {

Permutation::Permutation(std::vector<Point> image) : image_(std::move(image)) {
  std::vector<bool> seen(image_.size(), false);
  for (Point x : image_) {
    if (x >= image_.size() || seen[x])
      fail(ErrorCode::InvalidArgument, "image is not a bijection of {0.." + std::to_string(image_.size()) + "-1}");
    seen[x] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  Permutation p;
  p.image_.resize(n);
  std::iota(p.image_.begin(), p.image_.end(), Point{0});
  return p;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.image_.resize(image_.size());
  for (Point x = 0; x < image_.size(); ++x) p.image_[image_[x]] = x;
  return p;
}

Permutation Permutation::then(const Permutation& q) const {
  if (q.size() != size()) fail(ErrorCode::SizeMismatch, "composing permutations of different sizes");
  Permutation p;
  p.image_.resize(image_.size());
  for (Point x = 0; x < image_.size(); ++x) p.image_[x] = q.image_[image_[x]];
  return p;
}

bool Permutation::is_identity() const { return fixed_points() == size(); }

bool Permutation::has_fixed_point() const {
  for (Point x = 0; x < image_.size(); ++x)
    if (image_[x] == x) return true;
  return false;
}

std::size_t Permutation::fixed_points() const {
  std::size_t count = 0;
  for (Point x = 0; x < image_.size(); ++x) count += image_[x] == x;
  return count;
}

std::size_t Permutation::moved_points() const { return size() - fixed_points(); }

std::size_t disagreements(const Permutation& p, const Permutation& q) {
  if (p.size() != q.size()) fail(ErrorCode::SizeMismatch, "permutations of different sizes");
  std::size_t count = 0;
  for (Point x = 0; x < p.size(); ++x) count += p(x) != q(x);
  return count;
}

Rational similarity_defect(const Permutation& p, const Permutation& q) {
  std::size_t d = disagreements(p, q);
  if (p.size() == 0) return Rational(0);
  return ratio(static_cast<std::int64_t>(d), static_cast<std::int64_t>(p.size()));
}

std::vector<std::vector<std::uint32_t>> FiniteGroup::table() const {
  std::vector<std::vector<std::uint32_t>> t(order_, std::vector<std::uint32_t>(order_));
  for (std::size_t a = 0; a < order_; ++a)
    for (std::size_t b = 0; b < order_; ++b) t[a][b] = mult_[a * order_ + b];
  return t;
}

FiniteGroup make_group_unchecked(std::size_t order, std::vector<std::uint32_t> mult) {
  FiniteGroup g;
  g.order_ = order;
  g.mult_ = std::move(mult);
  g.inv_.assign(order, 0);
  for (std::uint32_t a = 0; a < order; ++a)
    for (std::uint32_t b = 0; b < order; ++b)
      if (g.mult_[a * order + b] == 0) g.inv_[a] = b;
  return g;
}

namespace {

std::string triple(std::size_t a, std::size_t b, std::size_t c) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + ")";
}

}  // namespace

FiniteGroup group_from_cayley_table(const std::vector<std::vector<std::int64_t>>& table) {
  const std::size_t n = table.size();
  if (n == 0) fail(ErrorCode::NotAGroup, "empty table");
  for (std::size_t a = 0; a < n; ++a) {
    if (table[a].size() != n) fail(ErrorCode::NotAGroup, "table is not square (row " + std::to_string(a) + ")");
    for (auto v : table[a])
      if (v < 0 || static_cast<std::size_t>(v) >= n)
        fail(ErrorCode::NotAGroup, "entry " + std::to_string(v) + " out of range in row " + std::to_string(a));
  }
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<bool> row(n, false), col(n, false);
    for (std::size_t b = 0; b < n; ++b) {
      if (row[table[a][b]]) fail(ErrorCode::NotAGroup, "row " + std::to_string(a) + " repeats an entry");
      if (col[table[b][a]]) fail(ErrorCode::NotAGroup, "column " + std::to_string(a) + " repeats an entry");
      row[table[a][b]] = col[table[b][a]] = true;
    }
  }
  std::size_t e = n;
  for (std::size_t c = 0; c < n && e == n; ++c) {
    bool ok = true;
    for (std::size_t x = 0; x < n && ok; ++x)
      ok = table[c][x] == static_cast<std::int64_t>(x) && table[x][c] == static_cast<std::int64_t>(x);
    if (ok) e = c;
  }
  if (e == n) fail(ErrorCode::NotAGroup, "no two-sided identity");

  // swap labels 0 and e
  auto relabel = [e](std::size_t x) -> std::uint32_t {
    if (x == e) return 0;
    if (x == 0) return static_cast<std::uint32_t>(e);
    return static_cast<std::uint32_t>(x);
  };
  std::vector<std::uint32_t> mult(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      mult[relabel(a) * n + relabel(b)] = relabel(static_cast<std::size_t>(table[a][b]));

  auto m = [&](std::size_t a, std::size_t b) { return mult[a * n + b]; };
  auto check = [&](std::size_t a, std::size_t b, std::size_t c) {
    if (m(m(a, b), c) != m(a, m(b, c)))
      fail(ErrorCode::NotAGroup, "associativity fails at " + triple(relabel(a), relabel(b), relabel(c)) +
                                     " (original labels)");
  };
  if (n <= 64) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) check(a, b, c);
  } else {
    Rng rng(0);
    for (int t = 0; t < 100000; ++t) check(rng.below(n), rng.below(n), rng.below(n));
  }
  FiniteGroup g = make_group_unchecked(n, std::move(mult));
  for (std::uint32_t a = 0; a < n; ++a)
    if (g.mult(a, g.inv(a)) != 0 || g.mult(g.inv(a), a) != 0)
      fail(ErrorCode::NotAGroup, "element " + std::to_string(relabel(a)) + " has no two-sided inverse");
  return g;
}

FiniteGroup cyclic_group(std::size_t m) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "cyclic group of order 0");
  std::vector<std::uint32_t> mult(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) mult[a * m + b] = static_cast<std::uint32_t>((a + b) % m);
  return make_group_unchecked(m, std::move(mult));
}

FiniteGroup symmetric_group(std::size_t m, std::size_t order_budget) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "symmetric group of degree 0");
  std::size_t order = 1;
  for (std::size_t i = 2; i <= m; ++i) {
    order *= i;
    if (order > order_budget)
      fail(ErrorCode::SizeBudgetExceeded, "S_" + std::to_string(m) + " exceeds the order budget " +
                                               std::to_string(order_budget));
  }
  std::vector<std::vector<std::uint32_t>> perms;
  std::vector<std::uint32_t> p(m);
  std::iota(p.begin(), p.end(), 0u);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  std::map<std::vector<std::uint32_t>, std::uint32_t> index;
  for (std::uint32_t i = 0; i < perms.size(); ++i) index[perms[i]] = i;
  std::vector<std::uint32_t> mult(order * order);
  std::vector<std::uint32_t> r(m);
  for (std::size_t a = 0; a < order; ++a)
    for (std::size_t b = 0; b < order; ++b) {
      for (std::size_t x = 0; x < m; ++x) r[x] = perms[b][perms[a][x]];
      mult[a * order + b] = index.at(r);
    }
  return make_group_unchecked(order, std::move(mult));
}

std::vector<Permutation> regular_action(const FiniteGroup& g) {
  std::vector<Permutation> out;
  out.reserve(g.order());
  for (std::uint32_t h = 0; h < g.order(); ++h) {
    std::vector<Point> image(g.order());
    for (std::uint32_t x = 0; x < g.order(); ++x) image[x] = g.mult(x, h);
    out.emplace_back(std::move(image));
  }
  return out;
}

Partition::Partition(std::size_t n) : rep_(n) { std::iota(rep_.begin(), rep_.end(), Point{0}); }

Partition Partition::from_labels(std::span<const std::uint32_t> labels) {
  Partition p(labels.size());
  std::map<std::uint32_t, Point> first;
  for (Point x = 0; x < labels.size(); ++x) {
    auto [it, inserted] = first.emplace(labels[x], x);
    p.rep_[x] = it->second;
  }
  return p;
}

Partition Partition::from_classes(std::size_t n, const std::vector<std::vector<Point>>& classes) {
  std::vector<std::uint32_t> labels(n);
  std::vector<bool> covered(n, false);
  std::iota(labels.begin(), labels.end(), 0u);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (Point x : classes[c]) {
      if (x >= n || covered[x]) fail(ErrorCode::InvalidArgument, "classes overlap or leave the carrier");
      covered[x] = true;
      labels[x] = static_cast<std::uint32_t>(n + c);
    }
  return from_labels(labels);
}

std::size_t Partition::class_count() const {
  std::size_t count = 0;
  for (Point x = 0; x < rep_.size(); ++x) count += rep_[x] == x;
  return count;
}

std::vector<std::vector<Point>> Partition::classes() const {
  std::vector<std::vector<Point>> out;
  std::vector<std::size_t> slot(rep_.size());
  for (Point x = 0; x < rep_.size(); ++x) {
    if (rep_[x] == x) {
      slot[x] = out.size();
      out.emplace_back();
    }
    out[slot[rep_[x]]].push_back(x);
  }
  return out;
}

Partition partition_join(std::span<const Partition> ps, std::size_t n) {
  for (const auto& p : ps)
    if (p.size() != n) fail(ErrorCode::SizeMismatch, "partitions of different carrier sizes");
  std::vector<std::size_t> rank(n), parent(n);
  boost::disjoint_sets<std::size_t*, std::size_t*> sets(rank.data(), parent.data());
  for (std::size_t x = 0; x < n; ++x) sets.make_set(x);
  for (const auto& p : ps)
    for (Point x = 0; x < n; ++x) sets.union_set(x, p.rep(x));
  std::vector<std::uint32_t> labels(n);
  for (std::size_t x = 0; x < n; ++x) labels[x] = static_cast<std::uint32_t>(sets.find_set(x));
  return Partition::from_labels(labels);
}

Partition partition_join(std::span<const Partition> ps) {
  if (ps.empty()) fail(ErrorCode::InvalidArgument, "carrier size needed to join an empty list");
  return partition_join(ps, ps.front().size());
}

}  // namespace soficlab
