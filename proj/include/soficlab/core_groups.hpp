#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "soficlab/rational.hpp"

namespace soficlab {

using Point = std::uint32_t;

class Permutation {
 public:
  Permutation() = default;
  // Throws InvalidArgument unless image is a bijection of {0..size-1}.
  explicit Permutation(std::vector<Point> image);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return image_.size(); }
  Point operator()(Point x) const { return image_[x]; }
  const std::vector<Point>& image() const { return image_; }

  Permutation inverse() const;
  // Apply *this first, then q: x -> q(this(x)).
  Permutation then(const Permutation& q) const;

  bool is_identity() const;
  bool has_fixed_point() const;
  std::size_t fixed_points() const;
  std::size_t moved_points() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<Point> image_;
};

// Number of points on which p and q disagree.
std::size_t disagreements(const Permutation& p, const Permutation& q);

// |{a : p(a) != q(a)}| / size.
Rational similarity_defect(const Permutation& p, const Permutation& q);

// Finite group on {0..order-1} with identity 0.
class FiniteGroup {
 public:
  static constexpr std::uint32_t identity = 0;

  std::size_t order() const { return order_; }
  std::uint32_t mult(std::uint32_t a, std::uint32_t b) const { return mult_[a * order_ + b]; }
  std::uint32_t inv(std::uint32_t a) const { return inv_[a]; }
  bool contains(std::int64_t a) const { return a >= 0 && static_cast<std::size_t>(a) < order_; }

  std::vector<std::vector<std::uint32_t>> table() const;

  friend bool operator==(const FiniteGroup&, const FiniteGroup&) = default;

 private:
  friend FiniteGroup group_from_cayley_table(const std::vector<std::vector<std::int64_t>>&);
  friend FiniteGroup make_group_unchecked(std::size_t, std::vector<std::uint32_t>);

  std::size_t order_ = 1;
  std::vector<std::uint32_t> mult_{0};
  std::vector<std::uint32_t> inv_{0};
};

// Validates the table (Latin square, identity, associativity) and relabels the
// identity to 0. Associativity is exhaustive up to order 64 and sampled with
// 10^5 seeded triples above that.
FiniteGroup group_from_cayley_table(const std::vector<std::vector<std::int64_t>>& table);

FiniteGroup cyclic_group(std::size_t m);

// Elements are the permutations of {0..m-1} in lexicographic order; a*b means
// apply a, then b.
FiniteGroup symmetric_group(std::size_t m, std::size_t order_budget = 1000);

// g -> (x -> x*g); a right action, so image[g].then(image[h]) = image[g*h].
std::vector<Permutation> regular_action(const FiniteGroup& g);

class Partition {
 public:
  // Discrete partition on n points.
  explicit Partition(std::size_t n = 0);
  // rep[x] is any member of x's class; normalized to class minima.
  static Partition from_labels(std::span<const std::uint32_t> labels);
  static Partition from_classes(std::size_t n, const std::vector<std::vector<Point>>& classes);

  std::size_t size() const { return rep_.size(); }
  Point rep(Point x) const { return rep_[x]; }
  bool related(Point x, Point y) const { return rep_[x] == rep_[y]; }
  std::size_t class_count() const;
  std::vector<std::vector<Point>> classes() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<Point> rep_;  // class minimum
};

Partition partition_join(std::span<const Partition> ps, std::size_t n);
Partition partition_join(std::span<const Partition> ps);

}  // namespace soficlab
