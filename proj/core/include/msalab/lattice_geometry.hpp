#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msalab {

inline constexpr int kMaxDim = 3;

/// A point of Z^d, d <= kMaxDim. Unused trailing coordinates are kept at zero
/// so that defaulted comparison is lexicographic over the active coordinates.
class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<std::int64_t> coords);

  static Site unit(int dim, int axis, std::int64_t length = 1);

  int dim() const { return dim_; }
  std::int64_t operator[](int k) const { return x_[static_cast<std::size_t>(k)]; }
  std::int64_t& operator[](int k) { return x_[static_cast<std::size_t>(k)]; }

  /// max_k |x_k|
  std::int64_t sup_norm() const;

  Site& operator+=(const Site& other);
  Site& operator-=(const Site& other);
  friend Site operator+(Site a, const Site& b) { return a += b; }
  friend Site operator-(Site a, const Site& b) { return a -= b; }
  Site operator-() const;

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;

  std::string to_string() const;

 private:
  int dim_ = 0;
  std::array<std::int64_t, kMaxDim> x_{};
};

std::int64_t sup_distance(const Site& a, const Site& b);

/// B_L(x) = { y : ||y - x||_inf <= L }. Sites are enumerated in lexicographic
/// order (first coordinate most significant); that order is the row/column
/// order of every matrix assembled over the box.
class LatticeBox {
 public:
  LatticeBox(Site center, std::int64_t radius);

  const Site& center() const { return center_; }
  std::int64_t radius() const { return radius_; }
  int dim() const { return center_.dim(); }
  std::int64_t side() const { return 2 * radius_ + 1; }
  std::size_t size() const;

  bool contains(const Site& y) const;
  bool contains(const LatticeBox& inner) const;

  std::size_t index_of(const Site& y) const;
  Site site_at(std::size_t index) const;
  std::vector<Site> sites() const;

  /// Sup-norm diameter 2L.
  std::int64_t diameter() const { return 2 * radius_; }

  friend bool operator==(const LatticeBox&, const LatticeBox&) = default;

 private:
  Site center_;
  std::int64_t radius_;
};

/// Visits every site of the box in lexicographic order.
template <class Fn>
void for_each_site(const LatticeBox& box, Fn&& fn) {
  const int d = box.dim();
  Site y = box.center();
  for (int k = 0; k < d; ++k) y[k] -= box.radius();
  while (true) {
    fn(static_cast<const Site&>(y));
    int k = d - 1;
    while (k >= 0 && y[k] == box.center()[k] + box.radius()) {
      y[k] = box.center()[k] - box.radius();
      --k;
    }
    if (k < 0) return;
    ++y[k];
  }
}

/// Lattice distance between two boxes: min over site pairs of the sup-norm
/// distance, i.e. max(0, ||a - b|| - r_a - r_b).
std::int64_t box_distance(const LatticeBox& a, const LatticeBox& b);

bool boxes_intersect(const LatticeBox& a, const LatticeBox& b);

/// L^{4/5}, the inner radius of the outer shell.
double out_shell_threshold(std::int64_t radius);

bool in_out_shell(const LatticeBox& box, const Site& y);

/// Sites y of the box with L^{4/5} < ||y - center|| <= L (strict comparison in
/// double precision).
std::vector<Site> out_shell_sites(const LatticeBox& box);

/// Componentwise projection of z onto the box of radius L - margin around x.
/// Throws ValidationError if margin > L or ||z - x|| > L.
Site clamp_center(const Site& z, const Site& x, std::int64_t L, std::int64_t margin);

/// Centre used when two cubes are merged: per coordinate (a_k + b_k) / 2,
/// rounded up when the sum is odd.
Site merge_midpoint(const Site& a, const Site& b);

enum class CoverCase {
  Empty,         // no bad centres
  Separate,      // every 2l-cube kept on its own
  MergedPair,    // two cubes merged into an 8l-cube, the rest kept as 2l-cubes
  MergedAll,     // everything merged into one 26l-cube
};

std::string to_string(CoverCase c);

/// The dangerous cubes isolating up to three bad l-cubes inside a parent box.
struct DangerousCover {
  LatticeBox parent;
  std::int64_t small_scale;              // l
  std::vector<LatticeBox> cubes;         // B_i, empty cubes are omitted
  std::vector<Site> anchors;             // z_i^*, one per bad centre
  CoverCase construction = CoverCase::Empty;

  std::int64_t total_diameter() const;
};

/// Builds the cover for up to three bad centres. Requires each B_l(z_i) inside
/// the parent and parent radius >= 26 l.
DangerousCover dangerous_cover(std::span<const Site> bad_centers, const LatticeBox& parent,
                               std::int64_t l);

struct CoverInvariantReport {
  bool separated = true;        // pairwise dist(B_i, B_j) >= 2l
  bool covers_anchors = true;   // union contains every B_{2l}(z_i^*)
  bool diameter_ok = true;      // sum of diameters <= 52 l
  bool inside_parent = true;    // every B_i inside the parent
  bool ok() const { return separated && covers_anchors && diameter_ok && inside_parent; }
};

CoverInvariantReport check_cover_invariants(const DangerousCover& cover);

struct DisjointnessCheck {
  bool pass = true;
  std::optional<Site> witness;        // first offending z
  std::optional<Site> offending_center;
};

/// Exhaustively verifies that every z of the parent with ||z - x|| <= L - l
/// lying outside the cover has B_l(z) disjoint from every B_l(z_i).
DisjointnessCheck cover_disjointness_check(const DangerousCover& cover,
                                           std::span<const Site> bad_centers, std::int64_t l);

}  // namespace msalab
