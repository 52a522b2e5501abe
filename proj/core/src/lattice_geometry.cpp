#include "msalab/lattice_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "msalab/errors.hpp"

namespace msalab {

Site::Site(int dim) : dim_(dim) {
  require(dim >= 1 && dim <= kMaxDim, "lattice dimension must lie in [1, 3]");
}

Site::Site(std::initializer_list<std::int64_t> coords) : dim_(static_cast<int>(coords.size())) {
  require(dim_ >= 1 && dim_ <= kMaxDim, "lattice dimension must lie in [1, 3]");
  std::copy(coords.begin(), coords.end(), x_.begin());
}

Site Site::unit(int dim, int axis, std::int64_t length) {
  Site s(dim);
  s[axis] = length;
  return s;
}

std::int64_t Site::sup_norm() const {
  std::int64_t m = 0;
  for (int k = 0; k < dim_; ++k) m = std::max(m, std::abs(x_[static_cast<std::size_t>(k)]));
  return m;
}

Site& Site::operator+=(const Site& other) {
  for (int k = 0; k < dim_; ++k) x_[static_cast<std::size_t>(k)] += other[k];
  return *this;
}

Site& Site::operator-=(const Site& other) {
  for (int k = 0; k < dim_; ++k) x_[static_cast<std::size_t>(k)] -= other[k];
  return *this;
}

Site Site::operator-() const {
  Site s(*this);
  for (int k = 0; k < dim_; ++k) s[k] = -s[k];
  return s;
}

std::string Site::to_string() const {
  std::ostringstream os;
  os << '(';
  for (int k = 0; k < dim_; ++k) os << (k ? "," : "") << x_[static_cast<std::size_t>(k)];
  os << ')';
  return os.str();
}

std::int64_t sup_distance(const Site& a, const Site& b) { return (a - b).sup_norm(); }

LatticeBox::LatticeBox(Site center, std::int64_t radius) : center_(center), radius_(radius) {
  require(center.dim() >= 1, "box centre must have a dimension");
  require(radius >= 0, "box radius must be non-negative");
}

std::size_t LatticeBox::size() const {
  std::size_t n = 1;
  for (int k = 0; k < dim(); ++k) n *= static_cast<std::size_t>(side());
  return n;
}

bool LatticeBox::contains(const Site& y) const { return sup_distance(y, center_) <= radius_; }

bool LatticeBox::contains(const LatticeBox& inner) const {
  return sup_distance(inner.center_, center_) + inner.radius_ <= radius_;
}

std::size_t LatticeBox::index_of(const Site& y) const {
  std::size_t idx = 0;
  for (int k = 0; k < dim(); ++k) {
    idx = idx * static_cast<std::size_t>(side()) +
          static_cast<std::size_t>(y[k] - center_[k] + radius_);
  }
  return idx;
}

Site LatticeBox::site_at(std::size_t index) const {
  Site y(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    const auto s = static_cast<std::size_t>(side());
    y[k] = center_[k] - radius_ + static_cast<std::int64_t>(index % s);
    index /= s;
  }
  return y;
}

std::vector<Site> LatticeBox::sites() const {
  std::vector<Site> out;
  out.reserve(size());
  for_each_site(*this, [&](const Site& y) { out.push_back(y); });
  return out;
}

std::int64_t box_distance(const LatticeBox& a, const LatticeBox& b) {
  return std::max<std::int64_t>(0, sup_distance(a.center(), b.center()) - a.radius() - b.radius());
}

bool boxes_intersect(const LatticeBox& a, const LatticeBox& b) {
  return sup_distance(a.center(), b.center()) <= a.radius() + b.radius();
}

double out_shell_threshold(std::int64_t radius) {
  return std::pow(static_cast<double>(radius), 0.8);
}

bool in_out_shell(const LatticeBox& box, const Site& y) {
  const auto r = sup_distance(y, box.center());
  return r <= box.radius() && static_cast<double>(r) > out_shell_threshold(box.radius());
}

std::vector<Site> out_shell_sites(const LatticeBox& box) {
  const double threshold = out_shell_threshold(box.radius());
  std::vector<Site> out;
  for_each_site(box, [&](const Site& y) {
    if (static_cast<double>(sup_distance(y, box.center())) > threshold) out.push_back(y);
  });
  return out;
}

Site clamp_center(const Site& z, const Site& x, std::int64_t L, std::int64_t margin) {
  require(margin >= 0 && margin <= L, "clamp margin must satisfy 0 <= m <= L");
  require(sup_distance(z, x) <= L, "clamp_center requires ||z - x|| <= L");
  const std::int64_t reach = L - margin;
  Site out = z;
  for (int k = 0; k < z.dim(); ++k) {
    out[k] = std::clamp(z[k], x[k] - reach, x[k] + reach);
  }
  return out;
}

Site merge_midpoint(const Site& a, const Site& b) {
  Site m(a.dim());
  for (int k = 0; k < a.dim(); ++k) {
    const std::int64_t sum = a[k] + b[k];
    m[k] = (sum % 2 == 0) ? sum / 2 : (sum + 1) / 2;
  }
  return m;
}

std::string to_string(CoverCase c) {
  switch (c) {
    case CoverCase::Empty: return "empty";
    case CoverCase::Separate: return "separate";
    case CoverCase::MergedPair: return "merged-pair";
    case CoverCase::MergedAll: return "merged-all";
  }
  return "unknown";
}

std::int64_t DangerousCover::total_diameter() const {
  std::int64_t total = 0;
  for (const auto& c : cubes) total += c.diameter();
  return total;
}

DangerousCover dangerous_cover(std::span<const Site> bad_centers, const LatticeBox& parent,
                               std::int64_t l) {
  require(l >= 1, "small scale l must be >= 1");
  require(bad_centers.size() <= 3, "at most three bad centres can be covered");
  require(parent.radius() >= 26 * l, "dangerous cover needs parent radius L >= 26 l");
  const Site& x = parent.center();
  const std::int64_t L = parent.radius();
  for (const auto& z : bad_centers) {
    require(z.dim() == parent.dim(), "bad centre dimension mismatch");
    require(parent.contains(LatticeBox(z, l)), "each bad cube B_l(z_i) must lie inside the parent");
  }

  DangerousCover cover{parent, l, {}, {}, CoverCase::Empty};
  for (const auto& z : bad_centers) cover.anchors.push_back(clamp_center(z, x, L, 2 * l));
  const auto n = cover.anchors.size();
  if (n == 0) return cover;

  std::vector<LatticeBox> small;
  for (const auto& a : cover.anchors) small.emplace_back(a, 2 * l);

  std::optional<std::pair<std::size_t, std::size_t>> close;
  for (std::size_t i = 0; i < n && !close; ++i)
    for (std::size_t j = i + 1; j < n && !close; ++j)
      if (box_distance(small[i], small[j]) < 2 * l) close = std::pair{i, j};

  if (!close) {
    cover.cubes = small;
    cover.construction = CoverCase::Separate;
    return cover;
  }

  const auto [i, j] = *close;
  const Site pair_center = clamp_center(merge_midpoint(cover.anchors[i], cover.anchors[j]), x, L, 8 * l);
  const LatticeBox pair_cube(pair_center, 8 * l);
  std::optional<std::size_t> rest;
  for (std::size_t k = 0; k < n; ++k)
    if (k != i && k != j) rest = k;

  if (!rest) {
    cover.cubes = {pair_cube};
    cover.construction = CoverCase::MergedPair;
    return cover;
  }

  const Site rest_center = clamp_center(cover.anchors[*rest], x, L, 8 * l);
  const LatticeBox rest_cube(rest_center, 8 * l);
  if (box_distance(pair_cube, rest_cube) >= 2 * l) {
    cover.cubes = {pair_cube, small[*rest]};
    cover.construction = CoverCase::MergedPair;
    return cover;
  }

  // the 26l merge margin mirrors the 8l construction
  const Site all_center = clamp_center(merge_midpoint(pair_center, rest_center), x, L, 26 * l);
  cover.cubes = {LatticeBox(all_center, 26 * l)};
  cover.construction = CoverCase::MergedAll;
  return cover;
}

CoverInvariantReport check_cover_invariants(const DangerousCover& cover) {
  CoverInvariantReport r;
  const std::int64_t l = cover.small_scale;
  for (std::size_t i = 0; i < cover.cubes.size(); ++i) {
    if (!cover.parent.contains(cover.cubes[i])) r.inside_parent = false;
    for (std::size_t j = i + 1; j < cover.cubes.size(); ++j)
      if (box_distance(cover.cubes[i], cover.cubes[j]) < 2 * l) r.separated = false;
  }
  r.diameter_ok = cover.total_diameter() <= 52 * l;
  for (const auto& a : cover.anchors) {
    for_each_site(LatticeBox(a, 2 * l), [&](const Site& y) {
      const bool covered = std::any_of(cover.cubes.begin(), cover.cubes.end(),
                                       [&](const LatticeBox& c) { return c.contains(y); });
      if (!covered) r.covers_anchors = false;
    });
  }
  return r;
}

DisjointnessCheck cover_disjointness_check(const DangerousCover& cover,
                                           std::span<const Site> bad_centers, std::int64_t l) {
  DisjointnessCheck result;
  if (bad_centers.empty() || cover.parent.radius() < l) return result;
  const LatticeBox interior(cover.parent.center(), cover.parent.radius() - l);
  for_each_site(interior, [&](const Site& z) {
    if (!result.pass) return;
    for (const auto& c : cover.cubes)
      if (c.contains(z)) return;
    for (const auto& b : bad_centers) {
      if (sup_distance(z, b) <= 2 * l) {
        result.pass = false;
        result.witness = z;
        result.offending_center = b;
        return;
      }
    }
  });
  return result;
}

}  // namespace msalab
