#include "msalab/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "msalab/errors.hpp"

namespace msalab {

namespace {

void refuse_if_resonant(double distance, double E) {
  if (distance < kRefusalDistance) {
    std::ostringstream os;
    os << "energy " << E << " lies within " << distance << " of the spectrum; Green's function refused";
    throw NumericalRefusal(os.str());
  }
}

Eigen::MatrixXcd shifted_inverse(const OperatorSample& sample, double E) {
  const auto n = static_cast<Eigen::Index>(sample.size());
  if (sample.real) {
    Eigen::MatrixXd a = sample.real_matrix();
    a.diagonal().array() -= E;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).inverse().cast<Complex>();
  }
  Eigen::MatrixXcd a = sample.matrix;
  a.diagonal().array() -= Complex(E, 0.0);
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(a).solve(Eigen::MatrixXcd::Identity(n, n));
}

Eigen::VectorXcd shifted_solve(const OperatorSample& sample, double E, Eigen::Index column) {
  const auto n = static_cast<Eigen::Index>(sample.size());
  if (sample.real) {
    Eigen::MatrixXd a = sample.real_matrix();
    a.diagonal().array() -= E;
    const Eigen::VectorXd rhs = Eigen::VectorXd::Unit(n, column);
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(rhs).cast<Complex>();
  }
  Eigen::MatrixXcd a = sample.matrix;
  a.diagonal().array() -= Complex(E, 0.0);
  const Eigen::VectorXcd rhs = Eigen::VectorXcd::Unit(n, column);
  return Eigen::PartialPivLU<Eigen::MatrixXcd>(a).solve(rhs);
}

}  // namespace

std::vector<double> spectrum(const OperatorSample& sample) {
  Eigen::VectorXd values;
  if (sample.real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sample.real_matrix(), Eigen::EigenvaluesOnly);
    values = solver.eigenvalues();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sample.matrix, Eigen::EigenvaluesOnly);
    values = solver.eigenvalues();
  }
  std::vector<double> out(values.data(), values.data() + values.size());
  std::sort(out.begin(), out.end());
  return out;
}

double resonance_distance(std::span<const double> eigenvalues, double E) {
  if (eigenvalues.empty()) return std::numeric_limits<double>::infinity();
  const auto it = std::lower_bound(eigenvalues.begin(), eigenvalues.end(), E);
  double d = std::numeric_limits<double>::infinity();
  if (it != eigenvalues.end()) d = std::min(d, std::abs(*it - E));
  if (it != eigenvalues.begin()) d = std::min(d, std::abs(*std::prev(it) - E));
  return d;
}

double resonance_distance(const OperatorSample& sample, double E) {
  const auto ev = spectrum(sample);
  return resonance_distance(ev, E);
}

double nr_threshold(std::int64_t L, double rho_prime) {
  require(L >= 1, "non-resonance threshold needs L >= 1");
  return std::exp(-std::pow(std::log(static_cast<double>(L)), rho_prime));
}

NRStatus nr_status(double distance, std::int64_t L, double rho_prime) {
  NRStatus s;
  s.distance = distance;
  s.threshold = nr_threshold(L, rho_prime);
  s.enr = distance >= s.threshold;
  s.degenerate = L == 1;
  return s;
}

NRStatus is_E_NR(const OperatorSample& sample, double E, double rho_prime) {
  return nr_status(resonance_distance(sample, E), sample.box.radius(), rho_prime);
}

Eigen::MatrixXcd greens(const OperatorSample& sample, double E) {
  const auto ev = spectrum(sample);
  return greens(sample, E, ev);
}

Eigen::MatrixXcd greens(const OperatorSample& sample, double E, std::span<const double> eigenvalues) {
  refuse_if_resonant(resonance_distance(eigenvalues, E), E);
  return shifted_inverse(sample, E);
}

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

CubeAnalyzer::CubeAnalyzer(const OperatorSample& sample) : sample_(&sample), eigenvalues_(spectrum(sample)) {}

NRStatus CubeAnalyzer::nr(double E, double rho_prime) const {
  return nr_status(resonance_distance(eigenvalues_, E), sample_->box.radius(), rho_prime);
}

CubeReport CubeAnalyzer::classify(double E, double kappa, const WeightParams& weights, bool all_sources) const {
  require(!std::isnan(kappa), "kappa must be a number");
  const auto& box = sample_->box;
  const NRStatus status = nr(E, weights.rho_prime);
  CubeReport report{box, E, kappa, status.distance, status.threshold, status.enr, status.degenerate, false, {}};
  if (!status.enr) return report;
  refuse_if_resonant(status.distance, E);

  const double threshold = out_shell_threshold(box.radius());
  bool good = true;
  auto scan = [&](const Site& source, auto&& g_abs_at) {
    for_each_site(box, [&](const Site& y) {
      const auto r = sup_distance(y, source);
      if (!(static_cast<double>(r) > threshold)) return;
      const double g = g_abs_at(y);
      const double w = log_weight(static_cast<double>(r), weights.rho);
      const double allowed = std::exp(-kappa * w);
      const double log_ratio = std::log(g) + kappa * w;
      if (g > allowed) good = false;
      if (!report.worst_witness || log_ratio > report.worst_witness->log_ratio)
        report.worst_witness = Witness{source, y, g, allowed, log_ratio};
    });
  };

  if (!all_sources) {
    const auto c = static_cast<Eigen::Index>(box.index_of(box.center()));
    // G is Hermitian for real E, so |G(x, y)| = |G(y, x)|
    const Eigen::VectorXcd col = shifted_solve(*sample_, E, c);
    scan(box.center(), [&](const Site& y) { return std::abs(col(static_cast<Eigen::Index>(box.index_of(y)))); });
  } else {
    const Eigen::MatrixXcd g = shifted_inverse(*sample_, E);
    for_each_site(box, [&](const Site& s) {
      const auto row = static_cast<Eigen::Index>(box.index_of(s));
      scan(s, [&](const Site& y) { return std::abs(g(row, static_cast<Eigen::Index>(box.index_of(y)))); });
    });
  }
  report.good = good;
  return report;
}

CubeReport classify_cube(const OperatorSample& sample, double E, double kappa, const WeightParams& weights,
                         bool all_sources) {
  return CubeAnalyzer(sample).classify(E, kappa, weights, all_sources);
}

ResolventResidual geometric_resolvent_residual(const OperatorSample& outer, const LatticeBox& inner, double E) {
  require(outer.box.contains(inner) && !(outer.box == inner), "inner box must lie strictly inside the outer box");
  const OperatorSample in = restrict_to(outer, inner);
  const Eigen::MatrixXcd g_outer = greens(outer, E);
  const Eigen::MatrixXcd g_inner = greens(in, E);

  std::vector<Eigen::Index> in_idx;
  std::vector<Eigen::Index> out_idx;
  for_each_site(outer.box, [&](const Site& y) {
    (inner.contains(y) ? in_idx : out_idx).push_back(static_cast<Eigen::Index>(outer.box.index_of(y)));
  });

  const auto x_inner = static_cast<Eigen::Index>(inner.index_of(inner.center()));
  const auto x_outer = static_cast<Eigen::Index>(outer.box.index_of(inner.center()));
  // inner sites are enumerated in the same relative order in both boxes
  const Eigen::RowVectorXcd g_row = g_inner.row(x_inner);
  const Eigen::MatrixXcd coupling = outer.matrix(in_idx, out_idx);
  const Eigen::RowVectorXcd rhs = -(g_row * coupling) * g_outer(out_idx, out_idx);

  ResolventResidual r;
  for (std::size_t k = 0; k < out_idx.size(); ++k) {
    const Complex lhs = g_outer(x_outer, out_idx[k]);
    r.residual = std::max(r.residual, std::abs(lhs - rhs(static_cast<Eigen::Index>(k))));
  }
  r.checked = out_idx.size();
  r.inner_norm = operator_norm(g_inner);
  r.outer_norm = operator_norm(g_outer);
  r.row_sum = gamma_norm_bound(outer.kernel, outer.box.dim(), std::max<std::int64_t>(1, 2 * outer.box.radius())).total;
  r.scale = r.inner_norm * r.outer_norm * std::abs(outer.epsilon) * r.row_sum;
  return r;
}

}  // namespace msalab
