#include "bdagar/dagar.hpp"

#include "bdagar/errors.hpp"
#include "bdagar/sparse_chol.hpp"
#include "bdagar/stats.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bdagar {

PrecisionKind precision_kind_from_string(const std::string& s) {
  if (s == "dagar") return PrecisionKind::dagar;
  if (s == "car") return PrecisionKind::car;
  throw ValidationError("unknown precision kind '" + s + "' (expected dagar or car)");
}

std::string to_string(PrecisionKind kind) {
  return kind == PrecisionKind::dagar ? "dagar" : "car";
}

void check_rho_domain(double rho) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw ValidationError("rho must lie in [0, 1), got " + std::to_string(rho));
}

GmrfScale::GmrfScale(double t) : tau(t) {
  if (!(tau > 0.0)) throw ValidationError("tau must be positive, got " + std::to_string(tau));
}

Eigen::SparseMatrix<double> DagarComponents::b_matrix() const {
  const int k = static_cast<int>(f.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < k; ++i)
    for (int j : sets.preceding[i]) trips.emplace_back(i, j, row_b(i));
  Eigen::SparseMatrix<double> b(k, k);
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

DagarComponents build_BF(const RegionGraph& graph, double rho) {
  check_rho_domain(rho);
  const int k = graph.size();
  DagarComponents c;
  c.rho = rho;
  c.sets = NeighborSets::of(graph);
  c.row_b = Eigen::VectorXd::Zero(k);
  c.f = Eigen::VectorXd::Zero(k);
  const double rho2 = rho * rho;
  for (int i = 0; i < k; ++i) {
    const double n = c.sets.counts[i];
    const double denom = 1.0 + (n - 1.0) * rho2;
    if (n > 0) c.row_b(i) = rho / denom;
    c.f(i) = denom / (1.0 - rho2);
  }
  return c;
}

namespace {

// Assemble (I-B)^T F (I-B) from neighbor-set rows. Row i of (I-B) has a 1 at
// i and -b_i at each j in N(i); Q accumulates f_i * row_i^T row_i.
Eigen::SparseMatrix<double> assemble_dagar_q(const NeighborSets& sets, double rho) {
  const int k = static_cast<int>(sets.counts.size());
  const double rho2 = rho * rho;
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < k; ++i) {
    const double n = sets.counts[i];
    const double denom = 1.0 + (n - 1.0) * rho2;
    const double fi = denom / (1.0 - rho2);
    const double bi = n > 0 ? rho / denom : 0.0;
    const auto& nbrs = sets.preceding[i];
    trips.emplace_back(i, i, fi);
    for (int j : nbrs) {
      trips.emplace_back(i, j, -fi * bi);
      trips.emplace_back(j, i, -fi * bi);
      for (int l : nbrs) trips.emplace_back(j, l, fi * bi * bi);
    }
  }
  Eigen::SparseMatrix<double> q(k, k);
  q.setFromTriplets(trips.begin(), trips.end());
  return q;
}

Eigen::SparseMatrix<double> assemble_car_q(const Eigen::VectorXd& degrees,
                                           const std::vector<std::pair<int, int>>& edges,
                                           double rho) {
  const int k = static_cast<int>(degrees.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < k; ++i) trips.emplace_back(i, i, degrees(i));
  for (auto [a, b] : edges) {
    trips.emplace_back(a, b, -rho);
    trips.emplace_back(b, a, -rho);
  }
  Eigen::SparseMatrix<double> q(k, k);
  q.setFromTriplets(trips.begin(), trips.end());
  return q;
}

}  // namespace

SpatialPrecision dagar_precision(const RegionGraph& graph, double rho) {
  const DagarComponents c = build_BF(graph, rho);
  SpatialPrecision prec;
  prec.kind = PrecisionKind::dagar;
  prec.q = assemble_dagar_q(c.sets, rho);
  prec.logdet = c.f.array().log().sum();
  return prec;
}

SpatialPrecision car_precision(const RegionGraph& graph, double rho) {
  check_rho_domain(rho);
  const auto deg = graph.degrees();
  const int k = graph.size();
  Eigen::VectorXd degrees(k);
  for (int i = 0; i < k; ++i) {
    if (deg[i] == 0)
      throw ValidationError("car precision requires degree >= 1; region '" + graph.ids()[i] +
                            "' is isolated");
    degrees(i) = double(deg[i]);
  }
  SpatialPrecision prec;
  prec.kind = PrecisionKind::car;
  prec.q = assemble_car_q(degrees, graph.edges(), rho);
  prec.logdet = SparseCholesky(prec.q).log_det();
  return prec;
}

double gmrf_log_density(const Eigen::VectorXd& w, GmrfScale scale, const SpatialPrecision& prec,
                        const Eigen::VectorXd& mean) {
  const Eigen::Index k = prec.q.rows();
  if (w.size() != k || mean.size() != k)
    throw ValidationError("gmrf dimension mismatch: Q is " + std::to_string(k) + "x" +
                          std::to_string(k) + ", w has " + std::to_string(w.size()) +
                          ", mean has " + std::to_string(mean.size()));
  const Eigen::VectorXd d = w - mean;
  const double quad = d.dot(prec.q * d);
  return -0.5 * double(k) * kLog2Pi + 0.5 * double(k) * std::log(scale.tau) + 0.5 * prec.logdet -
         0.5 * scale.tau * quad;
}

Eigen::VectorXd sample_gmrf(GmrfScale scale, const SpatialPrecision& prec,
                            const Eigen::VectorXd& mean, RngStream& rng) {
  if (mean.size() != prec.q.rows()) throw ValidationError("gmrf dimension mismatch in sample");
  SparseCholesky chol(prec.q);
  return mean + chol.sample_precision(rng) / std::sqrt(scale.tau);
}

std::string to_matrix_market(const Eigen::SparseMatrix<double>& m) {
  Eigen::SparseMatrix<double> pruned = m;
  pruned.prune(0.0);
  std::ostringstream out;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << pruned.rows() << " " << pruned.cols() << " " << pruned.nonZeros() << "\n";
  char buf[64];
  for (int col = 0; col < pruned.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(pruned, col); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", int(it.row()) + 1, int(it.col()) + 1,
                    it.value());
      out << buf;
    }
  }
  return out.str();
}

PrecisionModel::PrecisionModel(const RegionGraph& graph, PrecisionKind kind)
    : kind_(kind), k_(graph.size()), edges_(graph.edges()) {
  if (kind_ == PrecisionKind::dagar) {
    sets_ = NeighborSets::of(graph);
  } else {
    const auto deg = graph.degrees();
    degrees_ = Eigen::VectorXd(k_);
    for (int i = 0; i < k_; ++i) {
      if (deg[i] == 0)
        throw ValidationError("car precision requires degree >= 1; region '" + graph.ids()[i] +
                              "' is isolated");
      degrees_(i) = double(deg[i]);
    }
    // spectrum of D^{-1/2} M D^{-1/2}: logdet(D - rho M) = sum log d_i + sum log(1 - rho lambda)
    Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(k_, k_);
    for (auto [a, b] : edges_) {
      const double v = 1.0 / std::sqrt(degrees_(a) * degrees_(b));
      ms(a, b) = v;
      ms(b, a) = v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ms, Eigen::EigenvaluesOnly);
    car_spectrum_ = es.eigenvalues();
  }
}

SpatialPrecision PrecisionModel::build(double rho) const {
  check_rho_domain(rho);
  SpatialPrecision prec;
  prec.kind = kind_;
  if (kind_ == PrecisionKind::dagar) {
    prec.q = assemble_dagar_q(sets_, rho);
    prec.logdet = log_det(rho);
  } else {
    prec.q = assemble_car_q(degrees_, edges_, rho);
    prec.logdet = SparseCholesky(prec.q).log_det();
  }
  return prec;
}

double PrecisionModel::log_det(double rho) const {
  check_rho_domain(rho);
  const double rho2 = rho * rho;
  if (kind_ == PrecisionKind::dagar) {
    double sum = 0.0;
    for (int i = 0; i < k_; ++i) {
      const double n = sets_.counts[i];
      sum += std::log((1.0 + (n - 1.0) * rho2) / (1.0 - rho2));
    }
    return sum;
  }
  double sum = degrees_.array().log().sum();
  for (int i = 0; i < k_; ++i) sum += std::log1p(-rho * car_spectrum_(i));
  return sum;
}

double PrecisionModel::quad_form(double rho, const Eigen::VectorXd& v) const {
  check_rho_domain(rho);
  if (v.size() != k_) throw ValidationError("quad_form dimension mismatch");
  if (kind_ == PrecisionKind::dagar) {
    // v^T Q v = sum_i f_ii ((I-B)v)_i^2
    const double rho2 = rho * rho;
    double sum = 0.0;
    for (int i = 0; i < k_; ++i) {
      const double n = sets_.counts[i];
      const double denom = 1.0 + (n - 1.0) * rho2;
      double r = v(i);
      if (n > 0) {
        const double bi = rho / denom;
        for (int j : sets_.preceding[i]) r -= bi * v(j);
      }
      sum += denom / (1.0 - rho2) * r * r;
    }
    return sum;
  }
  double sum = 0.0;
  for (int i = 0; i < k_; ++i) sum += degrees_(i) * v(i) * v(i);
  for (auto [a, b] : edges_) sum -= 2.0 * rho * v(a) * v(b);
  return sum;
}

}  // namespace bdagar
