#include "gmf/kernel_norm.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "gmf/rng.hpp"

namespace gmf {
namespace {

// y = M x
void apply(std::span<const double> a, std::size_t m, std::span<const double> x,
           std::span<double> y) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a.data() + i * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

// z = M^T y
void apply_transpose(std::span<const double> a, std::size_t m,
                     std::span<const double> y, std::span<double> z) {
  std::fill(z.begin(), z.end(), 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a.data() + i * m;
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) z[j] += row[j] * yi;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

// y += c x
void axpy(std::span<double> y, double c, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

void scale(std::span<double> x, double c) {
  for (double& v : x) v *= c;
}

// x = sum_k s_k basis_k, normalized
void ritz_vector(const std::vector<std::vector<double>>& basis, const Eigen::VectorXd& s,
                 std::vector<double>& x) {
  std::fill(x.begin(), x.end(), 0.0);
  for (Eigen::Index k = 0; k < s.size(); ++k) axpy(x, s(k), basis[static_cast<std::size_t>(k)]);
  scale(x, 1.0 / norm2(x));
}

// Krylov dimension before an explicit restart.
constexpr std::size_t kMaxKrylov = 120;

}  // namespace

OpNormResult step_kernel_opnorm(std::span<const double> grid, std::size_t m,
                                const OpNormOptions& opts) {
  if (m == 0 || grid.size() != m * m) {
    throw InvalidArgument("kernel grid must hold m*m values with m >= 1");
  }
  OpNormResult result;
  result.grid = m;
  const double md = static_cast<double>(m);

  // Fixed pseudo-random start: a constant vector can be orthogonal to the
  // top singular vector (e.g. for [[1,-1],[-1,1]]).
  auto eng = rng::stream(0x5EEDu, 0);
  std::vector<double> x(m), y(m), w(m);
  for (auto& v : x) v = 2.0 * rng::uniform01(eng) - 1.0;
  scale(x, 1.0 / norm2(x));

  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  Eigen::VectorXd ritz = Eigen::VectorXd::Ones(1);
  double theta_prev = 0.0;
  int stable = 0;
  std::size_t applications = 0;

  while (true) {
    basis.assign(1, x);
    ritz = Eigen::VectorXd::Ones(1);
    alpha.clear();
    beta.clear();
    for (std::size_t j = 0;; ++j) {
      if (applications == opts.max_iterations) {
        ritz_vector(basis, ritz, x);
        throw NotConverged("Lanczos iteration did not converge after " +
                               std::to_string(opts.max_iterations) + " Gram applications",
                           std::move(x), result.norm, result.residual);
      }
      const auto& q = basis[j];
      apply(grid, m, q, y);
      apply_transpose(grid, m, y, w);
      ++applications;
      const double a = dot(q, w);
      alpha.push_back(a);
      axpy(w, -a, q);
      if (j > 0) axpy(w, -beta[j - 1], basis[j - 1]);
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) axpy(w, -dot(b, w), b);
      }
      const double b = norm2(w);

      // Largest eigenpair of the j+1 square tridiagonal projection.
      double theta = alpha[0];
      Eigen::VectorXd s = Eigen::VectorXd::Ones(1);
      if (j > 0) {
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), j + 1);
        Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), j);
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        theta = tri.eigenvalues()(j);
        s = tri.eigenvectors().col(j);
      }
      ritz = s;
      result.iterations = applications;
      if (!(theta > 0.0)) {
        // The start vector lies in the null space of M^T M; generically M = 0.
        result.norm = 0.0;
        result.residual = 0.0;
        return result;
      }
      const double res = b * std::abs(s(j)) / theta;
      result.norm = std::sqrt(theta) / md;
      result.residual = res;
      stable = std::abs(theta - theta_prev) <= opts.rel_tol * theta ? stable + 1 : 0;
      theta_prev = theta;

      const bool exhausted = b <= 1e-14 * theta || j + 1 == m;
      if (res <= opts.rel_tol || stable >= 2 || exhausted) return result;

      if (j + 1 == kMaxKrylov) {
        // Restart from the current Ritz vector.
        ritz_vector(basis, ritz, x);
        break;
      }
      beta.push_back(b);
      scale(w, 1.0 / b);
      basis.push_back(w);
    }
  }
}

OpNormResult l2_opnorm(const WeightedGraph& graph,
                       const OpNormOptions& opts) {
  return step_kernel_opnorm(graph.entries(), graph.n(), opts);
}

std::size_t default_distance_grid(std::size_t n) {
  if (n == 0) throw InvalidArgument("graph size must be >= 1");
  return ((1024 + n - 1) / n) * n;
}

OpNormResult graph_graphon_distance(const Graphon& g, const WeightedGraph& h,
                                    std::size_t m,
                                    const OpNormOptions& opts) {
  const std::size_t n = h.n();
  if (m == 0) m = default_distance_grid(n);
  if (m % n != 0) {
    throw InvalidArgument("distance grid m=" + std::to_string(m) +
                          " is not a multiple of the graph size n=" +
                          std::to_string(n));
  }
  const std::size_t ratio = m / n;
  const double md = static_cast<double>(m);
  std::vector<double> diff(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = static_cast<double>(i + 1) / md;
    const std::size_t k = i / ratio;  // grid point i+1 lies in cell k+1
    for (std::size_t j = 0; j < m; ++j) {
      diff[i * m + j] = g(u, static_cast<double>(j + 1) / md) - h(k, j / ratio);
    }
  }
  return step_kernel_opnorm(diff, m, opts);
}

}  // namespace gmf
