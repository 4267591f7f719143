#pragma once
#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "nefk/errors.hpp"

namespace nefk {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr cplx I_unit{0.0, 1.0};

enum class Branch { forward, backward, spur };

struct ContourPoint {
  Branch branch;
  double t;    // physical real time (t_min on the spur)
  double tau;  // imaginary time, 0 on the real branches
};

// Three-branch contour: forward t_min..t_max, backward t_max..t_min, then
// tau = 0..beta on the spur. Contour order is index order.
class ContourGrid {
public:
  double t_min = 0, t_max = 0, dt = 0, beta = 0;
  int n_tau = 0;
  int n_t = 0;
  std::vector<ContourPoint> points;
  CVector weights;

  int size() const { return static_cast<int>(points.size()); }
  int fwd(int i) const { return i; }
  int bwd(int i) const { return 2 * n_t - 1 - i; }
  int spur(int k) const { return 2 * n_t + k; }
  double time(int i) const { return t_min + i * dt; }
  double dtau() const { return beta / (n_tau - 1); }
  bool same_as(const ContourGrid& o) const;
};

using GridPtr = std::shared_ptr<const ContourGrid>;

GridPtr build_contour(double t_min, double t_max, double beta, double dt, int n_tau);

struct ContourKernel {
  GridPtr grid;
  CMatrix values;

  ContourKernel() = default;
  ContourKernel(GridPtr g, CMatrix v);
  static ContourKernel zero(GridPtr g);
  int size() const { return static_cast<int>(values.rows()); }
};

// Real-time components are n_t x n_t tables indexed by time index on the
// forward branch. matsubara is the raw spur x spur block; mixed_right holds
// F(t, -i tau) and mixed_left F(-i tau, t).
struct ComponentSet {
  CMatrix lesser, greater, retarded, advanced;
  CMatrix matsubara, mixed_right, mixed_left;
};

ContourKernel contour_delta(const GridPtr& grid);
ContourKernel convolve(const ContourKernel& a, const ContourKernel& b);
ContourKernel invert(const ContourKernel& a, double rcond_min = 1e-13);
ComponentSet extract_components(const ContourKernel& a);

// theta_c(i,j) on the discrete contour: 1 if z_i is later, 1/2 on the diagonal.
inline double theta_c(int i, int j) { return i > j ? 1.0 : (i == j ? 0.5 : 0.0); }

// Builds a contour kernel from real-time components and spur blocks using the
// same diagonal convention the algebra relies on.
ContourKernel assemble_from_components(const GridPtr& grid, const CMatrix& lesser, const CMatrix& greater,
                                       const CMatrix& matsubara, const CMatrix& mixed_right,
                                       const CMatrix& mixed_left);

// Versioned binary container: see README "Snapshot format".
void write_snapshot(const std::string& path, const ContourKernel& k);
ContourKernel read_snapshot(const std::string& path);

// Weighted product helpers used by the solvers: returns A * diag(w) * B.
CMatrix weighted_product(const CMatrix& a, const CVector& w, const CMatrix& b);

}  // namespace nefk
