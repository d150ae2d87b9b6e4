#pragma once
#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rjf {

using Scalar = double;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ErrorCode {
  DegenerateMetric,
  OffSurface,
  NotTangent,
  Tangency,
  StepCollapse,
  MaxEvents,
  PolicyExhausted,
  TransmitForbidden,
  NewtonDivergence,
  ConjugateEndpoints,
  RefineGrid,
  RefineNodes,
  InconclusiveIndex,
  SelfConjugate,
  InvalidField,
  InputError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

// Numerical parameters shared across the pipeline. Scenario files may
// override any of them; reports echo the values actually used.
struct Tolerances {
  double rtol = 1e-10;          // path integration, relative
  double atol = 1e-12;          // path integration, absolute
  double jacobi_rtol = 1e-11;   // linearized-field integration
  double jacobi_atol = 1e-13;
  double tol_Y = 1e-9;          // |rho| bound for "point lies on Y"
  double v_min = 1e-6;          // tangency threshold on |<v,N>|_g
  double h_g = 1e-5;            // FD step for metric/normal derivatives
  double event_time_tol = 1e-12;
  int max_events = 64;
  double newton_accept = 1e-10; // two-point solve: required endpoint miss
  double newton_target = 1e-12; // two-point solve: aimed-for endpoint miss
  int newton_max_iters = 50;
  double tol_rank = 1e-7;       // conjugate-point multiplicity, relative SV cut
  double tol_eig = 1e-7;        // index form zero-eigenvalue cut, relative
  double hess_h = 1e-4;         // FD step for the endpoint-action Hessian
  int nodes_k = 8;              // break-point count for the index form
  double grid_dt = 0.0;         // conjugate-point scan step; 0 means T/2000
};

}  // namespace rjf
