#pragma once
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "rjf/types.hpp"

namespace rjf {

// 8-point Gauss-Legendre nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kGauss8Nodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGauss8Weights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

template <typename F>
double gauss8(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < 8; ++i) acc += kGauss8Weights[i] * f(mid + half * kGauss8Nodes[i]);
  return acc * half;
}

// Brent root finder on [a, b]; f(a) and f(b) must have opposite signs.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double fa, double fb, double t_tol);

// Golden-section minimizer for a unimodal (possibly V-shaped) function.
double golden_min(const std::function<double(double)>& f, double a, double b, double t_tol);

// Multivariate polynomial: sum of coeff * prod_i x_i^e_i terms.
struct Polynomial {
  struct Term {
    double coeff;
    std::vector<int> exponents;
  };
  std::vector<Term> terms;
  int dim = 0;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
};

// Deterministic seeded RNG helpers (std::mt19937_64 kept behind utilities so
// every draw in the artifact is reproducible from the scenario seed).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  // xorshift-style scramble; identical across platforms unlike std distributions.
  double uniform(double lo, double hi);
  Vec uniform_vec(int n, double lo, double hi);
  std::uint64_t next();

private:
  std::uint64_t state_;
};

}  // namespace rjf
