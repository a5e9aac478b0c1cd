#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace qdgates {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Charge-state denominators U - mu_j + mu_k (or its mirror) vanish.
class DegenerateChargeState : public Error {
 public:
  using Error::Error;
};

// A bond with zero effective velocity is asked for a nonzero phase.
class NoBondVelocity : public Error {
 public:
  NoBondVelocity(std::size_t bond, std::string what)
      : Error(std::move(what)), bond_(bond) {}
  std::size_t bond() const { return bond_; }

 private:
  std::size_t bond_;
};

class EigensolverFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrum : public Error {
 public:
  DegenerateSpectrum(std::size_t n, std::size_t m, double gap)
      : Error("levels " + std::to_string(n) + " and " + std::to_string(m) +
              " are coupled across a gap of " + std::to_string(gap)),
        n_(n),
        m_(m),
        gap_(gap) {}
  std::size_t level_n() const { return n_; }
  std::size_t level_m() const { return m_; }
  double gap() const { return gap_; }

 private:
  std::size_t n_, m_;
  double gap_;
};

// Eigenvectors cannot be matched to bare product states.
class NonPerturbative : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  Infeasible(std::string what, double best_residual)
      : Error(std::move(what)), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location + ": " + what), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

}  // namespace qdgates
