#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rdpg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPsd : public Error {
 public:
  explicit NotPsd(double min_eigenvalue)
      : Error("matrix is not positive semidefinite (min eigenvalue " +
              std::to_string(min_eigenvalue) + ")"),
        min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class RankMismatch : public Error {
 public:
  RankMismatch(int requested, int numerical)
      : Error("requested rank " + std::to_string(requested) +
              " but numerical rank is " + std::to_string(numerical)),
        requested_(requested),
        numerical_(numerical) {}
  int requested() const { return requested_; }
  int numerical() const { return numerical_; }

 private:
  int requested_;
  int numerical_;
};

class InvalidMixture : public Error {
 public:
  using Error::Error;
};

class ProbabilityOutOfRange : public Error {
 public:
  ProbabilityOutOfRange(std::size_t i, std::size_t j, double value)
      : Error("edge probability " + std::to_string(value) + " at (" +
              std::to_string(i) + ", " + std::to_string(j) +
              ") is outside [0, 1]"),
        i_(i),
        j_(j),
        value_(value) {}
  std::size_t i() const { return i_; }
  std::size_t j() const { return j_; }
  double value() const { return value_; }

 private:
  std::size_t i_;
  std::size_t j_;
  double value_;
};

class ZeroDegreeVertex : public Error {
 public:
  explicit ZeroDegreeVertex(std::size_t vertex)
      : Error("vertex " + std::to_string(vertex) + " has zero degree"),
        vertex_(vertex) {}
  std::size_t vertex() const { return vertex_; }

 private:
  std::size_t vertex_;
};

class ZeroExpectedDegree : public Error {
 public:
  explicit ZeroExpectedDegree(std::size_t vertex)
      : Error("vertex " + std::to_string(vertex) +
              " has zero expected degree"),
        vertex_(vertex) {}
  std::size_t vertex() const { return vertex_; }

 private:
  std::size_t vertex_;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class NegativeTopEigenvalue : public Error {
 public:
  NegativeTopEigenvalue(int index, double value)
      : Error("eigenvalue " + std::to_string(index) + " selected for the "
              "embedding is negative (" + std::to_string(value) + ")"),
        index_(index),
        value_(value) {}
  int index() const { return index_; }
  double value() const { return value_; }

 private:
  int index_;
  double value_;
};

class SingularDelta : public Error {
 public:
  SingularDelta() : Error("second-moment matrix is singular") {}
};

class NonpositiveMeanInnerProduct : public Error {
 public:
  explicit NonpositiveMeanInnerProduct(int atom)
      : Error("atom " + std::to_string(atom) +
              " has nonpositive inner product with the mean"),
        atom_(atom) {}
  int atom() const { return atom_; }

 private:
  int atom_;
};

class SingularB : public Error {
 public:
  SingularB() : Error("block probability matrix is singular") {}
};

class EmptyBlock : public Error {
 public:
  explicit EmptyBlock(int block)
      : Error("block " + std::to_string(block) + " has no members"),
        block_(block) {}
  int block() const { return block_; }

 private:
  int block_;
};

class InvalidT : public Error {
 public:
  explicit InvalidT(double t)
      : Error("t = " + std::to_string(t) + " is outside (0, 1)") {}
};

class DegeneratePoints : public Error {
 public:
  using Error::Error;
};

class CovarianceCollapse : public Error {
 public:
  explicit CovarianceCollapse(int component)
      : Error("covariance of component " + std::to_string(component) +
              " is not positive definite after ridging"),
        component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

class TooManyBlocks : public Error {
 public:
  explicit TooManyBlocks(int k)
      : Error("permutation matching supports at most 10 blocks, got " +
              std::to_string(k)) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A configuration value failed validation; field() names it.
class InvalidConfig : public Error {
 public:
  InvalidConfig(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace rdpg
