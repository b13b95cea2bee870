#pragma once

#include <stdexcept>
#include <string>

namespace meshmotion {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A cell with non-positive signed area after moving the mesh.
class DegenerateMeshError : public Error {
 public:
  DegenerateMeshError(int cell, double area)
      : Error("degenerate cell " + std::to_string(cell) + " (signed area " +
              std::to_string(area) + ")"),
        cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

class InvalidWeightError : public Error {
 public:
  InvalidWeightError(int cell, double value)
      : Error("non-positive weight " + std::to_string(value) + " in cell " +
              std::to_string(cell)),
        cell_(cell) {}
  int cell() const { return cell_; }

 private:
  int cell_;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_residual)
      : Error(what + " (last residual " + std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

// Raised when the mask solve loses interior positivity.
class MaskPositivityError : public Error {
 public:
  MaskPositivityError(int vertex, double value)
      : Error("mask value " + std::to_string(value) + " at interior vertex " +
              std::to_string(vertex) + " is not positive"),
        vertex_(vertex) {}
  int vertex() const { return vertex_; }

 private:
  int vertex_;
};

}  // namespace meshmotion
