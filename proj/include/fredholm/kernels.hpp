#pragma once

// Finite sections of K(i, j) = sum_{k>=1} (phi_-/phi_+)_{i+k} (phi_+/phi_-)_{-k-j}
// on l^2({offset, offset+1, ...}) and the diagonal similarities acting on them.

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "fredholm/symbols.hpp"

namespace fredholm {

struct KernelMatrix {
  explicit KernelMatrix(SymbolSpec s) : sym(std::move(s)) {}

  SymbolSpec sym;
  int offset = 0;
  /// Dimension of `entries`.
  int size = 0;
  /// Truncation dimension that was asked for. When `exact_section` holds,
  /// rows/columns beyond `size` contribute only exact zero eigenvalues.
  int requested_size = 0;
  /// Inner-sum cutoff (the k-sum terminates on its own for exact sections).
  int ksum_cut = 0;
  Eigen::MatrixXd entries;
  double entry_error = 0.0;
  /// Tolerance the kernel was built with; used to rebuild at larger size.
  double tol = 1e-12;
  /// Columns j >= offset + size vanish identically (Laurent-polynomial
  /// phi_+/phi_-), so the spectrum is eig(entries) plus zeros.
  bool exact_section = false;
  /// Geometric weight w(i) = base^{i - offset}; entries are w(i) K(i,j) / w(j).
  std::optional<double> weight_base;
};

/// Default truncation size for the family at this offset.
int default_kernel_size(const SymbolSpec& sym, int offset);

/// Builds the section of size `size` (default_kernel_size when size <= 0).
/// Throws ConvergenceError when the entry error cannot be brought below tol.
KernelMatrix build_kernel(const SymbolSpec& sym, int offset, int size = 0, double tol = 1e-12);

enum class WeightKind { None, Geometric };

/// Conjugates the entries by diag(base^{i - offset}); spectrum unchanged.
KernelMatrix apply_weight(const KernelMatrix& km, WeightKind kind, double base = 0.5);

struct Symmetrizer {
  /// log d_i; D K D^{-1} is symmetric when `possible` and residual is small.
  Eigen::VectorXd log_d;
  /// max |S(i,j) - S(j,i)| for S = D K D^{-1}.
  double residual = 0.0;
  /// max |S(i,j)|.
  double scale = 0.0;
  bool possible = true;
  int blocks = 1;
  std::string reason;

  Eigen::VectorXd d() const { return log_d.array().exp(); }
};

/// Positive diagonal D with d_0 = 1 chosen along the first off-diagonal;
/// pairs below the 1e-300 noise floor split the chain into independently
/// normalized blocks. Opposite signs of K(i,j) and K(j,i) make symmetrization
/// impossible; this is reported, not thrown.
Symmetrizer find_symmetrizer(const KernelMatrix& km);

/// D K D^{-1} computed in log space.
Eigen::MatrixXd symmetrized_entries(const KernelMatrix& km, const Symmetrizer& sym);

/// Largest |K(size-1, j)|: decay of the last row, a truncation diagnostic.
double last_row_magnitude(const KernelMatrix& km);

}  // namespace fredholm
