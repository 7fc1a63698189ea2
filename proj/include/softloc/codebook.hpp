#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "softloc/geometry.hpp"

namespace softloc {

enum class CodeKind { kOneHot, kSslc, kSmoothed, kDslc };

std::string_view to_string(CodeKind kind);

/// n x n row-stochastic target matrix; row i is the training target for
/// class i.
class CodeBook {
 public:
  CodeBook(std::size_t n, CodeKind kind);
  CodeBook(std::size_t n, CodeKind kind, std::vector<double> entries);

  std::size_t size() const { return n_; }
  CodeKind kind() const { return kind_; }

  std::span<const double> row(AreaIndex i) const;
  std::span<double> row(AreaIndex i);
  double at(AreaIndex i, AreaIndex k) const { return row(i)[k.zero_based()]; }
  std::span<const double> entries() const { return entries_; }

  /// Largest |row sum - 1| over all rows.
  double max_row_sum_error() const;

  /// Max-norm distance between two codebooks of the same size.
  double max_abs_diff(const CodeBook& other) const;

 private:
  std::size_t n_;
  CodeKind kind_;
  std::vector<double> entries_;
};

/// Standard normal CDF, Phi(z) = erfc(-z / sqrt 2) / 2.
double normal_cdf(double z);

struct SslcConfig {
  double alpha_s = 2.8;
  double l_ave = 0.0;  // meters

  double sigma() const { return l_ave / alpha_s; }
  void validate() const;
};

CodeBook one_hot_codebook(std::size_t n);

/// Gaussian-tail soft codes: off-diagonal S[i][k] = Phi(-d(i,k) / sigma),
/// diagonal takes the rest of the row's mass. Throws InvalidConfigError if a
/// diagonal would be <= 0.
CodeBook sslc_codebook(const RoomGrid& grid, const SslcConfig& cfg);

/// Uniform label smoothing: 1 - epsilon on the diagonal, epsilon / (n - 1) elsewhere.
CodeBook smoothed_codebook(std::size_t n, double epsilon);

/// Index of the maximum entry; ties go to the lowest index.
AreaIndex argmax_class(std::span<const double> v);

/// Per-class sums of correctly classified softmax outputs for one epoch.
/// Forms a commutative monoid under merge(), so shards can be combined.
class EpochStats {
 public:
  explicit EpochStats(std::size_t n);

  std::size_t size() const { return n_; }
  std::span<const double> sum(AreaIndex i) const;
  std::uint64_t count(AreaIndex i) const { return counts_[i.zero_based()]; }
  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t seen() const { return seen_; }

  /// accepted / seen, 0 when nothing was seen.
  double accuracy() const;

  void merge(const EpochStats& other);
  void reset();

 private:
  friend bool record_prediction(EpochStats&, AreaIndex, std::span<const double>);

  std::size_t n_;
  std::vector<double> sums_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t accepted_ = 0;
  std::uint64_t seen_ = 0;
};

/// Adds softmax_out to the true class's running sum when its argmax equals
/// the true class. Returns whether it was accepted.
bool record_prediction(EpochStats& stats, AreaIndex true_class,
                       std::span<const double> softmax_out);

/// Row i = mean of the accepted outputs for class i, or fallback row i when
/// class i had none.
CodeBook dslc_from_stats(const EpochStats& stats, const CodeBook& fallback);

/// Plain-text export: one row per line, space separated, 12 decimals.
void write_codebook_text(std::ostream& out, const CodeBook& book);
CodeBook read_codebook_text(std::istream& in, CodeKind kind);

}  // namespace softloc
