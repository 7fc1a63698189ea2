#include "softloc/codebook.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "softloc/error.hpp"

namespace softloc {

std::string_view to_string(CodeKind kind) {
  switch (kind) {
    case CodeKind::kOneHot: return "one_hot";
    case CodeKind::kSslc: return "sslc";
    case CodeKind::kSmoothed: return "smoothed";
    case CodeKind::kDslc: return "dslc";
  }
  return "unknown";
}

CodeBook::CodeBook(std::size_t n, CodeKind kind) : n_(n), kind_(kind), entries_(n * n, 0.0) {}

CodeBook::CodeBook(std::size_t n, CodeKind kind, std::vector<double> entries)
    : n_(n), kind_(kind), entries_(std::move(entries)) {
  if (entries_.size() != n * n) {
    throw ShapeMismatchError("codebook of size " + std::to_string(n) + " needs " +
                             std::to_string(n * n) + " entries, got " +
                             std::to_string(entries_.size()));
  }
}

std::span<const double> CodeBook::row(AreaIndex i) const {
  if (i.value < 1 || i.value > n_) {
    throw InvalidIndexError("codebook row " + std::to_string(i.value) + " outside 1.." +
                            std::to_string(n_));
  }
  return std::span<const double>(entries_).subspan(i.zero_based() * n_, n_);
}

std::span<double> CodeBook::row(AreaIndex i) {
  if (i.value < 1 || i.value > n_) {
    throw InvalidIndexError("codebook row " + std::to_string(i.value) + " outside 1.." +
                            std::to_string(n_));
  }
  return std::span<double>(entries_).subspan(i.zero_based() * n_, n_);
}

double CodeBook::max_row_sum_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) s += entries_[i * n_ + k];
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

double CodeBook::max_abs_diff(const CodeBook& other) const {
  if (other.n_ != n_) throw ShapeMismatchError("codebook sizes differ");
  double worst = 0.0;
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    worst = std::max(worst, std::abs(entries_[j] - other.entries_[j]));
  }
  return worst;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void SslcConfig::validate() const {
  if (!(alpha_s > 0.0) || !std::isfinite(alpha_s)) {
    throw InvalidConfigError("alpha_s must be a positive finite number");
  }
  if (!(sigma() > 0.0) || !std::isfinite(sigma())) {
    throw InvalidConfigError("SSLC sigma = l_ave / alpha_s must be positive (l_ave = " +
                             std::to_string(l_ave) + ")");
  }
}

CodeBook one_hot_codebook(std::size_t n) {
  if (n == 0) throw ValidationError("one_hot_codebook needs n >= 1");
  CodeBook book(n, CodeKind::kOneHot);
  for (std::size_t i = 1; i <= n; ++i) book.row(AreaIndex{i})[i - 1] = 1.0;
  return book;
}

CodeBook sslc_codebook(const RoomGrid& grid, const SslcConfig& cfg) {
  grid.validate();
  cfg.validate();
  const std::size_t n = grid.area_count();
  const double sigma = cfg.sigma();

  std::vector<Point2D> centers(n);
  for (std::size_t i = 0; i < n; ++i) centers[i] = area_center(grid, AreaIndex::from_zero_based(i));

  CodeBook book(n, CodeKind::kSslc);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = book.row(AreaIndex::from_zero_based(i));
    double off = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      row[k] = normal_cdf(-distance(centers[i], centers[k]) / sigma);
      off += row[k];
    }
    row[i] = 1.0 - off;
    if (!(row[i] > 0.0)) {
      throw InvalidConfigError("SSLC row " + std::to_string(i + 1) +
                               " has non-positive diagonal (sigma " + std::to_string(sigma) +
                               " m too large for this grid)");
    }
  }
  return book;
}

CodeBook smoothed_codebook(std::size_t n, double epsilon) {
  if (n < 2) throw ValidationError("smoothed_codebook needs n >= 2");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ValidationError("label smoothing epsilon must lie in [0, 1)");
  }
  const double off = epsilon / static_cast<double>(n - 1);
  CodeBook book(n, CodeKind::kSmoothed, std::vector<double>(n * n, off));
  for (std::size_t i = 1; i <= n; ++i) book.row(AreaIndex{i})[i - 1] = 1.0 - epsilon;
  return book;
}

AreaIndex argmax_class(std::span<const double> v) {
  if (v.empty()) throw EmptyInputError("argmax_class of an empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return AreaIndex::from_zero_based(best);
}

EpochStats::EpochStats(std::size_t n) : n_(n), sums_(n * n, 0.0), counts_(n, 0) {}

std::span<const double> EpochStats::sum(AreaIndex i) const {
  return std::span<const double>(sums_).subspan(i.zero_based() * n_, n_);
}

double EpochStats::accuracy() const {
  return seen_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(seen_);
}

void EpochStats::merge(const EpochStats& other) {
  if (other.n_ != n_) throw ShapeMismatchError("cannot merge epoch stats of different sizes");
  for (std::size_t j = 0; j < sums_.size(); ++j) sums_[j] += other.sums_[j];
  for (std::size_t i = 0; i < n_; ++i) counts_[i] += other.counts_[i];
  accepted_ += other.accepted_;
  seen_ += other.seen_;
}

void EpochStats::reset() {
  std::fill(sums_.begin(), sums_.end(), 0.0);
  std::fill(counts_.begin(), counts_.end(), 0);
  accepted_ = 0;
  seen_ = 0;
}

bool record_prediction(EpochStats& stats, AreaIndex true_class,
                       std::span<const double> softmax_out) {
  if (softmax_out.size() != stats.n_) {
    throw ShapeMismatchError("softmax output has " + std::to_string(softmax_out.size()) +
                             " entries, stats expect " + std::to_string(stats.n_));
  }
  if (true_class.value < 1 || true_class.value > stats.n_) {
    throw InvalidIndexError("true class " + std::to_string(true_class.value) + " outside 1.." +
                            std::to_string(stats.n_));
  }
  double total = 0.0;
  for (double p : softmax_out) total += p;
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("softmax output sums to " + std::to_string(total) + ", not 1");
  }
  ++stats.seen_;
  if (argmax_class(softmax_out) != true_class) return false;
  double* dst = stats.sums_.data() + true_class.zero_based() * stats.n_;
  for (std::size_t k = 0; k < stats.n_; ++k) dst[k] += softmax_out[k];
  ++stats.counts_[true_class.zero_based()];
  ++stats.accepted_;
  return true;
}

CodeBook dslc_from_stats(const EpochStats& stats, const CodeBook& fallback) {
  const std::size_t n = stats.size();
  if (fallback.size() != n) {
    throw ShapeMismatchError("fallback codebook has n = " + std::to_string(fallback.size()) +
                             ", stats have n = " + std::to_string(n));
  }
  if (fallback.max_row_sum_error() > 1e-6) {
    throw ValidationError("fallback codebook is not row-stochastic");
  }
  CodeBook book(n, CodeKind::kDslc);
  for (std::size_t i = 1; i <= n; ++i) {
    const AreaIndex cls{i};
    auto dst = book.row(cls);
    const auto count = stats.count(cls);
    if (count == 0) {
      auto src = fallback.row(cls);
      std::copy(src.begin(), src.end(), dst.begin());
      continue;
    }
    const auto src = stats.sum(cls);
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t k = 0; k < n; ++k) dst[k] = src[k] * inv;
  }
  return book;
}

void write_codebook_text(std::ostream& out, const CodeBook& book) {
  char buf[32];
  for (std::size_t i = 1; i <= book.size(); ++i) {
    const auto row = book.row(AreaIndex{i});
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.12f", row[k]);
      if (k) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

CodeBook read_codebook_text(std::istream& in, CodeKind kind) {
  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t width = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t count = 0;
    double v;
    while (ls >> v) {
      entries.push_back(v);
      ++count;
    }
    if (rows == 0) width = count;
    if (count != width) {
      throw RuntimeFailure("codebook text row " + std::to_string(rows + 1) + " has " +
                           std::to_string(count) + " entries, expected " + std::to_string(width));
    }
    ++rows;
  }
  if (rows != width) throw RuntimeFailure("codebook text is not square");
  return CodeBook(rows, kind, std::move(entries));
}

}  // namespace softloc
