#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tmt/csv.hpp"
#include "tmt/error.hpp"

namespace tmt {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit engine draw.
/// Spelled out instead of std::uniform_real_distribution so traces are
/// identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Flow-size distribution with closed-form partial moments, so per-class
/// byte rates are computed analytically rather than by sampling.
///
/// Kinds:
///  - empirical: discrete sizes with probabilities (CSV `size_bits,probability`)
///  - two_point: an empirical distribution with two atoms
///  - log_uniform: density proportional to 1/s on [lo, hi]
///  - pareto: density proportional to s^-(shape+1) on [lo, hi], hi may be +inf
class FlowSizeDistribution {
 public:
  enum class Kind { empirical, two_point, log_uniform, pareto };

  static FlowSizeDistribution empirical(std::vector<double> sizes, std::vector<double> probs) {
    if (sizes.empty() || sizes.size() != probs.size())
      throw ValidationError("distribution", "empirical sizes and probabilities must be non-empty and equal length");
    double total = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (!(sizes[i] > 0) || !std::isfinite(sizes[i]))
        throw ValidationError("distribution", "sizes must be positive and finite");
      if (!(probs[i] >= 0)) throw ValidationError("distribution", "probabilities must be non-negative");
      total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError("distribution", "probabilities sum to " + csv::format_double(total) + ", expected 1");
    // Sort atoms by size and merge duplicates.
    std::vector<std::size_t> idx(sizes.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return sizes[a] < sizes[b]; });
    FlowSizeDistribution d(Kind::empirical);
    for (auto i : idx) {
      if (probs[i] == 0) continue;
      if (!d.sizes_.empty() && d.sizes_.back() == sizes[i]) {
        d.probs_.back() += probs[i];
      } else {
        d.sizes_.push_back(sizes[i]);
        d.probs_.push_back(probs[i]);
      }
    }
    d.lo_ = d.sizes_.front();
    d.hi_ = d.sizes_.back();
    d.build_cdf();
    return d;
  }

  static FlowSizeDistribution two_point(double size_a, double prob_a, double size_b) {
    auto d = empirical({size_a, size_b}, {prob_a, 1.0 - prob_a});
    d.kind_ = Kind::two_point;
    return d;
  }

  /// Two atoms with both probabilities given (they must sum to 1).
  static FlowSizeDistribution two_point(double size_a, double prob_a, double size_b, double prob_b) {
    auto d = empirical({size_a, size_b}, {prob_a, prob_b});
    if (d.sizes_.size() != 2) throw ValidationError("distribution", "two-point needs two distinct atoms");
    d.kind_ = Kind::two_point;
    return d;
  }

  /// Two atoms where `byte_fraction_a` of all bytes travel in flows of size
  /// `size_a`. Flow probabilities follow as p_i proportional to w_i / s_i.
  static FlowSizeDistribution two_point_by_bytes(double size_a, double byte_fraction_a, double size_b) {
    if (!(byte_fraction_a >= 0 && byte_fraction_a <= 1))
      throw ValidationError("distribution", "byte fraction must lie in [0, 1]");
    const double ca = byte_fraction_a / size_a;
    const double cb = (1.0 - byte_fraction_a) / size_b;
    return two_point(size_a, ca / (ca + cb), size_b);
  }

  static FlowSizeDistribution log_uniform(double lo, double hi) {
    if (!(lo > 0) || !(hi > lo) || !std::isfinite(hi))
      throw ValidationError("distribution", "log-uniform needs 0 < lo < hi < inf");
    FlowSizeDistribution d(Kind::log_uniform);
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }

  static FlowSizeDistribution pareto(double shape, double lo,
                                     double hi = std::numeric_limits<double>::infinity()) {
    if (!(shape > 0)) throw ValidationError("distribution", "pareto shape must be > 0");
    if (!(lo > 0) || !(hi > lo)) throw ValidationError("distribution", "pareto needs 0 < lo < hi");
    if (std::isinf(hi) && !(shape > 1))
      throw ValidationError("distribution", "unbounded pareto needs shape > 1 for a finite mean");
    FlowSizeDistribution d(Kind::pareto);
    d.shape_ = shape;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
  }

  /// Reads `size_bits,probability` rows (header required).
  static FlowSizeDistribution from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open distribution file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> sizes, probs;
    bool header = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (csv::trim(line).empty()) continue;
      auto rec = csv::split_record(line);
      if (!header) {
        if (rec.size() != 2 || csv::trim(rec[0]) != "size_bits" || csv::trim(rec[1]) != "probability")
          throw ParseError(path, lineno, "expected header 'size_bits,probability'");
        header = true;
        continue;
      }
      if (rec.size() != 2) throw ParseError(path, lineno, "expected 2 fields");
      try {
        sizes.push_back(csv::parse_double(rec[0], "size_bits"));
        probs.push_back(csv::parse_double(rec[1], "probability"));
      } catch (const ParseError& e) {
        throw ParseError(path, lineno, e.what());
      }
    }
    if (!header) throw ParseError(path, 0, "empty distribution file");
    return empirical(std::move(sizes), std::move(probs));
  }

  bool operator==(const FlowSizeDistribution&) const = default;

  Kind kind() const { return kind_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  double shape() const { return shape_; }
  const std::vector<double>& atoms() const { return sizes_; }
  const std::vector<double>& atom_probs() const { return probs_; }

  /// P(a <= S < b).
  double count_mass(double a, double b) const {
    if (!(b > a)) return 0.0;
    switch (kind_) {
      case Kind::empirical:
      case Kind::two_point: {
        double s = 0;
        for (std::size_t i = 0; i < sizes_.size(); ++i)
          if (sizes_[i] >= a && sizes_[i] < b) s += probs_[i];
        return s;
      }
      case Kind::log_uniform: {
        auto [x, y] = clip(a, b);
        if (!(y > x)) return 0.0;
        return std::log(y / x) / std::log(hi_ / lo_);
      }
      case Kind::pareto: {
        auto [x, y] = clip(a, b);
        if (!(y > x)) return 0.0;
        return pareto_cdf(y) - pareto_cdf(x);
      }
    }
    return 0.0;
  }

  /// E[S * 1{a <= S < b}].
  double byte_mass(double a, double b) const {
    if (!(b > a)) return 0.0;
    switch (kind_) {
      case Kind::empirical:
      case Kind::two_point: {
        double s = 0;
        for (std::size_t i = 0; i < sizes_.size(); ++i)
          if (sizes_[i] >= a && sizes_[i] < b) s += probs_[i] * sizes_[i];
        return s;
      }
      case Kind::log_uniform: {
        auto [x, y] = clip(a, b);
        if (!(y > x)) return 0.0;
        return (y - x) / std::log(hi_ / lo_);
      }
      case Kind::pareto: {
        auto [x, y] = clip(a, b);
        if (!(y > x)) return 0.0;
        const double c = pareto_norm() * shape_ * std::pow(lo_, shape_);
        if (std::abs(shape_ - 1.0) < 1e-12) return c * std::log(y / x);
        return c * (pow_or_zero(y, 1.0 - shape_) - std::pow(x, 1.0 - shape_)) / (1.0 - shape_);
      }
    }
    return 0.0;
  }

  double mean() const { return byte_mass(0.0, std::numeric_limits<double>::infinity()); }

  double second_moment() const {
    switch (kind_) {
      case Kind::empirical:
      case Kind::two_point: {
        double s = 0;
        for (std::size_t i = 0; i < sizes_.size(); ++i) s += probs_[i] * sizes_[i] * sizes_[i];
        return s;
      }
      case Kind::log_uniform:
        return (hi_ * hi_ - lo_ * lo_) / (2.0 * std::log(hi_ / lo_));
      case Kind::pareto: {
        if (std::isinf(hi_) && shape_ <= 2.0) return std::numeric_limits<double>::infinity();
        const double c = pareto_norm() * shape_ * std::pow(lo_, shape_);
        if (std::abs(shape_ - 2.0) < 1e-12) return c * std::log(hi_ / lo_);
        return c * (pow_or_zero(hi_, 2.0 - shape_) - std::pow(lo_, 2.0 - shape_)) / (2.0 - shape_);
      }
    }
    return 0.0;
  }

  /// Fraction of all bytes carried by flows with size in [a, b).
  double byte_fraction(double a, double b) const { return byte_mass(a, b) / mean(); }

  /// Byte-weighted mean of 1/|f| over flows of size >= `from`; equals
  /// P(S >= from) / E[S 1{S >= from}]. Zero when there is no such mass.
  double reciprocal_size_mean_above(double from) const {
    const double inf = std::numeric_limits<double>::infinity();
    const double bytes = byte_mass(from, inf);
    if (!(bytes > 0)) return 0.0;
    return count_mass(from, inf) / bytes;
  }

  /// One size draw (real valued; callers round to whole bits).
  double sample(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    switch (kind_) {
      case Kind::empirical:
      case Kind::two_point: {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        auto i = static_cast<std::size_t>(it - cdf_.begin());
        return sizes_[std::min(i, sizes_.size() - 1)];
      }
      case Kind::log_uniform:
        return lo_ * std::exp(u * std::log(hi_ / lo_));
      case Kind::pareto: {
        // Inverse CDF of the (possibly truncated) Pareto.
        const double tail = std::isinf(hi_) ? 0.0 : std::pow(lo_ / hi_, shape_);
        const double v = 1.0 - u * (1.0 - tail);
        return lo_ * std::pow(v, -1.0 / shape_);
      }
    }
    return lo_;
  }

 private:
  explicit FlowSizeDistribution(Kind k) : kind_(k) {}

  std::pair<double, double> clip(double a, double b) const {
    return {std::max(a, lo_), std::min(b, hi_)};
  }
  double pareto_norm() const {
    return std::isinf(hi_) ? 1.0 : 1.0 / (1.0 - std::pow(lo_ / hi_, shape_));
  }
  double pareto_cdf(double s) const {
    if (s <= lo_) return 0.0;
    if (s >= hi_) return 1.0;
    return pareto_norm() * (1.0 - std::pow(lo_ / s, shape_));
  }
  static double pow_or_zero(double base, double expo) {
    if (std::isinf(base)) return expo < 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(base, expo);
  }
  void build_cdf() {
    cdf_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
    cdf_.back() = 1.0;
  }

  Kind kind_;
  double lo_ = 1.0;
  double hi_ = 1.0;
  double shape_ = 0.0;
  std::vector<double> sizes_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

}  // namespace tmt
