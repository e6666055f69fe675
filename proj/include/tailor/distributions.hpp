#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailor/rng.hpp"

namespace tailor {

inline constexpr double kTailFloor = 1e-300;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when a delay-trace file cannot be ingested.
class TraceParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Moments {
  double mean;
  double second;  // E[Y^2]
};

/// A(theta) = E[min(Y,theta)] = int_0^theta tail, J1(theta) = int_0^theta t*tail.
struct PartialExpectations {
  double A;
  double J1;
};

enum class DistKind { Exponential, Lomax, LogNormal, Tabulated };

namespace detail {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Empirical trace: distinct sorted values with cumulative counts; the CDF
/// ramps linearly between distinct values and jumps where values repeat.
struct TabulatedData {
  std::vector<double> knot;    // distinct sorted values
  std::vector<double> cum;     // cumulative probability at each knot
  std::vector<double> a_pref;  // A at each knot
  std::vector<double> j1_pref; // J1 at each knot
  double mean = 0.0;
  double second = 0.0;
  double iqr = 0.0;

  static std::shared_ptr<const TabulatedData> build(std::vector<double> samples) {
    if (samples.size() < 100)
      throw std::invalid_argument("tabulated distribution needs at least 100 samples");
    std::sort(samples.begin(), samples.end());
    if (samples.front() < 0.0)
      throw std::invalid_argument("tabulated samples must be nonnegative");
    auto d = std::make_shared<TabulatedData>();
    const double n = static_cast<double>(samples.size());
    double s1 = 0.0, s2 = 0.0;
    for (double x : samples) {
      s1 += x;
      s2 += x * x;
    }
    d->mean = s1 / n;
    d->second = s2 / n;
    std::size_t i = 0, count = 0;
    while (i < samples.size()) {
      std::size_t j = i;
      while (j < samples.size() && samples[j] == samples[i]) ++j;
      count += j - i;
      d->knot.push_back(samples[i]);
      d->cum.push_back(static_cast<double>(count) / n);
      i = j;
    }
    d->cum.back() = 1.0;
    // prefix integrals of tail and t*tail; tail is linear between knots
    d->a_pref.resize(d->knot.size());
    d->j1_pref.resize(d->knot.size());
    double a = d->knot.front();          // tail == 1 on [0, knot_0]
    double j1 = 0.5 * a * a;
    d->a_pref[0] = a;
    d->j1_pref[0] = j1;
    for (std::size_t k = 1; k < d->knot.size(); ++k) {
      const double t0 = d->knot[k - 1], t1 = d->knot[k];
      const double f0 = 1.0 - d->cum[k - 1], f1 = 1.0 - d->cum[k];
      const double q = (f1 - f0) / (t1 - t0);
      const double p = f0 - q * t0;  // tail(t) = p + q t on [t0, t1]
      a += 0.5 * (f0 + f1) * (t1 - t0);
      j1 += p * 0.5 * (t1 * t1 - t0 * t0) + q * (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
      d->a_pref[k] = a;
      d->j1_pref[k] = j1;
    }
    const auto quant = [&](double u) {
      const auto it = std::lower_bound(d->cum.begin(), d->cum.end(), u);
      if (it == d->cum.begin()) return d->knot.front();
      const std::size_t k = static_cast<std::size_t>(it - d->cum.begin());
      if (k >= d->knot.size()) return d->knot.back();
      const double c0 = d->cum[k - 1], c1 = d->cum[k];
      return d->knot[k - 1] + (u - c0) / (c1 - c0) * (d->knot[k] - d->knot[k - 1]);
    };
    d->iqr = quant(0.75) - quant(0.25);
    return d;
  }

  double cdf(double t) const {
    if (t < knot.front()) return 0.0;
    if (t >= knot.back()) return 1.0;
    const auto it = std::upper_bound(knot.begin(), knot.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - knot.begin());
    const double t0 = knot[k - 1], t1 = knot[k];
    return cum[k - 1] + (t - t0) / (t1 - t0) * (cum[k] - cum[k - 1]);
  }

  double density(double t) const {
    if (t <= knot.front() || t >= knot.back()) return 0.0;
    const auto it = std::upper_bound(knot.begin(), knot.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - knot.begin());
    return (cum[k] - cum[k - 1]) / (knot[k] - knot[k - 1]);
  }

  PartialExpectations partials(double theta) const {
    if (theta <= 0.0) return {0.0, 0.0};
    if (theta <= knot.front()) return {theta, 0.5 * theta * theta};
    if (theta >= knot.back()) return {a_pref.back(), j1_pref.back()};
    const auto it = std::upper_bound(knot.begin(), knot.end(), theta);
    const std::size_t k = static_cast<std::size_t>(it - knot.begin());
    const double t0 = knot[k - 1], t1 = knot[k];
    const double f0 = 1.0 - cum[k - 1], f1 = 1.0 - cum[k];
    const double q = (f1 - f0) / (t1 - t0);
    const double p = f0 - q * t0;
    const double ft = p + q * theta;
    const double a = a_pref[k - 1] + 0.5 * (f0 + ft) * (theta - t0);
    const double j1 = j1_pref[k - 1] + p * 0.5 * (theta * theta - t0 * t0) +
                      q * (theta * theta * theta - t0 * t0 * t0) / 3.0;
    return {a, j1};
  }

  double quantile(double u) const {
    if (u <= cum.front()) return knot.front();
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    std::size_t k = static_cast<std::size_t>(it - cum.begin());
    if (k >= knot.size()) return knot.back();
    const double c0 = cum[k - 1], c1 = cum[k];
    return knot[k - 1] + (u - c0) / (c1 - c0) * (knot[k] - knot[k - 1]);
  }
};

}  // namespace detail

/// Service-time model Y. Immutable after construction; values are cheap to
/// copy and safe to share across threads.
class ServiceDistribution {
 public:
  static ServiceDistribution exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    ServiceDistribution d(DistKind::Exponential);
    d.p1_ = rate;
    return d;
  }

  /// Lomax (Pareto type II) with scale sigma and shape alpha. Shapes <= 2 are
  /// rejected: the solver's far-field closure needs a finite second moment.
  static ServiceDistribution lomax(double scale, double shape) {
    if (!(scale > 0.0)) throw std::invalid_argument("lomax: scale must be > 0");
    if (!(shape > 2.0))
      throw std::invalid_argument("lomax: shape must be > 2 (finite E[Y^2])");
    ServiceDistribution d(DistKind::Lomax);
    d.p1_ = scale;
    d.p2_ = shape;
    return d;
  }

  static ServiceDistribution log_normal(double mu, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("log_normal: sigma2 must be > 0");
    ServiceDistribution d(DistKind::LogNormal);
    d.p1_ = mu;
    d.p2_ = std::sqrt(sigma2);
    return d;
  }

  static ServiceDistribution tabulated(std::vector<double> samples) {
    ServiceDistribution d(DistKind::Tabulated);
    d.tab_ = detail::TabulatedData::build(std::move(samples));
    return d;
  }

  /// Ingests a delay trace: one nonnegative decimal per line, '#' comments and
  /// blank lines ignored. At least 100 values required.
  static ServiceDistribution from_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceParseError("cannot open trace file: " + path);
    std::vector<double> vals;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::size_t b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      std::size_t e = line.find_last_not_of(" \t\r");
      std::string tok = line.substr(b, e - b + 1);
      if (tok[0] == '#') continue;
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        throw TraceParseError("trace line " + std::to_string(lineno) +
                              ": not a number: '" + tok + "'");
      }
      if (used != tok.size())
        throw TraceParseError("trace line " + std::to_string(lineno) +
                              ": trailing garbage: '" + tok + "'");
      if (!std::isfinite(v))
        throw TraceParseError("trace line " + std::to_string(lineno) +
                              ": value not finite");
      if (v < 0.0)
        throw TraceParseError("trace line " + std::to_string(lineno) +
                              ": negative value");
      vals.push_back(v);
    }
    if (vals.size() < 100)
      throw TraceParseError("trace has too few samples (" +
                            std::to_string(vals.size()) + " < 100)");
    return tabulated(std::move(vals));
  }

  DistKind kind() const { return kind_; }

  double cdf(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
      case DistKind::Exponential:
        return -std::expm1(-p1_ * t);
      case DistKind::Lomax:
        return 1.0 - std::pow(p1_ / (p1_ + t), p2_);
      case DistKind::LogNormal:
        return 0.5 * std::erfc(-(std::log(t) - p1_) / (p2_ * std::numbers::sqrt2));
      case DistKind::Tabulated:
        return tab_->cdf(t);
    }
    return 0.0;
  }

  /// Survival function. Computed directly (never as 1 - cdf) so that tail
  /// probabilities stay accurate down to ~1e-300.
  double tail(double t) const {
    if (t <= 0.0) return 1.0;
    switch (kind_) {
      case DistKind::Exponential:
        return std::exp(-p1_ * t);
      case DistKind::Lomax:
        return std::pow(p1_ / (p1_ + t), p2_);
      case DistKind::LogNormal:
        return 0.5 * std::erfc((std::log(t) - p1_) / (p2_ * std::numbers::sqrt2));
      case DistKind::Tabulated: {
        if (t >= tab_->knot.back()) return 0.0;
        return 1.0 - tab_->cdf(t);
      }
    }
    return 0.0;
  }

  double density(double t) const {
    if (t < 0.0) return 0.0;
    switch (kind_) {
      case DistKind::Exponential:
        return p1_ * std::exp(-p1_ * t);
      case DistKind::Lomax:
        return (p2_ / p1_) * std::pow(p1_ / (p1_ + t), p2_ + 1.0);
      case DistKind::LogNormal: {
        if (t <= 0.0) return 0.0;
        const double z = (std::log(t) - p1_) / p2_;
        return std::exp(-0.5 * z * z) /
               (t * p2_ * std::sqrt(2.0 * std::numbers::pi));
      }
      case DistKind::Tabulated:
        return tab_->density(t);
    }
    return 0.0;
  }

  /// Instantaneous conditional completion rate at service age b.
  double hazard(double b) const {
    const double fb = tail(b);
    if (fb <= kTailFloor)
      throw std::domain_error("hazard: tail(b) below numeric floor");
    if (kind_ == DistKind::Tabulated) return tabulated_hazard(b, fb);
    return density(b) / fb;
  }

  /// CDF of the residual service time at age b: P(Y - b <= t | Y >= b).
  double residual_cdf(double b, double t) const {
    if (t < 0.0) throw std::invalid_argument("residual_cdf: t must be >= 0");
    const double fb = tail(b);
    if (fb <= kTailFloor)
      throw std::domain_error("residual_cdf: tail(b) below numeric floor");
    const double r = (cdf(b + t) - cdf(b)) / fb;
    return std::clamp(r, 0.0, 1.0);
  }

  Moments moments() const {
    switch (kind_) {
      case DistKind::Exponential:
        return {1.0 / p1_, 2.0 / (p1_ * p1_)};
      case DistKind::Lomax: {
        const double s = p1_, a = p2_;
        return {s / (a - 1.0), 2.0 * s * s / ((a - 1.0) * (a - 2.0))};
      }
      case DistKind::LogNormal: {
        const double v = p2_ * p2_;
        return {std::exp(p1_ + 0.5 * v), std::exp(2.0 * p1_ + 2.0 * v)};
      }
      case DistKind::Tabulated:
        return {tab_->mean, tab_->second};
    }
    return {0.0, 0.0};
  }

  /// A(theta) and J1(theta); theta = inf gives (E[Y], E[Y^2]/2).
  PartialExpectations partial_expectations(double theta) const {
    if (theta < 0.0)
      throw std::invalid_argument("partial_expectations: theta must be >= 0");
    if (std::isinf(theta)) {
      const Moments m = moments();
      return {m.mean, 0.5 * m.second};
    }
    if (theta == 0.0) return {0.0, 0.0};
    switch (kind_) {
      case DistKind::Exponential: {
        const double l = p1_, e = std::exp(-l * theta);
        return {(1.0 - e) / l, (1.0 - (1.0 + l * theta) * e) / (l * l)};
      }
      case DistKind::Lomax: {
        const double s = p1_, a = p2_, u = s + theta;
        const double A = s / (a - 1.0) * (1.0 - std::pow(s / u, a - 1.0));
        const double pa = std::pow(s, a);
        const auto at = [&](double w) {
          return pa * (std::pow(w, 2.0 - a) / (2.0 - a) -
                       s * std::pow(w, 1.0 - a) / (1.0 - a));
        };
        return {A, at(u) - at(s)};
      }
      case DistKind::LogNormal: {
        const double mu = p1_, sg = p2_, lt = std::log(theta);
        const double fb = tail(theta);
        const double s1 =
            std::exp(mu + 0.5 * sg * sg) * detail::normal_cdf((lt - mu - sg * sg) / sg);
        const double s2 = std::exp(2.0 * mu + 2.0 * sg * sg) *
                          detail::normal_cdf((lt - mu - 2.0 * sg * sg) / sg);
        return {s1 + theta * fb, 0.5 * (s2 + theta * theta * fb)};
      }
      case DistKind::Tabulated:
        return tab_->partials(theta);
    }
    return {0.0, 0.0};
  }

  /// E[Y 1{Y<=theta}] via the identity A(theta) - theta*tail(theta).
  double partial_first(double theta) const {
    if (std::isinf(theta)) return moments().mean;
    const auto pe = partial_expectations(theta);
    return pe.A - theta * tail(theta);
  }

  /// E[Y^2 1{Y<=theta}] via 2*J1(theta) - theta^2*tail(theta).
  double partial_second(double theta) const {
    if (std::isinf(theta)) return moments().second;
    const auto pe = partial_expectations(theta);
    return 2.0 * pe.J1 - theta * theta * tail(theta);
  }

  /// Inverse CDF for the families sampled by inversion.
  double quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("quantile: u in [0,1)");
    switch (kind_) {
      case DistKind::Exponential:
        return -std::log1p(-u) / p1_;
      case DistKind::Lomax:
        return p1_ * (std::pow(1.0 - u, -1.0 / p2_) - 1.0);
      case DistKind::LogNormal: {
        // not on the sampling path; bisection on the CDF
        if (u == 0.0) return 0.0;
        double lo = 0.0, hi = std::exp(p1_);
        while (cdf(hi) < u) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          (cdf(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
      }
      case DistKind::Tabulated:
        return tab_->quantile(u);
    }
    return 0.0;
  }

  /// One draw of Y; deterministic given the stream state.
  double sample(RngStream& rng) const {
    if (kind_ == DistKind::LogNormal)
      return std::exp(p1_ + p2_ * rng.next_normal());
    return quantile(rng.next_unit());
  }

  /// Smallest t with tail(t) <= eps.
  double tail_quantile(double eps) const {
    if (!(eps > 0.0 && eps < 1.0))
      throw std::invalid_argument("tail_quantile: eps in (0,1)");
    switch (kind_) {
      case DistKind::Exponential:
        return -std::log(eps) / p1_;
      case DistKind::Lomax:
        return p1_ * (std::pow(eps, -1.0 / p2_) - 1.0);
      default: {
        double lo = 0.0, hi = 1.0;
        while (tail(hi) > eps) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          (tail(mid) > eps ? lo : hi) = mid;
        }
        return hi;
      }
    }
  }

 private:
  explicit ServiceDistribution(DistKind k) : kind_(k) {}

  double tabulated_hazard(double b, double tail_b) const {
    // smoothed log-tail slope; raw empirical hazard is too noisy to report
    double h = tab_->iqr / 10.0;
    if (h <= 0.0) h = std::max(1e-6, 1e-3 * tab_->knot.back());
    const double top = tab_->knot.back();
    const double bl = std::max(0.0, b - 0.5 * h);
    double br = b + 0.5 * h;
    if (br >= top) br = b + 0.49 * (top - b);
    if (!(br > bl)) throw std::domain_error("hazard: at the edge of trace support");
    const double tr = tail(br);
    if (tr <= kTailFloor) throw std::domain_error("hazard: window leaves trace support");
    return (std::log(tail(bl)) - std::log(tr)) / (br - bl);
  }

  DistKind kind_;
  double p1_ = 0.0;  // rate | scale | mu
  double p2_ = 0.0;  // shape | sigma
  std::shared_ptr<const detail::TabulatedData> tab_;
};

}  // namespace tailor
