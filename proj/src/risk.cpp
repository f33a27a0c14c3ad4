#include "hilreach/risk.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hilreach/errors.hpp"

namespace hilreach {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
// Standardized half-width beyond which the outer integrand is negligible.
constexpr double kClip = 12.0;

// P(lo <= X <= hi) for X ~ N(mu, sd^2), sd >= 0.
double intervalMass(double lo, double hi, double mu, double sd) {
  if (hi < lo) return 0.0;
  if (!(sd > 0.0)) return (mu >= lo && mu <= hi) ? 1.0 : 0.0;
  const double a = (lo - mu) / sd;
  const double b = (hi - mu) / sd;
  if (a > 0.0) return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
}

}  // namespace

void DangerZone::validate() const {
  if (!(xMin < xMax) || !(yMin < yMax)) throw ConfigError("danger zone must have xMin < xMax and yMin < yMax");
}

double rectangleProbability(const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
                            const DangerZone& zone) {
  zone.validate();
  const double varX = cov(0, 0);
  const double varY = cov(1, 1);
  const double cxy = 0.5 * (cov(0, 1) + cov(1, 0));
  const double mx = mean[0];
  const double my = mean[1];

  if (!(varX > 0.0)) {
    return intervalMass(zone.xMin, zone.xMax, mx, 0.0) *
           intervalMass(zone.yMin, zone.yMax, my, varY > 0.0 ? std::sqrt(varY) : 0.0);
  }
  const double sx = std::sqrt(varX);
  if (!(varY > 0.0)) {
    return intervalMass(zone.yMin, zone.yMax, my, 0.0) * intervalMass(zone.xMin, zone.xMax, mx, sx);
  }

  // Y | X = x ~ N(my + slope (x - mx), condVar).
  const double slope = cxy / varX;
  const double condVar = varY - cxy * slope;
  if (!(condVar > 1e-14 * varY)) {
    // Mass sits on the line y = my + slope (x - mx).
    if (slope == 0.0) {
      return intervalMass(zone.yMin, zone.yMax, my, 0.0) *
             intervalMass(zone.xMin, zone.xMax, mx, sx);
    }
    double x1 = mx + (zone.yMin - my) / slope;
    double x2 = mx + (zone.yMax - my) / slope;
    if (x1 > x2) std::swap(x1, x2);
    return intervalMass(std::max(zone.xMin, x1), std::min(zone.xMax, x2), mx, sx);
  }
  const double sCond = std::sqrt(condVar);

  // Integrate over z = (x - mx) / sx.
  const double za = std::max((zone.xMin - mx) / sx, -kClip);
  const double zb = std::min((zone.xMax - mx) / sx, kClip);
  if (!(za < zb)) return 0.0;

  auto integrand = [&](double z) {
    const double centre = my + slope * sx * z;
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) * intervalMass(zone.yMin, zone.yMax, centre, sCond);
  };

  // Split where the conditional mean crosses the zone's y-edges; the inner
  // mass switches between 0 and 1 there.
  std::vector<double> cuts{za, zb};
  if (slope != 0.0) {
    for (double y : {zone.yMin, zone.yMax}) {
      const double z = (y - my) / (slope * sx);
      if (z > za && z < zb) cuts.push_back(z);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    double error = 0.0;
    total += Quadrature::integrate(integrand, cuts[i], cuts[i + 1], 20, 1e-12, &error);
  }
  return std::clamp(total, 0.0, 1.0);
}

double collisionProbability(const Belief& belief, const DangerZone& zone) {
  zone.validate();
  if (belief.mixture.dimension() < 2) throw DataError("collisionProbability: no position block");
  double p = 0.0;
  for (const auto& c : belief.mixture) {
    if (c.weight <= 0.0) continue;
    p += c.weight * rectangleProbability(c.mean.head<2>(), c.covariance.topLeftCorner<2, 2>(), zone);
  }
  return std::clamp(p, 0.0, 1.0);
}

std::vector<RiskPoint> riskProfile(const BeliefTrajectory& trajectory, const DangerZone& zone) {
  std::vector<RiskPoint> out;
  out.reserve(trajectory.steps.size());
  for (const auto& b : trajectory.steps) out.push_back({b.time, collisionProbability(b, zone)});
  return out;
}

}  // namespace hilreach
