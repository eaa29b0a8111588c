#include "reachkit/dynamics.hpp"

#include <cmath>

#include "reachkit/errors.hpp"

namespace reachkit {

bool BoxBounds::contains(const Vec2& u, double slack) const {
  for (std::size_t j = 0; j < 2; ++j) {
    if (u[j] < lo[j] - slack || u[j] > hi[j] + slack) return false;
  }
  return true;
}

Vec2 BoxBounds::magnitude() const {
  return {std::max(std::abs(lo[0]), std::abs(hi[0])), std::max(std::abs(lo[1]), std::abs(hi[1]))};
}

Vec2 BoxBounds::midpoint() const { return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}; }

Vec3 ControlAffineModel::drift(const State& s) const {
  return {v_nominal * std::cos(s.theta), v_nominal * std::sin(s.theta), 0.0};
}

Vec3 ControlAffineModel::control_column(const State& s, std::size_t j) const {
  if (j == 0) return {std::cos(s.theta), std::sin(s.theta), 0.0};
  return {0.0, 0.0, 1.0};
}

Vec3 ControlAffineModel::disturbance_column(std::size_t j) const {
  if (j == 0) return {1.0, 0.0, 0.0};
  return {0.0, 1.0, 0.0};
}

ControlAffineModel preset(Preset p) {
  ControlAffineModel m;
  m.v_nominal = 0.6;
  m.disturbance = {{-0.6, -0.6}, {0.6, 0.6}};
  switch (p) {
    case Preset::agile:
      m.name = "agile";
      m.action = {{-1.5, -1.5}, {1.5, 1.5}};
      break;
    case Preset::non_agile:
      m.name = "non_agile";
      m.action = {{-0.7, -0.7}, {0.7, 0.7}};
      break;
    case Preset::ultra_agile:
      m.name = "ultra_agile";
      m.action = {{-5.0, -5.0}, {5.0, 5.0}};
      break;
  }
  return m;
}

ControlAffineModel preset(std::string_view name) {
  if (name == "agile") return preset(Preset::agile);
  if (name == "non_agile") return preset(Preset::non_agile);
  if (name == "ultra_agile") return preset(Preset::ultra_agile);
  throw ConfigError("unknown model preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"ultra_agile", "agile", "non_agile"}; }

Vec3 flow(const ControlAffineModel& model, const State& s, const Action& a, const Disturbance& d) {
  if (!model.action.contains(a)) throw DomainError("action outside the model's action bounds");
  if (!model.disturbance.contains(d)) throw DomainError("disturbance outside the model's disturbance bounds");
  const double speed = model.v_nominal + a[0];
  return {speed * std::cos(s.theta) + d[0], speed * std::sin(s.theta) + d[1], a[1]};
}

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

HamiltonianResult hamiltonian(const ControlAffineModel& model, const State& s, const Vec3& p) {
  HamiltonianResult r;
  r.value = dot(p, model.drift(s));
  for (std::size_t j = 0; j < 2; ++j) {
    const double c = dot(p, model.control_column(s, j));
    if (c > 0.0) {
      r.a_star[j] = model.action.hi[j];
    } else if (c < 0.0) {
      r.a_star[j] = model.action.lo[j];
    } else {
      r.a_star[j] = 0.5 * (model.action.lo[j] + model.action.hi[j]);
    }
    r.value += c * r.a_star[j];
  }
  for (std::size_t j = 0; j < 2; ++j) {
    const double c = dot(p, model.disturbance_column(j));
    if (c > 0.0) {
      r.d_star[j] = model.disturbance.lo[j];
    } else if (c < 0.0) {
      r.d_star[j] = model.disturbance.hi[j];
    } else {
      r.d_star[j] = 0.5 * (model.disturbance.lo[j] + model.disturbance.hi[j]);
    }
    r.value += c * r.d_star[j];
  }
  return r;
}

Vec3 dissipation_bounds(const ControlAffineModel& model, const State& s) {
  const Vec3 f0 = model.drift(s);
  const Vec2 am = model.action.magnitude();
  const Vec2 dm = model.disturbance.magnitude();
  Vec3 alpha{};
  for (std::size_t i = 0; i < 3; ++i) {
    alpha[i] = std::abs(f0[i]);
    for (std::size_t j = 0; j < 2; ++j) {
      alpha[i] += std::abs(model.control_column(s, j)[i]) * am[j];
      alpha[i] += std::abs(model.disturbance_column(j)[i]) * dm[j];
    }
  }
  return alpha;
}

State euler_step(const ControlAffineModel& model, const State& s, const Action& a, const Disturbance& d, double dt) {
  if (!(dt > 0.0)) throw DomainError("euler_step requires dt > 0");
  const Vec3 f = flow(model, s, a, d);
  return {s.x + dt * f[0], s.y + dt * f[1], wrap_angle(s.theta + dt * f[2])};
}

}  // namespace reachkit
