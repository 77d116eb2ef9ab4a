#include "invopt/sim/billiards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace invopt::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieBand = 1e-9;
constexpr double kSpeedFloor = 1e-12;

using Vec2 = std::array<double, 2>;

double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

struct Ball {
  Vec2 pos{0.0, 0.0};
  Vec2 dir{1.0, 0.0};  // unit while moving
  double speed = 0.0;
  bool moving = false;

  Vec2 velocity() const { return {dir[0] * speed, dir[1] * speed}; }

  void set_velocity(const Vec2& v) {
    const double s = std::hypot(v[0], v[1]);
    if (s < kSpeedFloor) {
      speed = 0.0;
      moving = false;
      dir = {1.0, 0.0};
    } else {
      speed = s;
      moving = true;
      dir = {v[0] / s, v[1] / s};
    }
  }

  double stop_time(double decel) const { return moving ? speed / decel : 0.0; }

  void advance(double tau, double decel) {
    if (!moving || tau <= 0.0) return;
    const double stop = speed / decel;
    if (tau >= stop) {
      const double dist = speed * speed / (2.0 * decel);
      pos[0] += dir[0] * dist;
      pos[1] += dir[1] * dist;
      speed = 0.0;
      moving = false;
    } else {
      const double dist = (speed - 0.5 * decel * tau) * tau;
      pos[0] += dir[0] * dist;
      pos[1] += dir[1] * dist;
      speed -= decel * tau;
      if (speed < kSpeedFloor) {
        speed = 0.0;
        moving = false;
      }
    }
  }
};

// Polynomials store ascending coefficients; roots are isolated recursively
// via the critical points of the derivative, then pinned by bisection.
double poly_eval(const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * t + c[i];
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
  return d;
}

double bisect_root(const std::vector<double>& c, double lo, double hi, double flo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = poly_eval(c, mid);
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void roots_in_interval(const std::vector<double>& c, double lo, double hi,
                       std::vector<double>& out) {
  out.clear();
  if (hi <= lo || c.size() <= 1) return;
  if (c.size() == 2) {
    if (c[1] != 0.0) {
      const double r = -c[0] / c[1];
      if (r >= lo && r <= hi) out.push_back(r);
    }
    return;
  }
  std::vector<double> crit;
  roots_in_interval(poly_derivative(c), lo, hi, crit);
  std::vector<double> pts;
  pts.reserve(crit.size() + 2);
  pts.push_back(lo);
  for (double r : crit) pts.push_back(r);
  pts.push_back(hi);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (b <= a) continue;
    const double fa = poly_eval(c, a);
    const double fb = poly_eval(c, b);
    if (fa == 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))
      out.push_back(bisect_root(c, a, b, fa));
  }
  if (poly_eval(c, hi) == 0.0) out.push_back(hi);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

struct Candidate {
  double tau = kInf;
  int kind = 2;  // 0 pair, 1 wall, 2 none; part of the tie ordering
  int a = -1;
  int b = -1;  // other ball or wall index
};

bool tie_before(const Candidate& x, const Candidate& y) {
  if (x.kind != y.kind) return x.kind < y.kind;
  if (x.a != y.a) return x.a < y.a;
  return x.b < y.b;
}

class Simulation {
 public:
  Simulation(const BilliardsSpec& spec, const RealVector& shot,
             const BilliardsObserver& observer)
      : spec_(spec), observer_(observer), decel_(spec.deceleration()) {
    const auto targets = spec.resolved_targets();
    balls_.resize(targets.size() + 1);
    place_cue(shot);
    for (std::size_t i = 0; i < targets.size(); ++i) balls_[i + 1].pos = targets[i];
    check_geometry();
  }

  Trajectory run() {
    Trajectory out;
    out.system_id = "billiards";
    emit(out);
    resolve_instant_contacts();
    while (static_cast<int>(out.frames.size()) < spec_.keyframe_count && any_moving()) {
      const Candidate c = earliest_event();
      if (c.kind == 2) {
        const double horizon = max_stop_time();
        advance_all(horizon);
        emit(out);
        break;
      }
      advance_all(c.tau);
      resolve(c);
      // Coalesce follow-up contacts at the same instant into this keyframe.
      resolve_instant_contacts();
      for (Candidate next = earliest_event(); next.kind != 2 && next.tau <= 1e-12;
           next = earliest_event()) {
        advance_all(next.tau);
        resolve(next);
        resolve_instant_contacts();
      }
      emit(out);
    }
    while (static_cast<int>(out.frames.size()) < spec_.keyframe_count) {
      time_ += 1.0;
      emit(out);
    }
    return out;
  }

 private:
  void place_cue(const RealVector& shot) {
    double angle = 0.0, speed = 0.0;
    if (shot.size() == 2) {
      angle = shot[0];
      balls_[0].pos = {spec_.cue_start_x, shot[1]};
      speed = spec_.cue_speed;
    } else if (shot.size() == 4) {
      angle = shot[2];
      balls_[0].pos = {shot[1], shot[0]};
      speed = shot[3];
    } else {
      throw ConfigError("shot must have 2 or 4 parameters");
    }
    require(all_finite(shot), "shot parameters are not finite");
    require(speed >= 0.0, "cue speed must be non-negative");
    balls_[0].set_velocity({speed * std::cos(angle), speed * std::sin(angle)});
  }

  void check_geometry() const {
    const double r = spec_.ball_radius;
    for (std::size_t i = 0; i < balls_.size(); ++i) {
      const Vec2& p = balls_[i].pos;
      require(p[0] >= r && p[0] <= spec_.table_width - r && p[1] >= r &&
                  p[1] <= spec_.table_height - r,
              "ball center outside table");
      for (std::size_t j = i + 1; j < balls_.size(); ++j) {
        const double dx = p[0] - balls_[j].pos[0];
        const double dy = p[1] - balls_[j].pos[1];
        require(std::hypot(dx, dy) >= 2.0 * r, "balls overlap at launch");
      }
    }
  }

  bool any_moving() const {
    for (const Ball& b : balls_)
      if (b.moving) return true;
    return false;
  }

  double max_stop_time() const {
    double h = 0.0;
    for (const Ball& b : balls_) h = std::max(h, b.stop_time(decel_));
    return h;
  }

  void advance_all(double tau) {
    for (Ball& b : balls_) b.advance(tau, decel_);
    time_ += tau;
  }

  void emit(Trajectory& out) {
    RealVector frame;
    frame.reserve(balls_.size() * 4);
    for (const Ball& b : balls_) {
      const Vec2 v = b.velocity();
      frame.push_back(b.pos[0]);
      frame.push_back(b.pos[1]);
      frame.push_back(v[0]);
      frame.push_back(v[1]);
    }
    out.frames.push_back(std::move(frame));
    out.frame_times.push_back(time_);
  }

  // Motion is piecewise quadratic in time; pieces break where a ball stops.
  std::vector<double> segment_bounds() const {
    std::vector<double> cuts;
    for (const Ball& b : balls_)
      if (b.moving) cuts.push_back(b.stop_time(decel_));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return cuts;
  }

  Ball ball_at(int i, double tau) const {
    Ball b = balls_[i];
    b.advance(tau, decel_);
    return b;
  }

  double pair_closing_speed(const Ball& a, const Ball& b, Vec2* normal = nullptr) const {
    Vec2 n{b.pos[0] - a.pos[0], b.pos[1] - a.pos[1]};
    const double d = std::hypot(n[0], n[1]);
    if (d <= 0.0) return 0.0;
    n[0] /= d;
    n[1] /= d;
    if (normal) *normal = n;
    const Vec2 va = a.velocity();
    const Vec2 vb = b.velocity();
    return (va[0] - vb[0]) * n[0] + (va[1] - vb[1]) * n[1];
  }

  double earliest_pair_crossing(int i, int j, const std::vector<double>& cuts) const {
    if (!balls_[i].moving && !balls_[j].moving) return kInf;
    const double r2 = 2.0 * spec_.ball_radius;
    double seg_start = 0.0;
    std::vector<double> roots;
    for (std::size_t s = 0; s <= cuts.size(); ++s) {
      const double seg_end = (s < cuts.size()) ? cuts[s] : kInf;
      if (s == cuts.size() && seg_start >= max_stop_time()) break;
      const double len = seg_end - seg_start;
      if (len <= 0.0) {
        seg_start = seg_end;
        continue;
      }
      const Ball a = ball_at(i, seg_start);
      const Ball b = ball_at(j, seg_start);
      if (a.moving || b.moving) {
        const Vec2 va = a.velocity();
        const Vec2 vb = b.velocity();
        const Vec2 dp{a.pos[0] - b.pos[0], a.pos[1] - b.pos[1]};
        const Vec2 dv{va[0] - vb[0], va[1] - vb[1]};
        const Vec2 dc{-0.5 * decel_ * (a.moving * a.dir[0] - b.moving * b.dir[0]),
                      -0.5 * decel_ * (a.moving * a.dir[1] - b.moving * b.dir[1])};
        const std::vector<double> gap{dot(dp, dp) - r2 * r2, 2.0 * dot(dp, dv),
                                      dot(dv, dv) + 2.0 * dot(dp, dc), 2.0 * dot(dv, dc),
                                      dot(dc, dc)};
        roots_in_interval(gap, 0.0, std::min(len, max_stop_time() - seg_start), roots);
        for (double r : roots) {
          const double tau = seg_start + r;
          if (tau < 1e-12) continue;
          if (pair_closing_speed(ball_at(i, tau), ball_at(j, tau)) > kTieBand) return tau;
        }
      }
      seg_start = seg_end;
      if (!std::isfinite(seg_start)) break;
    }
    return kInf;
  }

  // Walls: 0 left, 1 right, 2 bottom, 3 top.
  double wall_coordinate(int wall) const {
    const double r = spec_.ball_radius;
    switch (wall) {
      case 0: return r;
      case 1: return spec_.table_width - r;
      case 2: return r;
      default: return spec_.table_height - r;
    }
  }

  double earliest_wall_crossing(int i, int wall, const std::vector<double>& cuts) const {
    if (!balls_[i].moving) return kInf;
    const int axis = wall / 2;
    // Gap is positive inside the table and crosses zero at impact.
    const double sign = (wall == 0 || wall == 2) ? 1.0 : -1.0;
    double seg_start = 0.0;
    std::vector<double> roots;
    for (std::size_t s = 0; s <= cuts.size(); ++s) {
      const double seg_end = (s < cuts.size()) ? cuts[s] : kInf;
      const double len = seg_end - seg_start;
      if (len <= 0.0) {
        seg_start = seg_end;
        continue;
      }
      const Ball b = ball_at(i, seg_start);
      if (!b.moving) break;
      const double stop = b.stop_time(decel_);
      const Vec2 v = b.velocity();
      const std::vector<double> gap{sign * (b.pos[axis] - wall_coordinate(wall)),
                                    sign * v[axis], sign * -0.5 * decel_ * b.dir[axis]};
      roots_in_interval(gap, 0.0, std::min(len, stop), roots);
      for (double r : roots) {
        const double tau = seg_start + r;
        if (tau < 1e-12) continue;
        const Ball hit = ball_at(i, tau);
        if (sign * hit.velocity()[axis] < -kTieBand) return tau;
      }
      seg_start = seg_end;
      if (!std::isfinite(seg_start)) break;
    }
    return kInf;
  }

  Candidate earliest_event() const {
    const std::vector<double> cuts = segment_bounds();
    Candidate best;
    auto consider = [&best](Candidate c) {
      if (c.tau == kInf) return;
      if (c.tau < best.tau - kTieBand) {
        best = c;
      } else if (c.tau <= best.tau + kTieBand) {
        if (tie_before(c, best)) {
          c.tau = std::min(c.tau, best.tau);
          best = c;
        } else {
          best.tau = std::min(c.tau, best.tau);
        }
      }
    };
    const int n = static_cast<int>(balls_.size());
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        consider({earliest_pair_crossing(i, j, cuts), 0, i, j});
    for (int i = 0; i < n; ++i)
      for (int w = 0; w < 4; ++w)
        consider({earliest_wall_crossing(i, w, cuts), 1, i, w});
    return best;
  }

  void resolve_pair(int i, int j) {
    Ball& a = balls_[i];
    Ball& b = balls_[j];
    Vec2 n;
    const double closing = pair_closing_speed(a, b, &n);
    if (closing <= 0.0) return;
    const Vec2 va = a.velocity();
    const Vec2 vb = b.velocity();
    const double impulse = 0.5 * (1.0 + spec_.restitution) * closing;
    const Vec2 va2{va[0] - impulse * n[0], va[1] - impulse * n[1]};
    const Vec2 vb2{vb[0] + impulse * n[0], vb[1] + impulse * n[1]};
    a.set_velocity(va2);
    b.set_velocity(vb2);
    if (observer_) {
      BilliardsEvent ev;
      ev.kind = BilliardsEvent::Kind::ball_ball;
      ev.time = time_;
      ev.ball_a = i;
      ev.ball_b = j;
      ev.normal = n;
      ev.position_a = a.pos;
      ev.position_b = b.pos;
      ev.pre_velocity_a = va;
      ev.post_velocity_a = va2;
      ev.pre_velocity_b = vb;
      ev.post_velocity_b = vb2;
      observer_(ev);
    }
  }

  void resolve_wall(int i, int wall) {
    Ball& b = balls_[i];
    const int axis = wall / 2;
    const Vec2 pre = b.velocity();
    Vec2 post = pre;
    post[axis] = -spec_.restitution * pre[axis];
    b.set_velocity(post);
    if (observer_) {
      BilliardsEvent ev;
      ev.kind = BilliardsEvent::Kind::ball_wall;
      ev.time = time_;
      ev.ball_a = i;
      ev.wall = wall;
      ev.normal = {0.0, 0.0};
      ev.normal[axis] = (wall == 0 || wall == 2) ? 1.0 : -1.0;
      ev.position_a = b.pos;
      ev.position_b = {0.0, 0.0};
      ev.pre_velocity_a = pre;
      ev.post_velocity_a = b.velocity();
      ev.pre_velocity_b = {0.0, 0.0};
      ev.post_velocity_b = {0.0, 0.0};
      observer_(ev);
    }
  }

  void resolve(const Candidate& c) {
    if (c.kind == 0)
      resolve_pair(c.a, c.b);
    else
      resolve_wall(c.a, c.b);
  }

  // Contacts already touching at the current instant, e.g. the second and
  // third rack balls right after the break. Resolved one at a time in index
  // order until no pair keeps approaching.
  void resolve_instant_contacts() {
    const double r2 = 2.0 * spec_.ball_radius;
    const int n = static_cast<int>(balls_.size());
    for (int round = 0;; ++round) {
      if (round > 16 * n)
        throw NumericError("billiards contact resolution did not settle");
      bool acted = false;
      for (int i = 0; i < n && !acted; ++i) {
        for (int j = i + 1; j < n && !acted; ++j) {
          const double dx = balls_[j].pos[0] - balls_[i].pos[0];
          const double dy = balls_[j].pos[1] - balls_[i].pos[1];
          if (std::hypot(dx, dy) > r2 + kTieBand) continue;
          if (pair_closing_speed(balls_[i], balls_[j]) > kTieBand) {
            resolve_pair(i, j);
            acted = true;
          }
        }
      }
      for (int i = 0; i < n && !acted; ++i) {
        if (!balls_[i].moving) continue;
        for (int w = 0; w < 4; ++w) {
          const int axis = w / 2;
          const double sign = (w == 0 || w == 2) ? 1.0 : -1.0;
          const double gap = sign * (balls_[i].pos[axis] - wall_coordinate(w));
          if (std::abs(gap) > kTieBand) continue;
          if (sign * balls_[i].velocity()[axis] < -kTieBand) {
            resolve_wall(i, w);
            acted = true;
            break;
          }
        }
      }
      if (!acted) return;
    }
  }

  const BilliardsSpec& spec_;
  const BilliardsObserver& observer_;
  double decel_;
  double time_ = 0.0;
  std::vector<Ball> balls_;
};

}  // namespace

void BilliardsSpec::validate() const {
  require(table_width > 0.0 && table_height > 0.0, "table dimensions must be positive");
  require(ball_radius > 0.0, "ball radius must be positive");
  require(2.0 * ball_radius < std::min(table_width, table_height),
          "ball does not fit the table");
  require(friction_mu > 0.0 && gravity > 0.0, "friction and gravity must be positive");
  require(restitution >= 0.0 && restitution <= 1.0, "restitution must be in [0, 1]");
  require(keyframe_count >= 2, "need at least 2 keyframes");
  require(cue_speed >= 0.0, "cue speed must be non-negative");
}

std::vector<std::array<double, 2>> BilliardsSpec::resolved_targets() const {
  if (!target_positions.empty()) return target_positions;
  return rack_triangle(1.5, 0.5, ball_radius);
}

std::vector<std::array<double, 2>> rack_triangle(double cx, double cy, double radius) {
  const double d = 2.0 * radius + 5e-4;
  const double dx = d * std::sqrt(3.0) / 2.0;
  return {{cx, cy}, {cx + dx, cy - 0.5 * d}, {cx + dx, cy + 0.5 * d}};
}

Trajectory billiards_simulate(const BilliardsSpec& spec, const RealVector& shot,
                              const BilliardsObserver& observer) {
  spec.validate();
  Simulation sim(spec, shot, observer);
  return sim.run();
}

}  // namespace invopt::sim
